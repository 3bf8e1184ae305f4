#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aipw/harness.hpp"

namespace aipw {

/// Numeric table read from CSV. Missing cells ("" or "NA") are NaN.
struct CsvTable {
    std::vector<std::string> header;
    Matrix values;

    [[nodiscard]] Index column(const std::string& name) const;
};

/// Parses RFC-4180 style text with a mandatory header row. Quoted fields may
/// contain commas, doubled quotes and line breaks.
[[nodiscard]] CsvTable parse_csv(std::istream& in);
[[nodiscard]] CsvTable read_csv(const std::string& path);

/// Splits a table into covariates and a response column. Missing response
/// entries become delta = 0; a missing covariate is a parse error.
[[nodiscard]] IncompleteDataset dataset_from_table(const CsvTable& table, const std::string& response_col,
                                                   std::vector<std::string>* covariate_names = nullptr);

enum class TableFormat { Csv, Markdown, Json };

[[nodiscard]] TableFormat parse_format(const std::string& tag);

/// Fixed-precision rendering; failed cells print "-".
[[nodiscard]] std::string render_metrics(const MetricsTable& table, TableFormat format);

} // namespace aipw
