#include "aipw/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace aipw {

namespace {

struct RawRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

// Reads one RFC-4180 record; returns false at end of input.
bool read_record(std::istream& in, RawRecord& rec, std::size_t& line) {
    rec.fields.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    rec.line = ++line;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (;;) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) {
            if (quoted) {
                throw Error(ErrorKind::Parse, "csv: unterminated quoted field starting on line " +
                                                  std::to_string(rec.line));
            }
            break;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && field.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (ch == ',') {
            rec.fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (ch == '\n') {
            break;
        } else if (ch == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else {
            field.push_back(ch);
        }
    }
    rec.fields.push_back(std::move(field));
    return true;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

struct RenderedRow {
    std::string bias, se, rb, cr;
};

RenderedRow render_row(const CellMetrics& m) {
    RenderedRow r;
    if (m.failed) {
        r.bias = r.se = "-";
        if (m.method == Method::PROP) r.rb = r.cr = "-";
        return r;
    }
    r.bias = fixed(m.bias);
    r.se = fixed(m.se);
    if (m.rb) r.rb = std::isfinite(*m.rb) ? fixed(*m.rb) : "-";
    if (m.cr) r.cr = fixed(*m.cr);
    return r;
}

// Rendered numbers go out as JSON numbers with the same rounding; "-" stays a string.
nlohmann::ordered_json json_cell(const std::string& rendered) {
    if (rendered.empty()) return nullptr;
    if (rendered == "-") return rendered;
    return std::stod(rendered);
}

} // namespace

Index CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return static_cast<Index>(j);
    }
    throw Error(ErrorKind::Usage, "csv: no column named '" + name + "'");
}

CsvTable parse_csv(std::istream& in) {
    CsvTable table;
    std::size_t line = 0;
    RawRecord rec;
    if (!read_record(in, rec, line)) {
        throw Error(ErrorKind::Parse, "csv: empty input (a header row is required)");
    }
    for (auto& h : rec.fields) table.header.push_back(trim(h));
    if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        table.header[0].erase(0, 3);
    }
    const std::size_t width = table.header.size();

    std::vector<std::vector<double>> rows;
    while (read_record(in, rec, line)) {
        if (rec.fields.size() == 1 && trim(rec.fields[0]).empty()) continue;
        if (rec.fields.size() != width) {
            throw Error(ErrorKind::Parse, "csv: line " + std::to_string(rec.line) + " has " +
                                              std::to_string(rec.fields.size()) + " fields, header has " +
                                              std::to_string(width));
        }
        std::vector<double> row(width);
        for (std::size_t j = 0; j < width; ++j) {
            const std::string cell = trim(rec.fields[j]);
            if (cell.empty() || cell == "NA") {
                row[j] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = first + cell.size();
            if (*first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
                throw Error(ErrorKind::Parse, "csv: non-numeric value '" + cell + "' at row " +
                                                  std::to_string(rows.size() + 1) + ", column " +
                                                  std::to_string(j + 1) + " ('" + table.header[j] + "')");
            }
            row[j] = v;
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Usage, "cannot open input file '" + path + "'");
    }
    return parse_csv(in);
}

IncompleteDataset dataset_from_table(const CsvTable& table, const std::string& response_col,
                                     std::vector<std::string>* covariate_names) {
    const Index target = table.column(response_col);
    const Index n = table.values.rows();
    const Index p = table.values.cols() - 1;
    if (n == 0) {
        throw Error(ErrorKind::DegenerateInput, "csv: no data rows");
    }
    if (p < 1) {
        throw Error(ErrorKind::DegenerateInput, "csv: no covariate columns besides the response");
    }
    IncompleteDataset d;
    d.x.resize(n, p);
    d.y = Vector::Constant(n, IncompleteDataset::kMissing);
    d.delta = Vector::Zero(n);
    if (covariate_names) covariate_names->clear();
    Index out = 0;
    for (Index j = 0; j < table.values.cols(); ++j) {
        if (j == target) continue;
        if (covariate_names) covariate_names->push_back(table.header[static_cast<std::size_t>(j)]);
        for (Index i = 0; i < n; ++i) {
            const double v = table.values(i, j);
            if (std::isnan(v)) {
                throw Error(ErrorKind::Parse, "csv: missing covariate at row " + std::to_string(i + 1) +
                                                  ", column " + std::to_string(j + 1) + " ('" +
                                                  table.header[static_cast<std::size_t>(j)] + "')");
            }
            d.x(i, out) = v;
        }
        ++out;
    }
    for (Index i = 0; i < n; ++i) {
        const double v = table.values(i, target);
        if (!std::isnan(v)) {
            d.y(i) = v;
            d.delta(i) = 1.0;
        }
    }
    if (d.delta.sum() == 0.0) {
        throw Error(ErrorKind::Domain, "csv: response column '" + response_col + "' is entirely missing");
    }
    return d;
}

TableFormat parse_format(const std::string& tag) {
    if (tag == "csv") return TableFormat::Csv;
    if (tag == "md" || tag == "markdown") return TableFormat::Markdown;
    if (tag == "json") return TableFormat::Json;
    throw Error(ErrorKind::Usage, "unknown format '" + tag + "' (expected csv, md or json)");
}

std::string render_metrics(const MetricsTable& table, TableFormat format) {
    std::ostringstream os;
    switch (format) {
        case TableFormat::Csv: {
            os << "design,size,n,p,estimator,bias,se,rb,cr,converged,failures\n";
            for (const auto& m : table.rows) {
                const RenderedRow r = render_row(m);
                os << m.design << ',' << m.size << ',' << m.n << ',' << m.p << ',' << to_string(m.method) << ','
                   << r.bias << ',' << r.se << ',' << r.rb << ',' << r.cr << ',' << m.converged << ','
                   << m.failures << '\n';
            }
            break;
        }
        case TableFormat::Markdown: {
            os << "Monte Carlo replicates: " << table.replicates << ", base seed: " << table.base_seed
               << ", raw units\n\n";
            os << "| design | size | n | p | estimator | bias | se | rb | cr | converged | failures |\n";
            os << "|---|---|---|---|---|---|---|---|---|---|---|\n";
            for (const auto& m : table.rows) {
                const RenderedRow r = render_row(m);
                os << "| " << m.design << " | " << m.size << " | " << m.n << " | " << m.p << " | "
                   << to_string(m.method) << " | " << r.bias << " | " << r.se << " | " << r.rb << " | " << r.cr
                   << " | " << m.converged << " | " << m.failures << " |\n";
            }
            break;
        }
        case TableFormat::Json: {
            nlohmann::ordered_json doc;
            doc["replicates"] = table.replicates;
            doc["base_seed"] = table.base_seed;
            doc["rows"] = nlohmann::ordered_json::array();
            for (const auto& m : table.rows) {
                const RenderedRow r = render_row(m);
                nlohmann::ordered_json row;
                row["design"] = m.design;
                row["size"] = m.size;
                row["n"] = m.n;
                row["p"] = m.p;
                row["estimator"] = to_string(m.method);
                row["theta"] = json_cell(fixed(m.theta, 6));
                row["bias"] = json_cell(r.bias);
                row["se"] = json_cell(r.se);
                row["rb"] = json_cell(r.rb);
                row["cr"] = json_cell(r.cr);
                row["converged"] = m.converged;
                row["failures"] = m.failures;
                doc["rows"].push_back(std::move(row));
            }
            os << doc.dump(2) << '\n';
            break;
        }
    }
    return os.str();
}

} // namespace aipw
