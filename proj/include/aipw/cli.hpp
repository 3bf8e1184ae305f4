#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aipw/harness.hpp"
#include "aipw/table_io.hpp"

namespace aipw {

struct RunConfig {
    std::string subcommand;

    // simulate
    std::vector<std::string> designs{"C1", "C2", "C3", "C4"};
    std::vector<std::string> sizes{"I", "II", "III", "IV"};
    int replicates = 100;
    bool full = false;
    std::vector<std::string> estimators{"CC", "PS", "DI", "NAIPW", "PROP"};
    int workers = 1;
    bool raw_interval = false;
    bool analytic_theta = false;

    // estimate / select
    std::string input;
    std::string response_col;
    bool studentize = false;
    bool clamp_propensity = false;

    std::optional<std::uint64_t> seed;
    double ridge = 0.001;
    /// "auto" or a non-negative number.
    std::string lambda2 = "auto";
    int splits = 20;
    int grid_size = 50;
    std::string format = "csv";
    std::string out;
};

/// Monte Carlo table for the configured grid, rendered in config.format.
[[nodiscard]] std::string cmd_simulate(const RunConfig& config);

/// JSON report of the sparse AIPW estimate on a data set.
[[nodiscard]] std::string estimate_report(const IncompleteDataset& data, const std::vector<std::string>& names,
                                          const RunConfig& config);
[[nodiscard]] std::string cmd_estimate(const RunConfig& config);

/// JSON report of the gradient norms and active set on the complete cases.
[[nodiscard]] std::string select_report(const IncompleteDataset& data, const std::vector<std::string>& names,
                                        const RunConfig& config);
[[nodiscard]] std::string cmd_select(const RunConfig& config);

/// Studentizes covariates over all rows and the response over its observed entries.
void studentize_dataset(IncompleteDataset& data);

/// Parses arguments (without the program name), runs the subcommand and
/// returns the process exit code. Reports go to --out or `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace aipw
