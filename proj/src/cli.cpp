#include "aipw/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aipw/rng.hpp"

namespace aipw {

namespace {

using Json = nlohmann::ordered_json;

std::uint64_t require_seed(const RunConfig& config) {
    if (!config.seed) {
        throw Error(ErrorKind::Usage, config.subcommand + ": --seed is required");
    }
    return *config.seed;
}

KernelConfig kernel_config(const RunConfig& config) {
    KernelConfig k{std::nullopt, config.ridge};
    k.validate();
    return k;
}

ThresholdSearchConfig search_config(const RunConfig& config, std::uint64_t seed) {
    ThresholdSearchConfig s;
    s.splits = config.splits;
    s.grid_size = config.grid_size;
    s.seed = derive_key({seed, static_cast<std::uint64_t>(Purpose::Split)});
    s.validate();
    return s;
}

LassoSettings lasso_settings(const RunConfig& config) {
    LassoSettings l;
    if (config.lambda2 != "auto") {
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(config.lambda2, &used);
            if (used != config.lambda2.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw Error(ErrorKind::Usage, "--lambda2 must be 'auto' or a number, got '" + config.lambda2 + "'");
        }
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorKind::Usage, "--lambda2 must be non-negative");
        }
        l.lambda2 = v;
    }
    return l;
}

Json index_list(const std::vector<Index>& idx) {
    Json a = Json::array();
    for (Index i : idx) a.push_back(i + 1);
    return a;
}

Json name_list(const std::vector<Index>& idx, const std::vector<std::string>& names) {
    Json a = Json::array();
    for (Index i : idx) a.push_back(names.at(static_cast<std::size_t>(i)));
    return a;
}

IncompleteDataset load_input(const RunConfig& config, std::vector<std::string>& names) {
    if (config.input.empty()) {
        throw Error(ErrorKind::Usage, config.subcommand + ": --input is required");
    }
    if (config.response_col.empty()) {
        throw Error(ErrorKind::Usage, config.subcommand + ": --response-col is required");
    }
    IncompleteDataset data = dataset_from_table(read_csv(config.input), config.response_col, &names);
    if (config.studentize) studentize_dataset(data);
    return data;
}

void emit(const std::string& text, const RunConfig& config, std::ostream& out) {
    if (config.out.empty()) {
        out << text;
        return;
    }
    std::ofstream file(config.out, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error(ErrorKind::Usage, "cannot open output file '" + config.out + "'");
    }
    file << text;
    if (!file) {
        throw Error(ErrorKind::Usage, "failed writing output file '" + config.out + "'");
    }
}

} // namespace

void studentize_dataset(IncompleteDataset& data) {
    studentize_columns(data.x);
    const std::vector<Index> rows = data.observed_rows();
    Vector yo = select_rows(data.y, rows);
    studentize(yo);
    for (std::size_t k = 0; k < rows.size(); ++k) data.y(rows[k]) = yo(static_cast<Index>(k));
}

std::string cmd_simulate(const RunConfig& config) {
    ExperimentPlan plan;
    plan.base_seed = require_seed(config);
    for (const auto& d : config.designs) {
        const Design design = design_from_label(d);
        for (const auto& s : config.sizes) plan.cells.push_back({design, size_from_label(s)});
    }
    for (const auto& e : config.estimators) plan.estimators.push_back(parse_method(e));
    plan.replicates = config.full ? 500 : config.replicates;
    plan.workers = config.workers;
    plan.interval = config.raw_interval ? IntervalScale::Raw : IntervalScale::StandardError;
    plan.theta_source = config.analytic_theta ? TrueThetaSource::Analytic : TrueThetaSource::Auto;
    plan.kernel = kernel_config(config);
    plan.search = search_config(config, plan.base_seed);
    plan.lasso = lasso_settings(config);
    plan.aipw.clamp = config.clamp_propensity;
    const TableFormat format = parse_format(config.format);
    return render_metrics(run_experiment(plan), format);
}

std::string estimate_report(const IncompleteDataset& data, const std::vector<std::string>& names,
                            const RunConfig& config) {
    const std::uint64_t seed = config.seed.value_or(0);
    AipwOptions options;
    options.clamp = config.clamp_propensity;
    const PropResult res = prop_estimate_detailed(data, kernel_config(config), search_config(config, seed),
                                                  lasso_settings(config), options);

    Json doc;
    doc["theta"] = res.estimate.theta;
    doc["sigma2"] = res.estimate.sigma2;
    doc["standard_error"] = res.estimate.standard_error();
    doc["ci"] = Json::array({res.estimate.ci_low, res.estimate.ci_high});
    doc["response_rate"] = res.estimate.response_rate;
    doc["n"] = data.n();
    doc["observed"] = data.observed_count();
    doc["selected_covariates"] = name_list(res.imputation.active.indices, names);
    doc["selected_indices"] = index_list(res.imputation.active.indices);
    doc["no_signal"] = res.imputation.search.no_signal;

    Json prop;
    prop["lambda2"] = res.propensity.lambda2;
    prop["converged"] = res.propensity.converged;
    Json groups = Json::array();
    for (std::size_t g : res.propensity.nonzero_groups()) {
        groups.push_back(name_list(res.propensity.structure.groups[g], names));
    }
    prop["nonzero_groups"] = std::move(groups);
    doc["propensity"] = std::move(prop);
    doc["warnings"] = res.estimate.warnings;
    return doc.dump(2) + "\n";
}

std::string cmd_estimate(const RunConfig& config) {
    std::vector<std::string> names;
    const IncompleteDataset data = load_input(config, names);
    return estimate_report(data, names, config);
}

std::string select_report(const IncompleteDataset& data, const std::vector<std::string>& names,
                          const RunConfig& config) {
    const Matrix xo = data.observed_x();
    const Vector yo = data.observed_y();
    if (xo.rows() < 4) {
        throw Error(ErrorKind::DegenerateInput, "select: need at least 4 complete cases, have " +
                                                    std::to_string(xo.rows()));
    }
    const SparseFit fit = fit_sparse_krr_detailed(xo, yo, kernel_config(config),
                                                  search_config(config, config.seed.value_or(0)));
    Json doc;
    doc["norms"] = std::vector<double>(fit.search.norms.values.begin(), fit.search.norms.values.end());
    doc["threshold"] = fit.active.threshold;
    doc["active"] = index_list(fit.active.indices);
    doc["active_names"] = name_list(fit.active.indices, names);
    doc["no_signal"] = fit.search.no_signal;
    doc["bandwidth"] = fit.initial.bandwidth;
    return doc.dump(2) + "\n";
}

std::string cmd_select(const RunConfig& config) {
    std::vector<std::string> names;
    const IncompleteDataset data = load_input(config, names);
    return select_report(data, names, config);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig config;
    std::uint64_t seed = 0;

    CLI::App app{"Sparse nonparametric AIPW estimation of a mean under missing responses", "aipw"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "aipw 0.1.0");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Random seed (determines every draw)");
        sub->add_option("--out", config.out, "Output path (default: standard output)");
        sub->add_option("--lambda", config.ridge, "Kernel ridge penalty")->check(CLI::PositiveNumber);
        sub->add_option("--B", config.splits, "Half-splits in the threshold stability search")
            ->check(CLI::PositiveNumber);
        sub->add_option("--grid-size", config.grid_size, "Threshold grid size")->check(CLI::Range(2, 100000));
    };

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo table over designs and sizes");
    add_common(sim);
    sim->get_option("--seed")->required();
    sim->add_option("--designs", config.designs, "Designs among C1..C4")->delimiter(',');
    sim->add_option("--sizes", config.sizes, "Sizes among I..IV")->delimiter(',');
    sim->add_option("--M", config.replicates, "Monte Carlo replicates");
    sim->add_flag("--full", config.full, "Use 500 replicates");
    sim->add_option("--estimators", config.estimators, "Subset of CC,PS,DI,NAIPW,PROP")->delimiter(',');
    sim->add_option("--workers", config.workers, "Worker threads")->check(CLI::PositiveNumber);
    sim->add_option("--format", config.format, "csv, md or json");
    sim->add_option("--lambda2", config.lambda2, "Group-lasso penalty: auto or a value");
    sim->add_flag("--clamp-propensity", config.clamp_propensity, "Clamp propensities into [0.01, 0.99]");
    sim->add_flag("--raw-interval", config.raw_interval, "Coverage with theta +- 1.96 sigma instead of sigma/sqrt(n)");
    sim->add_flag("--analytic-theta", config.analytic_theta, "True mean of M2 by quadrature instead of sampling");

    CLI::App* est = app.add_subcommand("estimate", "Sparse AIPW estimate of the response mean from a CSV");
    CLI::App* sel = app.add_subcommand("select", "Gradient norms and active covariates from a CSV");
    for (CLI::App* sub : {est, sel}) {
        add_common(sub);
        sub->add_option("--input", config.input, "CSV with a header row")->required();
        sub->add_option("--response-col", config.response_col, "Response column name")->required();
        sub->add_flag("--studentize", config.studentize, "Studentize covariates and response first");
    }
    est->add_flag("--clamp-propensity", config.clamp_propensity, "Clamp propensities into [0.01, 0.99]");
    est->add_option("--lambda2", config.lambda2, "Group-lasso penalty: auto or a value");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (e.get_name() == "CallForVersion" ? std::string(e.what()) + "\n" : app.help());
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return exit_code(ErrorKind::Usage);
    }

    try {
        if (sim->parsed()) {
            config.subcommand = "simulate";
            config.seed = seed;
            emit(cmd_simulate(config), config, out);
        } else {
            config.subcommand = est->parsed() ? "estimate" : "select";
            CLI::App* sub = est->parsed() ? est : sel;
            if (sub->count("--seed") > 0) config.seed = seed;
            emit(est->parsed() ? cmd_estimate(config) : cmd_select(config), config, out);
        }
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return exit_code(ErrorKind::Numerical);
    }
    return 0;
}

} // namespace aipw
