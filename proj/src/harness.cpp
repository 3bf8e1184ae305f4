#include "aipw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "aipw/rng.hpp"

namespace aipw {

namespace {

std::uint64_t label_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double m2_integrand(double u) {
    const double s5 = std::sin(u * std::numbers::pi);
    return 6.0 * m2_h(u) + 5.0 * s5 / (2.0 - s5);
}

} // namespace

Design design_from_label(const std::string& label) {
    if (label == "C1") return {label, OutcomeModel::M1, ResponseModel::R1};
    if (label == "C2") return {label, OutcomeModel::M2, ResponseModel::R1};
    if (label == "C3") return {label, OutcomeModel::M1, ResponseModel::R2};
    if (label == "C4") return {label, OutcomeModel::M2, ResponseModel::R2};
    throw Error(ErrorKind::Usage, "unknown design '" + label + "' (expected C1..C4)");
}

SizeSpec size_from_label(const std::string& label) {
    if (label == "I") return {label, 800, 400};
    if (label == "II") return {label, 1000, 400};
    if (label == "III") return {label, 800, 2000};
    if (label == "IV") return {label, 1000, 2000};
    throw Error(ErrorKind::Usage, "unknown size '" + label + "' (expected I..IV)");
}

void ExperimentPlan::validate() const {
    if (replicates < 2) {
        throw Error(ErrorKind::Usage, "experiment: need at least 2 replicates");
    }
    if (estimators.empty()) {
        throw Error(ErrorKind::Usage, "experiment: estimator set is empty");
    }
    if (cells.empty()) {
        throw Error(ErrorKind::Usage, "experiment: no design/size cells");
    }
    if (workers < 1) {
        throw Error(ErrorKind::Usage, "experiment: workers must be >= 1");
    }
    kernel.validate();
    search.validate();
    lasso.bcgd.validate();
    for (const auto& c : cells) {
        SimulationSpec{c.design.outcome, c.design.response, c.size.n, c.size.p, 0}.validate();
    }
}

const CellMetrics& MetricsTable::at(const std::string& design, const std::string& size, Method method) const {
    for (const auto& r : rows) {
        if (r.design == design && r.size == size && r.method == method) return r;
    }
    throw Error(ErrorKind::Usage, "metrics: no cell " + design + "/" + size + "/" + to_string(method));
}

double m2_population_mean() {
    // Composite Simpson on [-1/2, 1/2]; the integrand is smooth.
    constexpr int kIntervals = 20'000;
    const double h = 1.0 / kIntervals;
    double total = m2_integrand(-0.5) + m2_integrand(0.5);
    for (int k = 1; k < kIntervals; ++k) {
        total += (k % 2 == 1 ? 4.0 : 2.0) * m2_integrand(-0.5 + k * h);
    }
    // E[4(2x2+1)(2x3-1)] = 4 * 1 * (-1)
    return total * h / 3.0 - 4.0;
}

double true_theta(OutcomeModel outcome, TrueThetaSource source, std::uint64_t oracle_seed, Index oracle_draws) {
    if (outcome == OutcomeModel::M1) {
        return 0.0;
    }
    if (source == TrueThetaSource::Analytic) {
        return m2_population_mean();
    }
    return m2_oracle_mean(oracle_seed, oracle_draws);
}

std::uint64_t replicate_seed(std::uint64_t base_seed, const Cell& cell, int replicate) {
    return derive_key({base_seed, static_cast<std::uint64_t>(Purpose::Replicate), label_hash(cell.design.label),
                       static_cast<std::uint64_t>(cell.size.n), static_cast<std::uint64_t>(cell.size.p),
                       static_cast<std::uint64_t>(replicate)});
}

std::vector<ReplicateValue> run_replicate(const ExperimentPlan& plan, const Cell& cell, int replicate) {
    const std::uint64_t seed = replicate_seed(plan.base_seed, cell, replicate);
    const IncompleteDataset data =
        generate(SimulationSpec{cell.design.outcome, cell.design.response, cell.size.n, cell.size.p, seed});

    std::optional<PropensityModel> mle;
    std::optional<KrrModel> full_krr;
    auto get_mle = [&]() -> const PropensityModel& {
        if (!mle) mle = fit_logistic_mle(data.x, data.delta);
        return *mle;
    };
    auto get_krr = [&]() -> const KrrModel& {
        if (!full_krr) full_krr = fit_complete_case_krr(data, plan.kernel.ridge);
        return *full_krr;
    };

    std::vector<ReplicateValue> out(plan.estimators.size());
    for (std::size_t k = 0; k < plan.estimators.size(); ++k) {
        ReplicateValue& v = out[k];
        try {
            EstimatorReport report;
            switch (plan.estimators[k]) {
                case Method::CC: report = cc_estimate(data); break;
                case Method::PS:
                    report = data.fully_observed() ? ps_estimate(data) : ps_estimate(data, get_mle());
                    break;
                case Method::DI: report = di_estimate(data, get_krr()); break;
                case Method::NAIPW:
                    report = data.fully_observed() ? naipw_estimate(data, get_krr(), PropensityModel{})
                                                   : naipw_estimate(data, get_krr(), get_mle());
                    break;
                case Method::PROP: {
                    ThresholdSearchConfig search = plan.search;
                    search.seed = derive_key({seed, static_cast<std::uint64_t>(Purpose::Split)});
                    const KrrModel* initial = nullptr;
                    if (!plan.kernel.bandwidth && data.observed_count() >= 4) initial = &get_krr();
                    const PropResult res =
                        prop_estimate_detailed(data, plan.kernel, search, plan.lasso, plan.aipw, initial);
                    report.method = Method::PROP;
                    report.estimate = res.estimate.theta;
                    v.sigma2 = res.estimate.sigma2;
                    if (!res.propensity.converged) v.note = res.propensity.note;
                    break;
                }
            }
            v.estimate = report.estimate;
            v.converged = report.converged && std::isfinite(report.estimate);
            if (!report.converged) {
                const auto it = report.diagnostics.find("failure");
                v.note = it != report.diagnostics.end() ? it->second : "not converged";
            }
        } catch (const std::exception& e) {
            v.converged = false;
            v.estimate = std::numeric_limits<double>::quiet_NaN();
            v.note = e.what();
        }
    }
    return out;
}

CellMetrics summarize(const std::vector<ReplicateValue>& values, Method method, double theta, Index n,
                      IntervalScale interval) {
    CellMetrics m;
    m.method = method;
    m.theta = theta;
    m.n = n;
    std::vector<const ReplicateValue*> ok;
    for (const auto& v : values) {
        if (v.converged) ok.push_back(&v);
    }
    m.converged = static_cast<int>(ok.size());
    m.failures = static_cast<int>(values.size()) - m.converged;
    if (ok.empty()) {
        m.failed = true;
        m.bias = m.se = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    const double k = static_cast<double>(ok.size());
    double mean = 0.0;
    for (const auto* v : ok) mean += v->estimate;
    mean /= k;
    double ss = 0.0;
    for (const auto* v : ok) ss += (v->estimate - mean) * (v->estimate - mean);
    m.bias = mean - theta;
    m.se = ok.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;

    if (method == Method::PROP) {
        double mean_var = 0.0;
        int covered = 0;
        for (const auto* v : ok) {
            const double var_theta = v->sigma2 / static_cast<double>(n);
            mean_var += var_theta;
            const double half =
                kCriticalValue * std::sqrt(interval == IntervalScale::StandardError ? var_theta : v->sigma2);
            covered += (v->estimate - half <= theta && theta <= v->estimate + half) ? 1 : 0;
        }
        mean_var /= k;
        const double se2 = m.se * m.se;
        m.rb = se2 > 0.0 ? (mean_var - se2) / se2 : std::numeric_limits<double>::quiet_NaN();
        m.cr = static_cast<double>(covered) / k;
    }
    m.failed = !(std::abs(m.bias) <= kFailureMagnitude) || !(m.se <= kFailureMagnitude);
    return m;
}

ExperimentResult run_experiment_detailed(const ExperimentPlan& plan) {
    plan.validate();
    const std::size_t cells = plan.cells.size();
    const std::size_t methods = plan.estimators.size();
    const auto reps = static_cast<std::size_t>(plan.replicates);

    ExperimentResult result;
    result.values.assign(cells, std::vector<std::vector<ReplicateValue>>(methods, std::vector<ReplicateValue>(reps)));

    const std::size_t tasks = cells * reps;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t t = next++; t < tasks; t = next++) {
            const std::size_t c = t / reps;
            const std::size_t r = t % reps;
            const auto values = run_replicate(plan, plan.cells[c], static_cast<int>(r));
            for (std::size_t k = 0; k < methods; ++k) {
                result.values[c][k][r] = values[k];
            }
        }
    };
    const int threads = std::min<int>(plan.workers, static_cast<int>(tasks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    // Aggregation runs in fixed (cell, method, replicate) order, independent of scheduling.
    MetricsTable& table = result.table;
    table.replicates = plan.replicates;
    table.base_seed = plan.base_seed;
    for (std::size_t c = 0; c < cells; ++c) {
        const Cell& cell = plan.cells[c];
        const double theta = true_theta(cell.design.outcome, plan.theta_source, plan.oracle_seed, plan.oracle_draws);
        for (std::size_t k = 0; k < methods; ++k) {
            CellMetrics m = summarize(result.values[c][k], plan.estimators[k], theta, cell.size.n, plan.interval);
            m.design = cell.design.label;
            m.size = cell.size.label;
            m.p = cell.size.p;
            table.rows.push_back(std::move(m));
        }
    }
    return result;
}

MetricsTable run_experiment(const ExperimentPlan& plan) { return run_experiment_detailed(plan).table; }

NormalityDiagnostic normality_diagnostic(const std::vector<double>& estimates, const std::vector<double>& sigma2s,
                                         double theta, Index n) {
    if (estimates.size() != sigma2s.size()) {
        throw Error(ErrorKind::Dimension, "normality_diagnostic: estimates and variances differ in length");
    }
    if (estimates.size() < 50) {
        throw Error(ErrorKind::DegenerateInput, "normality_diagnostic: need at least 50 replicates");
    }
    NormalityDiagnostic d;
    std::vector<double> z;
    z.reserve(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double scale = std::sqrt(sigma2s[i] / static_cast<double>(n));
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            d.defined = false;
            return d;
        }
        z.push_back((estimates[i] - theta) / scale);
    }
    const double k = static_cast<double>(z.size());
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= k;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : z) {
        const double c = v - mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= k;
    m3 /= k;
    m4 /= k;
    if (!(m2 > 1e-24 * std::max(1.0, mean * mean))) {
        d.defined = false;
        return d;
    }
    d.skewness = m3 / std::pow(m2, 1.5);
    d.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return d;
}

} // namespace aipw
