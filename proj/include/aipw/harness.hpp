#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aipw/estimators.hpp"
#include "aipw/simgen.hpp"

namespace aipw {

/// Outcome/response pairing of a simulation design label.
struct Design {
    std::string label;
    OutcomeModel outcome;
    ResponseModel response;
};

/// C1 = (M1, R1), C2 = (M2, R1), C3 = (M1, R2), C4 = (M2, R2).
[[nodiscard]] Design design_from_label(const std::string& label);

struct SizeSpec {
    std::string label;
    Index n;
    Index p;
};

/// I = (800, 400), II = (1000, 400), III = (800, 2000), IV = (1000, 2000).
[[nodiscard]] SizeSpec size_from_label(const std::string& label);

struct Cell {
    Design design;
    SizeSpec size;
};

enum class TrueThetaSource {
    /// M1: analytic 0; M2: Monte Carlo oracle sample.
    Auto,
    /// M1: 0; M2: numerical quadrature of the population mean.
    Analytic,
    OracleSample,
};

enum class IntervalScale {
    /// theta_hat +- 1.96 sqrt(sigma2 / n)
    StandardError,
    /// theta_hat +- 1.96 sqrt(sigma2)
    Raw,
};

struct ExperimentPlan {
    std::vector<Cell> cells;
    int replicates = 100;
    std::vector<Method> estimators;
    std::uint64_t base_seed = 0;
    TrueThetaSource theta_source = TrueThetaSource::Auto;
    std::uint64_t oracle_seed = 20'220'601;
    Index oracle_draws = 1'000'000;
    int workers = 1;
    IntervalScale interval = IntervalScale::StandardError;

    KernelConfig kernel;
    /// The seed field is replaced per replicate.
    ThresholdSearchConfig search;
    LassoSettings lasso;
    AipwOptions aipw;

    void validate() const;
};

/// Magnitude above which a cell is rendered "-" (raw units).
inline constexpr double kFailureMagnitude = 10.0;

struct ReplicateValue {
    double estimate = 0.0;
    bool converged = false;
    /// PROP only.
    double sigma2 = 0.0;
    std::string note;
};

struct CellMetrics {
    std::string design;
    std::string size;
    Index n = 0;
    Index p = 0;
    Method method = Method::CC;
    double theta = 0.0;
    int converged = 0;
    int failures = 0;
    double bias = 0.0;
    double se = 0.0;
    std::optional<double> rb;
    std::optional<double> cr;
    /// No converged replicate, or |bias| / se above kFailureMagnitude.
    bool failed = false;
};

struct MetricsTable {
    int replicates = 0;
    std::uint64_t base_seed = 0;
    std::vector<CellMetrics> rows;

    [[nodiscard]] const CellMetrics& at(const std::string& design, const std::string& size, Method method) const;
};

struct ExperimentResult {
    MetricsTable table;
    /// values[cell][method index within plan.estimators][replicate]
    std::vector<std::vector<std::vector<ReplicateValue>>> values;
};

/// Population mean of the outcome model under the plan's source.
[[nodiscard]] double true_theta(OutcomeModel outcome, TrueThetaSource source, std::uint64_t oracle_seed,
                                Index oracle_draws);

/// Quadrature value of E[y] for the nonlinear outcome.
[[nodiscard]] double m2_population_mean();

/// Seed of one replicate, a pure function of (base seed, design, size, index).
[[nodiscard]] std::uint64_t replicate_seed(std::uint64_t base_seed, const Cell& cell, int replicate);

/// All requested estimators on one simulated data set.
[[nodiscard]] std::vector<ReplicateValue> run_replicate(const ExperimentPlan& plan, const Cell& cell, int replicate);

/// Bias / SE over converged replicates, plus RB and CR for PROP.
[[nodiscard]] CellMetrics summarize(const std::vector<ReplicateValue>& values, Method method, double theta, Index n,
                                    IntervalScale interval = IntervalScale::StandardError);

[[nodiscard]] ExperimentResult run_experiment_detailed(const ExperimentPlan& plan);
[[nodiscard]] MetricsTable run_experiment(const ExperimentPlan& plan);

struct NormalityDiagnostic {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    /// False when the standardized statistic is degenerate (zero spread).
    bool defined = true;
};

/// Moments of (theta_hat - theta) / sqrt(sigma2 / n). Needs >= 50 replicates.
[[nodiscard]] NormalityDiagnostic normality_diagnostic(const std::vector<double>& estimates,
                                                       const std::vector<double>& sigma2s, double theta, Index n);

} // namespace aipw
