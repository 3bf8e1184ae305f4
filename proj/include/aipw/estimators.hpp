#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aipw/dataset.hpp"
#include "aipw/propensity.hpp"
#include "aipw/sparse_select.hpp"

namespace aipw {

enum class Method { CC, PS, DI, NAIPW, PROP };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] Method parse_method(const std::string& tag);

enum class Normalization {
    /// 1/n in front of the whole sum.
    SampleSize,
    /// Residual correction normalized by sum(delta / pi) instead of n.
    WeightSum,
};

struct AipwOptions {
    /// Clamp propensities into [clamp_eps, 1 - clamp_eps]; off by default.
    bool clamp = false;
    double clamp_eps = 0.01;
    /// Propensities below this value raise a warning (never an error).
    double warn_floor = 0.01;
    Normalization normalization = Normalization::SampleSize;
};

struct AipwEstimate {
    double theta = 0.0;
    double sigma2 = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    Vector pseudo_values;
    double response_rate = 0.0;
    std::vector<std::string> warnings;

    /// sqrt(sigma2 / n), the half-width scale of the 95% interval.
    [[nodiscard]] double standard_error() const;
};

struct EstimatorReport {
    Method method = Method::CC;
    double estimate = 0.0;
    bool converged = true;
    std::map<std::string, std::string> diagnostics;
};

inline constexpr double kCriticalValue = 1.96;

/// Pseudo-values f0 + delta / pi * (y - f0), their mean, sample variance
/// (n - 1 denominator) and the 1.96 interval.
[[nodiscard]] AipwEstimate aipw_estimate(const IncompleteDataset& data, const Vector& f0_values,
                                         const Vector& pi_hat, const AipwOptions& options = {});
[[nodiscard]] AipwEstimate aipw_estimate(const IncompleteDataset& data, const KrrModel& f0,
                                         const Vector& pi_hat, const AipwOptions& options = {});

[[nodiscard]] EstimatorReport cc_estimate(const IncompleteDataset& data);

/// Inverse weighting by the unpenalized all-covariate logistic MLE.
[[nodiscard]] EstimatorReport ps_estimate(const IncompleteDataset& data);
[[nodiscard]] EstimatorReport ps_estimate(const IncompleteDataset& data, const PropensityModel& mle);

/// Kernel ridge fit on the complete cases with every covariate and the median bandwidth.
[[nodiscard]] KrrModel fit_complete_case_krr(const IncompleteDataset& data, double ridge = 0.001);

[[nodiscard]] EstimatorReport di_estimate(const IncompleteDataset& data, const KrrModel& f_hat);
[[nodiscard]] EstimatorReport naipw_estimate(const IncompleteDataset& data, const KrrModel& f_hat,
                                             const PropensityModel& mle);

struct LassoSettings {
    BcgdConfig bcgd;
    /// Fixed penalty; unset selects it by BIC along the penalty path.
    std::optional<double> lambda2;
    std::optional<GroupStructure> structure;
    int path_size = 30;
    double path_min_ratio = 1e-3;
};

struct PropResult {
    AipwEstimate estimate;
    SparseFit imputation;
    PropensityModel propensity;
    Vector pi_hat;
    Vector f0_values;
};

/// Sparse kernel imputation on the complete cases, group-lasso propensity on
/// all rows, combined through aipw_estimate. `initial` may carry an existing
/// all-covariate fit on the complete cases to reuse.
[[nodiscard]] PropResult prop_estimate_detailed(const IncompleteDataset& data, const KernelConfig& kernel,
                                                const ThresholdSearchConfig& search, const LassoSettings& lasso,
                                                const AipwOptions& options = {},
                                                const KrrModel* initial = nullptr);

[[nodiscard]] AipwEstimate prop_estimate(const IncompleteDataset& data, const KernelConfig& kernel,
                                         const ThresholdSearchConfig& search, const LassoSettings& lasso,
                                         const AipwOptions& options = {});

} // namespace aipw
