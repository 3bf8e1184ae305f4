#pragma once

#include <cstdint>
#include <vector>

#include "aipw/kernel.hpp"

namespace aipw {

/// Which end of the set of best-scoring thresholds is taken.
enum class TieBreak {
    /// Smallest eligible threshold: the most inclusive stable selection.
    Smallest,
    /// Largest eligible threshold: the sparsest stable selection.
    Largest,
};

/// Knobs of the half-split stability search for the gradient-norm threshold.
struct ThresholdSearchConfig {
    int grid_size = 50;
    int splits = 20;
    /// Candidates scoring at least stability_target * max score are eligible;
    /// 1.0 keeps only the maximizers.
    double stability_target = 1.0;
    TieBreak tie_break = TieBreak::Smallest;
    /// Best mean agreement below this means no stable selection exists; the
    /// search then reports no signal and selects nothing.
    double min_agreement = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ActiveSet {
    std::vector<Index> indices;
    double threshold = 0.0;
};

struct StabilityResult {
    double threshold = 0.0;
    bool no_signal = false;
    Vector grid;
    Vector scores;
    GradientNorms norms;
};

/// { l : norms[l] > v }, ascending.
[[nodiscard]] ActiveSet select_active(const GradientNorms& norms, double v);

/// Chance-corrected agreement (Cohen's kappa) of two selections out of p
/// candidates. Both-empty and both-full selections carry no information and score -1.
[[nodiscard]] double selection_agreement(const std::vector<Index>& a, const std::vector<Index>& b, Index p);

/// Log-spaced grid from the smallest positive to the largest entry of norms.
[[nodiscard]] Vector threshold_grid(const GradientNorms& norms, int grid_size);

/// Full search; `initial` may supply an existing fit on (x_obs, y_obs) with the
/// bandwidth of `config` to skip refitting it.
[[nodiscard]] StabilityResult stability_search(const Matrix& x_obs, const Vector& y_obs,
                                               const KernelConfig& config,
                                               const ThresholdSearchConfig& search,
                                               const KrrModel* initial = nullptr);

[[nodiscard]] double stability_threshold(const Matrix& x_obs, const Vector& y_obs, const KernelConfig& config,
                                         const ThresholdSearchConfig& search);

/// Refit on the given columns with the median bandwidth of those columns.
/// An empty column list yields the intercept-only model.
[[nodiscard]] KrrModel refit_on_columns(const Matrix& x_obs, const Vector& y_obs,
                                        const std::vector<Index>& columns, double ridge);

struct SparseFit {
    KrrModel model;
    KrrModel initial;
    ActiveSet active;
    StabilityResult search;
};

[[nodiscard]] SparseFit fit_sparse_krr_detailed(const Matrix& x_obs, const Vector& y_obs,
                                                const KernelConfig& config,
                                                const ThresholdSearchConfig& search,
                                                const KrrModel* initial = nullptr);

[[nodiscard]] KrrModel fit_sparse_krr(const Matrix& x_obs, const Vector& y_obs, const KernelConfig& config,
                                      const ThresholdSearchConfig& search);

} // namespace aipw
