#include "aipw/sparse_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aipw/rng.hpp"

namespace aipw {

void ThresholdSearchConfig::validate() const {
    if (grid_size < 2) {
        throw Error(ErrorKind::Domain, "threshold search: grid_size must be >= 2");
    }
    if (splits < 2) {
        throw Error(ErrorKind::Domain, "threshold search: need at least 2 half-splits");
    }
    if (!(stability_target > 0.0 && stability_target <= 1.0)) {
        throw Error(ErrorKind::Domain, "threshold search: stability_target must lie in (0, 1]");
    }
    if (!(min_agreement >= -1.0 && min_agreement <= 1.0)) {
        throw Error(ErrorKind::Domain, "threshold search: min_agreement must lie in [-1, 1]");
    }
}

ActiveSet select_active(const GradientNorms& norms, double v) {
    ActiveSet out;
    out.threshold = v;
    for (Index l = 0; l < norms.size(); ++l) {
        if (norms.values(l) > v) {
            out.indices.push_back(l);
        }
    }
    return out;
}

double selection_agreement(const std::vector<Index>& a, const std::vector<Index>& b, Index p) {
    const double total = static_cast<double>(p);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::vector<Index> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    const double both = static_cast<double>(common.size());
    const double neither = total - na - nb + both;
    const double observed = (both + neither) / total;
    const double expected = (na * nb + (total - na) * (total - nb)) / (total * total);
    if (expected >= 1.0) {
        return -1.0;
    }
    return (observed - expected) / (1.0 - expected);
}

Vector threshold_grid(const GradientNorms& norms, int grid_size) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Index l = 0; l < norms.size(); ++l) {
        const double v = norms.values(l);
        if (v > 0.0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > 0.0)) {
        return Vector::Zero(0);
    }
    Vector grid(grid_size);
    const double log_lo = std::log(lo);
    const double log_hi = std::log(hi);
    for (int k = 0; k < grid_size; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(grid_size - 1);
        grid(k) = std::exp(log_lo + t * (log_hi - log_lo));
    }
    grid(0) = lo;
    grid(grid_size - 1) = hi;
    return grid;
}

namespace {

std::vector<Index> shuffled_indices(Index m, Stream& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = m - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.uniform01() * static_cast<double>(i + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(std::min(j, i))]);
    }
    return idx;
}

GradientNorms half_norms(const Matrix& x, const Vector& y, const Matrix& kernel, std::vector<Index> rows,
                         double sigma, double ridge) {
    std::sort(rows.begin(), rows.end());
    const Matrix xh = select_rows(x, rows);
    const Vector yh = select_rows(y, rows);
    const Matrix kh = kernel(rows, rows);
    const KrrModel model = fit_krr_with_kernel(xh, yh, sigma, ridge, kh);
    return gradient_norms_with_kernel(model, kh);
}

StabilityResult search_with_kernel(const Matrix& x, const Vector& y, const Matrix& kernel,
                                   const KrrModel& initial, const ThresholdSearchConfig& search) {
    StabilityResult result;
    result.norms = gradient_norms_with_kernel(initial, kernel);
    result.grid = threshold_grid(result.norms, search.grid_size);
    if (result.grid.size() == 0) {
        result.no_signal = true;
        result.threshold = 0.0;
        return result;
    }

    const Index m = x.rows();
    const Index p = x.cols();
    const Index half = m / 2;
    const Index grid_size = result.grid.size();
    Vector totals = Vector::Zero(grid_size);

    for (int b = 0; b < search.splits; ++b) {
        Stream rng(search.seed, Purpose::Split, static_cast<std::uint64_t>(b));
        const std::vector<Index> perm = shuffled_indices(m, rng);
        const std::vector<Index> first(perm.begin(), perm.begin() + half);
        const std::vector<Index> second(perm.begin() + half, perm.end());
        const GradientNorms n1 = half_norms(x, y, kernel, first, initial.bandwidth, initial.ridge);
        const GradientNorms n2 = half_norms(x, y, kernel, second, initial.bandwidth, initial.ridge);
        for (Index k = 0; k < grid_size; ++k) {
            const double v = result.grid(k);
            totals(k) += selection_agreement(select_active(n1, v).indices, select_active(n2, v).indices, p);
        }
    }

    result.scores = totals / static_cast<double>(search.splits);
    const double best = result.scores.maxCoeff();
    if (best < search.min_agreement) {
        result.no_signal = true;
        result.threshold = result.grid(grid_size - 1);
        return result;
    }
    const double cutoff = search.stability_target >= 1.0 || best <= 0.0
                              ? best - 1e-12
                              : search.stability_target * best - 1e-12;
    Index chosen = 0;
    if (search.tie_break == TieBreak::Largest) {
        for (Index k = grid_size - 1; k >= 0; --k) {
            if (result.scores(k) >= cutoff) {
                chosen = k;
                break;
            }
        }
    } else {
        for (Index k = 0; k < grid_size; ++k) {
            if (result.scores(k) >= cutoff) {
                chosen = k;
                break;
            }
        }
    }
    result.threshold = result.grid(chosen);
    return result;
}

} // namespace

StabilityResult stability_search(const Matrix& x_obs, const Vector& y_obs, const KernelConfig& config,
                                 const ThresholdSearchConfig& search, const KrrModel* initial) {
    return fit_sparse_krr_detailed(x_obs, y_obs, config, search, initial).search;
}

double stability_threshold(const Matrix& x_obs, const Vector& y_obs, const KernelConfig& config,
                           const ThresholdSearchConfig& search) {
    return stability_search(x_obs, y_obs, config, search).threshold;
}

KrrModel refit_on_columns(const Matrix& x_obs, const Vector& y_obs, const std::vector<Index>& columns,
                          double ridge) {
    if (columns.empty()) {
        return constant_model(y_obs, x_obs.cols());
    }
    const Matrix restricted = select_columns(x_obs, columns);
    const Matrix sq = squared_distances(restricted);
    const double sigma = median_bandwidth_from_squared(sq);
    KrrModel model = fit_krr_with_kernel(restricted, y_obs, sigma, ridge, kernel_from_squared(sq, sigma));
    model.active_set = columns;
    model.input_dim = x_obs.cols();
    return model;
}

SparseFit fit_sparse_krr_detailed(const Matrix& x_obs, const Vector& y_obs, const KernelConfig& config,
                                  const ThresholdSearchConfig& search, const KrrModel* initial) {
    check_covariates(x_obs, "fit_sparse_krr");
    config.validate();
    search.validate();
    if (x_obs.rows() < 4) {
        throw Error(ErrorKind::DegenerateInput, "sparse selection needs at least 4 complete cases");
    }
    if (y_obs.size() != x_obs.rows()) {
        throw Error(ErrorKind::Dimension, "fit_sparse_krr: response length mismatch");
    }

    SparseFit fit;
    const Matrix sq = squared_distances(x_obs);
    if (initial != nullptr) {
        if (initial->intercept_only() || initial->train_x.rows() != x_obs.rows() ||
            initial->train_x.cols() != x_obs.cols()) {
            throw Error(ErrorKind::Dimension, "fit_sparse_krr: initial model does not match the sample");
        }
        fit.initial = *initial;
    }
    const double sigma = initial != nullptr ? initial->bandwidth
                         : config.bandwidth  ? *config.bandwidth
                                             : median_bandwidth_from_squared(sq);
    const Matrix kernel = kernel_from_squared(sq, sigma);
    if (initial == nullptr) {
        fit.initial = fit_krr_with_kernel(x_obs, y_obs, sigma, config.ridge, kernel);
    }

    fit.search = search_with_kernel(x_obs, y_obs, kernel, fit.initial, search);
    fit.active = select_active(fit.search.norms, fit.search.threshold);
    fit.model = refit_on_columns(x_obs, y_obs, fit.active.indices, config.ridge);
    if (!fit.model.alpha.allFinite()) {
        throw Error(ErrorKind::Numerical, "fit_sparse_krr: non-finite coefficients after refit");
    }
    return fit;
}

KrrModel fit_sparse_krr(const Matrix& x_obs, const Vector& y_obs, const KernelConfig& config,
                        const ThresholdSearchConfig& search) {
    return fit_sparse_krr_detailed(x_obs, y_obs, config, search).model;
}

} // namespace aipw
