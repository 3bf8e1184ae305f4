#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "aipw/errors.hpp"

namespace aipw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Rows are observations, columns covariates. Throws on empty or non-finite input.
void check_covariates(const Matrix& x, const char* what = "covariates");

/// Gaussian kernel bandwidth and ridge penalty. An unset bandwidth selects the
/// median pairwise distance of the fitting covariates.
struct KernelConfig {
    std::optional<double> bandwidth;
    double ridge = 0.001;

    void validate() const;
};

/// Kernel ridge fit f(x) = sum_i alpha_i K(x_i, x) on the active columns.
///
/// An empty active set denotes the intercept-only model f == intercept; in that
/// case train_x has zero columns and alpha is empty.
struct KrrModel {
    Matrix train_x;
    Vector alpha;
    double bandwidth = 1.0;
    double ridge = 0.001;
    std::vector<Index> active_set;
    Index input_dim = 0;
    double intercept = 0.0;

    [[nodiscard]] bool intercept_only() const noexcept { return active_set.empty(); }
    [[nodiscard]] Index size() const noexcept { return train_x.rows(); }
};

/// Per-covariate empirical squared gradient norms, mean over evaluation rows.
struct GradientNorms {
    Vector values;

    [[nodiscard]] Index size() const noexcept { return values.size(); }
};

/// Pairwise squared Euclidean distances between rows of a and rows of b.
[[nodiscard]] Matrix squared_distances(const Matrix& a, const Matrix& b);
/// Symmetric version with an exact zero diagonal.
[[nodiscard]] Matrix squared_distances(const Matrix& x);

/// Lower median of the n(n-1)/2 pairwise distances.
[[nodiscard]] double median_bandwidth(const Matrix& x);
[[nodiscard]] double median_bandwidth_from_squared(const Matrix& sq_dist);

[[nodiscard]] double gaussian_kernel(const Eigen::Ref<const Vector>& x,
                                     const Eigen::Ref<const Vector>& u, double sigma);

[[nodiscard]] Matrix kernel_matrix(const Matrix& x, double sigma);
[[nodiscard]] Matrix kernel_from_squared(const Matrix& sq_dist, double sigma);

/// Solves (K + ridge I) alpha = y over all columns of x.
[[nodiscard]] KrrModel fit_krr(const Matrix& x_obs, const Vector& y_obs, const KernelConfig& config);

/// Same as fit_krr but reuses a precomputed kernel matrix of x_obs built with `bandwidth`.
[[nodiscard]] KrrModel fit_krr_with_kernel(const Matrix& x_obs, const Vector& y_obs, double bandwidth,
                                           double ridge, const Matrix& kernel);

/// Intercept-only model predicting mean(y_obs) everywhere.
[[nodiscard]] KrrModel constant_model(const Vector& y_obs, Index input_dim);

/// Predictions at rows of x_new, which must carry exactly the model's training columns.
[[nodiscard]] Vector predict(const KrrModel& model, const Matrix& x_new);

/// Predictions from full-width rows; the active columns are extracted first.
[[nodiscard]] Vector predict_full(const KrrModel& model, const Matrix& x_full);

/// Gradient of the fitted function with respect to the evaluation point,
/// one entry per model column.
[[nodiscard]] Vector gradient_eval(const KrrModel& model, const Eigen::Ref<const Vector>& x_new);

/// Gradients at every row of x_eval (rows x model columns).
[[nodiscard]] Matrix gradient_matrix(const KrrModel& model, const Matrix& x_eval);

[[nodiscard]] GradientNorms gradient_norms(const KrrModel& model, const Matrix& x_obs);

/// gradient_norms where x_eval == model.train_x and `kernel` is its kernel matrix.
[[nodiscard]] GradientNorms gradient_norms_with_kernel(const KrrModel& model, const Matrix& kernel);

/// Columns of x in the given order.
[[nodiscard]] Matrix select_columns(const Matrix& x, const std::vector<Index>& cols);
/// Rows of x in the given order.
[[nodiscard]] Matrix select_rows(const Matrix& x, const std::vector<Index>& rows);
[[nodiscard]] Vector select_rows(const Vector& v, const std::vector<Index>& rows);

} // namespace aipw
