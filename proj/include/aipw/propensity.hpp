#pragma once

#include <string>
#include <vector>

#include "aipw/kernel.hpp"

namespace aipw {

/// Partition of the covariate columns into penalty groups. The intercept is
/// never part of a group.
struct GroupStructure {
    std::vector<std::vector<Index>> groups;

    /// Every column its own group (df_g = 1).
    static GroupStructure singletons(Index p);

    [[nodiscard]] std::size_t size() const noexcept { return groups.size(); }
    [[nodiscard]] Index df(std::size_t g) const { return static_cast<Index>(groups[g].size()); }
    void validate(Index p) const;
};

struct Coefficients {
    double intercept = 0.0;
    Vector slopes;
};

struct BcgdConfig {
    double alpha0 = 1.0;
    double backtrack = 0.5;
    double armijo_sigma = 0.1;
    double h_floor = 1e-3;
    double h_cap = 1e8;
    int max_backtracks = 60;
    int max_iter = 500;
    double kkt_tol = 1e-6;
    /// Fit on centred, unit-variance columns and map the coefficients back.
    bool standardize = true;

    void validate() const;
};

struct PropensityModel {
    Coefficients coef;
    double lambda2 = 0.0;
    GroupStructure structure;
    bool converged = false;
    int iterations = 0;
    double kkt_violation = 0.0;
    std::string note;
    /// Penalized objective (working coordinates) after each sweep.
    std::vector<double> objective_trace;

    /// Groups with a nonzero coefficient block.
    [[nodiscard]] std::vector<std::size_t> nonzero_groups() const;
};

/// Bernoulli log-likelihood of delta under logistic(intercept + x * slopes).
[[nodiscard]] double log_likelihood(const Coefficients& beta, const Matrix& x, const Vector& delta);

/// Sum over groups of sqrt(df_g) * ||beta_g||_2.
[[nodiscard]] double group_penalty(const Vector& slopes, const GroupStructure& structure);

[[nodiscard]] double penalized_objective(const Coefficients& beta, const Matrix& x, const Vector& delta,
                                         double lambda2, const GroupStructure& structure);

/// Gradient of the negative log-likelihood: (d/d intercept, d/d slopes).
[[nodiscard]] Coefficients negative_loglik_gradient(const Coefficients& beta, const Matrix& x,
                                                    const Vector& delta);

/// Block update direction for one group given the gradient of the smooth part
/// (negative log-likelihood) and the scalar curvature h_g.
[[nodiscard]] Vector bcgd_direction(const Vector& beta_g, const Vector& grad_g, double h_g, double lambda2,
                                    Index df_g);

/// Largest alpha0 * backtrack^l (l <= max_backtracks) satisfying the Armijo
/// condition along `direction`. Throws Domain if the direction is not a
/// descent direction and Convergence if backtracking stalls.
[[nodiscard]] double armijo_step(const Coefficients& beta, const Coefficients& direction, double lambda2,
                                 const GroupStructure& structure, const BcgdConfig& config, const Matrix& x,
                                 const Vector& delta);

[[nodiscard]] PropensityModel fit_group_lasso(const Matrix& x, const Vector& delta, double lambda2,
                                              const GroupStructure& structure, const BcgdConfig& config);

/// Smallest penalty at which all slope groups are zero, in the fitting
/// coordinates implied by config.standardize.
[[nodiscard]] double lambda_max(const Matrix& x, const Vector& delta, const GroupStructure& structure,
                                const BcgdConfig& config);

struct LassoPath {
    Vector lambdas;
    Vector bic;
    std::vector<int> nonzero;
    Index chosen = 0;
    PropensityModel model;
};

/// Penalty chosen by BIC over a log-spaced grid from lambda_max down to
/// lambda_max * min_ratio, warm-started. The path stops early once BIC has not
/// improved for `patience` consecutive grid points.
[[nodiscard]] LassoPath fit_group_lasso_bic(const Matrix& x, const Vector& delta, const GroupStructure& structure,
                                            const BcgdConfig& config, int grid_size = 30, double min_ratio = 1e-3,
                                            int patience = 5);

/// Unpenalized logistic MLE by Newton-Raphson. Non-convergence, p >= n and
/// numerically separated fits are reported through `converged`, not thrown.
[[nodiscard]] PropensityModel fit_logistic_mle(const Matrix& x, const Vector& delta, int max_iter = 25,
                                               double tol = 1e-8);

/// logistic(intercept + x * slopes), kept inside [2^-53, 1 - 2^-53].
[[nodiscard]] Vector predict_propensity(const PropensityModel& model, const Matrix& x);
[[nodiscard]] double logistic(double eta);
[[nodiscard]] double logit(double prob);

struct KktReport {
    double intercept = 0.0;
    double active = 0.0;
    double zero_excess = 0.0;
    double gradient_scale = 1.0;

    [[nodiscard]] double worst() const;
};

/// Optimality audit of slopes/intercept for penalty lambda2 on the given
/// covariates (no standardization is applied here).
[[nodiscard]] KktReport kkt_report(const Coefficients& beta, const Matrix& x, const Vector& delta, double lambda2,
                                   const GroupStructure& structure);

} // namespace aipw
