#include "aipw/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aipw {

namespace {

constexpr double kProbEps = 0x1.0p-53;

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Sum_i [softplus(eta_i + t_i) - softplus(eta_i)] - delta_i t_i, evaluated
// without cancellation between the two softplus terms.
double nll_change(const Vector& prob, const Vector& delta, const Vector& shift) {
    double total = 0.0;
    for (Index i = 0; i < shift.size(); ++i) {
        const double t = shift(i);
        if (t == 0.0) {
            continue;
        }
        const double diff = t > 30.0 ? t + std::log(prob(i) + (1.0 - prob(i)) * std::exp(-t))
                                     : std::log1p(prob(i) * std::expm1(t));
        total += diff - delta(i) * t;
    }
    return total;
}

// ||v + a d|| - ||v||, stable when both norms are close.
double norm_change(const Vector& v, const Vector& d, double a) {
    const double before = v.norm();
    const double after = (v + a * d).norm();
    const double denom = before + after;
    if (denom == 0.0) {
        return 0.0;
    }
    return (2.0 * a * v.dot(d) + a * a * d.squaredNorm()) / denom;
}

Vector sigmoid(const Vector& eta) {
    Vector out(eta.size());
    for (Index i = 0; i < eta.size(); ++i) {
        out(i) = logistic(eta(i));
    }
    return out;
}

template <class Change>
double backtrack(double decrease, const BcgdConfig& config, Change&& change, bool& stalled) {
    double a = config.alpha0;
    for (int l = 0; l <= config.max_backtracks; ++l) {
        if (change(a) <= a * config.armijo_sigma * decrease) {
            stalled = false;
            return a;
        }
        a *= config.backtrack;
    }
    stalled = true;
    return 0.0;
}

struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer identity(Index p) {
        return {Eigen::RowVectorXd::Zero(p), Eigen::RowVectorXd::Ones(p)};
    }

    static Standardizer fit(const Matrix& x) {
        Standardizer s;
        const double n = static_cast<double>(x.rows());
        s.mean = x.colwise().mean();
        s.scale.resize(x.cols());
        for (Index j = 0; j < x.cols(); ++j) {
            const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
            s.scale(j) = var > 0.0 ? std::sqrt(var) : 0.0;
        }
        return s;
    }

    [[nodiscard]] Matrix apply(const Matrix& x) const {
        Matrix out(x.rows(), x.cols());
        for (Index j = 0; j < x.cols(); ++j) {
            if (scale(j) > 0.0) {
                out.col(j) = (x.col(j).array() - mean(j)) / scale(j);
            } else {
                out.col(j).setZero();
            }
        }
        return out;
    }

    [[nodiscard]] Coefficients to_original(const Coefficients& w) const {
        Coefficients out;
        out.slopes = Vector::Zero(w.slopes.size());
        out.intercept = w.intercept;
        for (Index j = 0; j < w.slopes.size(); ++j) {
            if (scale(j) > 0.0) {
                out.slopes(j) = w.slopes(j) / scale(j);
                out.intercept -= out.slopes(j) * mean(j);
            }
        }
        return out;
    }
};

void check_labels(const Matrix& x, const Vector& delta) {
    if (delta.size() != x.rows()) {
        throw Error(ErrorKind::Dimension, "propensity: delta length does not match covariate rows");
    }
    for (Index i = 0; i < delta.size(); ++i) {
        if (delta(i) != 0.0 && delta(i) != 1.0) {
            throw Error(ErrorKind::Domain, "propensity: delta must be binary");
        }
    }
}

bool both_classes(const Vector& delta) {
    const double s = delta.sum();
    return s > 0.0 && s < static_cast<double>(delta.size());
}

// Block coordinate gradient descent state on fixed working covariates; keeps
// the linear index and probabilities in sync with the coefficients so that
// successive penalties can warm-start.
class BcgdSolver {
public:
    BcgdSolver(const Matrix& x, const Vector& delta, const GroupStructure& structure, const BcgdConfig& config)
        : x_(x), delta_(delta), structure_(structure), config_(config) {
        reset_null();
    }

    void reset_null() {
        const double rate = delta_.mean();
        coef_.intercept = logit(std::clamp(rate, kProbEps, 1.0 - kProbEps));
        coef_.slopes = Vector::Zero(x_.cols());
        eta_ = Vector::Constant(x_.rows(), coef_.intercept);
        prob_ = sigmoid(eta_);
    }

    [[nodiscard]] const Coefficients& coef() const { return coef_; }

    double objective(double lambda2) const {
        double nll = 0.0;
        for (Index i = 0; i < eta_.size(); ++i) {
            nll += softplus(eta_(i)) - delta_(i) * eta_(i);
        }
        return nll + lambda2 * group_penalty(coef_.slopes, structure_);
    }

    Vector gradient() const { return x_.transpose() * (prob_ - delta_); }

    KktReport kkt(double lambda2, const std::vector<std::size_t>* only) const {
        const Vector residual = prob_ - delta_;
        const Vector grad = x_.transpose() * residual;
        KktReport r;
        const double g0 = residual.sum();
        r.gradient_scale = 1.0 + std::max(std::abs(g0), grad.size() > 0 ? grad.lpNorm<Eigen::Infinity>() : 0.0);
        r.intercept = std::abs(g0) / r.gradient_scale;
        auto visit = [&](std::size_t g) {
            const auto& cols = structure_.groups[g];
            const double weight = lambda2 * std::sqrt(static_cast<double>(cols.size()));
            Vector bg(static_cast<Index>(cols.size()));
            Vector gg(static_cast<Index>(cols.size()));
            for (std::size_t k = 0; k < cols.size(); ++k) {
                bg(static_cast<Index>(k)) = coef_.slopes(cols[k]);
                gg(static_cast<Index>(k)) = grad(cols[k]);
            }
            const double bn = bg.norm();
            if (bn > 0.0) {
                r.active = std::max(r.active, (gg + weight * bg / bn).norm() / r.gradient_scale);
            } else {
                r.zero_excess = std::max(r.zero_excess, gg.norm() - weight);
            }
        };
        if (only != nullptr) {
            for (auto g : *only) visit(g);
        } else {
            for (std::size_t g = 0; g < structure_.size(); ++g) visit(g);
        }
        return r;
    }

    std::vector<std::size_t> active_groups() const {
        std::vector<std::size_t> out;
        for (std::size_t g = 0; g < structure_.size(); ++g) {
            for (auto c : structure_.groups[g]) {
                if (coef_.slopes(c) != 0.0) {
                    out.push_back(g);
                    break;
                }
            }
        }
        return out;
    }

    void update_intercept() {
        const Vector residual = prob_ - delta_;
        const double g0 = residual.sum();
        if (g0 == 0.0) {
            return;
        }
        const double h0 = std::clamp((prob_.array() * (1.0 - prob_.array())).sum(), config_.h_floor, config_.h_cap);
        const double d0 = -g0 / h0;
        const double decrease = d0 * g0;
        bool stalled = false;
        const double a = backtrack(decrease, config_, [&](double step) {
            return nll_change(prob_, delta_, Vector::Constant(eta_.size(), step * d0));
        }, stalled);
        if (stalled) {
            ++stalls_;
            return;
        }
        coef_.intercept += a * d0;
        eta_.array() += a * d0;
        prob_ = sigmoid(eta_);
    }

    void update_group(std::size_t g, double lambda2) {
        const auto& cols = structure_.groups[g];
        const auto df = static_cast<Index>(cols.size());
        const double weight = lambda2 * std::sqrt(static_cast<double>(df));
        const Vector residual = prob_ - delta_;

        Vector bg(df);
        Vector gg(df);
        for (Index k = 0; k < df; ++k) {
            bg(k) = coef_.slopes(cols[static_cast<std::size_t>(k)]);
            gg(k) = x_.col(cols[static_cast<std::size_t>(k)]).dot(residual);
        }
        if (bg.squaredNorm() == 0.0 && gg.norm() <= weight) {
            return;
        }

        double diag = 0.0;
        for (Index k = 0; k < df; ++k) {
            const auto col = x_.col(cols[static_cast<std::size_t>(k)]);
            diag += (prob_.array() * (1.0 - prob_.array()) * col.array().square()).sum();
        }
        const double h = std::clamp(diag / static_cast<double>(df), config_.h_floor, config_.h_cap);

        const Vector d = bcgd_direction(bg, gg, h, lambda2, df);
        if (d.squaredNorm() == 0.0) {
            return;
        }
        const double decrease = d.dot(gg) + weight * norm_change(bg, d, 1.0);
        if (!(decrease < 0.0)) {
            return;
        }

        Vector xd = Vector::Zero(x_.rows());
        for (Index k = 0; k < df; ++k) {
            xd += d(k) * x_.col(cols[static_cast<std::size_t>(k)]);
        }
        bool stalled = false;
        const double a = backtrack(decrease, config_, [&](double step) {
            return nll_change(prob_, delta_, step * xd) + weight * norm_change(bg, d, step);
        }, stalled);
        if (stalled) {
            ++stalls_;
            return;
        }
        for (Index k = 0; k < df; ++k) {
            const auto c = cols[static_cast<std::size_t>(k)];
            coef_.slopes(c) = bg(k) + a * d(k);
        }
        eta_ += a * xd;
        prob_ = sigmoid(eta_);
    }

    void sweep(double lambda2, const std::vector<std::size_t>* only) {
        update_intercept();
        if (only != nullptr) {
            for (auto g : *only) update_group(g, lambda2);
        } else {
            for (std::size_t g = 0; g < structure_.size(); ++g) update_group(g, lambda2);
        }
    }

    // Runs until the full KKT audit passes or the sweep budget is spent.
    PropensityModel solve(double lambda2) {
        PropensityModel out;
        out.lambda2 = lambda2;
        out.structure = structure_;
        int iter = 0;
        bool converged = false;
        double violation = std::numeric_limits<double>::infinity();
        stalls_ = 0;
        while (iter < config_.max_iter) {
            sweep(lambda2, nullptr);
            ++iter;
            out.objective_trace.push_back(objective(lambda2));
            while (iter < config_.max_iter) {
                const auto active = active_groups();
                if (kkt(lambda2, &active).worst() <= config_.kkt_tol) {
                    break;
                }
                sweep(lambda2, &active);
                ++iter;
                out.objective_trace.push_back(objective(lambda2));
            }
            violation = kkt(lambda2, nullptr).worst();
            if (violation <= config_.kkt_tol) {
                converged = true;
                break;
            }
        }
        out.coef = coef_;
        out.converged = converged;
        out.iterations = iter;
        out.kkt_violation = violation;
        if (!converged) {
            out.note = "block coordinate descent stopped after " + std::to_string(iter) +
                       " sweeps with KKT violation " + std::to_string(violation);
        }
        return out;
    }

    [[nodiscard]] double log_lik() const {
        double ll = 0.0;
        for (Index i = 0; i < eta_.size(); ++i) {
            ll -= softplus(eta_(i)) - delta_(i) * eta_(i);
        }
        return ll;
    }

private:
    const Matrix& x_;
    const Vector& delta_;
    const GroupStructure& structure_;
    const BcgdConfig& config_;
    Coefficients coef_;
    Vector eta_;
    Vector prob_;
    int stalls_ = 0;
};

Vector linear_index(const Coefficients& beta, const Matrix& x) {
    if (beta.slopes.size() != x.cols()) {
        throw Error(ErrorKind::Dimension, "propensity: coefficient length does not match covariates");
    }
    Vector eta = x * beta.slopes;
    eta.array() += beta.intercept;
    return eta;
}

} // namespace

GroupStructure GroupStructure::singletons(Index p) {
    GroupStructure s;
    s.groups.resize(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
        s.groups[static_cast<std::size_t>(j)] = {j};
    }
    return s;
}

void GroupStructure::validate(Index p) const {
    std::vector<int> seen(static_cast<std::size_t>(p), 0);
    for (const auto& g : groups) {
        if (g.empty()) {
            throw Error(ErrorKind::Domain, "group structure: empty group");
        }
        for (auto c : g) {
            if (c < 0 || c >= p) {
                throw Error(ErrorKind::Domain, "group structure: column index out of range");
            }
            ++seen[static_cast<std::size_t>(c)];
        }
    }
    for (auto s : seen) {
        if (s != 1) {
            throw Error(ErrorKind::Domain, "group structure: groups must partition the columns");
        }
    }
}

void BcgdConfig::validate() const {
    if (!(alpha0 > 0.0) || !(backtrack > 0.0 && backtrack < 1.0) || !(armijo_sigma > 0.0 && armijo_sigma < 1.0) ||
        !(h_floor > 0.0) || !(h_cap >= h_floor) || max_iter < 1 || max_backtracks < 0 || !(kkt_tol > 0.0)) {
        throw Error(ErrorKind::Domain, "invalid block coordinate descent configuration");
    }
}

std::vector<std::size_t> PropensityModel::nonzero_groups() const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < structure.size(); ++g) {
        for (auto c : structure.groups[g]) {
            if (coef.slopes(c) != 0.0) {
                out.push_back(g);
                break;
            }
        }
    }
    return out;
}

double logistic(double eta) {
    double p;
    if (eta >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-eta));
    } else {
        const double e = std::exp(eta);
        p = e / (1.0 + e);
    }
    return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

double logit(double prob) { return std::log(prob) - std::log1p(-prob); }

double log_likelihood(const Coefficients& beta, const Matrix& x, const Vector& delta) {
    check_labels(x, delta);
    const Vector eta = linear_index(beta, x);
    double ll = 0.0;
    for (Index i = 0; i < eta.size(); ++i) {
        ll += delta(i) * eta(i) - softplus(eta(i));
    }
    return ll;
}

double group_penalty(const Vector& slopes, const GroupStructure& structure) {
    double total = 0.0;
    for (const auto& g : structure.groups) {
        double sq = 0.0;
        for (auto c : g) sq += slopes(c) * slopes(c);
        total += std::sqrt(static_cast<double>(g.size())) * std::sqrt(sq);
    }
    return total;
}

double penalized_objective(const Coefficients& beta, const Matrix& x, const Vector& delta, double lambda2,
                           const GroupStructure& structure) {
    return -log_likelihood(beta, x, delta) + lambda2 * group_penalty(beta.slopes, structure);
}

Coefficients negative_loglik_gradient(const Coefficients& beta, const Matrix& x, const Vector& delta) {
    check_labels(x, delta);
    const Vector residual = sigmoid(linear_index(beta, x)) - delta;
    return {residual.sum(), x.transpose() * residual};
}

Vector bcgd_direction(const Vector& beta_g, const Vector& grad_g, double h_g, double lambda2, Index df_g) {
    if (!(h_g > 0.0)) {
        throw Error(ErrorKind::Domain, "bcgd_direction: curvature must be positive");
    }
    const Vector shifted = grad_g - h_g * beta_g;
    const double shifted_norm = shifted.norm();
    const double weight = lambda2 * std::sqrt(static_cast<double>(df_g));
    if (shifted_norm <= weight) {
        return -beta_g;
    }
    return -(grad_g - weight * shifted / shifted_norm) / h_g;
}

double armijo_step(const Coefficients& beta, const Coefficients& direction, double lambda2,
                   const GroupStructure& structure, const BcgdConfig& config, const Matrix& x,
                   const Vector& delta) {
    config.validate();
    const Coefficients grad = negative_loglik_gradient(beta, x, delta);
    double penalty_change = 0.0;
    std::vector<std::pair<Vector, Vector>> blocks;
    for (const auto& g : structure.groups) {
        Vector bg(static_cast<Index>(g.size()));
        Vector dg(static_cast<Index>(g.size()));
        for (std::size_t k = 0; k < g.size(); ++k) {
            bg(static_cast<Index>(k)) = beta.slopes(g[k]);
            dg(static_cast<Index>(k)) = direction.slopes(g[k]);
        }
        penalty_change += std::sqrt(static_cast<double>(g.size())) * norm_change(bg, dg, 1.0);
        blocks.emplace_back(std::move(bg), std::move(dg));
    }
    const double decrease =
        direction.intercept * grad.intercept + direction.slopes.dot(grad.slopes) + lambda2 * penalty_change;
    if (!(decrease < 0.0)) {
        throw Error(ErrorKind::Domain, "armijo_step: direction is not a descent direction (Delta >= 0)");
    }

    const Vector prob = sigmoid(linear_index(beta, x));
    Vector xd = x * direction.slopes;
    xd.array() += direction.intercept;
    bool stalled = false;
    const double a = backtrack(decrease, config, [&](double step) {
        double pen = 0.0;
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            pen += std::sqrt(static_cast<double>(blocks[k].first.size())) *
                   norm_change(blocks[k].first, blocks[k].second, step);
        }
        return nll_change(prob, delta, step * xd) + lambda2 * pen;
    }, stalled);
    if (stalled) {
        throw Error(ErrorKind::Convergence,
                    "armijo_step: no acceptable step after " + std::to_string(config.max_backtracks) +
                        " backtracks (Delta=" + std::to_string(decrease) + ")");
    }
    return a;
}

double lambda_max(const Matrix& x, const Vector& delta, const GroupStructure& structure, const BcgdConfig& config) {
    check_labels(x, delta);
    structure.validate(x.cols());
    const Matrix xw = config.standardize ? Standardizer::fit(x).apply(x) : x;
    const double rate = delta.mean();
    const Vector grad = xw.transpose() * (Vector::Constant(delta.size(), rate) - delta);
    double best = 0.0;
    for (const auto& g : structure.groups) {
        double sq = 0.0;
        for (auto c : g) sq += grad(c) * grad(c);
        best = std::max(best, std::sqrt(sq / static_cast<double>(g.size())));
    }
    return best;
}

PropensityModel fit_group_lasso(const Matrix& x, const Vector& delta, double lambda2, const GroupStructure& structure,
                                const BcgdConfig& config) {
    check_labels(x, delta);
    structure.validate(x.cols());
    config.validate();
    if (!both_classes(delta)) {
        throw Error(ErrorKind::DegenerateInput, "fit_group_lasso: response indicator must contain both 0 and 1");
    }
    if (!(lambda2 >= 0.0)) {
        throw Error(ErrorKind::Domain, "fit_group_lasso: penalty must be nonnegative");
    }
    const Standardizer st = config.standardize ? Standardizer::fit(x) : Standardizer::identity(x.cols());
    const Matrix xw = config.standardize ? st.apply(x) : x;
    BcgdSolver solver(xw, delta, structure, config);
    PropensityModel model = solver.solve(lambda2);
    model.coef = st.to_original(model.coef);
    return model;
}

LassoPath fit_group_lasso_bic(const Matrix& x, const Vector& delta, const GroupStructure& structure,
                              const BcgdConfig& config, int grid_size, double min_ratio, int patience) {
    check_labels(x, delta);
    structure.validate(x.cols());
    config.validate();
    if (!both_classes(delta)) {
        throw Error(ErrorKind::DegenerateInput, "fit_group_lasso_bic: response indicator must contain both 0 and 1");
    }
    if (grid_size < 1 || !(min_ratio > 0.0 && min_ratio <= 1.0)) {
        throw Error(ErrorKind::Domain, "fit_group_lasso_bic: invalid penalty grid");
    }
    const Standardizer st = config.standardize ? Standardizer::fit(x) : Standardizer::identity(x.cols());
    const Matrix xw = config.standardize ? st.apply(x) : x;
    BcgdConfig working = config;
    working.standardize = false;
    const double top = lambda_max(xw, delta, structure, working);

    LassoPath path;
    path.lambdas.resize(grid_size);
    for (int k = 0; k < grid_size; ++k) {
        const double t = grid_size > 1 ? static_cast<double>(k) / static_cast<double>(grid_size - 1) : 0.0;
        path.lambdas(k) = top * std::pow(min_ratio, t);
    }

    const double log_n = std::log(static_cast<double>(x.rows()));
    BcgdSolver solver(xw, delta, structure, working);
    std::vector<double> bic;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int k = 0; k < grid_size; ++k) {
        PropensityModel fit = solver.solve(path.lambdas(k));
        int nonzero = 0;
        for (Index j = 0; j < fit.coef.slopes.size(); ++j) {
            nonzero += fit.coef.slopes(j) != 0.0 ? 1 : 0;
        }
        const double score = -2.0 * solver.log_lik() + log_n * static_cast<double>(nonzero + 1);
        bic.push_back(score);
        path.nonzero.push_back(nonzero);
        if (score < best) {
            best = score;
            since_best = 0;
            path.chosen = k;
            path.model = std::move(fit);
        } else if (++since_best >= patience) {
            break;
        }
    }
    path.lambdas.conservativeResize(static_cast<Index>(bic.size()));
    path.bic = Eigen::Map<const Vector>(bic.data(), static_cast<Index>(bic.size()));
    path.model.coef = st.to_original(path.model.coef);
    return path;
}

PropensityModel fit_logistic_mle(const Matrix& x, const Vector& delta, int max_iter, double tol) {
    check_labels(x, delta);
    if (!both_classes(delta)) {
        throw Error(ErrorKind::DegenerateInput, "fit_logistic_mle: response indicator must contain both 0 and 1");
    }
    const Index n = x.rows();
    const Index p = x.cols();
    PropensityModel model;
    model.structure = GroupStructure::singletons(p);
    model.coef.intercept = logit(delta.mean());
    model.coef.slopes = Vector::Zero(p);
    if (p == 0) {
        model.converged = true;
        return model;
    }
    if (p >= n) {
        model.converged = false;
        model.note = "p >= n: maximum likelihood estimate does not exist";
        return model;
    }

    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    Vector beta = Vector::Zero(p + 1);
    beta(0) = model.coef.intercept;
    bool jittered = false;
    for (int it = 0; it < max_iter; ++it) {
        const Vector eta = design * beta;
        if (eta.lpNorm<Eigen::Infinity>() > 30.0) {
            model.note = "fitted probabilities numerically 0 or 1 (separation)";
            model.iterations = it;
            model.converged = false;
            model.coef.intercept = beta(0);
            model.coef.slopes = beta.tail(p);
            return model;
        }
        const Vector prob = sigmoid(eta);
        const Vector score = design.transpose() * (delta - prob);
        if (score.lpNorm<Eigen::Infinity>() <= tol * static_cast<double>(n)) {
            model.converged = true;
            model.iterations = it;
            break;
        }
        const Vector w = prob.array() * (1.0 - prob.array());
        Matrix info = Matrix::Zero(p + 1, p + 1);
        info.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose() * w.cwiseSqrt().asDiagonal());
        Eigen::LLT<Matrix, Eigen::Lower> llt(info);
        if (llt.info() != Eigen::Success) {
            if (jittered) {
                model.note = "singular information matrix";
                model.iterations = it;
                model.converged = false;
                return model;
            }
            jittered = true;
            info.diagonal().array() += 1e-8 * info.diagonal().mean();
            llt.compute(info);
            if (llt.info() != Eigen::Success) {
                model.note = "singular information matrix";
                model.iterations = it;
                model.converged = false;
                return model;
            }
        }
        beta += llt.solve(score);
        if (!beta.allFinite()) {
            model.note = "Newton iterates diverged";
            model.iterations = it;
            model.converged = false;
            return model;
        }
        model.iterations = it + 1;
    }
    model.coef.intercept = beta(0);
    model.coef.slopes = beta.tail(p);
    if (!model.converged) {
        model.note = "Newton-Raphson did not converge in " + std::to_string(max_iter) + " iterations";
    }
    return model;
}

Vector predict_propensity(const PropensityModel& model, const Matrix& x) {
    return sigmoid(linear_index(model.coef, x));
}

double KktReport::worst() const { return std::max({intercept, active, zero_excess}); }

KktReport kkt_report(const Coefficients& beta, const Matrix& x, const Vector& delta, double lambda2,
                     const GroupStructure& structure) {
    check_labels(x, delta);
    structure.validate(x.cols());
    const Coefficients grad = negative_loglik_gradient(beta, x, delta);
    KktReport r;
    r.gradient_scale = 1.0 + std::max(std::abs(grad.intercept),
                                      grad.slopes.size() > 0 ? grad.slopes.lpNorm<Eigen::Infinity>() : 0.0);
    r.intercept = std::abs(grad.intercept) / r.gradient_scale;
    for (const auto& g : structure.groups) {
        const double weight = lambda2 * std::sqrt(static_cast<double>(g.size()));
        Vector bg(static_cast<Index>(g.size()));
        Vector gg(static_cast<Index>(g.size()));
        for (std::size_t k = 0; k < g.size(); ++k) {
            bg(static_cast<Index>(k)) = beta.slopes(g[k]);
            gg(static_cast<Index>(k)) = grad.slopes(g[k]);
        }
        const double bn = bg.norm();
        if (bn > 0.0) {
            r.active = std::max(r.active, (gg + weight * bg / bn).norm() / r.gradient_scale);
        } else {
            r.zero_excess = std::max(r.zero_excess, gg.norm() - weight);
        }
    }
    return r;
}

} // namespace aipw
