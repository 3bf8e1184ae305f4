#include "aipw/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aipw {

namespace {

double mean_of(const Vector& v) { return v.sum() / static_cast<double>(v.size()); }

double observed_mean(const IncompleteDataset& data) {
    double total = 0.0;
    Index m = 0;
    for (Index i = 0; i < data.n(); ++i) {
        if (data.delta(i) == 1.0) {
            total += data.y(i);
            ++m;
        }
    }
    return total / static_cast<double>(m);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::CC: return "CC";
        case Method::PS: return "PS";
        case Method::DI: return "DI";
        case Method::NAIPW: return "NAIPW";
        case Method::PROP: return "PROP";
    }
    return "?";
}

Method parse_method(const std::string& tag) {
    std::string up = tag;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "CC") return Method::CC;
    if (up == "PS") return Method::PS;
    if (up == "DI") return Method::DI;
    if (up == "NAIPW") return Method::NAIPW;
    if (up == "PROP") return Method::PROP;
    throw Error(ErrorKind::Usage, "unknown estimator '" + tag + "' (expected CC, PS, DI, NAIPW or PROP)");
}

double AipwEstimate::standard_error() const {
    const auto n = static_cast<double>(pseudo_values.size());
    return n > 0 ? std::sqrt(sigma2 / n) : 0.0;
}

AipwEstimate aipw_estimate(const IncompleteDataset& data, const Vector& f0_values, const Vector& pi_hat,
                           const AipwOptions& options) {
    data.validate();
    const Index n = data.n();
    if (f0_values.size() != n || pi_hat.size() != n) {
        throw Error(ErrorKind::Dimension, "aipw_estimate: imputations and propensities must cover all n rows");
    }
    AipwEstimate out;
    Vector pi = pi_hat;
    Index below_floor = 0;
    for (Index i = 0; i < n; ++i) {
        if (!(pi(i) > 0.0 && pi(i) <= 1.0)) {
            throw Error(ErrorKind::Domain, "aipw_estimate: propensity at row " + std::to_string(i) +
                                               " is outside (0, 1]: " + fmt(pi(i)));
        }
        if (!std::isfinite(f0_values(i))) {
            throw Error(ErrorKind::Domain, "aipw_estimate: non-finite imputation at row " + std::to_string(i));
        }
        if (pi(i) < options.warn_floor) {
            ++below_floor;
        }
        if (options.clamp) {
            pi(i) = std::clamp(pi(i), options.clamp_eps, 1.0 - options.clamp_eps);
        }
    }
    if (below_floor > 0) {
        out.warnings.push_back(std::to_string(below_floor) + " propensities below " + fmt(options.warn_floor) +
                               (options.clamp ? " (clamped)" : ""));
    }

    double scale = 1.0;
    if (options.normalization == Normalization::WeightSum) {
        double weight_sum = 0.0;
        for (Index i = 0; i < n; ++i) {
            if (data.delta(i) == 1.0) weight_sum += 1.0 / pi(i);
        }
        scale = static_cast<double>(n) / weight_sum;
    }

    out.pseudo_values.resize(n);
    for (Index i = 0; i < n; ++i) {
        double v = f0_values(i);
        // unobserved y is never touched, so a NaN sentinel cannot leak
        if (data.delta(i) == 1.0) {
            v += scale * (data.y(i) - f0_values(i)) / pi(i);
        }
        out.pseudo_values(i) = v;
    }
    out.theta = mean_of(out.pseudo_values);
    out.sigma2 = n > 1 ? (out.pseudo_values.array() - out.theta).square().sum() / static_cast<double>(n - 1) : 0.0;
    const double half = kCriticalValue * std::sqrt(out.sigma2 / static_cast<double>(n));
    out.ci_low = out.theta - half;
    out.ci_high = out.theta + half;
    out.response_rate = static_cast<double>(data.observed_count()) / static_cast<double>(n);
    return out;
}

AipwEstimate aipw_estimate(const IncompleteDataset& data, const KrrModel& f0, const Vector& pi_hat,
                           const AipwOptions& options) {
    return aipw_estimate(data, predict_full(f0, data.x), pi_hat, options);
}

EstimatorReport cc_estimate(const IncompleteDataset& data) {
    data.validate();
    EstimatorReport r;
    r.method = Method::CC;
    r.estimate = observed_mean(data);
    r.diagnostics["observed"] = std::to_string(data.observed_count());
    return r;
}

EstimatorReport ps_estimate(const IncompleteDataset& data, const PropensityModel& mle) {
    data.validate();
    EstimatorReport r;
    r.method = Method::PS;
    if (!mle.converged) {
        r.converged = false;
        r.estimate = std::numeric_limits<double>::quiet_NaN();
        r.diagnostics["failure"] = mle.note.empty() ? "propensity fit did not converge" : mle.note;
        return r;
    }
    const Vector pi = predict_propensity(mle, data.x);
    double total = 0.0;
    for (Index i = 0; i < data.n(); ++i) {
        if (data.delta(i) == 1.0) total += data.y(i) / pi(i);
    }
    r.estimate = total / static_cast<double>(data.n());
    r.diagnostics["iterations"] = std::to_string(mle.iterations);
    return r;
}

EstimatorReport ps_estimate(const IncompleteDataset& data) {
    data.validate();
    if (data.fully_observed()) {
        EstimatorReport r;
        r.method = Method::PS;
        r.estimate = observed_mean(data);
        r.diagnostics["note"] = "all responses observed; propensity identically 1";
        return r;
    }
    return ps_estimate(data, fit_logistic_mle(data.x, data.delta));
}

KrrModel fit_complete_case_krr(const IncompleteDataset& data, double ridge) {
    data.validate();
    const Matrix xo = data.observed_x();
    const Vector yo = data.observed_y();
    if (xo.rows() < 2) {
        return constant_model(yo, data.p());
    }
    return fit_krr(xo, yo, KernelConfig{std::nullopt, ridge});
}

EstimatorReport di_estimate(const IncompleteDataset& data, const KrrModel& f_hat) {
    data.validate();
    EstimatorReport r;
    r.method = Method::DI;
    double total = 0.0;
    if (data.fully_observed()) {
        for (Index i = 0; i < data.n(); ++i) total += data.y(i);
    } else {
        const Vector f = predict_full(f_hat, data.x);
        for (Index i = 0; i < data.n(); ++i) {
            total += data.delta(i) == 1.0 ? data.y(i) : f(i);
        }
    }
    r.estimate = total / static_cast<double>(data.n());
    return r;
}

EstimatorReport naipw_estimate(const IncompleteDataset& data, const KrrModel& f_hat, const PropensityModel& mle) {
    data.validate();
    EstimatorReport r;
    r.method = Method::NAIPW;
    if (data.fully_observed()) {
        r.estimate = observed_mean(data);
        r.diagnostics["note"] = "all responses observed; propensity identically 1";
        return r;
    }
    if (!mle.converged) {
        r.converged = false;
        r.estimate = std::numeric_limits<double>::quiet_NaN();
        r.diagnostics["failure"] = mle.note.empty() ? "propensity fit did not converge" : mle.note;
        return r;
    }
    const AipwEstimate est = aipw_estimate(data, f_hat, predict_propensity(mle, data.x));
    r.estimate = est.theta;
    r.diagnostics["sigma2"] = fmt(est.sigma2);
    return r;
}

PropResult prop_estimate_detailed(const IncompleteDataset& data, const KernelConfig& kernel,
                                  const ThresholdSearchConfig& search, const LassoSettings& lasso,
                                  const AipwOptions& options, const KrrModel* initial) {
    data.validate();
    PropResult out;
    const Matrix xo = data.observed_x();
    const Vector yo = data.observed_y();
    if (xo.rows() >= 4) {
        out.imputation = fit_sparse_krr_detailed(xo, yo, kernel, search, initial);
    } else {
        out.imputation.model = constant_model(yo, data.p());
        out.imputation.search.no_signal = true;
    }
    out.f0_values = predict_full(out.imputation.model, data.x);

    if (data.fully_observed()) {
        out.pi_hat = Vector::Ones(data.n());
        out.propensity.coef.slopes = Vector::Zero(data.p());
        out.propensity.coef.intercept = std::numeric_limits<double>::infinity();
        out.propensity.structure = lasso.structure ? *lasso.structure : GroupStructure::singletons(data.p());
        out.propensity.converged = true;
        out.propensity.note = "all responses observed; propensity identically 1";
    } else {
        const GroupStructure structure = lasso.structure ? *lasso.structure : GroupStructure::singletons(data.p());
        if (lasso.lambda2) {
            out.propensity = fit_group_lasso(data.x, data.delta, *lasso.lambda2, structure, lasso.bcgd);
        } else {
            out.propensity = fit_group_lasso_bic(data.x, data.delta, structure, lasso.bcgd, lasso.path_size,
                                                 lasso.path_min_ratio)
                                 .model;
        }
        out.pi_hat = predict_propensity(out.propensity, data.x);
    }
    out.estimate = aipw_estimate(data, out.f0_values, out.pi_hat, options);
    if (!out.propensity.converged) {
        out.estimate.warnings.push_back("propensity: " + out.propensity.note);
    }
    return out;
}

AipwEstimate prop_estimate(const IncompleteDataset& data, const KernelConfig& kernel,
                           const ThresholdSearchConfig& search, const LassoSettings& lasso,
                           const AipwOptions& options) {
    return prop_estimate_detailed(data, kernel, search, lasso, options).estimate;
}

} // namespace aipw
