#include "aipw/simgen.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "aipw/propensity.hpp"
#include "aipw/rng.hpp"

namespace aipw {

namespace {

void require_columns(const Matrix& x, Index p, const char* what) {
    if (x.cols() < p) {
        throw Error(ErrorKind::Dimension,
                    std::string(what) + ": needs at least " + std::to_string(p) + " covariates");
    }
}

Vector gaussian_noise(Index n, std::uint64_t seed, double scale) {
    Vector eps = Vector::Zero(n);
    if (scale == 0.0) {
        return eps;
    }
    Stream rng(seed, Purpose::OutcomeNoise);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i) {
        eps(i) = scale * normal(rng);
    }
    return eps;
}

} // namespace

void SimulationSpec::validate() const {
    const Index need = outcome == OutcomeModel::M2 ? 5 : 4;
    if (n < 1) {
        throw Error(ErrorKind::Domain, "simulation: n must be positive");
    }
    if (p < need) {
        throw Error(ErrorKind::Domain, "simulation: p too small for the signal covariates of " + to_string(outcome));
    }
}

std::string to_string(OutcomeModel m) { return m == OutcomeModel::M1 ? "M1" : "M2"; }
std::string to_string(ResponseModel r) { return r == ResponseModel::R1 ? "R1" : "R2"; }

Matrix gen_covariates(Index n, Index p, std::uint64_t seed) {
    Stream rng(seed, Purpose::Covariates);
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            x(i, j) = rng.uniform01() - 0.5;
        }
    }
    return x;
}

Vector gen_outcome_m1(const Matrix& x, std::uint64_t seed, double noise_scale) {
    require_columns(x, 4, "M1 outcome");
    Vector y = 5.0 * x.col(0) + 6.0 * x.col(1) + 4.0 * x.col(2) + 4.0 * x.col(3);
    return y + gaussian_noise(x.rows(), seed, noise_scale);
}

double m2_h(double x4) {
    const double s = std::sin(x4 * std::numbers::pi);
    const double c = std::cos(x4 * std::numbers::pi);
    return 0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c * c * c + 0.5 * s * s * s;
}

Vector gen_outcome_m2(const Matrix& x, std::uint64_t seed, double noise_scale) {
    require_columns(x, 5, "M2 outcome");
    Vector y(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        const double s5 = std::sin(x(i, 4) * std::numbers::pi);
        y(i) = 6.0 * x(i, 0) + 4.0 * (2.0 * x(i, 1) + 1.0) * (2.0 * x(i, 2) - 1.0) + 6.0 * m2_h(x(i, 3)) +
               5.0 * s5 / (2.0 - s5);
    }
    return y + gaussian_noise(x.rows(), seed, noise_scale);
}

Vector response_prob_r1(const Matrix& x) {
    require_columns(x, 3, "R1 response");
    Vector prob(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        prob(i) = logistic(-0.1 + 2.0 * x(i, 0) + 2.0 * x(i, 2));
    }
    return prob;
}

Vector response_prob_r2(const Matrix& x) {
    require_columns(x, 4, "R2 response");
    Vector prob(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        prob(i) = std::sin(6.0 * x(i, 1) + 8.0 * x(i, 3)) / 3.0 + 0.5;
    }
    return prob;
}

Vector mask_prob_app(const Matrix& x) {
    require_columns(x, 10, "application mask");
    Vector prob(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        prob(i) = logistic(1.0 - 0.6 * x(i, 4) - x(i, 5) + 0.5 * x(i, 9));
    }
    return prob;
}

Vector bernoulli(const Vector& prob, std::uint64_t seed, std::uint64_t purpose_index) {
    Stream rng(seed, Purpose::Response, purpose_index);
    Vector out(prob.size());
    for (Index i = 0; i < prob.size(); ++i) {
        out(i) = rng.uniform01() < prob(i) ? 1.0 : 0.0;
    }
    return out;
}

Vector gen_response_r1(const Matrix& x, std::uint64_t seed) { return bernoulli(response_prob_r1(x), seed, 1); }
Vector gen_response_r2(const Matrix& x, std::uint64_t seed) { return bernoulli(response_prob_r2(x), seed, 2); }

Vector gen_mask_app(const Matrix& x, std::uint64_t seed) {
    const Vector prob = mask_prob_app(x);
    Stream rng(seed, Purpose::Mask);
    Vector out(prob.size());
    for (Index i = 0; i < prob.size(); ++i) {
        out(i) = rng.uniform01() < prob(i) ? 1.0 : 0.0;
    }
    return out;
}

IncompleteDataset generate(const SimulationSpec& spec) {
    spec.validate();
    Matrix x = gen_covariates(spec.n, spec.p, spec.seed);
    const Vector y = spec.outcome == OutcomeModel::M1 ? gen_outcome_m1(x, spec.seed) : gen_outcome_m2(x, spec.seed);
    const Vector delta = spec.response == ResponseModel::R1 ? gen_response_r1(x, spec.seed)
                                                            : gen_response_r2(x, spec.seed);
    return IncompleteDataset::from_full(std::move(x), y, delta);
}

double m2_oracle_mean(std::uint64_t seed, Index draws) {
    if (draws < 1) {
        throw Error(ErrorKind::Domain, "m2_oracle_mean: need at least one draw");
    }
    // Chunked so the 5-column design never has to be held in memory at once.
    constexpr Index kChunk = 100'000;
    long double total = 0.0L;
    for (Index start = 0, chunk = 0; start < draws; start += kChunk, ++chunk) {
        const Index rows = std::min(kChunk, draws - start);
        const std::uint64_t key = derive_key({seed, static_cast<std::uint64_t>(Purpose::Oracle),
                                              static_cast<std::uint64_t>(chunk)});
        const Matrix x = gen_covariates(rows, 5, key);
        const Vector y = gen_outcome_m2(x, key);
        for (Index i = 0; i < rows; ++i) total += y(i);
    }
    return static_cast<double>(total / static_cast<long double>(draws));
}

void studentize_columns(Matrix& x) {
    if (x.rows() < 2) {
        throw Error(ErrorKind::DegenerateInput, "studentize: need at least 2 rows");
    }
    for (Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).mean();
        x.col(j).array() -= mean;
        const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(x.rows() - 1));
        if (sd > 0.0) {
            x.col(j) /= sd;
        }
    }
}

void studentize(Vector& v) {
    Matrix as_col = v;
    studentize_columns(as_col);
    v = as_col.col(0);
}

FullData gen_retail_standin(Index n, Index p, std::uint64_t seed) {
    if (p < 10) {
        throw Error(ErrorKind::Domain, "retail stand-in needs at least 10 columns");
    }
    Stream rng(seed, Purpose::Standin);
    std::normal_distribution<double> normal(0.0, 1.0);
    FullData data;
    data.x.resize(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            data.x(i, j) = normal(rng);
        }
    }
    studentize_columns(data.x);
    data.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        const auto& r = data.x.row(i);
        data.y(i) = r(4) + r(5) - 0.5 * r(9) + 0.5 * std::tanh(1.5 * r(0)) + 0.5 * normal(rng);
    }
    studentize(data.y);
    return data;
}

} // namespace aipw
