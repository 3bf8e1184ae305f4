#pragma once

// Independent reference computations used by the unit tests. Deliberately
// naive: loops, full sorts and dense inverses instead of the library paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix uniform_matrix(int n, int p, unsigned seed, double lo = -0.5, double hi = 0.5) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = u(gen);
    return x;
}

inline Vector normal_vector(int n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = z(gen);
    return v;
}

inline double sq_dist(const Matrix& a, int i, const Matrix& b, int j) {
    double s = 0.0;
    for (int l = 0; l < a.cols(); ++l) {
        const double d = a(i, l) - b(j, l);
        s += d * d;
    }
    return s;
}

inline double lower_median_distance(const Matrix& x) {
    std::vector<double> d;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = i + 1; j < x.rows(); ++j) d.push_back(std::sqrt(sq_dist(x, i, x, j)));
    std::sort(d.begin(), d.end());
    return d[(d.size() - 1) / 2];
}

inline double kernel(const Matrix& a, int i, const Matrix& b, int j, double sigma) {
    return std::exp(-sq_dist(a, i, b, j) / (2.0 * sigma * sigma));
}

inline Matrix kernel_matrix(const Matrix& x, double sigma) {
    Matrix k(x.rows(), x.rows());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.rows(); ++j) k(i, j) = kernel(x, i, x, j, sigma);
    return k;
}

inline Vector krr_alpha(const Matrix& x, const Vector& y, double sigma, double ridge) {
    Matrix a = kernel_matrix(x, sigma);
    a.diagonal().array() += ridge;
    return a.inverse() * y;
}

inline double krr_predict(const Matrix& train, const Vector& alpha, double sigma, const Matrix& at, int row) {
    double f = 0.0;
    for (int i = 0; i < train.rows(); ++i) f += alpha(i) * kernel(train, i, at, row, sigma);
    return f;
}

inline double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Bernoulli log-likelihood accumulated in long double.
inline double loglik(double b0, const Vector& b, const Matrix& x, const Vector& delta) {
    long double total = 0.0L;
    for (int i = 0; i < x.rows(); ++i) {
        long double eta = b0;
        for (int l = 0; l < x.cols(); ++l) eta += static_cast<long double>(x(i, l)) * b(l);
        const long double soft = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        total += delta(i) * eta - soft;
    }
    return static_cast<double>(total);
}

// Plain Newton-Raphson on the logistic score, intercept in column 0.
inline Vector newton_logistic(const Matrix& x, const Vector& delta, int iters = 100) {
    const int n = static_cast<int>(x.rows());
    Matrix z(n, x.cols() + 1);
    z.col(0).setOnes();
    z.rightCols(x.cols()) = x;
    Vector beta = Vector::Zero(z.cols());
    for (int it = 0; it < iters; ++it) {
        const Vector eta = z * beta;
        Vector pi(n), w(n);
        for (int i = 0; i < n; ++i) {
            pi(i) = 1.0 / (1.0 + std::exp(-eta(i)));
            w(i) = pi(i) * (1.0 - pi(i));
        }
        const Vector score = z.transpose() * (delta - pi);
        const Matrix info = z.transpose() * w.asDiagonal() * z;
        const Vector step = info.ldlt().solve(score);
        beta += step;
        if (step.lpNorm<Eigen::Infinity>() < 1e-13) break;
    }
    return beta;
}

inline double skewness(const std::vector<double>& v) {
    double m = 0;
    for (double a : v) m += a;
    m /= v.size();
    double m2 = 0, m3 = 0;
    for (double a : v) {
        m2 += (a - m) * (a - m);
        m3 += (a - m) * (a - m) * (a - m);
    }
    m2 /= v.size();
    m3 /= v.size();
    return m3 / std::pow(m2, 1.5);
}

} // namespace oracle
