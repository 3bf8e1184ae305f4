#include "aipw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aipw {

namespace {

std::string dims(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

Matrix gaussian_of(const Matrix& sq_dist, double sigma) {
    const double scale = -1.0 / (2.0 * sigma * sigma);
    return (sq_dist.array() * scale).exp().matrix();
}

} // namespace

void check_covariates(const Matrix& x, const char* what) {
    if (x.rows() < 1 || x.cols() < 1) {
        throw Error(ErrorKind::DegenerateInput, std::string(what) + ": empty matrix " + dims(x));
    }
    if (!x.allFinite()) {
        throw Error(ErrorKind::Domain, std::string(what) + ": non-finite entry");
    }
}

void KernelConfig::validate() const {
    if (bandwidth && (!(*bandwidth > 0.0) || !std::isfinite(*bandwidth))) {
        throw Error(ErrorKind::Domain, "kernel bandwidth must be positive and finite");
    }
    if (!(ridge > 0.0) || !std::isfinite(ridge)) {
        throw Error(ErrorKind::Domain, "ridge parameter must be positive and finite");
    }
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw Error(ErrorKind::Dimension, "squared_distances: column mismatch " + dims(a) + " vs " + dims(b));
    }
    // Centering shrinks the norms and with them the cancellation error.
    const Eigen::RowVectorXd center = a.colwise().mean();
    const Matrix ac = a.rowwise() - center;
    const Matrix bc = b.rowwise() - center;
    const Vector an = ac.rowwise().squaredNorm();
    const Vector bn = bc.rowwise().squaredNorm();
    Matrix d = -2.0 * ac * bc.transpose();
    d.colwise() += an;
    d.rowwise() += bn.transpose();
    return d.cwiseMax(0.0);
}

Matrix squared_distances(const Matrix& x) {
    const Index n = x.rows();
    const Matrix xc = x.rowwise() - x.colwise().mean();
    Matrix gram = Matrix::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xc);
    Matrix d(n, n);
    for (Index j = 0; j < n; ++j) {
        d(j, j) = 0.0;
        for (Index i = j + 1; i < n; ++i) {
            const double v = std::max(0.0, gram(i, i) + gram(j, j) - 2.0 * gram(i, j));
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

double median_bandwidth_from_squared(const Matrix& sq_dist) {
    const Index n = sq_dist.rows();
    if (n < 2) {
        throw Error(ErrorKind::DegenerateInput, "median_bandwidth: need at least 2 rows");
    }
    std::vector<double> pairs;
    pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            pairs.push_back(sq_dist(i, j));
        }
    }
    const auto mid = pairs.begin() + static_cast<std::ptrdiff_t>((pairs.size() - 1) / 2);
    std::nth_element(pairs.begin(), mid, pairs.end());
    const double median = std::sqrt(*mid);
    if (!(median > 0.0)) {
        throw Error(ErrorKind::SingularBandwidth, "median pairwise distance is zero");
    }
    return median;
}

double median_bandwidth(const Matrix& x) {
    if (x.rows() < 2) {
        throw Error(ErrorKind::DegenerateInput, "median_bandwidth: need at least 2 rows");
    }
    check_covariates(x);
    return median_bandwidth_from_squared(squared_distances(x));
}

double gaussian_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u, double sigma) {
    if (x.size() != u.size()) {
        throw Error(ErrorKind::Dimension, "gaussian_kernel: length mismatch");
    }
    if (!(sigma > 0.0)) {
        throw Error(ErrorKind::Domain, "gaussian_kernel: sigma must be positive");
    }
    return std::exp(-(x - u).squaredNorm() / (2.0 * sigma * sigma));
}

Matrix kernel_from_squared(const Matrix& sq_dist, double sigma) {
    return gaussian_of(sq_dist, sigma);
}

Matrix kernel_matrix(const Matrix& x, double sigma) {
    if (!(sigma > 0.0)) {
        throw Error(ErrorKind::Domain, "kernel_matrix: sigma must be positive");
    }
    return gaussian_of(squared_distances(x), sigma);
}

KrrModel fit_krr_with_kernel(const Matrix& x_obs, const Vector& y_obs, double bandwidth, double ridge,
                             const Matrix& kernel) {
    KernelConfig{bandwidth, ridge}.validate();
    const Index m = x_obs.rows();
    if (m < 1 || y_obs.size() != m) {
        throw Error(ErrorKind::Dimension, "fit_krr: need m >= 1 rows matching the response length");
    }
    if (kernel.rows() != m || kernel.cols() != m) {
        throw Error(ErrorKind::Dimension, "fit_krr: kernel matrix size mismatch");
    }
    if (!y_obs.allFinite()) {
        throw Error(ErrorKind::Domain, "fit_krr: non-finite response");
    }

    Matrix system = kernel;
    system.diagonal().array() += ridge;

    Vector alpha;
    Eigen::LLT<Matrix> llt(system);
    if (llt.info() == Eigen::Success) {
        alpha = llt.solve(y_obs);
    } else {
        Eigen::LDLT<Matrix> ldlt(system);
        if (ldlt.info() != Eigen::Success) {
            throw Error(ErrorKind::Numerical, "fit_krr: symmetric factorization failed");
        }
        alpha = ldlt.solve(y_obs);
    }

    const double residual = (system * alpha - y_obs).lpNorm<Eigen::Infinity>();
    const double bound = 1e-8 * (1.0 + y_obs.lpNorm<Eigen::Infinity>());
    if (!alpha.allFinite() || residual > bound) {
        const Vector diag = system.diagonal();
        std::ostringstream os;
        os << "fit_krr: linear system residual " << residual << " exceeds " << bound
           << " (m=" << m << ", ridge=" << ridge << ", diag range [" << diag.minCoeff() << ", "
           << diag.maxCoeff() << "])";
        throw Error(ErrorKind::Numerical, os.str());
    }

    KrrModel model;
    model.train_x = x_obs;
    model.alpha = std::move(alpha);
    model.bandwidth = bandwidth;
    model.ridge = ridge;
    model.input_dim = x_obs.cols();
    model.active_set.resize(static_cast<std::size_t>(x_obs.cols()));
    for (Index l = 0; l < x_obs.cols(); ++l) {
        model.active_set[static_cast<std::size_t>(l)] = l;
    }
    return model;
}

KrrModel fit_krr(const Matrix& x_obs, const Vector& y_obs, const KernelConfig& config) {
    check_covariates(x_obs, "fit_krr");
    config.validate();
    const Matrix sq = squared_distances(x_obs);
    const double sigma = config.bandwidth ? *config.bandwidth : median_bandwidth_from_squared(sq);
    return fit_krr_with_kernel(x_obs, y_obs, sigma, config.ridge, gaussian_of(sq, sigma));
}

KrrModel constant_model(const Vector& y_obs, Index input_dim) {
    if (y_obs.size() < 1) {
        throw Error(ErrorKind::DegenerateInput, "constant_model: empty response");
    }
    KrrModel model;
    model.train_x = Matrix(0, 0);
    model.intercept = y_obs.mean();
    model.input_dim = input_dim;
    return model;
}

Vector predict(const KrrModel& model, const Matrix& x_new) {
    if (model.intercept_only()) {
        return Vector::Constant(x_new.rows(), model.intercept);
    }
    if (x_new.cols() != model.train_x.cols()) {
        throw Error(ErrorKind::Dimension, "predict: expected " + std::to_string(model.train_x.cols()) +
                                              " columns, got " + std::to_string(x_new.cols()));
    }
    const Matrix k = gaussian_of(squared_distances(x_new, model.train_x), model.bandwidth);
    return k * model.alpha;
}

Vector predict_full(const KrrModel& model, const Matrix& x_full) {
    if (x_full.cols() != model.input_dim) {
        throw Error(ErrorKind::Dimension, "predict_full: expected " + std::to_string(model.input_dim) +
                                              " columns, got " + std::to_string(x_full.cols()));
    }
    if (model.intercept_only()) {
        return Vector::Constant(x_full.rows(), model.intercept);
    }
    if (static_cast<Index>(model.active_set.size()) == model.input_dim) {
        return predict(model, x_full);
    }
    return predict(model, select_columns(x_full, model.active_set));
}

Matrix gradient_matrix(const KrrModel& model, const Matrix& x_eval) {
    if (model.intercept_only()) {
        return Matrix::Zero(x_eval.rows(), 0);
    }
    if (x_eval.cols() != model.train_x.cols()) {
        throw Error(ErrorKind::Dimension, "gradient: column mismatch");
    }
    const Matrix k = gaussian_of(squared_distances(x_eval, model.train_x), model.bandwidth);
    // d/dx_l sum_i a_i K(x_i, x) = sum_i a_i K(x_i, x) (x_il - x_l) / sigma^2
    const Matrix weighted = k * model.alpha.asDiagonal();
    const Vector row_sums = k * model.alpha;
    const double s2 = model.bandwidth * model.bandwidth;
    return (weighted * model.train_x - row_sums.asDiagonal() * x_eval) / s2;
}

Vector gradient_eval(const KrrModel& model, const Eigen::Ref<const Vector>& x_new) {
    if (model.intercept_only()) {
        return Vector::Zero(0);
    }
    if (x_new.size() != model.train_x.cols()) {
        throw Error(ErrorKind::Dimension, "gradient_eval: length mismatch");
    }
    const Matrix row = x_new.transpose();
    return gradient_matrix(model, row).row(0).transpose();
}

GradientNorms gradient_norms(const KrrModel& model, const Matrix& x_obs) {
    if (model.intercept_only()) {
        return GradientNorms{Vector::Zero(0)};
    }
    const Matrix g = gradient_matrix(model, x_obs);
    return GradientNorms{g.colwise().squaredNorm().transpose() / static_cast<double>(x_obs.rows())};
}

GradientNorms gradient_norms_with_kernel(const KrrModel& model, const Matrix& kernel) {
    if (model.intercept_only()) {
        return GradientNorms{Vector::Zero(0)};
    }
    const Matrix& x = model.train_x;
    const Matrix weighted = kernel * model.alpha.asDiagonal();
    const Vector row_sums = kernel * model.alpha;
    const double s2 = model.bandwidth * model.bandwidth;
    const Matrix g = (weighted * x - row_sums.asDiagonal() * x) / s2;
    return GradientNorms{g.colwise().squaredNorm().transpose() / static_cast<double>(x.rows())};
}

Matrix select_columns(const Matrix& x, const std::vector<Index>& cols) {
    Matrix out(x.rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] < 0 || cols[j] >= x.cols()) {
            throw Error(ErrorKind::Dimension, "select_columns: index out of range");
        }
        out.col(static_cast<Index>(j)) = x.col(cols[j]);
    }
    return out;
}

Matrix select_rows(const Matrix& x, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = x.row(rows[i]);
    }
    return out;
}

Vector select_rows(const Vector& v, const std::vector<Index>& rows) {
    Vector out(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Index>(i)) = v(rows[i]);
    }
    return out;
}

} // namespace aipw
