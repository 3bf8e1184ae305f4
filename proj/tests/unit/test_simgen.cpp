#include <doctest.h>

#include <numbers>

#include "aipw/harness.hpp"
#include "aipw/propensity.hpp"
#include "aipw/simgen.hpp"

using namespace aipw;

TEST_SUITE("simgen") {

TEST_CASE("uniform covariates") {
    const Matrix x = gen_covariates(1000, 1000, 1);
    CHECK(x.minCoeff() >= -0.5);
    CHECK(x.maxCoeff() <= 0.5);
    CHECK(std::abs(x.mean()) <= 0.002);
    CHECK(gen_covariates(20, 7, 3) == gen_covariates(20, 7, 3));
    CHECK(gen_covariates(20, 7, 3) != gen_covariates(20, 7, 4));
}

TEST_CASE("linear outcome") {
    Matrix row = Matrix::Zero(1, 6);
    row(0, 0) = 0.1;
    CHECK(gen_outcome_m1(row, 1, 0.0)(0) == doctest::Approx(0.5).epsilon(1e-15));

    const Matrix x = gen_covariates(1'000'000, 4, 2);
    CHECK(std::abs(gen_outcome_m1(x, 2).mean()) <= 0.01);
}

TEST_CASE("nonlinear outcome") {
    CHECK(m2_h(0.0) == doctest::Approx(0.6).epsilon(1e-15));
    const Matrix zero = Matrix::Zero(1, 5);
    CHECK(gen_outcome_m2(zero, 1, 0.0)(0) == doctest::Approx(-0.4).epsilon(1e-14));

    // midpoint rule for the one-dimensional pieces, independent of the library quadrature
    const int k = 1'000'000;
    double h = 0.0, frac = 0.0;
    for (int i = 0; i < k; ++i) {
        const double u = -0.5 + (i + 0.5) / k;
        const double s = std::sin(std::numbers::pi * u);
        const double c = std::cos(std::numbers::pi * u);
        h += 0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c * c * c + 0.5 * s * s * s;
        frac += s / (2.0 - s);
    }
    const double expected = -4.0 + 6.0 * h / k + 5.0 * frac / k;
    CHECK(m2_population_mean() == doctest::Approx(expected).epsilon(1e-9));

    const double sample = m2_oracle_mean(20'220'601, 1'000'000);
    CHECK(std::abs(sample - expected) <= 0.015);
    CHECK(m2_oracle_mean(5, 1000) == m2_oracle_mean(5, 1000));
}

TEST_CASE("logistic response model") {
    const Matrix zero = Matrix::Zero(1, 3);
    CHECK(response_prob_r1(zero)(0) == doctest::Approx(0.47502081).epsilon(1e-8));

    const Matrix x = gen_covariates(1'000'000, 3, 4);
    const Vector prob = response_prob_r1(x);
    CHECK(prob.minCoeff() > logistic(-2.1));
    CHECK(prob.maxCoeff() < logistic(1.9));
    CHECK(std::abs(gen_response_r1(x, 4).mean() - prob.mean()) <= 0.002);
}

TEST_CASE("periodic response model") {
    const Matrix zero = Matrix::Zero(1, 4);
    CHECK(response_prob_r2(zero)(0) == 0.5);

    const Matrix x = gen_covariates(1'000'000, 4, 5);
    const Vector prob = response_prob_r2(x);
    CHECK(prob.minCoeff() >= 1.0 / 6.0);
    CHECK(prob.maxCoeff() <= 5.0 / 6.0);
    CHECK(std::abs(gen_response_r2(x, 5).mean() - prob.mean()) <= 0.002);
}

TEST_CASE("application mask") {
    const Matrix zero = Matrix::Zero(1, 10);
    CHECK(mask_prob_app(zero)(0) == doctest::Approx(0.73105858).epsilon(1e-8));

    const FullData d = gen_retail_standin(100'000, 10, 6);
    CHECK(std::abs(gen_mask_app(d.x, 6).mean() - 0.70) <= 0.02);
    CHECK(gen_mask_app(d.x, 6) == gen_mask_app(d.x, 6));
}

TEST_CASE("studentization") {
    const FullData d = gen_retail_standin(300, 12, 7);
    for (Index j = 0; j < d.x.cols(); ++j) {
        CHECK(std::abs(d.x.col(j).mean()) <= 1e-12);
        CHECK(std::sqrt(d.x.col(j).squaredNorm() / 299.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(std::abs(d.y.mean()) <= 1e-12);
}

TEST_CASE("generated data set") {
    const IncompleteDataset data = generate({OutcomeModel::M2, ResponseModel::R2, 50, 6, 8});
    CHECK(data.n() == 50);
    CHECK(data.p() == 6);
    for (Index i = 0; i < 50; ++i) CHECK((data.delta(i) == 1.0) == std::isfinite(data.y(i)));
    CHECK_THROWS_AS(SimulationSpec({OutcomeModel::M2, ResponseModel::R1, 10, 4, 0}).validate(), Error);
}

}
