#pragma once

#include <cstdint>
#include <string>

#include "aipw/dataset.hpp"

namespace aipw {

// Covariate columns are 0-indexed throughout: the paper-style "x_{i1}" is column 0.

enum class OutcomeModel { M1, M2 };
enum class ResponseModel { R1, R2 };

struct SimulationSpec {
    OutcomeModel outcome = OutcomeModel::M1;
    ResponseModel response = ResponseModel::R1;
    Index n = 800;
    Index p = 400;
    std::uint64_t seed = 0;

    void validate() const;
};

[[nodiscard]] std::string to_string(OutcomeModel m);
[[nodiscard]] std::string to_string(ResponseModel r);

/// i.i.d. U(-0.5, 0.5) entries.
[[nodiscard]] Matrix gen_covariates(Index n, Index p, std::uint64_t seed);

/// y = 5x1 + 6x2 + 4x3 + 4x4 + noise_scale * N(0,1). Population mean 0.
[[nodiscard]] Vector gen_outcome_m1(const Matrix& x, std::uint64_t seed, double noise_scale = 1.0);

/// The periodic component of the nonlinear outcome, evaluated at x4.
[[nodiscard]] double m2_h(double x4);

/// y = 6x1 + 4(2x2+1)(2x3-1) + 6h(x4) + 5 sin(pi x5)/(2 - sin(pi x5)) + noise.
[[nodiscard]] Vector gen_outcome_m2(const Matrix& x, std::uint64_t seed, double noise_scale = 1.0);

[[nodiscard]] Vector response_prob_r1(const Matrix& x);
[[nodiscard]] Vector response_prob_r2(const Matrix& x);
/// logistic(1 - 0.6x5 - x6 + 0.5x10) on columns 4, 5, 9.
[[nodiscard]] Vector mask_prob_app(const Matrix& x);

[[nodiscard]] Vector gen_response_r1(const Matrix& x, std::uint64_t seed);
[[nodiscard]] Vector gen_response_r2(const Matrix& x, std::uint64_t seed);
[[nodiscard]] Vector gen_mask_app(const Matrix& x, std::uint64_t seed);

/// Bernoulli draws with the given success probabilities.
[[nodiscard]] Vector bernoulli(const Vector& prob, std::uint64_t seed, std::uint64_t purpose_index = 0);

/// Covariates, outcome and response indicators of one simulated data set.
[[nodiscard]] IncompleteDataset generate(const SimulationSpec& spec);

/// Monte Carlo "true value" for the nonlinear outcome: mean of `draws` outcomes.
[[nodiscard]] double m2_oracle_mean(std::uint64_t seed, Index draws = 1'000'000);

/// Fully observed synthetic stand-in for a wide retail table: n days, p
/// products, studentized columns; the response depends on a handful of
/// columns including 4, 5 and 9. The response is studentized too, so its
/// full-data mean is exactly the benchmark 0 (up to rounding).
struct FullData {
    Matrix x;
    Vector y;
};
[[nodiscard]] FullData gen_retail_standin(Index n, Index p, std::uint64_t seed);

/// (value - mean) / sd per column, sd with the n-1 denominator. Constant
/// columns are centred only.
void studentize_columns(Matrix& x);
void studentize(Vector& v);

} // namespace aipw
