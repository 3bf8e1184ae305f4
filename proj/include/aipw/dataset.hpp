#pragma once

#include <limits>
#include <vector>

#include "aipw/kernel.hpp"

namespace aipw {

/// Covariates for all n units, response only where delta == 1. Unobserved
/// response slots hold NaN and are never read.
struct IncompleteDataset {
    Matrix x;
    Vector y;
    Vector delta;

    static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

    void validate() const;

    [[nodiscard]] Index n() const noexcept { return x.rows(); }
    [[nodiscard]] Index p() const noexcept { return x.cols(); }
    [[nodiscard]] Index observed_count() const;
    [[nodiscard]] bool fully_observed() const { return observed_count() == n(); }
    [[nodiscard]] std::vector<Index> observed_rows() const;
    [[nodiscard]] Matrix observed_x() const;
    [[nodiscard]] Vector observed_y() const;

    /// Masks a fully observed response with the indicator vector.
    static IncompleteDataset from_full(Matrix x, const Vector& y_full, const Vector& delta);
};

} // namespace aipw
