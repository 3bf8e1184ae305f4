#include "aipw/dataset.hpp"

#include <cmath>

namespace aipw {

void IncompleteDataset::validate() const {
    check_covariates(x, "dataset covariates");
    if (y.size() != x.rows() || delta.size() != x.rows()) {
        throw Error(ErrorKind::Dimension, "dataset: x, y and delta lengths disagree");
    }
    Index observed = 0;
    for (Index i = 0; i < delta.size(); ++i) {
        if (delta(i) == 1.0) {
            ++observed;
            if (!std::isfinite(y(i))) {
                throw Error(ErrorKind::Domain, "dataset: observed response at row " + std::to_string(i) +
                                                   " is not finite");
            }
        } else if (delta(i) != 0.0) {
            throw Error(ErrorKind::Domain, "dataset: response indicator must be 0 or 1");
        }
    }
    if (observed == 0) {
        throw Error(ErrorKind::Domain, "dataset: no observed responses");
    }
}

Index IncompleteDataset::observed_count() const {
    return static_cast<Index>(std::llround(delta.sum()));
}

std::vector<Index> IncompleteDataset::observed_rows() const {
    std::vector<Index> rows;
    rows.reserve(static_cast<std::size_t>(observed_count()));
    for (Index i = 0; i < delta.size(); ++i) {
        if (delta(i) == 1.0) rows.push_back(i);
    }
    return rows;
}

Matrix IncompleteDataset::observed_x() const { return select_rows(x, observed_rows()); }
Vector IncompleteDataset::observed_y() const { return select_rows(y, observed_rows()); }

IncompleteDataset IncompleteDataset::from_full(Matrix x, const Vector& y_full, const Vector& delta) {
    IncompleteDataset d;
    d.x = std::move(x);
    d.delta = delta;
    d.y = Vector::Constant(y_full.size(), kMissing);
    for (Index i = 0; i < y_full.size(); ++i) {
        if (delta(i) == 1.0) d.y(i) = y_full(i);
    }
    return d;
}

} // namespace aipw
