#pragma once

#include <functional>

#include "narg/numerics.hpp"

namespace narg {

/// Uniform-grid sinc DVR (Colbert-Miller) for one continuous coordinate.
///
/// `kinetic` is the matrix of -d^2/dx^2; position-dependent operators are
/// diagonal in this basis with entries f(points[n]).
struct DvrBasis {
    Vector points;
    double spacing = 0.0;
    Matrix kinetic;

    Index size() const { return points.size(); }
    Matrix diagonal(const std::function<double(double)> &f) const;
};

/// Grid of `n_points` points symmetric about zero on [-x_max, x_max].
/// Throws InvalidGrid for n_points < 3 or non-finite / non-positive x_max.
DvrBasis build_uniform_dvr(Index n_points, double x_max);

} // namespace narg
