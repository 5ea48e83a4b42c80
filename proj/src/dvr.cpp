#include "narg/dvr.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace narg {

Matrix DvrBasis::diagonal(const std::function<double(double)> &f) const {
    Vector d = points.unaryExpr(f);
    return d.asDiagonal();
}

DvrBasis build_uniform_dvr(Index n_points, double x_max) {
    if (n_points < 3)
        throw Error(ErrorCode::InvalidGrid, "need at least 3 points, got " + std::to_string(n_points));
    if (!std::isfinite(x_max) || x_max <= 0.0)
        throw Error(ErrorCode::InvalidGrid, "x_max must be finite and positive");

    DvrBasis basis;
    basis.spacing = 2.0 * x_max / static_cast<double>(n_points - 1);
    basis.points.resize(n_points);
    for (Index n = 0; n < n_points; ++n)
        basis.points(n) = -x_max + basis.spacing * static_cast<double>(n);

    const double inv_h2 = 1.0 / (basis.spacing * basis.spacing);
    constexpr double pi = std::numbers::pi;
    basis.kinetic.resize(n_points, n_points);
    for (Index m = 0; m < n_points; ++m) {
        for (Index n = 0; n < n_points; ++n) {
            if (m == n) {
                basis.kinetic(m, n) = pi * pi / 3.0 * inv_h2;
            } else {
                const double d = static_cast<double>(m - n);
                const double sign = ((m - n) % 2 == 0) ? 1.0 : -1.0;
                basis.kinetic(m, n) = 2.0 * sign * inv_h2 / (d * d);
            }
        }
    }
    return basis;
}

} // namespace narg
