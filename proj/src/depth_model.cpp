#include "ofnav/depth_model.hpp"

#include <cmath>
#include <limits>

namespace ofnav {

PlanarFixedModel::PlanarFixedModel(const UnitNormal& n, double range_m) : normal(n), range(range_m) {
    if (!(range > 0.0)) {
        throw std::invalid_argument("PlanarFixedModel: range must be positive");
    }
    if (!(normal.gamma > 0.0)) {
        throw std::invalid_argument("PlanarFixedModel: plane must face the camera (gamma > 0)");
    }
}

PlanarSlopeModel::PlanarSlopeModel(double alpha_, double beta_, double range_m)
    : alpha(alpha_), beta(beta_), range(range_m) {
    if (!(range > 0.0)) {
        throw std::invalid_argument("PlanarSlopeModel: range must be positive");
    }
    if (!(alpha * alpha + beta * beta < 1.0)) {
        throw std::domain_error("PlanarSlopeModel: alpha^2 + beta^2 must be < 1");
    }
}

SphericalModel::SphericalModel(const UnitNormal& n, double range_m, double radius_m)
    : normal(n), range(range_m), radius(radius_m) {
    if (!(range > 0.0) || !(radius > 0.0)) {
        throw std::invalid_argument("SphericalModel: range and radius must be positive");
    }
}

InverseDepth planar_inverse_depth(const NormalizedPoint& n, const PlanarFixedModel& m) {
    return detail::planar_depth_eval(m.normal.alpha, m.normal.beta, m.normal.gamma, m.range, n);
}

InverseDepth slope_inverse_depth(const NormalizedPoint& n, const PlanarSlopeModel& m) {
    return detail::planar_depth_eval(m.alpha, m.beta, m.gamma(), m.range, n);
}

InverseDepth spherical_inverse_depth(const NormalizedPoint& n, const SphericalModel& m) {
    // Quadratic in Z for the ray Z*(x, y, 1) against the sphere |P - C| = R.
    // Solved in the numerically stable form; the near intersection is the
    // smallest positive root.
    const Vec3 c = m.center();
    const double a = n.x * n.x + n.y * n.y + 1.0;
    const double b = -2.0 * (n.x * c.x() + n.y * c.y() + c.z());
    const double cc = c.squaredNorm() - m.radius * m.radius;

    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0) {
        return {0.0, DepthFailure::NoIntersection};
    }
    const double sq = std::sqrt(disc);
    const double qq = b >= 0.0 ? -0.5 * (b + sq) : -0.5 * (b - sq);

    double z = std::numeric_limits<double>::infinity();
    if (qq != 0.0) {
        const double z1 = qq / a;
        const double z2 = cc / qq;
        if (z1 > 0.0) z = z1;
        if (z2 > 0.0 && z2 < z) z = z2;
    } else {
        // b == 0 and disc == 0: tangent through the camera plane
        return {0.0, DepthFailure::NoIntersection};
    }
    if (!std::isfinite(z)) {
        return {0.0, DepthFailure::NoIntersection};
    }
    return {1.0 / z, DepthFailure::None};
}

InverseDepth inverse_depth(const DepthModel& model, const NormalizedPoint& n) {
    return std::visit(
        [&](const auto& m) -> InverseDepth {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PlanarFixedModel>) {
                return planar_inverse_depth(n, m);
            } else if constexpr (std::is_same_v<T, PlanarSlopeModel>) {
                return slope_inverse_depth(n, m);
            } else {
                return spherical_inverse_depth(n, m);
            }
        },
        model);
}

DepthGrid inverse_depth_grid(const DepthModel& model, const CameraIntrinsics& k, int stride) {
    if (stride < 1) {
        throw std::invalid_argument("inverse_depth_grid: stride must be >= 1");
    }
    DepthGrid grid;
    grid.stride = stride;
    grid.cols = (k.width + stride - 1) / stride;
    grid.rows = (k.height + stride - 1) / stride;
    grid.cells.reserve(static_cast<std::size_t>(grid.cols) * grid.rows);
    const double half = (stride - 1) * 0.5;  // sample cell centers
    for (int row = 0; row < grid.rows; ++row) {
        for (int col = 0; col < grid.cols; ++col) {
            const PixelPoint p = raster_to_pixel(col * stride + half, row * stride + half, k);
            grid.cells.push_back(inverse_depth(model, pixel_to_normalized(p, k)));
        }
    }
    return grid;
}

}  // namespace ofnav
