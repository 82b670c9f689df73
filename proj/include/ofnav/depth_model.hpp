#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "ofnav/geometry.hpp"

namespace ofnav {

enum class DepthFailure : std::uint8_t { None, NonPositiveDepth, NoIntersection };

/// Inverse-depth evaluation outcome for a single ray.
struct InverseDepth {
    double value = 0.0;  // 1/m, meaningful when ok()
    DepthFailure failure = DepthFailure::None;

    bool ok() const { return failure == DepthFailure::None; }
};

/// Plane at boresight range `range` with a known unit normal.
struct PlanarFixedModel {
    UnitNormal normal;
    double range = 0.0;

    PlanarFixedModel(const UnitNormal& n, double range_m);
};

/// Plane whose inclination (alpha, beta) is a free parameter of the inversion;
/// gamma follows from the unit-norm constraint.
struct PlanarSlopeModel {
    double alpha = 0.0;
    double beta = 0.0;
    double range = 0.0;

    PlanarSlopeModel(double alpha_, double beta_, double range_m);

    double gamma() const { return std::sqrt(1.0 - alpha * alpha - beta * beta); }
};

/// Sphere of radius `radius` whose near surface lies at boresight range
/// `range`; `normal` is the surface normal at the boresight intersection in
/// the planar convention (the constructor derives the sphere center from it).
struct SphericalModel {
    UnitNormal normal;
    double range = 0.0;
    double radius = 0.0;

    SphericalModel(const UnitNormal& n, double range_m, double radius_m);

    /// Sphere center in camera coordinates.
    Vec3 center() const {
        return {radius * normal.alpha, radius * normal.beta, range + radius * normal.gamma};
    }
};

InverseDepth planar_inverse_depth(const NormalizedPoint& n, const PlanarFixedModel& m);
InverseDepth slope_inverse_depth(const NormalizedPoint& n, const PlanarSlopeModel& m);
InverseDepth spherical_inverse_depth(const NormalizedPoint& n, const SphericalModel& m);

using DepthModel = std::variant<PlanarFixedModel, PlanarSlopeModel, SphericalModel>;

InverseDepth inverse_depth(const DepthModel& model, const NormalizedPoint& n);

/// Bulk evaluation at every stride-th pixel, for diagnostics and visual output.
struct DepthGrid {
    int cols = 0;
    int rows = 0;
    int stride = 1;
    std::vector<InverseDepth> cells;  // row-major

    const InverseDepth& at(int col, int row) const { return cells[static_cast<std::size_t>(row) * cols + col]; }
};

DepthGrid inverse_depth_grid(const DepthModel& model, const CameraIntrinsics& k, int stride);

namespace detail {

// Shared evaluation for both planar variants so the zero-slope case is
// bit-identical between them: d = (alpha/H) x + (beta/H) y + 1/rho, H = rho*gamma.
inline InverseDepth planar_depth_eval(double alpha, double beta, double gamma, double range,
                                      const NormalizedPoint& n) {
    const double h = range * gamma;
    const double d = (alpha / h) * n.x + (beta / h) * n.y + 1.0 / range;
    if (!(d > 0.0)) {
        return {0.0, DepthFailure::NonPositiveDepth};
    }
    return {d, DepthFailure::None};
}

}  // namespace detail

}  // namespace ofnav
