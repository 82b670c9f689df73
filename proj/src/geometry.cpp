#include "ofnav/geometry.hpp"

#include <cmath>

namespace ofnav {

UnitNormal UnitNormal::from_vec(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 1e-300)) {
        throw std::invalid_argument("UnitNormal: cannot normalize a zero vector");
    }
    return {v.x() / n, v.y() / n, v.z() / n};
}

Mat3 rotation_body_to_camera(const Attitude& a) {
    const double cph = std::cos(a.phi), sph = std::sin(a.phi);
    const double cth = std::cos(a.theta), sth = std::sin(a.theta);
    const double cps = std::cos(a.psi), sps = std::sin(a.psi);

    Mat3 rx, ry, rz;
    rx << 1, 0, 0, 0, cph, -sph, 0, sph, cph;
    ry << cth, 0, sth, 0, 1, 0, -sth, 0, cth;
    rz << cps, -sps, 0, sps, cps, 0, 0, 0, 1;
    return rz * ry * rx;
}

UnitNormal attitude_to_plane_normal(const Attitude& a) {
    const Vec3 k = rotation_body_to_camera(a) * Vec3::UnitZ();
    return {k.x(), k.y(), k.z()};
}

SphereGeometry attitude_to_sphere_geometry(const Attitude& a, double range, double radius) {
    if (!(range > 0.0) || !(radius > 0.0)) {
        throw std::invalid_argument("attitude_to_sphere_geometry: range and radius must be positive");
    }

    // Direction from the camera toward the body center, in camera coordinates.
    const Vec3 to_center = rotation_body_to_camera(a) * Vec3::UnitZ();
    const double cos_nu = to_center.z();  // boresight is +z
    if (cos_nu <= 0.0) {
        throw NoIntersectionError("attitude_to_sphere_geometry: boresight points away from the body");
    }
    const double sin_nu = std::sqrt(std::max(0.0, 1.0 - cos_nu * cos_nu));

    double altitude;
    if (sin_nu < 1e-12) {
        altitude = range;  // boresight through the center: H = rho
    } else {
        const double sin_mu = (range / radius) * sin_nu;
        if (sin_mu > 1.0) {
            throw NoIntersectionError("attitude_to_sphere_geometry: sine-rule domain violated");
        }
        // Acute root: the measured range is the near intersection.
        const double mu = std::asin(sin_mu);
        const double nu = std::atan2(sin_nu, cos_nu);
        const double lambda = M_PI - mu - nu;
        altitude = radius * std::sin(lambda) / sin_nu - radius;
    }
    if (!(altitude > 0.0)) {
        throw NoIntersectionError("attitude_to_sphere_geometry: camera at or below the surface");
    }

    // Surface normal at the boresight intersection P = (0,0,range), flipped to
    // the planar convention (pointing from P toward the sphere center).
    const Vec3 center = (altitude + radius) * to_center;
    const Vec3 k = center - Vec3(0.0, 0.0, range);
    return {UnitNormal::from_vec(k), altitude};
}

}  // namespace ofnav
