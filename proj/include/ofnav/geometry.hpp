#pragma once

#include <Eigen/Dense>

#include "ofnav/errors.hpp"

namespace ofnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole camera: focal lengths and principal point in pixels.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;  // principal point, raster coordinates
    double cy = 0.0;
    int width = 0;
    int height = 0;

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
               cx < static_cast<double>(width) && cy >= 0.0 && cy < static_cast<double>(height);
    }

    // Square sensor with a centered principal point.
    static CameraIntrinsics square(int size, double focal) {
        return {focal, focal, (size - 1) * 0.5, (size - 1) * 0.5, size, size};
    }
};

/// Image coordinates relative to the principal point (px).
struct PixelPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Dimensionless ray slopes X/Z, Y/Z.
struct NormalizedPoint {
    double x = 0.0;
    double y = 0.0;
};

inline NormalizedPoint pixel_to_normalized(const PixelPoint& p, const CameraIntrinsics& k) {
    return {p.x / k.fx, p.y / k.fy};
}

inline PixelPoint normalized_to_pixel(const NormalizedPoint& n, const CameraIntrinsics& k) {
    return {n.x * k.fx, n.y * k.fy};
}

// Raster coordinates have the origin at the top-left pixel center; the
// motion-field equations use principal-point-relative coordinates throughout.
inline PixelPoint raster_to_pixel(double rx, double ry, const CameraIntrinsics& k) {
    return {rx - k.cx, ry - k.cy};
}

inline void pixel_to_raster(const PixelPoint& p, const CameraIntrinsics& k, double& rx, double& ry) {
    rx = p.x + k.cx;
    ry = p.y + k.cy;
}

/// Rotation angles body -> camera about the X, Y, Z axes (rad).
struct Attitude {
    double phi = 0.0;    // about X
    double theta = 0.0;  // about Y
    double psi = 0.0;    // about Z
};

/// Camera-frame angular velocity (rad/s).
struct AngularRates {
    double p = 0.0;
    double q = 0.0;
    double r = 0.0;

    Vec3 vec() const { return {p, q, r}; }
};

/// Surface-normal direction in the camera frame. Convention: the normal points
/// from the camera side into the surface, so gamma = +1 for a nadir camera
/// over level ground.
struct UnitNormal {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 1.0;

    Vec3 vec() const { return {alpha, beta, gamma}; }

    static UnitNormal from_vec(const Vec3& v);  // normalizes; throws on near-zero input
};

/// R^C_B = Rz(psi) * Ry(theta) * Rx(phi), applied to body-frame vectors.
Mat3 rotation_body_to_camera(const Attitude& a);

/// k_hat = R^C_B * z_B, with z_B the body axis pointing toward the body center.
UnitNormal attitude_to_plane_normal(const Attitude& a);

struct SphereGeometry {
    UnitNormal normal;      // at the boresight intersection, planar convention
    double altitude = 0.0;  // camera height above the sphere surface (m)
};

/// Solves the camera / boresight-intersection / sphere-center triangle by the
/// sine rule, given the measured boresight range (near intersection) and the
/// sphere radius. Throws NoIntersectionError when the implied geometry has no
/// real solution; the boresight-aligned case is handled analytically.
SphereGeometry attitude_to_sphere_geometry(const Attitude& a, double range, double radius);

}  // namespace ofnav
