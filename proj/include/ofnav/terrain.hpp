#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ofnav/geometry.hpp"
#include "ofnav/rng.hpp"

namespace ofnav {

/// Smooth crater bowl (depth > 0) or hill (depth < 0) in the horizontal
/// parameterization of the surface.
struct CraterSpec {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;
    double depth = 0.0;
};

enum class BaseSurface : std::uint8_t { Plane, Sphere };

struct TerrainParams {
    BaseSurface base = BaseSurface::Plane;
    double site_elevation = 0.0;  // base surface height at the origin (m)
    double slope_x = 0.0;         // plane rise per meter along +x
    double slope_y = 0.0;
    double sphere_radius = 1.7374e6;  // m

    // fractal relief: first octave amplitude/wavelength, halving per octave
    double relief_amplitude = 6.0;  // m; 0 disables the perturbation field
    double relief_wavelength = 280.0;
    int relief_octaves = 4;
    double relief_gain = 0.55;

    // band-limited albedo texture multiplied into the shading
    double albedo_contrast = 0.45;  // 0 gives a uniform surface
    double albedo_wavelength = 600.0;
    int albedo_octaves = 11;
    double albedo_gain = 0.78;

    std::vector<CraterSpec> craters;
    std::uint64_t seed = 1;
};

/// Procedural heightfield over a plane or sphere. All queries are pure
/// functions of (params, seed); the `footprint` arguments give the viewing
/// scale in meters so detail below it fades out smoothly.
class Terrain {
  public:
    explicit Terrain(const TerrainParams& params);

    const TerrainParams& params() const { return params_; }

    /// Perturbation height (noise + craters) at horizontal coordinates.
    double relief(double x, double y, double footprint = 0.0) const;

    /// Plane base only: full surface height at (x, y).
    double height_at(double x, double y, double footprint = 0.0) const;

    /// Signed clearance of a world point above the modeled surface.
    double clearance(const Vec3& p, double footprint = 0.0) const;

    /// Distance along the unit ray to the surface. `footprint_per_m` is the
    /// viewing footprint per meter of distance (1/fx for a camera ray);
    /// `hint` warm-starts the search near a previous hit.
    std::optional<double> raycast(const Vec3& origin, const Vec3& dir, double footprint_per_m = 0.0,
                                  double hint = 0.0) const;

    /// Outward surface normal (world frame) at a point on/near the surface.
    Vec3 surface_normal(const Vec3& p, double footprint) const;

    /// Albedo factor around 1.0, in [0.05, 2].
    double albedo(const Vec3& p, double footprint) const;

    double max_relief_up() const { return max_up_; }
    double max_relief_down() const { return max_down_; }

    /// Center of the sphere base (world frame).
    Vec3 sphere_center() const { return {0.0, 0.0, params_.site_elevation - params_.sphere_radius}; }

  private:
    double base_clearance(const Vec3& p) const;

    TerrainParams params_;
    std::uint64_t relief_seed_;
    std::uint64_t albedo_seed_;
    double max_up_ = 0.0;    // relief never exceeds the base surface by more
    double max_down_ = 0.0;  // ... nor digs below it by more
};

/// Quintic-fade value noise on the unit lattice, output in [-1, 1].
double value_noise2(double u, double v, std::uint64_t seed);

}  // namespace ofnav
