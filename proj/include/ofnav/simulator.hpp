#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ofnav/image.hpp"
#include "ofnav/motion_field.hpp"
#include "ofnav/terrain.hpp"

namespace ofnav {

struct SunConfig {
    double azimuth = 0.0;                   // rad, from +x toward +y
    double elevation = 1.35 * M_PI / 180.0;  // rad above the horizon

    Vec3 direction() const {  // toward the sun, world frame
        return {std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                std::sin(elevation)};
    }
};

struct NoiseConfig {
    double camera_sigma = 0.0;    // intensity STD on the 0..255 scale
    double attitude_sigma = 0.0;  // rad
    double rate_sigma = 0.0;      // rad/s
    double range_sigma = 0.0;     // relative
    std::uint64_t seed = 0;
};

/// Body axes in world coordinates for a nadir camera over flat ground:
/// x along track, y flipped to the raster convention, z down.
inline Mat3 nadir_body_frame() {
    Mat3 m;
    m << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    return m;
}

/// Body frame for a sample: fixed for planar scenes, center-pointing with the
/// x axis along the horizontal velocity for spherical ones.
Mat3 world_from_body_frame(const Vec3& position, const Vec3& velocity, BaseSurface base,
                           double body_radius);

struct TrajectorySample {
    double t = 0.0;
    Vec3 position = Vec3::Zero();  // world frame (m); z is spheroid altitude
    Vec3 velocity = Vec3::Zero();  // world frame (m/s)
    Attitude attitude;             // body -> camera
    AngularRates rates;            // camera frame
    Mat3 world_from_body = nadir_body_frame();
};

enum class ScenarioKind {
    LandingFlat,
    LandingPeak,
    LandingCrater,
    LandingIncline,
    HohmannTransfer,
    TransferToLanding,
};

ScenarioKind scenario_from_name(std::string_view name);  // throws InvalidScenarioError
std::string_view scenario_name(ScenarioKind kind);

/// Analytic trajectory: piecewise cubic altitude laws and smoothstep
/// horizontal-speed blends that hit the scenario's endpoint altitudes and
/// speeds exactly, plus a bounded sinusoidal attitude wobble around nadir.
class TrajectoryProfile {
  public:
    struct Phase {
        double t0 = 0.0, t1 = 0.0;
        double h0 = 0.0, h1 = 0.0;  // altitude endpoints (m)
        double v0 = 0.0, v1 = 0.0;  // dh/dt endpoints (m/s, negative descending)
        double u0 = 0.0, u1 = 0.0;  // horizontal speed endpoints (m/s, world +x)
        double x0 = 0.0;            // horizontal position at t0
    };

    struct Wobble {
        double amp_phi = 0.020, period_phi = 37.0, phase_phi = 0.4;
        double amp_theta = 0.015, period_theta = 29.0, phase_theta = 1.7;
        double amp_psi = 0.010, period_psi = 53.0, phase_psi = 2.9;
    };

    static TrajectoryProfile for_scenario(ScenarioKind kind, double duration = 0.0);

    TrajectorySample state(double t) const;
    double duration() const { return phases_.back().t1; }
    ScenarioKind kind() const { return kind_; }

    /// Reference-surface elevation below the track (m above the spheroid).
    double site_elevation() const { return site_elevation_; }

  private:
    ScenarioKind kind_{};
    std::vector<Phase> phases_;
    Wobble wobble_;
    double site_elevation_ = 0.0;
};

/// Samples the profile at 1/frame_rate spacing from t = 0 through the full
/// duration (inclusive).
std::vector<TrajectorySample> generate_trajectory(const TrajectoryProfile& profile,
                                                  double frame_rate);

struct CameraPose {
    Vec3 position = Vec3::Zero();
    Mat3 camera_to_world = Mat3::Identity();

    Vec3 ray_world(const NormalizedPoint& n) const {
        return (camera_to_world * Vec3(n.x, n.y, 1.0)).normalized();
    }
};

CameraPose camera_pose(const TrajectorySample& sample);

/// Ground-truth translational velocity in the camera frame.
CameraVelocity camera_frame_velocity(const TrajectorySample& sample);

/// Exact range (m) along the pixel ray to the terrain, or nullopt above the
/// horizon. The ground-truth depth oracle for the depth models and the flow.
std::optional<double> raycast_depth(const Terrain& terrain, const CameraPose& pose,
                                    const PixelPoint& p, const CameraIntrinsics& k);

/// Boresight range with multiplicative Gaussian noise. Throws
/// NoIntersectionError when the boresight misses the terrain.
double rangefinder_reading(const Terrain& terrain, const CameraPose& pose,
                           const CameraIntrinsics& k, const NoiseConfig& noise,
                           std::uint64_t frame_index);

struct RenderOptions {
    int threads = 1;
    bool shadows = false;
};

/// Lambertian render with the seeded albedo texture, tone-mapped so the mean
/// flat-ground response sits mid-scale regardless of sun elevation. Sky black.
GrayImage render_frame(const Terrain& terrain, const CameraPose& pose, const SunConfig& sun,
                       const CameraIntrinsics& k, const RenderOptions& opt = {});

/// Noiseless flow oracle: the motion-field prediction evaluated with exact
/// ray-cast depth. Points that miss the terrain are skipped.
std::vector<FlowObservation> ground_truth_flow(const Terrain& terrain, const CameraPose& pose,
                                               const CameraVelocity& v, const AngularRates& w,
                                               std::span<const PixelPoint> pts,
                                               const CameraIntrinsics& k);

GrayImage add_camera_noise(const GrayImage& img, const NoiseConfig& noise,
                           std::uint64_t frame_index);

/// Perturbs attitude angles and angular rates; position and velocity are the
/// quantities under estimation and stay untouched.
TrajectorySample add_state_noise(const TrajectorySample& sample, const NoiseConfig& noise,
                                 std::uint64_t frame_index);

/// Terrain preset for a scenario (relief class, craters, albedo bands).
TerrainParams scenario_terrain(ScenarioKind kind, std::uint64_t seed);

}  // namespace ofnav
