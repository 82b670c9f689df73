#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ofnav/flow.hpp"
#include "ofnav/simulator.hpp"

namespace ofnav {

enum class DepthModelKind : std::uint8_t { Planar, Slope, Sphere, Auto };

DepthModelKind model_from_name(std::string_view name);  // throws ConfigError
std::string_view model_name(DepthModelKind kind);

enum class PipelineMode : std::uint8_t { Full, Oracle };

/// One experiment run: scenario, sensors, estimator and output settings.
/// Defaults come from the scenario preset; the key-value config file and CLI
/// flags override individual fields.
struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::LandingFlat;
    double duration = 0.0;  // s; 0 uses the scenario default
    double frame_rate = 4.0;
    int resolution = 1024;     // square frames, power of two >= 128
    double focal_ratio = 1.0;  // fx = focal_ratio * resolution
    DepthModelKind model = DepthModelKind::Auto;
    double model_switch_range = 4000.0;  // m; sphere above, planar below (Auto)
    LKParams lk;
    NoiseConfig noise;
    SunConfig sun;
    TerrainParams terrain;
    std::uint64_t seed = 1;
    PipelineMode mode = PipelineMode::Full;
    int threads = 1;
    double touchdown_floor = 0.01;  // m/s; relative-error exclusion
    double condition_max = 1e8;
    int oracle_grid = 16;  // oracle-mode sample points per image side

    CameraIntrinsics intrinsics() const;

    /// Resolves Auto against the measured range and the scenario class.
    DepthModelKind effective_model(double range) const;
};

ScenarioConfig default_config(ScenarioKind kind, std::uint64_t seed = 1);

/// Key-value config file: `key = value` lines, '#' comments. Unknown keys are
/// rejected. The scenario key selects the preset; every other key overrides.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(std::istream& in, const std::string& origin);
void write_config(const ScenarioConfig& cfg, const std::filesystem::path& path);

struct FrameRecord {
    double t = 0.0;   // pair midpoint (s)
    double dt = 0.0;  // pair spacing (s)
    CameraVelocity estimate;
    CameraVelocity truth;
    double relative_error = 0.0;  // NaN when failed or truth is zero
    double absolute_error = 0.0;
    int n_features = 0;
    double residual_rms = 0.0;
    bool condition_ok = true;
    bool converged = true;
    bool excluded = false;  // ||v_true|| below the touchdown floor
    double alpha = 0.0;     // slope estimates (slope model only)
    double beta = 0.0;
    std::string failure;  // empty when the frame pair was processed

    bool ok() const { return failure.empty(); }
};

struct RunReport {
    ScenarioKind scenario = ScenarioKind::LandingFlat;
    DepthModelKind model = DepthModelKind::Planar;
    std::uint64_t seed = 0;
    std::vector<FrameRecord> frames;

    // aggregates over processed, non-excluded frames
    double rel_mean = 0.0, rel_max = 0.0, rel_min = 0.0, rel_std = 0.0;
    double rel_max_all = 0.0;  // including touchdown frames
    double abs_mean = 0.0;
    int n_ok = 0, n_failed = 0, n_excluded = 0;

    void recompute_aggregates(double touchdown_floor);
};

/// Renders (or synthesizes) every frame pair, runs the flow front-end and the
/// chosen inversion, and scores against the interpolated ground truth.
/// Per-frame failures are recorded, not thrown.
RunReport run_pipeline(const ScenarioConfig& cfg);

struct SweepResult {
    double value = 0.0;
    RunReport report;
};

/// Axes: resolution | frame-rate | camera-noise | state-noise. One pipeline
/// run per value; everything else, including the seed, stays fixed.
std::vector<SweepResult> run_sweep(const ScenarioConfig& base, std::string_view axis,
                                   const std::vector<double>& values);

void export_report(const RunReport& report, const std::filesystem::path& dir);
void export_sweep(const std::vector<SweepResult>& sweep, std::string_view axis,
                  const std::filesystem::path& dir);

/// Writes frames (PGM), telemetry.csv (sensor values: noisy attitude, rates
/// and rangefinder; true position/velocity), truth.csv (noise-free states)
/// and the resolved run_config.cfg.
void simulate_to_dir(const ScenarioConfig& cfg, const std::filesystem::path& dir);

/// Re-runs the estimation side from a simulate_to_dir output directory.
/// `model_override` replaces the configured depth model unless Auto.
RunReport estimate_from_dir(const std::filesystem::path& dir, DepthModelKind model_override);

}  // namespace ofnav
