#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "ofnav/harness.hpp"

namespace ofnav {

namespace {

// Midpoint interpolation of the quantities a frame pair is scored against.
struct PairState {
    double t_mid = 0.0;
    double dt = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Attitude attitude_true;
    AngularRates rates_true;
    Attitude attitude_meas;
    AngularRates rates_meas;
    double range_meas = 0.0;
    Mat3 world_from_body = nadir_body_frame();
};

Attitude mid_attitude(const Attitude& a, const Attitude& b) {
    return {0.5 * (a.phi + b.phi), 0.5 * (a.theta + b.theta), 0.5 * (a.psi + b.psi)};
}

AngularRates mid_rates(const AngularRates& a, const AngularRates& b) {
    return {0.5 * (a.p + b.p), 0.5 * (a.q + b.q), 0.5 * (a.r + b.r)};
}

CameraVelocity truth_camera_velocity(const PairState& ps) {
    const Mat3 cam_from_body = rotation_body_to_camera(ps.attitude_true);
    return CameraVelocity::from_vec(cam_from_body * (ps.world_from_body.transpose() * ps.velocity));
}

CameraPose truth_pose(const PairState& ps) {
    TrajectorySample s;
    s.position = ps.position;
    s.velocity = ps.velocity;
    s.attitude = ps.attitude_true;
    s.world_from_body = ps.world_from_body;
    return camera_pose(s);
}

// Inversion + scoring shared by the in-memory and the file-based pipelines.
class PairProcessor {
  public:
    PairProcessor(const ScenarioConfig& cfg, const CameraIntrinsics& k) : cfg_(cfg), k_(k) {
        opts_.condition_max = cfg.condition_max;
    }

    FrameRecord process(const PairState& ps, std::vector<FlowObservation> obs,
                        const std::optional<UnitNormal>& normal_override = std::nullopt) {
        FrameRecord rec;
        rec.t = ps.t_mid;
        rec.dt = ps.dt;
        rec.relative_error = std::numeric_limits<double>::quiet_NaN();
        const CameraVelocity v_true = truth_camera_velocity(ps);
        rec.truth = v_true;

        try {
            const DepthModelKind kind = cfg_.effective_model(ps.range_meas);
            EgomotionEstimate est;
            if (kind == DepthModelKind::Slope) {
                est = invert_slope(obs, ps.rates_meas, ps.range_meas, k_, warm_, opts_);
                if (est.slope) {
                    rec.alpha = est.slope->alpha;
                    rec.beta = est.slope->beta;
                    warm_ = {est.velocity, est.slope->alpha, est.slope->beta};
                }
            } else if (kind == DepthModelKind::Sphere) {
                UnitNormal normal;
                if (normal_override) {
                    normal = *normal_override;
                } else {
                    normal = attitude_to_sphere_geometry(ps.attitude_meas, ps.range_meas,
                                                         cfg_.terrain.sphere_radius)
                                 .normal;
                }
                const SphericalModel model{normal, ps.range_meas, cfg_.terrain.sphere_radius};
                est = invert_linear(obs, ps.rates_meas, model, k_, opts_);
                warm_ = {est.velocity, 0.0, 0.0};
            } else {
                const UnitNormal normal =
                    normal_override ? *normal_override : attitude_to_plane_normal(ps.attitude_meas);
                const PlanarFixedModel model{normal, ps.range_meas};
                est = invert_linear(obs, ps.rates_meas, model, k_, opts_);
                warm_ = {est.velocity, 0.0, 0.0};
            }
            rec.estimate = est.velocity;
            rec.n_features = est.n_features;
            rec.residual_rms = est.residual_rms;
            rec.condition_ok = est.condition_ok;
            rec.converged = est.converged;
            rec.absolute_error = absolute_velocity_error(est.velocity, v_true);
            const double speed = v_true.vec().norm();
            rec.excluded = speed < cfg_.touchdown_floor;
            if (speed > 0.0) {
                rec.relative_error = relative_velocity_error(est.velocity, v_true);
            }
        } catch (const std::exception& e) {
            rec.failure = e.what();
        }
        return rec;
    }

  private:
    const ScenarioConfig& cfg_;
    CameraIntrinsics k_;
    InversionOptions opts_;
    SlopeInit warm_{};
};

std::vector<PixelPoint> oracle_grid_points(const ScenarioConfig& cfg, const CameraIntrinsics& k) {
    std::vector<PixelPoint> pts;
    const int n = std::max(2, cfg.oracle_grid);
    const double half = 0.8 * (k.width / 2.0);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            pts.push_back({-half + 2.0 * half * i / (n - 1), -half + 2.0 * half * j / (n - 1)});
        }
    }
    return pts;
}

// True surface normal of the unperturbed base geometry at the boresight
// intersection, expressed in the camera frame for the oracle depth models.
UnitNormal oracle_plane_normal(const Terrain& terrain, const CameraPose& pose) {
    const Vec3 down_world =
        -Vec3(-terrain.params().slope_x, -terrain.params().slope_y, 1.0).normalized();
    return UnitNormal::from_vec(pose.camera_to_world.transpose() * down_world);
}

UnitNormal oracle_sphere_normal(const Terrain& terrain, const CameraPose& pose, double range) {
    const Vec3 boresight = pose.camera_to_world * Vec3::UnitZ();
    const Vec3 hit = pose.position + range * boresight;
    const Vec3 to_center = (terrain.sphere_center() - hit).normalized();
    return UnitNormal::from_vec(pose.camera_to_world.transpose() * to_center);
}

}  // namespace

void RunReport::recompute_aggregates(double /*touchdown_floor*/) {
    rel_mean = rel_std = abs_mean = 0.0;
    rel_max = rel_max_all = 0.0;
    rel_min = std::numeric_limits<double>::infinity();
    n_ok = n_failed = n_excluded = 0;

    double sum = 0.0, sum_sq = 0.0, abs_sum = 0.0;
    int n_rel = 0;
    for (const FrameRecord& f : frames) {
        if (!f.ok()) {
            ++n_failed;
            continue;
        }
        ++n_ok;
        abs_sum += f.absolute_error;
        if (std::isfinite(f.relative_error)) {
            rel_max_all = std::max(rel_max_all, f.relative_error);
        }
        if (f.excluded) {
            ++n_excluded;
            continue;
        }
        if (!std::isfinite(f.relative_error)) continue;
        sum += f.relative_error;
        sum_sq += f.relative_error * f.relative_error;
        rel_max = std::max(rel_max, f.relative_error);
        rel_min = std::min(rel_min, f.relative_error);
        ++n_rel;
    }
    if (n_ok > 0) {
        abs_mean = abs_sum / n_ok;
    }
    if (n_rel > 0) {
        rel_mean = sum / n_rel;
        rel_std = std::sqrt(std::max(0.0, sum_sq / n_rel - rel_mean * rel_mean));
    } else {
        rel_min = 0.0;
    }
}

RunReport run_pipeline(const ScenarioConfig& cfg) {
    const CameraIntrinsics k = cfg.intrinsics();
    const TrajectoryProfile profile = TrajectoryProfile::for_scenario(cfg.scenario, cfg.duration);
    const std::vector<TrajectorySample> samples = generate_trajectory(profile, cfg.frame_rate);

    RunReport report;
    report.scenario = cfg.scenario;
    report.model = cfg.model;
    report.seed = cfg.seed;
    if (samples.size() < 2) {
        return report;
    }

    TerrainParams tp = cfg.terrain;
    ScenarioConfig eff_cfg = cfg;
    const bool oracle = cfg.mode == PipelineMode::Oracle;
    if (oracle) {
        // the oracle path isolates the inversion math from both the vision
        // front-end and the terrain approximation error: unperturbed base
        // geometry, nominal site elevation, and the depth model that matches
        // the base exactly
        const Terrain original(cfg.terrain);
        tp.site_elevation = cfg.terrain.site_elevation + original.relief(0.0, 0.0);
        tp.relief_amplitude = 0.0;
        tp.craters.clear();
        if (eff_cfg.model == DepthModelKind::Auto) {
            eff_cfg.model = tp.base == BaseSurface::Sphere ? DepthModelKind::Sphere
                                                           : DepthModelKind::Planar;
        }
    }
    const Terrain terrain(tp);

    PairProcessor processor(eff_cfg, k);
    const std::vector<PixelPoint> grid = oracle ? oracle_grid_points(cfg, k) : std::vector<PixelPoint>{};

    RenderOptions render_opt;
    render_opt.threads = std::max(1, cfg.threads);

    // per-frame sensor caches so both frames of a pair share one draw
    std::vector<TrajectorySample> measured(samples.size());
    std::vector<double> rho(samples.size(), 0.0);
    std::vector<std::string> sensor_failure(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        measured[i] = add_state_noise(samples[i], cfg.noise, i);
        try {
            rho[i] = rangefinder_reading(terrain, camera_pose(samples[i]), k, cfg.noise, i);
        } catch (const std::exception& e) {
            sensor_failure[i] = e.what();
        }
    }

    GrayImage prev_img;
    ImagePyramid prev_pyr;
    bool have_prev = false;
    const int pad = pyramid_pad_for(cfg.lk);

    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const TrajectorySample& s0 = samples[i];
        const TrajectorySample& s1 = samples[i + 1];

        PairState ps;
        ps.dt = s1.t - s0.t;
        ps.t_mid = 0.5 * (s0.t + s1.t);
        ps.position = 0.5 * (s0.position + s1.position);
        ps.velocity = 0.5 * (s0.velocity + s1.velocity);
        ps.attitude_true = mid_attitude(s0.attitude, s1.attitude);
        ps.rates_true = mid_rates(s0.rates, s1.rates);
        ps.attitude_meas = mid_attitude(measured[i].attitude, measured[i + 1].attitude);
        ps.rates_meas = mid_rates(measured[i].rates, measured[i + 1].rates);
        ps.range_meas = 0.5 * (rho[i] + rho[i + 1]);
        ps.world_from_body = world_from_body_frame(ps.position, ps.velocity,
                                                   cfg.terrain.base, cfg.terrain.sphere_radius);

        FrameRecord rec;
        if (!sensor_failure[i].empty() || !sensor_failure[i + 1].empty()) {
            rec.t = ps.t_mid;
            rec.dt = ps.dt;
            rec.relative_error = std::numeric_limits<double>::quiet_NaN();
            rec.failure = !sensor_failure[i].empty() ? sensor_failure[i] : sensor_failure[i + 1];
            have_prev = false;
            report.frames.push_back(std::move(rec));
            continue;
        }

        try {
            std::vector<FlowObservation> obs;
            if (oracle) {
                // instantaneous flow at the midpoint state, exact depth, true
                // geometry in the depth model
                const CameraPose pose = truth_pose(ps);
                const CameraVelocity v_true = truth_camera_velocity(ps);
                obs = ground_truth_flow(terrain, pose, v_true, ps.rates_true, grid, k);
                const std::optional<double> range = raycast_depth(terrain, pose, {0.0, 0.0}, k);
                if (!range) {
                    throw NoIntersectionError("oracle: boresight misses the terrain");
                }
                ps.range_meas = *range;
                ps.attitude_meas = ps.attitude_true;
                ps.rates_meas = ps.rates_true;
                const std::optional<UnitNormal> exact_normal =
                    eff_cfg.effective_model(*range) == DepthModelKind::Sphere
                        ? oracle_sphere_normal(terrain, pose, *range)
                        : oracle_plane_normal(terrain, pose);
                rec = processor.process(ps, std::move(obs), exact_normal);
            } else {
                if (!have_prev) {
                    prev_img = add_camera_noise(render_frame(terrain, camera_pose(s0), cfg.sun, k,
                                                             render_opt),
                                                cfg.noise, i);
                    prev_pyr = build_pyramid(prev_img, cfg.lk.pyramid_levels, pad);
                    have_prev = true;
                }
                GrayImage next_img = add_camera_noise(
                    render_frame(terrain, camera_pose(s1), cfg.sun, k, render_opt), cfg.noise,
                    i + 1);
                ImagePyramid next_pyr = build_pyramid(next_img, cfg.lk.pyramid_levels, pad);
                obs = estimate_flow(prev_img, prev_pyr, next_pyr, ps.dt, cfg.lk, k);
                prev_img = std::move(next_img);
                prev_pyr = std::move(next_pyr);
                rec = processor.process(ps, std::move(obs));
            }
        } catch (const std::exception& e) {
            rec.t = ps.t_mid;
            rec.dt = ps.dt;
            rec.relative_error = std::numeric_limits<double>::quiet_NaN();
            rec.failure = e.what();
            have_prev = false;  // resynchronize the streaming pyramid
        }
        report.frames.push_back(std::move(rec));
    }

    report.recompute_aggregates(cfg.touchdown_floor);
    return report;
}

RunReport estimate_from_dir(const std::filesystem::path& dir, DepthModelKind model_override) {
    ScenarioConfig cfg = load_config(dir / "run_config.cfg");
    if (model_override != DepthModelKind::Auto) {
        cfg.model = model_override;
    }
    const CameraIntrinsics k = cfg.intrinsics();
    const auto telemetry = detail::read_numeric_csv(dir / "telemetry.csv", 14);
    const auto truth = detail::read_numeric_csv(dir / "truth.csv", 14);
    if (telemetry.size() != truth.size() || telemetry.size() < 2) {
        throw IoError("telemetry/truth mismatch under " + dir.string());
    }

    auto sample_from_row = [&](const std::vector<double>& row) {
        TrajectorySample s;
        s.t = row[0];
        s.position = Vec3(row[1], row[2], row[3]);
        s.velocity = Vec3(row[4], row[5], row[6]);
        s.attitude = {row[7], row[8], row[9]};
        s.rates = {row[10], row[11], row[12]};
        s.world_from_body =
            world_from_body_frame(s.position, s.velocity, cfg.terrain.base, cfg.terrain.sphere_radius);
        return s;
    };

    RunReport report;
    report.scenario = cfg.scenario;
    report.model = cfg.model;
    report.seed = cfg.seed;

    PairProcessor processor(cfg, k);
    const int pad = pyramid_pad_for(cfg.lk);
    GrayImage prev_img = load_pgm(dir / detail::frame_name(0));
    ImagePyramid prev_pyr = build_pyramid(prev_img, cfg.lk.pyramid_levels, pad);

    for (std::size_t i = 0; i + 1 < telemetry.size(); ++i) {
        const TrajectorySample m0 = sample_from_row(telemetry[i]);
        const TrajectorySample m1 = sample_from_row(telemetry[i + 1]);
        const TrajectorySample t0 = sample_from_row(truth[i]);
        const TrajectorySample t1 = sample_from_row(truth[i + 1]);

        PairState ps;
        ps.dt = t1.t - t0.t;
        ps.t_mid = 0.5 * (t0.t + t1.t);
        ps.position = 0.5 * (t0.position + t1.position);
        ps.velocity = 0.5 * (t0.velocity + t1.velocity);
        ps.attitude_true = mid_attitude(t0.attitude, t1.attitude);
        ps.rates_true = mid_rates(t0.rates, t1.rates);
        ps.attitude_meas = mid_attitude(m0.attitude, m1.attitude);
        ps.rates_meas = mid_rates(m0.rates, m1.rates);
        ps.range_meas = 0.5 * (telemetry[i][13] + telemetry[i + 1][13]);
        ps.world_from_body = world_from_body_frame(ps.position, ps.velocity, cfg.terrain.base,
                                                   cfg.terrain.sphere_radius);

        FrameRecord rec;
        try {
            if (!std::isfinite(ps.range_meas)) {
                throw NoIntersectionError("rangefinder dropout");
            }
            GrayImage next_img = load_pgm(dir / detail::frame_name(i + 1));
            ImagePyramid next_pyr = build_pyramid(next_img, cfg.lk.pyramid_levels, pad);
            std::vector<FlowObservation> obs =
                estimate_flow(prev_img, prev_pyr, next_pyr, ps.dt, cfg.lk, k);
            prev_img = std::move(next_img);
            prev_pyr = std::move(next_pyr);
            rec = processor.process(ps, std::move(obs));
        } catch (const std::exception& e) {
            rec.t = ps.t_mid;
            rec.dt = ps.dt;
            rec.relative_error = std::numeric_limits<double>::quiet_NaN();
            rec.failure = e.what();
            try {  // resynchronize the streaming pyramid
                prev_img = load_pgm(dir / detail::frame_name(i + 1));
                prev_pyr = build_pyramid(prev_img, cfg.lk.pyramid_levels, pad);
            } catch (const std::exception&) {
            }
        }
        report.frames.push_back(std::move(rec));
    }

    report.recompute_aggregates(cfg.touchdown_floor);
    return report;
}

std::vector<SweepResult> run_sweep(const ScenarioConfig& base, std::string_view axis,
                                   const std::vector<double>& values) {
    std::vector<SweepResult> out;
    out.reserve(values.size());
    for (const double value : values) {
        ScenarioConfig cfg = base;
        if (axis == "resolution") {
            cfg.resolution = static_cast<int>(value);
        } else if (axis == "frame-rate") {
            cfg.frame_rate = value;
        } else if (axis == "camera-noise") {
            cfg.noise.camera_sigma = value;
        } else if (axis == "state-noise") {
            cfg.noise.attitude_sigma = value;
            cfg.noise.rate_sigma = value;
        } else {
            throw ConfigError("unknown sweep axis: " + std::string(axis));
        }
        out.push_back({value, run_pipeline(cfg)});
    }
    return out;
}

}  // namespace ofnav
