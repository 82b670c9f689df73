#include "ofnav/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace ofnav {

namespace {

constexpr std::uint64_t kCameraNoiseTag = 0xCAFE01;
constexpr std::uint64_t kStateNoiseTag = 0x57A7E5;
constexpr std::uint64_t kRangeNoiseTag = 0x4A4E6E;

// Body frame at zero downrange angle: x along track, z toward the body
// center. Right-handed with the camera raster convention (y down).
const Mat3 kWorldFromBody = (Mat3() << 1, 0, 0, 0, -1, 0, 0, 0, -1).finished();

double hermite(double h0, double h1, double v0, double v1, double T, double s) {
    const double s2 = s * s, s3 = s2 * s;
    return h0 * (2 * s3 - 3 * s2 + 1) + T * v0 * (s3 - 2 * s2 + s) + h1 * (-2 * s3 + 3 * s2) +
           T * v1 * (s3 - s2);
}

double hermite_rate(double h0, double h1, double v0, double v1, double T, double s) {
    const double s2 = s * s;
    return (h0 * (6 * s2 - 6 * s) + T * v0 * (3 * s2 - 4 * s + 1) + h1 * (-6 * s2 + 6 * s) +
            T * v1 * (3 * s2 - 2 * s)) /
           T;
}

// smoothstep blend between endpoint values and its exact position integral
double blend(double a, double b, double s) { return a + (b - a) * s * s * (3.0 - 2.0 * s); }

double blend_integral(double a, double b, double T, double s) {
    // integral of blend() from 0 to s, times T
    const double s3 = s * s * s;
    return T * (a * s + (b - a) * (s3 - 0.5 * s3 * s));
}

}  // namespace

ScenarioKind scenario_from_name(std::string_view name) {
    if (name == "landing-flat") return ScenarioKind::LandingFlat;
    if (name == "landing-peak") return ScenarioKind::LandingPeak;
    if (name == "landing-crater") return ScenarioKind::LandingCrater;
    if (name == "landing-incline") return ScenarioKind::LandingIncline;
    if (name == "hohmann") return ScenarioKind::HohmannTransfer;
    if (name == "transfer-landing") return ScenarioKind::TransferToLanding;
    throw InvalidScenarioError("unknown scenario: " + std::string(name));
}

std::string_view scenario_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::LandingFlat: return "landing-flat";
        case ScenarioKind::LandingPeak: return "landing-peak";
        case ScenarioKind::LandingCrater: return "landing-crater";
        case ScenarioKind::LandingIncline: return "landing-incline";
        case ScenarioKind::HohmannTransfer: return "hohmann";
        case ScenarioKind::TransferToLanding: return "transfer-landing";
    }
    throw InvalidScenarioError("unknown scenario kind");
}

struct ProfileShape {
    bool spherical = false;
    double body_radius = 1.7374e6;
};

// Stored out-of-line so the header stays light.
namespace {
ProfileShape shape_for(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::HohmannTransfer:
        case ScenarioKind::TransferToLanding: return {true, 1.7374e6};
        default: return {false, 1.7374e6};
    }
}
}  // namespace

TrajectoryProfile TrajectoryProfile::for_scenario(ScenarioKind kind, double duration) {
    TrajectoryProfile p;
    p.kind_ = kind;

    auto one_phase = [&](double T, double h0, double h1, double v0, double v1, double u0, double u1) {
        Phase ph;
        ph.t0 = 0.0;
        ph.t1 = T;
        ph.h0 = h0;
        ph.h1 = h1;
        ph.v0 = v0;
        ph.v1 = v1;
        ph.u0 = u0;
        ph.u1 = u1;
        p.phases_ = {ph};
    };

    switch (kind) {
        case ScenarioKind::LandingFlat:
            one_phase(duration > 0 ? duration : 60.0, 4000.0, 100.0, -100.0, 0.0, 0.0, 0.0);
            p.site_elevation_ = 0.0;
            break;
        case ScenarioKind::LandingCrater:
            one_phase(duration > 0 ? duration : 60.0, 4000.0, 100.0, -100.0, 0.0, 0.0, 0.0);
            p.site_elevation_ = 0.0;
            break;
        case ScenarioKind::LandingPeak:
            one_phase(duration > 0 ? duration : 60.0, 11250.8, 7350.8, -100.0, 0.0, 0.0, 0.0);
            p.site_elevation_ = 7250.8;
            break;
        case ScenarioKind::LandingIncline:
            one_phase(duration > 0 ? duration : 60.0, 8661.4, 4761.4, -100.0, 0.0, 0.0, 0.0);
            p.site_elevation_ = 4661.4;
            break;
        case ScenarioKind::HohmannTransfer:
            one_phase(duration > 0 ? duration : 240.0, 300000.0, 4000.0, -0.18, -0.25, 1489.26,
                      1742.40);
            p.site_elevation_ = 0.0;
            break;
        case ScenarioKind::TransferToLanding: {
            // Orbital leg chained into the landing profile; the handoff at
            // 4 km carries 100 m/s of descent rate into the braking leg.
            const double T = duration > 0 ? duration : 300.0;
            const double ta = 0.8 * T, tb = 0.2 * T;
            Phase a;
            a.t0 = 0.0;
            a.t1 = ta;
            a.h0 = 102013.0;
            a.h1 = 4000.0;
            a.v0 = -0.217;
            a.v1 = -100.0;
            a.u0 = 1633.50;
            a.u1 = 50.0;
            Phase b;
            b.t0 = ta;
            b.t1 = ta + tb;
            b.h0 = 4000.0;
            b.h1 = 0.0;
            b.v0 = -100.0;
            b.v1 = -0.01;
            b.u0 = 50.0;
            b.u1 = 0.45;
            p.phases_ = {a, b};
            p.site_elevation_ = 0.0;
            break;
        }
    }
    return p;
}

TrajectorySample TrajectoryProfile::state(double t) const {
    const ProfileShape shape = shape_for(kind_);
    t = std::clamp(t, phases_.front().t0, phases_.back().t1);

    // accumulate the downrange coordinate across earlier phases
    double along = 0.0;  // plane: x (m); sphere: lambda (rad)
    const Phase* ph = &phases_.back();
    for (const Phase& cand : phases_) {
        const double T = cand.t1 - cand.t0;
        if (t <= cand.t1 || &cand == &phases_.back()) {
            ph = &cand;
            break;
        }
        if (shape.spherical) {
            const double mu0 = cand.u0 / (shape.body_radius + cand.h0);
            const double mu1 = cand.u1 / (shape.body_radius + cand.h1);
            along += blend_integral(mu0, mu1, T, 1.0);
        } else {
            along += blend_integral(cand.u0, cand.u1, T, 1.0);
        }
    }

    const double T = ph->t1 - ph->t0;
    const double s = std::clamp((t - ph->t0) / T, 0.0, 1.0);
    const double h = hermite(ph->h0, ph->h1, ph->v0, ph->v1, T, s);
    const double hdot = hermite_rate(ph->h0, ph->h1, ph->v0, ph->v1, T, s);

    TrajectorySample out;
    out.t = t;

    Mat3 world_from_body = kWorldFromBody;
    Vec3 body_rotation_world = Vec3::Zero();  // angular velocity of the body frame

    if (shape.spherical) {
        const double R = shape.body_radius;
        const double mu0 = ph->u0 / (R + ph->h0);
        const double mu1 = ph->u1 / (R + ph->h1);
        const double lambda = along + blend_integral(mu0, mu1, T, s);
        const double mu = blend(mu0, mu1, s);
        const Vec3 radial(std::sin(lambda), 0.0, std::cos(lambda));
        const Vec3 tangent(std::cos(lambda), 0.0, -std::sin(lambda));
        const Vec3 center(0.0, 0.0, -R);
        out.position = center + (R + h) * radial;
        out.velocity = hdot * radial + (R + h) * mu * tangent;
        world_from_body = world_from_body_frame(out.position, out.velocity, BaseSurface::Sphere, R);
        body_rotation_world = mu * Vec3::UnitY();
    } else {
        const double x = along + blend_integral(ph->u0, ph->u1, T, s);
        const double u = blend(ph->u0, ph->u1, s);
        out.position = Vec3(x, 0.0, h);
        out.velocity = Vec3(u, 0.0, hdot);
    }
    out.world_from_body = world_from_body;

    // attitude wobble around nadir and its analytic rates
    const double wp = 2.0 * M_PI / wobble_.period_phi;
    const double wt = 2.0 * M_PI / wobble_.period_theta;
    const double ws = 2.0 * M_PI / wobble_.period_psi;
    const double phi = wobble_.amp_phi * std::sin(wp * t + wobble_.phase_phi);
    const double theta = wobble_.amp_theta * std::sin(wt * t + wobble_.phase_theta);
    const double psi = wobble_.amp_psi * std::sin(ws * t + wobble_.phase_psi);
    const double dphi = wobble_.amp_phi * wp * std::cos(wp * t + wobble_.phase_phi);
    const double dtheta = wobble_.amp_theta * wt * std::cos(wt * t + wobble_.phase_theta);
    const double dpsi = wobble_.amp_psi * ws * std::cos(ws * t + wobble_.phase_psi);
    out.attitude = {phi, theta, psi};

    // camera-frame angular velocity: wobble relative to the body plus the
    // rotation of the body frame itself (fixed vectors appear to rotate with
    // +Rdot R^T, hence the parity flip on the wobble terms)
    const double cps = std::cos(psi), sps = std::sin(psi);
    const double cth = std::cos(theta), sth = std::sin(theta);
    const Vec3 rz_y(-sps, cps, 0.0);                      // Rz * unit-y
    const Vec3 rzry_x(cps * cth, sps * cth, -sth);        // Rz * Ry * unit-x
    const Vec3 wobble_cam = -(dpsi * Vec3::UnitZ() + dtheta * rz_y + dphi * rzry_x);
    const Mat3 cam_from_body = rotation_body_to_camera(out.attitude);
    const Vec3 body_rot_in_body = world_from_body.transpose() * body_rotation_world;
    const Vec3 omega = wobble_cam + cam_from_body * body_rot_in_body;
    out.rates = {omega.x(), omega.y(), omega.z()};
    return out;
}

std::vector<TrajectorySample> generate_trajectory(const TrajectoryProfile& profile,
                                                  double frame_rate) {
    if (!(frame_rate > 0.0)) {
        throw std::invalid_argument("generate_trajectory: frame rate must be positive");
    }
    const double T = profile.duration();
    const double dt = 1.0 / frame_rate;
    const int count = static_cast<int>(std::floor(T / dt + 1e-9)) + 1;
    std::vector<TrajectorySample> samples;
    samples.reserve(count);
    for (int i = 0; i < count; ++i) {
        samples.push_back(profile.state(i * dt));
    }
    return samples;
}

Mat3 world_from_body_frame(const Vec3& position, const Vec3& velocity, BaseSurface base,
                           double body_radius) {
    if (base == BaseSurface::Plane) {
        return kWorldFromBody;
    }
    const Vec3 center(0.0, 0.0, -body_radius);
    const Vec3 down = (center - position).normalized();
    Vec3 v_tangent = velocity - velocity.dot(down) * down;
    if (v_tangent.norm() < 1e-9) {
        // hovering: fall back to the downrange tangent through the position
        v_tangent = Vec3::UnitX() - Vec3::UnitX().dot(down) * down;
    }
    const Vec3 x_body = v_tangent.normalized();
    const Vec3 y_body = down.cross(x_body);
    Mat3 wb;
    wb.col(0) = x_body;
    wb.col(1) = y_body;
    wb.col(2) = down;
    return wb;
}

CameraPose camera_pose(const TrajectorySample& sample) {
    CameraPose pose;
    pose.position = sample.position;
    const Mat3 cam_from_body = rotation_body_to_camera(sample.attitude);
    pose.camera_to_world = sample.world_from_body * cam_from_body.transpose();
    return pose;
}

CameraVelocity camera_frame_velocity(const TrajectorySample& sample) {
    const Mat3 cam_from_body = rotation_body_to_camera(sample.attitude);
    const Vec3 v_body = sample.world_from_body.transpose() * sample.velocity;
    return CameraVelocity::from_vec(cam_from_body * v_body);
}

std::optional<double> raycast_depth(const Terrain& terrain, const CameraPose& pose,
                                    const PixelPoint& p, const CameraIntrinsics& k) {
    const NormalizedPoint n = pixel_to_normalized(p, k);
    const Vec3 dir = pose.ray_world(n);
    return terrain.raycast(pose.position, dir, 1.0 / k.fx);
}

double rangefinder_reading(const Terrain& terrain, const CameraPose& pose,
                           const CameraIntrinsics& k, const NoiseConfig& noise,
                           std::uint64_t frame_index) {
    const std::optional<double> range = raycast_depth(terrain, pose, {0.0, 0.0}, k);
    if (!range) {
        throw NoIntersectionError("rangefinder_reading: boresight misses the terrain");
    }
    double value = *range;
    if (noise.range_sigma > 0.0) {
        SeededRng rng(mix_seed(mix_seed(noise.seed, kRangeNoiseTag), frame_index));
        value *= 1.0 + rng.normal(0.0, noise.range_sigma);
    }
    return value;
}

GrayImage render_frame(const Terrain& terrain, const CameraPose& pose, const SunConfig& sun,
                       const CameraIntrinsics& k, const RenderOptions& opt) {
    GrayImage img(k.width, k.height, 0);
    const Vec3 sun_dir = sun.direction();
    if (sun_dir.z() <= 0.0) {
        return img;  // sun below the horizon: black frame
    }
    // Tone anchor: the unperturbed-ground response at the sub-camera point
    // maps to mid-scale, so exposure follows the local solar elevation.
    Vec3 local_up = Vec3::UnitZ();
    if (terrain.params().base == BaseSurface::Sphere) {
        local_up = (pose.position - terrain.sphere_center()).normalized();
    } else {
        local_up =
            Vec3(-terrain.params().slope_x, -terrain.params().slope_y, 1.0).normalized();
    }
    const double flat_lambert = std::max(local_up.dot(sun_dir), 0.004);
    const double inv_fx = 1.0 / k.fx;

    auto shade_row = [&](int y) {
        double hint = 0.0;
        for (int x = 0; x < k.width; ++x) {
            const PixelPoint pix = raster_to_pixel(x, y, k);
            const NormalizedPoint n = pixel_to_normalized(pix, k);
            const Vec3 dir = pose.ray_world(n);
            const std::optional<double> t = terrain.raycast(pose.position, dir, inv_fx, hint);
            if (!t) {
                hint = 0.0;
                continue;
            }
            hint = *t;
            const Vec3 hit = pose.position + *t * dir;
            const double footprint = *t * inv_fx;
            const Vec3 normal = terrain.surface_normal(hit, footprint);
            double lambert = std::max(0.0, normal.dot(sun_dir));
            if (opt.shadows && lambert > 0.0) {
                // coarse occlusion march toward the sun
                double step = std::max(4.0 * footprint, 0.5);
                Vec3 q = hit + (2.0 * footprint + 0.05) * normal;
                for (int i = 0; i < 64; ++i) {
                    q += step * sun_dir;
                    const double c = terrain.clearance(q, footprint);
                    if (c < 0.0) {
                        lambert = 0.0;
                        break;
                    }
                    if (c > terrain.max_relief_up() + terrain.max_relief_down()) {
                        break;
                    }
                    step *= 1.3;
                }
            }
            const double tone = lambert / (lambert + flat_lambert);
            const double value = 255.0 * terrain.albedo(hit, footprint) * tone;
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
        }
    };

    const int threads = std::max(1, opt.threads);
    if (threads == 1) {
        for (int y = 0; y < k.height; ++y) shade_row(y);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next_row{0};
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back([&]() {
                for (;;) {
                    const int y = next_row.fetch_add(1);
                    if (y >= k.height) return;
                    shade_row(y);
                }
            });
        }
        for (std::thread& th : pool) th.join();
    }
    return img;
}

std::vector<FlowObservation> ground_truth_flow(const Terrain& terrain, const CameraPose& pose,
                                               const CameraVelocity& v, const AngularRates& w,
                                               std::span<const PixelPoint> pts,
                                               const CameraIntrinsics& k) {
    std::vector<FlowObservation> obs;
    obs.reserve(pts.size());
    for (const PixelPoint& p : pts) {
        const std::optional<double> range = raycast_depth(terrain, pose, p, k);
        if (!range) continue;
        const NormalizedPoint n = pixel_to_normalized(p, k);
        const double depth = *range / std::sqrt(n.x * n.x + n.y * n.y + 1.0);
        obs.push_back({p, predict_flow(p, 1.0 / depth, v, w, k)});
    }
    return obs;
}

GrayImage add_camera_noise(const GrayImage& img, const NoiseConfig& noise,
                           std::uint64_t frame_index) {
    if (noise.camera_sigma <= 0.0) {
        return img;
    }
    GrayImage out = img;
    SeededRng rng(mix_seed(mix_seed(noise.seed, kCameraNoiseTag), frame_index));
    for (std::uint8_t& px : out.pixels) {
        const double v = px + rng.normal(0.0, noise.camera_sigma);
        px = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return out;
}

TrajectorySample add_state_noise(const TrajectorySample& sample, const NoiseConfig& noise,
                                 std::uint64_t frame_index) {
    if (noise.attitude_sigma <= 0.0 && noise.rate_sigma <= 0.0) {
        return sample;
    }
    TrajectorySample out = sample;
    SeededRng rng(mix_seed(mix_seed(noise.seed, kStateNoiseTag), frame_index));
    out.attitude.phi += rng.normal(0.0, noise.attitude_sigma);
    out.attitude.theta += rng.normal(0.0, noise.attitude_sigma);
    out.attitude.psi += rng.normal(0.0, noise.attitude_sigma);
    out.rates.p += rng.normal(0.0, noise.rate_sigma);
    out.rates.q += rng.normal(0.0, noise.rate_sigma);
    out.rates.r += rng.normal(0.0, noise.rate_sigma);
    return out;
}

TerrainParams scenario_terrain(ScenarioKind kind, std::uint64_t seed) {
    TerrainParams tp;
    tp.seed = seed;
    double nominal_site = 0.0;
    switch (kind) {
        case ScenarioKind::LandingFlat:
            break;
        case ScenarioKind::LandingCrater:
            tp.craters = {{0.0, 0.0, 1400.0, 110.0},
                          {900.0, -700.0, 420.0, 40.0},
                          {-800.0, 500.0, 260.0, 22.0}};
            break;
        case ScenarioKind::LandingPeak:
            tp.relief_amplitude = 8.0;
            tp.craters = {{0.0, 0.0, 1500.0, -180.0}};
            nominal_site = 7250.8;
            break;
        case ScenarioKind::LandingIncline:
            tp.slope_x = std::tan(12.0 * M_PI / 180.0);
            nominal_site = 4661.4;
            break;
        case ScenarioKind::HohmannTransfer:
        case ScenarioKind::TransferToLanding:
            tp.base = BaseSurface::Sphere;
            tp.relief_amplitude = 120.0;
            tp.relief_wavelength = 24000.0;
            tp.albedo_wavelength = 120000.0;
            tp.albedo_octaves = 16;
            tp.albedo_contrast = 0.5;
            break;
    }
    if (tp.base == BaseSurface::Plane) {
        // anchor the surface under the site at the nominal elevation so the
        // final hover clearance matches the scenario table exactly
        const Terrain probe(tp);
        tp.site_elevation = nominal_site - probe.relief(0.0, 0.0);
    }
    return tp;
}

}  // namespace ofnav
