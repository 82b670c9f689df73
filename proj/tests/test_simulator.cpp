#include <doctest.h>

#include <cmath>

#include "ofnav/depth_model.hpp"
#include "ofnav/flow.hpp"
#include "ofnav/simulator.hpp"

using namespace ofnav;

namespace {

TerrainParams flat_zero_relief() {
    TerrainParams tp;
    tp.relief_amplitude = 0.0;
    tp.albedo_contrast = 0.0;
    return tp;
}

// Reproject a fixed world point into the camera at a given sample.
PixelPoint project(const TrajectorySample& s, const Vec3& world_point, const CameraIntrinsics& k) {
    const CameraPose pose = camera_pose(s);
    const Vec3 in_cam = pose.camera_to_world.transpose() * (world_point - pose.position);
    REQUIRE(in_cam.z() > 0.0);
    return {k.fx * in_cam.x() / in_cam.z(), k.fy * in_cam.y() / in_cam.z()};
}

}  // namespace

TEST_CASE("generate_trajectory") {
    SUBCASE("table endpoints are reproduced exactly") {
        const TrajectoryProfile flat = TrajectoryProfile::for_scenario(ScenarioKind::LandingFlat);
        const TrajectorySample s0 = flat.state(0.0);
        const TrajectorySample s1 = flat.state(flat.duration());
        CHECK(s0.position.z() == doctest::Approx(4000.0).epsilon(1e-12));
        CHECK(s0.velocity.z() == doctest::Approx(-100.0).epsilon(1e-12));
        CHECK(s1.position.z() == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(std::abs(s1.velocity.z()) < 1e-9);

        const TrajectoryProfile hoh = TrajectoryProfile::for_scenario(ScenarioKind::HohmannTransfer);
        const TrajectorySample h0 = hoh.state(0.0);
        const TrajectorySample h1 = hoh.state(hoh.duration());
        // altitude above the sphere and horizontal/vertical speed split
        const Vec3 center(0.0, 0.0, -1.7374e6);
        CHECK((h0.position - center).norm() - 1.7374e6 == doctest::Approx(300000.0).epsilon(1e-12));
        CHECK((h1.position - center).norm() - 1.7374e6 == doctest::Approx(4000.0).epsilon(1e-9));
        const Vec3 up0 = (h0.position - center).normalized();
        CHECK(h0.velocity.dot(up0) == doctest::Approx(-0.18).epsilon(1e-9));
        CHECK((h0.velocity - h0.velocity.dot(up0) * up0).norm() ==
              doctest::Approx(1489.26).epsilon(1e-9));
        const Vec3 up1 = (h1.position - center).normalized();
        CHECK(h1.velocity.dot(up1) == doctest::Approx(-0.25).epsilon(1e-6));
        CHECK((h1.velocity - h1.velocity.dot(up1) * up1).norm() ==
              doctest::Approx(1742.40).epsilon(1e-9));

        const TrajectoryProfile full =
            TrajectoryProfile::for_scenario(ScenarioKind::TransferToLanding);
        const TrajectorySample f0 = full.state(0.0);
        const TrajectorySample f1 = full.state(full.duration());
        CHECK((f0.position - center).norm() - 1.7374e6 == doctest::Approx(102013.0).epsilon(1e-12));
        CHECK((f1.position - center).norm() - 1.7374e6 == doctest::Approx(0.0).epsilon(1e-6));
        const Vec3 upf = (f1.position - center).normalized();
        CHECK((f1.velocity - f1.velocity.dot(upf) * upf).norm() ==
              doctest::Approx(0.45).epsilon(1e-9));
    }

    SUBCASE("velocity matches finite differences of position") {
        for (const ScenarioKind kind :
             {ScenarioKind::LandingFlat, ScenarioKind::HohmannTransfer,
              ScenarioKind::TransferToLanding}) {
            const TrajectoryProfile profile = TrajectoryProfile::for_scenario(kind);
            const auto samples = generate_trajectory(profile, 400.0);
            for (std::size_t i = 1; i + 1 < samples.size(); i += 97) {
                const Vec3 fd =
                    (samples[i + 1].position - samples[i - 1].position) /
                    (samples[i + 1].t - samples[i - 1].t);
                const double rel = (fd - samples[i].velocity).norm() / samples[i].velocity.norm();
                CHECK(rel < 1e-6);
            }
        }
    }

    SUBCASE("4 Hz over a 60 s descent gives 241 samples") {
        const TrajectoryProfile flat = TrajectoryProfile::for_scenario(ScenarioKind::LandingFlat);
        CHECK(generate_trajectory(flat, 4.0).size() == 241);
    }

    SUBCASE("attitude rates are bounded and continuous") {
        const TrajectoryProfile flat = TrajectoryProfile::for_scenario(ScenarioKind::LandingFlat);
        AngularRates prev = flat.state(0.0).rates;
        for (double t = 0.05; t <= 60.0; t += 0.05) {
            const AngularRates r = flat.state(t).rates;
            CHECK(std::abs(r.p) < 0.02);
            CHECK(std::abs(r.q) < 0.02);
            CHECK(std::abs(r.r) < 0.02);
            CHECK(std::abs(r.p - prev.p) < 0.001);
            prev = r;
        }
    }
}

TEST_CASE("raycast_depth") {
    const CameraIntrinsics k = CameraIntrinsics::square(512, 512.0);

    SUBCASE("nadir boresight over a flat plane returns the altitude") {
        const Terrain terrain(flat_zero_relief());
        TrajectorySample s;
        s.position = Vec3(0.0, 0.0, 1234.0);
        const auto d = raycast_depth(terrain, camera_pose(s), {0.0, 0.0}, k);
        REQUIRE(d.has_value());
        CHECK(*d == doctest::Approx(1234.0).epsilon(1e-12));
    }

    SUBCASE("unperturbed sphere matches the spherical depth model across the FOV") {
        TerrainParams tp = flat_zero_relief();
        tp.base = BaseSurface::Sphere;
        const Terrain terrain(tp);
        TrajectorySample s;
        s.position = Vec3(0.0, 0.0, 250000.0);
        const CameraPose pose = camera_pose(s);
        const SphericalModel model{UnitNormal{0.0, 0.0, 1.0}, 250000.0, tp.sphere_radius};
        for (double xn = -0.45; xn <= 0.45; xn += 0.09) {
            for (double yn = -0.45; yn <= 0.45; yn += 0.09) {
                const PixelPoint p = normalized_to_pixel({xn, yn}, k);
                const auto range = raycast_depth(terrain, pose, p, k);
                REQUIRE(range.has_value());
                const double z = *range / std::sqrt(xn * xn + yn * yn + 1.0);
                const InverseDepth d = spherical_inverse_depth({xn, yn}, model);
                REQUIRE(d.ok());
                CHECK(std::abs(z - 1.0 / d.value) / z < 1e-8);
            }
        }
    }

    SUBCASE("sky-pointing ray misses") {
        const Terrain terrain(flat_zero_relief());
        CameraPose pose;
        pose.position = Vec3(0.0, 0.0, 1000.0);
        pose.camera_to_world = Mat3::Identity();  // boresight along +z (up)
        CHECK_FALSE(terrain.raycast(pose.position, Vec3::UnitZ()).has_value());
    }

    SUBCASE("perturbed terrain agrees with the clearance function at the hit") {
        TerrainParams tp;
        tp.seed = 9;
        const Terrain terrain(tp);
        TrajectorySample s;
        s.position = Vec3(40.0, -25.0, 800.0);
        const CameraPose pose = camera_pose(s);
        for (double xn = -0.4; xn <= 0.4; xn += 0.1) {
            const PixelPoint p = normalized_to_pixel({xn, 0.17}, k);
            const auto range = raycast_depth(terrain, pose, p, k);
            REQUIRE(range.has_value());
            const Vec3 n(xn, 0.17, 1.0);
            const Vec3 hit = pose.position + *range * (pose.camera_to_world * n).normalized();
            CHECK(std::abs(terrain.clearance(hit, *range / k.fx)) < 1e-4);
        }
    }
}

TEST_CASE("rangefinder_reading") {
    const CameraIntrinsics k = CameraIntrinsics::square(256, 256.0);
    const Terrain terrain(flat_zero_relief());
    TrajectorySample s;
    s.position = Vec3(0.0, 0.0, 1000.0);
    const CameraPose pose = camera_pose(s);

    SUBCASE("noise-free reading equals the boresight range") {
        CHECK(rangefinder_reading(terrain, pose, k, {}, 0) ==
              doctest::Approx(1000.0).epsilon(1e-12));
    }
    SUBCASE("same seed gives identical readings") {
        NoiseConfig n;
        n.range_sigma = 0.01;
        n.seed = 5;
        CHECK(rangefinder_reading(terrain, pose, k, n, 3) ==
              rangefinder_reading(terrain, pose, k, n, 3));
        CHECK(rangefinder_reading(terrain, pose, k, n, 3) !=
              rangefinder_reading(terrain, pose, k, n, 4));
    }
    SUBCASE("empirical spread matches the configured sigma") {
        NoiseConfig n;
        n.range_sigma = 0.01;
        n.seed = 11;
        double sum = 0.0, sum_sq = 0.0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            const double v = rangefinder_reading(terrain, pose, k, n, i);
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / draws;
        const double std = std::sqrt(sum_sq / draws - mean * mean);
        CHECK(std::abs(std - 10.0) < 0.5);  // 1% of 1000 m, within 5%
    }
}

TEST_CASE("render_frame") {
    const CameraIntrinsics k = CameraIntrinsics::square(128, 128.0);

    SUBCASE("zenith sun over a uniform flat plane renders uniformly") {
        const Terrain terrain(flat_zero_relief());
        TrajectorySample s;
        s.position = Vec3(0.0, 0.0, 500.0);
        SunConfig sun;
        sun.elevation = M_PI / 2.0;
        const GrayImage img = render_frame(terrain, camera_pose(s), sun, k);
        for (const auto px : img.pixels) {
            CHECK(std::abs(int(px) - int(img.pixels[0])) <= 1);
        }
    }

    SUBCASE("sun below the horizon renders black") {
        TerrainParams tp;
        tp.seed = 3;
        const Terrain terrain(tp);
        TrajectorySample s;
        s.position = Vec3(0.0, 0.0, 500.0);
        SunConfig sun;
        sun.elevation = -0.05;
        const GrayImage img = render_frame(terrain, camera_pose(s), sun, k);
        for (const auto px : img.pixels) CHECK(px == 0);
    }

    SUBCASE("thread count does not change the image") {
        TerrainParams tp;
        tp.seed = 21;
        const Terrain terrain(tp);
        TrajectorySample s;
        s.position = Vec3(10.0, 5.0, 900.0);
        RenderOptions one, four;
        one.threads = 1;
        four.threads = 4;
        const GrayImage a = render_frame(terrain, camera_pose(s), {}, k, one);
        const GrayImage b = render_frame(terrain, camera_pose(s), {}, k, four);
        CHECK(a.pixels == b.pixels);
    }

    SUBCASE("camera translation over a flat textured plane shifts the image") {
        // pure lateral translation at constant altitude: content shifts by
        // fx * dx / H pixels; verify by dense correlation of central crops
        TerrainParams tp = flat_zero_relief();
        tp.albedo_contrast = 0.5;
        tp.albedo_wavelength = 300.0;
        tp.seed = 77;
        const Terrain terrain(tp);
        const double altitude = 1000.0;
        const double shift_px = 5.0;
        const double dx = shift_px * altitude / k.fx;

        TrajectorySample s0, s1;
        s0.position = Vec3(0.0, 0.0, altitude);
        s1.position = Vec3(dx, 0.0, altitude);
        const GrayImage a = render_frame(terrain, camera_pose(s0), {}, k);
        const GrayImage b = render_frame(terrain, camera_pose(s1), {}, k);

        // content moves by -shift_px in x; find the best integer alignment
        const int half = 40;
        const int cx = 64, cy = 64;
        double best = -1e18;
        int best_dx = 99, best_dy = 99;
        for (int oy = -8; oy <= 8; ++oy) {
            for (int ox = -8; ox <= 8; ++ox) {
                double corr = 0.0;
                for (int y = -half; y < half; ++y) {
                    for (int x = -half; x < half; ++x) {
                        const double va = a.at(cx + x, cy + y) - 127.0;
                        const double vb = b.at(cx + x + ox, cy + y + oy) - 127.0;
                        corr += va * vb;
                    }
                }
                if (corr > best) {
                    best = corr;
                    best_dx = ox;
                    best_dy = oy;
                }
            }
        }
        CHECK(best_dx == -static_cast<int>(shift_px));
        CHECK(best_dy == 0);
    }
}

TEST_CASE("ground_truth_flow") {
    const CameraIntrinsics k = CameraIntrinsics::square(512, 512.0);

    SUBCASE("static camera sees zero flow") {
        const Terrain terrain(flat_zero_relief());
        TrajectorySample s;
        s.position = Vec3(0.0, 0.0, 2000.0);
        const std::vector<PixelPoint> pts = {{0.0, 0.0}, {100.0, -50.0}, {-200.0, 150.0}};
        const auto obs = ground_truth_flow(terrain, camera_pose(s), {}, {}, pts, k);
        REQUIRE(obs.size() == 3);
        for (const auto& o : obs) {
            CHECK(o.flow.u == 0.0);
            CHECK(o.flow.v == 0.0);
        }
    }

    SUBCASE("flat terrain matches the planar depth model prediction") {
        const Terrain terrain(flat_zero_relief());
        const TrajectoryProfile profile = TrajectoryProfile::for_scenario(ScenarioKind::LandingFlat);
        const TrajectorySample s = profile.state(20.0);
        const CameraPose pose = camera_pose(s);
        const CameraVelocity v = camera_frame_velocity(s);

        // exact model: true plane normal in camera coordinates and true range
        const Vec3 down_world(0.0, 0.0, -1.0);
        const Vec3 k_cam = pose.camera_to_world.transpose() * down_world;
        const double range = *raycast_depth(terrain, pose, {0.0, 0.0}, k);
        const PlanarFixedModel model{UnitNormal::from_vec(k_cam), range};

        std::vector<PixelPoint> pts;
        for (double x = -200.0; x <= 200.0; x += 100.0) {
            for (double y = -200.0; y <= 200.0; y += 100.0) {
                pts.push_back({x, y});
            }
        }
        const auto obs = ground_truth_flow(terrain, pose, v, s.rates, pts, k);
        REQUIRE(obs.size() == pts.size());
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const InverseDepth d = planar_inverse_depth(pixel_to_normalized(pts[i], k), model);
            REQUIRE(d.ok());
            const FlowVector pred = predict_flow(pts[i], d.value, v, s.rates, k);
            CHECK(std::abs(obs[i].flow.u - pred.u) < 1e-10 * std::max(1.0, std::abs(pred.u)));
            CHECK(std::abs(obs[i].flow.v - pred.v) < 1e-10 * std::max(1.0, std::abs(pred.v)));
        }
    }

    SUBCASE("flow times dt matches reprojected displacement to second order") {
        // the strongest convention check: flow predicted at time t must match
        // the actual motion of projected terrain points, including attitude
        // wobble and (for the orbital case) the rotating body frame
        struct Case {
            ScenarioKind kind;
            double t;
        };
        for (const Case c : {Case{ScenarioKind::LandingFlat, 10.0},
                             Case{ScenarioKind::LandingIncline, 25.0},
                             Case{ScenarioKind::HohmannTransfer, 120.0}}) {
            TerrainParams tp = flat_zero_relief();
            double site = 0.0;
            if (c.kind == ScenarioKind::LandingIncline) {
                tp.slope_x = std::tan(12.0 * M_PI / 180.0);
                site = 4661.4;
            }
            if (c.kind == ScenarioKind::HohmannTransfer) {
                tp.base = BaseSurface::Sphere;
            }
            tp.site_elevation = site;
            const Terrain terrain(tp);
            const TrajectoryProfile profile = TrajectoryProfile::for_scenario(c.kind);
            const double dt = 1e-3;
            const TrajectorySample s = profile.state(c.t);
            const TrajectorySample s2 = profile.state(c.t + dt);
            const CameraPose pose = camera_pose(s);
            const CameraVelocity v = camera_frame_velocity(s);

            const std::vector<PixelPoint> pts = {
                {0.0, 0.0}, {150.0, 90.0}, {-120.0, 60.0}, {200.0, -180.0}, {-60.0, -140.0}};
            const auto obs = ground_truth_flow(terrain, pose, v, s.rates, pts, k);
            REQUIRE(obs.size() == pts.size());
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const Vec3 dir = pose.ray_world(pixel_to_normalized(pts[i], k));
                const double range = *raycast_depth(terrain, pose, pts[i], k);
                const Vec3 world_point = pose.position + range * dir;
                const PixelPoint moved = project(s2, world_point, k);
                const double du = obs[i].flow.u * dt - (moved.x - pts[i].x);
                const double dv = obs[i].flow.v * dt - (moved.y - pts[i].y);
                CHECK(std::abs(du) < 1e-4);
                CHECK(std::abs(dv) < 1e-4);
            }
        }
    }
}

TEST_CASE("pure-roll frame pair matches the predicted rotational field") {
    // render-in-the-loop check: a camera rolling about its boresight between
    // two frames produces tracked flow matching the motion-field prediction
    TerrainParams tp;
    tp.seed = 61;
    const Terrain terrain(tp);
    const CameraIntrinsics k = CameraIntrinsics::square(256, 256.0);
    const double dt = 0.25;
    const double dpsi = 0.004;

    TrajectorySample s0, s1;
    s0.position = s1.position = Vec3(0.0, 0.0, 1500.0);
    s1.attitude.psi = dpsi;
    const GrayImage a = render_frame(terrain, camera_pose(s0), {}, k, {2, false});
    const GrayImage b = render_frame(terrain, camera_pose(s1), {}, k, {2, false});

    LKParams p;
    p.min_distance = 16.0;
    const auto obs = estimate_flow(a, b, dt, p, k);
    REQUIRE(obs.size() >= 30);

    // camera rolls by +dpsi: its angular rate about the boresight is -dpsi/dt
    const AngularRates w{0.0, 0.0, -dpsi / dt};
    double err_sq = 0.0;
    for (const auto& o : obs) {
        const FlowVector pred = predict_flow(o.point, 1.0 / 1500.0, {}, w, k);
        err_sq += (o.flow.u - pred.u) * (o.flow.u - pred.u) +
                  (o.flow.v - pred.v) * (o.flow.v - pred.v);
    }
    const double rms = std::sqrt(err_sq / (2.0 * obs.size()));
    CHECK(rms < 0.5);
}

TEST_CASE("sensor noise") {
    SUBCASE("camera noise: zero sigma is the identity, same seed repeats") {
        GrayImage img(64, 64, 128);
        NoiseConfig n;
        CHECK(add_camera_noise(img, n, 0).pixels == img.pixels);
        n.camera_sigma = 16.0;
        n.seed = 4;
        CHECK(add_camera_noise(img, n, 7).pixels == add_camera_noise(img, n, 7).pixels);
        CHECK(add_camera_noise(img, n, 7).pixels != add_camera_noise(img, n, 8).pixels);
    }
    SUBCASE("camera noise: empirical STD near sigma at mid-gray") {
        GrayImage img(256, 256, 128);
        NoiseConfig n;
        n.camera_sigma = 32.0;
        n.seed = 6;
        const GrayImage noisy = add_camera_noise(img, n, 0);
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < noisy.pixels.size(); ++i) {
            const double d = double(noisy.pixels[i]) - 128.0;
            sum += d;
            sum_sq += d * d;
        }
        const double mean = sum / noisy.pixels.size();
        const double std = std::sqrt(sum_sq / noisy.pixels.size() - mean * mean);
        CHECK(std::abs(std - 32.0) / 32.0 < 0.05);
    }
    SUBCASE("state noise: zero sigma is the identity; position untouched") {
        const TrajectoryProfile flat = TrajectoryProfile::for_scenario(ScenarioKind::LandingFlat);
        const TrajectorySample s = flat.state(30.0);
        NoiseConfig n;
        const TrajectorySample same = add_state_noise(s, n, 2);
        CHECK(same.attitude.phi == s.attitude.phi);
        CHECK(same.rates.q == s.rates.q);

        n.attitude_sigma = 1e-3;
        n.rate_sigma = 1e-4;
        n.seed = 8;
        const TrajectorySample noisy = add_state_noise(s, n, 2);
        CHECK(noisy.position == s.position);
        CHECK(noisy.velocity == s.velocity);
        CHECK(noisy.attitude.phi != s.attitude.phi);

        double sum_sq = 0.0;
        const int draws = 3000;
        for (int i = 0; i < draws; ++i) {
            const TrajectorySample d = add_state_noise(s, n, i);
            const double delta = d.attitude.phi - s.attitude.phi;
            sum_sq += delta * delta;
        }
        const double std = std::sqrt(sum_sq / draws);
        CHECK(std::abs(std - 1e-3) / 1e-3 < 0.06);
    }
}
