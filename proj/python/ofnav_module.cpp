// Python bindings for the core operations: camera geometry, depth models,
// motion-field inversion, the sparse-flow front-end, the terrain simulator
// and the experiment harness.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "ofnav/harness.hpp"

namespace py = pybind11;
using namespace ofnav;

namespace {

GrayImage gray_from_numpy(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) {
        throw std::invalid_argument("expected a 2-D uint8 array (height, width)");
    }
    GrayImage img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::memcpy(img.pixels.data(), arr.data(), img.pixels.size());
    return img;
}

py::array_t<std::uint8_t> numpy_from_gray(const GrayImage& img) {
    py::array_t<std::uint8_t> arr({img.height, img.width});
    std::memcpy(arr.mutable_data(), img.pixels.data(), img.pixels.size());
    return arr;
}

py::array_t<double> grid_to_numpy(const DepthGrid& grid) {
    py::array_t<double> arr({grid.rows, grid.cols});
    auto view = arr.mutable_unchecked<2>();
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const InverseDepth& d = grid.at(c, r);
            view(r, c) = d.ok() ? d.value : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return arr;
}

// The C++ side takes a std::variant of the depth models; Python callers pass
// a concrete model, so each alternative gets its own overload.
template <typename Model>
void bind_model_dispatch(py::module_& m) {
    m.def(
        "invert_linear",
        [](const std::vector<FlowObservation>& obs, const AngularRates& w, const Model& model,
           const CameraIntrinsics& k, const InversionOptions& opt) {
            return invert_linear(obs, w, DepthModel(model), k, opt);
        },
        py::arg("observations"), py::arg("rates"), py::arg("model"), py::arg("intrinsics"),
        py::arg("options") = InversionOptions{});
    m.def(
        "inverse_depth_grid",
        [](const Model& model, const CameraIntrinsics& k, int stride) {
            return grid_to_numpy(inverse_depth_grid(DepthModel(model), k, stride));
        },
        py::arg("model"), py::arg("intrinsics"), py::arg("stride"),
        "Inverse depth sampled on a pixel grid; cells that miss are NaN.");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monocular optical-flow egomotion estimation for lunar descent";

    py::register_exception<NoIntersectionError>(m, "NoIntersectionError");
    py::register_exception<NoFeaturesError>(m, "NoFeaturesError");
    py::register_exception<InsufficientFeaturesError>(m, "InsufficientFeaturesError");
    py::register_exception<RankDeficientError>(m, "RankDeficientError");
    py::register_exception<InvalidScenarioError>(m, "InvalidScenarioError");
    py::register_exception<ConfigError>(m, "ConfigError");

    // ----------------------------------------------------------- geometry
    py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init<>())
        .def_readwrite("fx", &CameraIntrinsics::fx)
        .def_readwrite("fy", &CameraIntrinsics::fy)
        .def_readwrite("cx", &CameraIntrinsics::cx)
        .def_readwrite("cy", &CameraIntrinsics::cy)
        .def_readwrite("width", &CameraIntrinsics::width)
        .def_readwrite("height", &CameraIntrinsics::height)
        .def_static("square", &CameraIntrinsics::square, py::arg("size"), py::arg("focal"));

    py::class_<PixelPoint>(m, "PixelPoint")
        .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("x", &PixelPoint::x)
        .def_readwrite("y", &PixelPoint::y);

    py::class_<NormalizedPoint>(m, "NormalizedPoint")
        .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("x", &NormalizedPoint::x)
        .def_readwrite("y", &NormalizedPoint::y);

    py::class_<Attitude>(m, "Attitude")
        .def(py::init<double, double, double>(), py::arg("phi") = 0.0, py::arg("theta") = 0.0,
             py::arg("psi") = 0.0)
        .def_readwrite("phi", &Attitude::phi)
        .def_readwrite("theta", &Attitude::theta)
        .def_readwrite("psi", &Attitude::psi);

    py::class_<AngularRates>(m, "AngularRates")
        .def(py::init<double, double, double>(), py::arg("p") = 0.0, py::arg("q") = 0.0,
             py::arg("r") = 0.0)
        .def_readwrite("p", &AngularRates::p)
        .def_readwrite("q", &AngularRates::q)
        .def_readwrite("r", &AngularRates::r);

    py::class_<UnitNormal>(m, "UnitNormal")
        .def(py::init([](double a, double b, double g) {
                 return UnitNormal::from_vec(Vec3(a, b, g));
             }),
             py::arg("alpha") = 0.0, py::arg("beta") = 0.0, py::arg("gamma") = 1.0)
        .def_readonly("alpha", &UnitNormal::alpha)
        .def_readonly("beta", &UnitNormal::beta)
        .def_readonly("gamma", &UnitNormal::gamma);

    py::class_<SphereGeometry>(m, "SphereGeometry")
        .def_readonly("normal", &SphereGeometry::normal)
        .def_readonly("altitude", &SphereGeometry::altitude);

    m.def("pixel_to_normalized", &pixel_to_normalized, py::arg("point"), py::arg("intrinsics"));
    m.def("normalized_to_pixel", &normalized_to_pixel, py::arg("point"), py::arg("intrinsics"));
    m.def("rotation_body_to_camera", &rotation_body_to_camera, py::arg("attitude"));
    m.def("attitude_to_plane_normal", &attitude_to_plane_normal, py::arg("attitude"));
    m.def("attitude_to_sphere_geometry", &attitude_to_sphere_geometry, py::arg("attitude"),
          py::arg("range"), py::arg("radius"));

    // -------------------------------------------------------- depth models
    py::enum_<DepthFailure>(m, "DepthFailure")
        .value("NONE", DepthFailure::None)
        .value("NON_POSITIVE_DEPTH", DepthFailure::NonPositiveDepth)
        .value("NO_INTERSECTION", DepthFailure::NoIntersection);

    py::class_<InverseDepth>(m, "InverseDepth")
        .def_readonly("value", &InverseDepth::value)
        .def_readonly("failure", &InverseDepth::failure)
        .def("ok", &InverseDepth::ok);

    py::class_<PlanarFixedModel>(m, "PlanarFixedModel")
        .def(py::init<const UnitNormal&, double>(), py::arg("normal"), py::arg("range"))
        .def_readonly("normal", &PlanarFixedModel::normal)
        .def_readonly("range", &PlanarFixedModel::range);

    py::class_<PlanarSlopeModel>(m, "PlanarSlopeModel")
        .def(py::init<double, double, double>(), py::arg("alpha"), py::arg("beta"), py::arg("range"))
        .def_readonly("alpha", &PlanarSlopeModel::alpha)
        .def_readonly("beta", &PlanarSlopeModel::beta)
        .def_readonly("range", &PlanarSlopeModel::range)
        .def("gamma", &PlanarSlopeModel::gamma);

    py::class_<SphericalModel>(m, "SphericalModel")
        .def(py::init<const UnitNormal&, double, double>(), py::arg("normal"), py::arg("range"),
             py::arg("radius"))
        .def_readonly("normal", &SphericalModel::normal)
        .def_readonly("range", &SphericalModel::range)
        .def_readonly("radius", &SphericalModel::radius);

    m.def("planar_inverse_depth", &planar_inverse_depth, py::arg("point"), py::arg("model"));
    m.def("slope_inverse_depth", &slope_inverse_depth, py::arg("point"), py::arg("model"));
    m.def("spherical_inverse_depth", &spherical_inverse_depth, py::arg("point"), py::arg("model"));

    // -------------------------------------------------------- motion field
    py::class_<FlowVector>(m, "FlowVector")
        .def(py::init<double, double>(), py::arg("u") = 0.0, py::arg("v") = 0.0)
        .def_readwrite("u", &FlowVector::u)
        .def_readwrite("v", &FlowVector::v);

    py::class_<FlowObservation>(m, "FlowObservation")
        .def(py::init([](const PixelPoint& p, const FlowVector& f) {
                 return FlowObservation{p, f};
             }),
             py::arg("point"), py::arg("flow"))
        .def_readwrite("point", &FlowObservation::point)
        .def_readwrite("flow", &FlowObservation::flow);

    py::class_<CameraVelocity>(m, "CameraVelocity")
        .def(py::init<double, double, double>(), py::arg("vx") = 0.0, py::arg("vy") = 0.0,
             py::arg("vz") = 0.0)
        .def_readwrite("vx", &CameraVelocity::vx)
        .def_readwrite("vy", &CameraVelocity::vy)
        .def_readwrite("vz", &CameraVelocity::vz);

    py::class_<SlopeEstimate>(m, "SlopeEstimate")
        .def_readonly("alpha", &SlopeEstimate::alpha)
        .def_readonly("beta", &SlopeEstimate::beta);

    py::class_<EgomotionEstimate>(m, "EgomotionEstimate")
        .def_readonly("velocity", &EgomotionEstimate::velocity)
        .def_readonly("slope", &EgomotionEstimate::slope)
        .def_readonly("residual_rms", &EgomotionEstimate::residual_rms)
        .def_readonly("n_features", &EgomotionEstimate::n_features)
        .def_readonly("n_dropped", &EgomotionEstimate::n_dropped)
        .def_readonly("condition_ok", &EgomotionEstimate::condition_ok)
        .def_readonly("converged", &EgomotionEstimate::converged)
        .def_readonly("iterations", &EgomotionEstimate::iterations);

    py::class_<InversionOptions>(m, "InversionOptions")
        .def(py::init<>())
        .def_readwrite("condition_max", &InversionOptions::condition_max)
        .def_readwrite("max_iterations", &InversionOptions::max_iterations)
        .def_readwrite("step_tolerance", &InversionOptions::step_tolerance)
        .def_readwrite("decrease_tolerance", &InversionOptions::decrease_tolerance);

    py::class_<SlopeInit>(m, "SlopeInit")
        .def(py::init<>())
        .def_readwrite("velocity", &SlopeInit::velocity)
        .def_readwrite("alpha", &SlopeInit::alpha)
        .def_readwrite("beta", &SlopeInit::beta);

    m.def(
        "interaction_matrices",
        [](const PixelPoint& p, const CameraIntrinsics& k) {
            const InteractionMatrices im = interaction_matrices(p, k);
            return py::make_tuple(Eigen::MatrixXd(im.translational), Eigen::MatrixXd(im.rotational));
        },
        py::arg("point"), py::arg("intrinsics"),
        "Returns (L_t, L_w), the 2x3 translational and rotational maps.");
    m.def("predict_flow", &predict_flow, py::arg("point"), py::arg("inverse_depth"),
          py::arg("velocity"), py::arg("rates"), py::arg("intrinsics"));
    m.def(
        "invert_slope",
        [](const std::vector<FlowObservation>& obs, const AngularRates& w, double range,
           const CameraIntrinsics& k, const SlopeInit& init, const InversionOptions& opt) {
            return invert_slope(obs, w, range, k, init, opt);
        },
        py::arg("observations"), py::arg("rates"), py::arg("range"), py::arg("intrinsics"),
        py::arg("init") = SlopeInit{}, py::arg("options") = InversionOptions{});
    m.def("relative_velocity_error", &relative_velocity_error, py::arg("estimate"),
          py::arg("truth"));
    m.def("absolute_velocity_error", &absolute_velocity_error, py::arg("estimate"),
          py::arg("truth"));
    bind_model_dispatch<PlanarFixedModel>(m);
    bind_model_dispatch<PlanarSlopeModel>(m);
    bind_model_dispatch<SphericalModel>(m);

    // ------------------------------------------------------ flow front-end
    py::class_<LKParams>(m, "LKParams")
        .def(py::init<>())
        .def_readwrite("max_corners", &LKParams::max_corners)
        .def_readwrite("quality_level", &LKParams::quality_level)
        .def_readwrite("min_distance", &LKParams::min_distance)
        .def_readwrite("block_size", &LKParams::block_size)
        .def_readwrite("window", &LKParams::window)
        .def_readwrite("pyramid_levels", &LKParams::pyramid_levels)
        .def_readwrite("epsilon", &LKParams::epsilon)
        .def_readwrite("max_iters", &LKParams::max_iters)
        .def_readwrite("min_eigen_ratio", &LKParams::min_eigen_ratio);

    py::class_<FeaturePoint>(m, "FeaturePoint")
        .def_readonly("x", &FeaturePoint::x)
        .def_readonly("y", &FeaturePoint::y)
        .def_readonly("score", &FeaturePoint::score);

    m.def(
        "shi_tomasi_detect",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image,
           const LKParams& p) { return shi_tomasi_detect(gray_from_numpy(image), p); },
        py::arg("image"), py::arg("params") = LKParams{});
    m.def(
        "estimate_flow",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& prev,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& next,
           double dt, const LKParams& p, const CameraIntrinsics& k) {
            return estimate_flow(gray_from_numpy(prev), gray_from_numpy(next), dt, p, k);
        },
        py::arg("prev"), py::arg("next"), py::arg("dt"), py::arg("params"), py::arg("intrinsics"));
    m.def(
        "load_pgm", [](const std::filesystem::path& p) { return numpy_from_gray(load_pgm(p)); },
        py::arg("path"));
    m.def(
        "save_pgm",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image,
           const std::filesystem::path& p) { save_pgm(gray_from_numpy(image), p); },
        py::arg("image"), py::arg("path"));

    // ----------------------------------------------------------- simulator
    py::enum_<ScenarioKind>(m, "ScenarioKind")
        .value("LANDING_FLAT", ScenarioKind::LandingFlat)
        .value("LANDING_PEAK", ScenarioKind::LandingPeak)
        .value("LANDING_CRATER", ScenarioKind::LandingCrater)
        .value("LANDING_INCLINE", ScenarioKind::LandingIncline)
        .value("HOHMANN_TRANSFER", ScenarioKind::HohmannTransfer)
        .value("TRANSFER_TO_LANDING", ScenarioKind::TransferToLanding);
    m.def("scenario_from_name", &scenario_from_name, py::arg("name"));
    m.def("scenario_name", [](ScenarioKind k) { return std::string(scenario_name(k)); },
          py::arg("kind"));

    py::class_<SunConfig>(m, "SunConfig")
        .def(py::init<>())
        .def_readwrite("azimuth", &SunConfig::azimuth)
        .def_readwrite("elevation", &SunConfig::elevation);

    py::class_<NoiseConfig>(m, "NoiseConfig")
        .def(py::init<>())
        .def_readwrite("camera_sigma", &NoiseConfig::camera_sigma)
        .def_readwrite("attitude_sigma", &NoiseConfig::attitude_sigma)
        .def_readwrite("rate_sigma", &NoiseConfig::rate_sigma)
        .def_readwrite("range_sigma", &NoiseConfig::range_sigma)
        .def_readwrite("seed", &NoiseConfig::seed);

    py::class_<CraterSpec>(m, "CraterSpec")
        .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"),
             py::arg("radius"), py::arg("depth"))
        .def_readwrite("x", &CraterSpec::x)
        .def_readwrite("y", &CraterSpec::y)
        .def_readwrite("radius", &CraterSpec::radius)
        .def_readwrite("depth", &CraterSpec::depth);

    py::enum_<BaseSurface>(m, "BaseSurface")
        .value("PLANE", BaseSurface::Plane)
        .value("SPHERE", BaseSurface::Sphere);

    py::class_<TerrainParams>(m, "TerrainParams")
        .def(py::init<>())
        .def_readwrite("base", &TerrainParams::base)
        .def_readwrite("site_elevation", &TerrainParams::site_elevation)
        .def_readwrite("slope_x", &TerrainParams::slope_x)
        .def_readwrite("slope_y", &TerrainParams::slope_y)
        .def_readwrite("sphere_radius", &TerrainParams::sphere_radius)
        .def_readwrite("relief_amplitude", &TerrainParams::relief_amplitude)
        .def_readwrite("relief_wavelength", &TerrainParams::relief_wavelength)
        .def_readwrite("relief_octaves", &TerrainParams::relief_octaves)
        .def_readwrite("relief_gain", &TerrainParams::relief_gain)
        .def_readwrite("albedo_contrast", &TerrainParams::albedo_contrast)
        .def_readwrite("albedo_wavelength", &TerrainParams::albedo_wavelength)
        .def_readwrite("albedo_octaves", &TerrainParams::albedo_octaves)
        .def_readwrite("albedo_gain", &TerrainParams::albedo_gain)
        .def_readwrite("craters", &TerrainParams::craters)
        .def_readwrite("seed", &TerrainParams::seed);

    py::class_<Terrain>(m, "Terrain")
        .def(py::init<const TerrainParams&>(), py::arg("params"))
        .def("relief", &Terrain::relief, py::arg("x"), py::arg("y"), py::arg("footprint") = 0.0)
        .def("clearance", &Terrain::clearance, py::arg("point"), py::arg("footprint") = 0.0)
        .def("raycast", &Terrain::raycast, py::arg("origin"), py::arg("direction"),
             py::arg("footprint_per_m") = 0.0, py::arg("hint") = 0.0);
    m.def("scenario_terrain", &scenario_terrain, py::arg("kind"), py::arg("seed"));

    py::class_<TrajectorySample>(m, "TrajectorySample")
        .def_readonly("t", &TrajectorySample::t)
        .def_readonly("position", &TrajectorySample::position)
        .def_readonly("velocity", &TrajectorySample::velocity)
        .def_readonly("attitude", &TrajectorySample::attitude)
        .def_readonly("rates", &TrajectorySample::rates);

    py::class_<TrajectoryProfile>(m, "TrajectoryProfile")
        .def_static("for_scenario", &TrajectoryProfile::for_scenario, py::arg("kind"),
                    py::arg("duration") = 0.0)
        .def("state", &TrajectoryProfile::state, py::arg("t"))
        .def("duration", &TrajectoryProfile::duration)
        .def("site_elevation", &TrajectoryProfile::site_elevation);
    m.def("generate_trajectory", &generate_trajectory, py::arg("profile"), py::arg("frame_rate"));
    m.def("camera_frame_velocity", &camera_frame_velocity, py::arg("sample"));
    m.def(
        "render_frame",
        [](const Terrain& terrain, const TrajectorySample& sample, const SunConfig& sun,
           const CameraIntrinsics& k, int threads) {
            RenderOptions opt;
            opt.threads = threads;
            return numpy_from_gray(render_frame(terrain, camera_pose(sample), sun, k, opt));
        },
        py::arg("terrain"), py::arg("sample"), py::arg("sun"), py::arg("intrinsics"),
        py::arg("threads") = 1);
    m.def(
        "ground_truth_flow",
        [](const Terrain& terrain, const TrajectorySample& sample,
           const std::vector<PixelPoint>& pts, const CameraIntrinsics& k) {
            return ground_truth_flow(terrain, camera_pose(sample), camera_frame_velocity(sample),
                                     sample.rates, pts, k);
        },
        py::arg("terrain"), py::arg("sample"), py::arg("points"), py::arg("intrinsics"),
        "Motion-field prediction with exact ray-cast depth at a trajectory sample.");
    m.def(
        "rangefinder_reading",
        [](const Terrain& terrain, const TrajectorySample& sample, const CameraIntrinsics& k,
           const NoiseConfig& noise, std::uint64_t frame) {
            return rangefinder_reading(terrain, camera_pose(sample), k, noise, frame);
        },
        py::arg("terrain"), py::arg("sample"), py::arg("intrinsics"),
        py::arg("noise") = NoiseConfig{}, py::arg("frame") = 0);

    // -------------------------------------------------------------- harness
    py::enum_<DepthModelKind>(m, "DepthModelKind")
        .value("PLANAR", DepthModelKind::Planar)
        .value("SLOPE", DepthModelKind::Slope)
        .value("SPHERE", DepthModelKind::Sphere)
        .value("AUTO", DepthModelKind::Auto);

    py::enum_<PipelineMode>(m, "PipelineMode")
        .value("FULL", PipelineMode::Full)
        .value("ORACLE", PipelineMode::Oracle);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("scenario", &ScenarioConfig::scenario)
        .def_readwrite("duration", &ScenarioConfig::duration)
        .def_readwrite("frame_rate", &ScenarioConfig::frame_rate)
        .def_readwrite("resolution", &ScenarioConfig::resolution)
        .def_readwrite("focal_ratio", &ScenarioConfig::focal_ratio)
        .def_readwrite("model", &ScenarioConfig::model)
        .def_readwrite("model_switch_range", &ScenarioConfig::model_switch_range)
        .def_readwrite("lk", &ScenarioConfig::lk)
        .def_readwrite("noise", &ScenarioConfig::noise)
        .def_readwrite("sun", &ScenarioConfig::sun)
        .def_readwrite("terrain", &ScenarioConfig::terrain)
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def_readwrite("mode", &ScenarioConfig::mode)
        .def_readwrite("threads", &ScenarioConfig::threads)
        .def_readwrite("touchdown_floor", &ScenarioConfig::touchdown_floor)
        .def_readwrite("condition_max", &ScenarioConfig::condition_max)
        .def_readwrite("oracle_grid", &ScenarioConfig::oracle_grid)
        .def("intrinsics", &ScenarioConfig::intrinsics);

    m.def("default_config", &default_config, py::arg("kind"), py::arg("seed") = 1);
    m.def("load_config", &load_config, py::arg("path"));
    m.def("write_config", &write_config, py::arg("config"), py::arg("path"));

    py::class_<FrameRecord>(m, "FrameRecord")
        .def_readonly("t", &FrameRecord::t)
        .def_readonly("dt", &FrameRecord::dt)
        .def_readonly("estimate", &FrameRecord::estimate)
        .def_readonly("truth", &FrameRecord::truth)
        .def_readonly("relative_error", &FrameRecord::relative_error)
        .def_readonly("absolute_error", &FrameRecord::absolute_error)
        .def_readonly("n_features", &FrameRecord::n_features)
        .def_readonly("residual_rms", &FrameRecord::residual_rms)
        .def_readonly("condition_ok", &FrameRecord::condition_ok)
        .def_readonly("converged", &FrameRecord::converged)
        .def_readonly("excluded", &FrameRecord::excluded)
        .def_readonly("alpha", &FrameRecord::alpha)
        .def_readonly("beta", &FrameRecord::beta)
        .def_readonly("failure", &FrameRecord::failure)
        .def("ok", &FrameRecord::ok);

    py::class_<RunReport>(m, "RunReport")
        .def_readonly("scenario", &RunReport::scenario)
        .def_readonly("model", &RunReport::model)
        .def_readonly("seed", &RunReport::seed)
        .def_readonly("frames", &RunReport::frames)
        .def_readonly("rel_mean", &RunReport::rel_mean)
        .def_readonly("rel_max", &RunReport::rel_max)
        .def_readonly("rel_min", &RunReport::rel_min)
        .def_readonly("rel_std", &RunReport::rel_std)
        .def_readonly("rel_max_all", &RunReport::rel_max_all)
        .def_readonly("abs_mean", &RunReport::abs_mean)
        .def_readonly("n_ok", &RunReport::n_ok)
        .def_readonly("n_failed", &RunReport::n_failed)
        .def_readonly("n_excluded", &RunReport::n_excluded);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("value", &SweepResult::value)
        .def_readonly("report", &SweepResult::report);

    m.def("run_pipeline", &run_pipeline, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "run_sweep",
        [](const ScenarioConfig& base, const std::string& axis, const std::vector<double>& values) {
            return run_sweep(base, axis, values);
        },
        py::arg("config"), py::arg("axis"), py::arg("values"),
        py::call_guard<py::gil_scoped_release>());
    m.def("export_report", &export_report, py::arg("report"), py::arg("directory"));
    m.def(
        "export_sweep",
        [](const std::vector<SweepResult>& sweep, const std::string& axis,
           const std::filesystem::path& dir) { return export_sweep(sweep, axis, dir); },
        py::arg("sweep"), py::arg("axis"), py::arg("directory"));
    m.def("simulate_to_dir", &simulate_to_dir, py::arg("config"), py::arg("directory"),
          py::call_guard<py::gil_scoped_release>());
    m.def("estimate_from_dir", &estimate_from_dir, py::arg("directory"),
          py::arg("model_override") = DepthModelKind::Auto,
          py::call_guard<py::gil_scoped_release>());

    m.attr("__version__") = "0.1.0";
}
