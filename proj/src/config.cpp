#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ofnav/harness.hpp"

namespace ofnav {

DepthModelKind model_from_name(std::string_view name) {
    if (name == "planar") return DepthModelKind::Planar;
    if (name == "slope") return DepthModelKind::Slope;
    if (name == "sphere") return DepthModelKind::Sphere;
    if (name == "auto") return DepthModelKind::Auto;
    throw ConfigError("unknown depth model: " + std::string(name));
}

std::string_view model_name(DepthModelKind kind) {
    switch (kind) {
        case DepthModelKind::Planar: return "planar";
        case DepthModelKind::Slope: return "slope";
        case DepthModelKind::Sphere: return "sphere";
        case DepthModelKind::Auto: return "auto";
    }
    return "auto";
}

CameraIntrinsics ScenarioConfig::intrinsics() const {
    return CameraIntrinsics::square(resolution, focal_ratio * resolution);
}

DepthModelKind ScenarioConfig::effective_model(double range) const {
    if (model != DepthModelKind::Auto) {
        return model;
    }
    switch (scenario) {
        case ScenarioKind::HohmannTransfer: return DepthModelKind::Sphere;
        case ScenarioKind::TransferToLanding:
            return range >= model_switch_range ? DepthModelKind::Sphere : DepthModelKind::Planar;
        default: return DepthModelKind::Planar;
    }
}

namespace {

double nominal_site_elevation(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::LandingPeak: return 7250.8;
        case ScenarioKind::LandingIncline: return 4661.4;
        default: return 0.0;
    }
}

// Re-anchor the surface under the landing site after terrain overrides, so
// the final hover clearance still matches the scenario table.
void anchor_site(TerrainParams& terrain, ScenarioKind kind) {
    if (terrain.base != BaseSurface::Plane) {
        terrain.site_elevation = 0.0;
        return;
    }
    terrain.site_elevation = 0.0;
    const Terrain probe(terrain);
    terrain.site_elevation = nominal_site_elevation(kind) - probe.relief(0.0, 0.0);
}

}  // namespace

ScenarioConfig default_config(ScenarioKind kind, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.scenario = kind;
    cfg.seed = seed;
    cfg.noise.seed = seed;
    cfg.terrain = scenario_terrain(kind, seed);
    if (kind == ScenarioKind::LandingIncline) {
        cfg.sun.azimuth = M_PI;  // face the slope; it is shadowed from +x
    }
    return cfg;
}

ScenarioConfig parse_config(std::istream& in, const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::vector<std::string> order;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            // blank or comment-only lines
            if (line.find_first_not_of(" \t\r\n") != std::string::npos) {
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            const auto e = s.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        kv[key] = value;
        order.push_back(key);
    }

    ScenarioKind kind = ScenarioKind::LandingFlat;
    if (auto it = kv.find("scenario"); it != kv.end()) {
        kind = scenario_from_name(it->second);
    }
    std::uint64_t seed = 1;
    if (auto it = kv.find("seed"); it != kv.end()) {
        seed = std::stoull(it->second);
    }
    ScenarioConfig cfg = default_config(kind, seed);

    bool site_overridden = false;
    bool terrain_touched = false;
    auto num = [&](const std::string& v) { return std::stod(v); };

    for (const std::string& key : order) {
        const std::string& v = kv[key];
        if (key == "scenario" || key == "seed") continue;
        if (key == "duration") cfg.duration = num(v);
        else if (key == "frame_rate") cfg.frame_rate = num(v);
        else if (key == "resolution") cfg.resolution = static_cast<int>(num(v));
        else if (key == "focal_ratio") cfg.focal_ratio = num(v);
        else if (key == "model") cfg.model = model_from_name(v);
        else if (key == "model_switch_range") cfg.model_switch_range = num(v);
        else if (key == "mode") {
            if (v == "full") cfg.mode = PipelineMode::Full;
            else if (v == "oracle") cfg.mode = PipelineMode::Oracle;
            else throw ConfigError(origin + ": unknown mode: " + v);
        }
        else if (key == "threads") cfg.threads = static_cast<int>(num(v));
        else if (key == "touchdown_floor") cfg.touchdown_floor = num(v);
        else if (key == "condition_max") cfg.condition_max = num(v);
        else if (key == "oracle_grid") cfg.oracle_grid = static_cast<int>(num(v));
        else if (key == "sun_azimuth_deg") cfg.sun.azimuth = num(v) * M_PI / 180.0;
        else if (key == "sun_elevation_deg") cfg.sun.elevation = num(v) * M_PI / 180.0;
        else if (key == "camera_noise") cfg.noise.camera_sigma = num(v);
        else if (key == "attitude_noise") cfg.noise.attitude_sigma = num(v);
        else if (key == "rate_noise") cfg.noise.rate_sigma = num(v);
        else if (key == "range_noise") cfg.noise.range_sigma = num(v);
        else if (key == "noise_seed") cfg.noise.seed = std::stoull(v);
        else if (key == "terrain_seed") { cfg.terrain.seed = std::stoull(v); terrain_touched = true; }
        else if (key == "terrain_amplitude") { cfg.terrain.relief_amplitude = num(v); terrain_touched = true; }
        else if (key == "terrain_wavelength") { cfg.terrain.relief_wavelength = num(v); terrain_touched = true; }
        else if (key == "terrain_octaves") { cfg.terrain.relief_octaves = static_cast<int>(num(v)); terrain_touched = true; }
        else if (key == "terrain_gain") { cfg.terrain.relief_gain = num(v); terrain_touched = true; }
        else if (key == "terrain_slope_x") { cfg.terrain.slope_x = num(v); terrain_touched = true; }
        else if (key == "terrain_slope_y") { cfg.terrain.slope_y = num(v); terrain_touched = true; }
        else if (key == "albedo_contrast") cfg.terrain.albedo_contrast = num(v);
        else if (key == "albedo_wavelength") cfg.terrain.albedo_wavelength = num(v);
        else if (key == "albedo_octaves") cfg.terrain.albedo_octaves = static_cast<int>(num(v));
        else if (key == "albedo_gain") cfg.terrain.albedo_gain = num(v);
        else if (key == "sphere_radius") { cfg.terrain.sphere_radius = num(v); terrain_touched = true; }
        else if (key == "site_elevation") { cfg.terrain.site_elevation = num(v); site_overridden = true; }
        else if (key == "lk_max_corners") cfg.lk.max_corners = static_cast<int>(num(v));
        else if (key == "lk_quality") cfg.lk.quality_level = num(v);
        else if (key == "lk_min_distance") cfg.lk.min_distance = num(v);
        else if (key == "lk_block_size") cfg.lk.block_size = static_cast<int>(num(v));
        else if (key == "lk_window") cfg.lk.window = static_cast<int>(num(v));
        else if (key == "lk_levels") cfg.lk.pyramid_levels = static_cast<int>(num(v));
        else if (key == "lk_epsilon") cfg.lk.epsilon = num(v);
        else if (key == "lk_max_iters") cfg.lk.max_iters = static_cast<int>(num(v));
        else if (key == "lk_min_eigen_ratio") cfg.lk.min_eigen_ratio = num(v);
        else throw ConfigError(origin + ": unknown key: " + key);
    }

    if (terrain_touched && !site_overridden) {
        anchor_site(cfg.terrain, cfg.scenario);
    }

    if (cfg.resolution < 128 || (cfg.resolution & (cfg.resolution - 1)) != 0) {
        throw ConfigError(origin + ": resolution must be a power of two >= 128");
    }
    if (!(cfg.frame_rate > 0.0)) {
        throw ConfigError(origin + ": frame_rate must be positive");
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config: " + path.string());
    }
    return parse_config(in, path.string());
}

void write_config(const ScenarioConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write config: " + path.string());
    }
    out.precision(17);
    out << "scenario = " << scenario_name(cfg.scenario) << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "duration = " << cfg.duration << "\n";
    out << "frame_rate = " << cfg.frame_rate << "\n";
    out << "resolution = " << cfg.resolution << "\n";
    out << "focal_ratio = " << cfg.focal_ratio << "\n";
    out << "model = " << model_name(cfg.model) << "\n";
    out << "model_switch_range = " << cfg.model_switch_range << "\n";
    out << "mode = " << (cfg.mode == PipelineMode::Full ? "full" : "oracle") << "\n";
    out << "threads = " << cfg.threads << "\n";
    out << "touchdown_floor = " << cfg.touchdown_floor << "\n";
    out << "condition_max = " << cfg.condition_max << "\n";
    out << "oracle_grid = " << cfg.oracle_grid << "\n";
    out << "sun_azimuth_deg = " << cfg.sun.azimuth * 180.0 / M_PI << "\n";
    out << "sun_elevation_deg = " << cfg.sun.elevation * 180.0 / M_PI << "\n";
    out << "camera_noise = " << cfg.noise.camera_sigma << "\n";
    out << "attitude_noise = " << cfg.noise.attitude_sigma << "\n";
    out << "rate_noise = " << cfg.noise.rate_sigma << "\n";
    out << "range_noise = " << cfg.noise.range_sigma << "\n";
    out << "noise_seed = " << cfg.noise.seed << "\n";
    out << "terrain_seed = " << cfg.terrain.seed << "\n";
    out << "terrain_amplitude = " << cfg.terrain.relief_amplitude << "\n";
    out << "terrain_wavelength = " << cfg.terrain.relief_wavelength << "\n";
    out << "terrain_octaves = " << cfg.terrain.relief_octaves << "\n";
    out << "terrain_gain = " << cfg.terrain.relief_gain << "\n";
    out << "terrain_slope_x = " << cfg.terrain.slope_x << "\n";
    out << "terrain_slope_y = " << cfg.terrain.slope_y << "\n";
    out << "albedo_contrast = " << cfg.terrain.albedo_contrast << "\n";
    out << "albedo_wavelength = " << cfg.terrain.albedo_wavelength << "\n";
    out << "albedo_octaves = " << cfg.terrain.albedo_octaves << "\n";
    out << "albedo_gain = " << cfg.terrain.albedo_gain << "\n";
    out << "sphere_radius = " << cfg.terrain.sphere_radius << "\n";
    out << "site_elevation = " << cfg.terrain.site_elevation << "\n";
    out << "lk_max_corners = " << cfg.lk.max_corners << "\n";
    out << "lk_quality = " << cfg.lk.quality_level << "\n";
    out << "lk_min_distance = " << cfg.lk.min_distance << "\n";
    out << "lk_block_size = " << cfg.lk.block_size << "\n";
    out << "lk_window = " << cfg.lk.window << "\n";
    out << "lk_levels = " << cfg.lk.pyramid_levels << "\n";
    out << "lk_epsilon = " << cfg.lk.epsilon << "\n";
    out << "lk_max_iters = " << cfg.lk.max_iters << "\n";
    out << "lk_min_eigen_ratio = " << cfg.lk.min_eigen_ratio << "\n";
}

}  // namespace ofnav
