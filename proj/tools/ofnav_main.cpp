// Command-line harness: scenario simulation, offline estimation, sensitivity
// sweeps and the injected ground-truth-flow (oracle) run.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "ofnav/harness.hpp"

namespace {

using namespace ofnav;

// Either a config file path or a bare scenario name.
ScenarioConfig resolve_config(const std::string& spec) {
    if (std::filesystem::exists(spec)) {
        return load_config(spec);
    }
    return default_config(scenario_from_name(spec));
}

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<double> frame_rate;
    std::optional<int> resolution;
    std::optional<double> duration;
    std::optional<double> camera_noise;
    std::optional<double> state_noise;
    std::optional<int> threads;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Seed for terrain, albedo and noise streams");
        cmd->add_option("--frame-rate", frame_rate, "Camera frame rate (Hz)");
        cmd->add_option("--resolution", resolution, "Square frame size (px, power of two >= 128)");
        cmd->add_option("--duration", duration, "Trajectory duration (s; 0 = scenario default)");
        cmd->add_option("--camera-noise", camera_noise, "Pixel-intensity noise STD (0..255 scale)");
        cmd->add_option("--state-noise", state_noise,
                        "IMU noise: attitude STD (rad) and rate STD (rad/s)");
        cmd->add_option("--threads", threads, "Worker threads for rendering");
    }

    void apply(ScenarioConfig& cfg) const {
        if (seed) {
            cfg.seed = *seed;
            cfg.noise.seed = *seed;
            cfg.terrain.seed = *seed;
        }
        if (frame_rate) cfg.frame_rate = *frame_rate;
        if (resolution) cfg.resolution = *resolution;
        if (duration) cfg.duration = *duration;
        if (camera_noise) cfg.noise.camera_sigma = *camera_noise;
        if (state_noise) {
            cfg.noise.attitude_sigma = *state_noise;
            cfg.noise.rate_sigma = *state_noise;
        }
        if (threads) cfg.threads = *threads;
    }
};

void print_summary(const RunReport& r) {
    std::printf("scenario=%s model=%s frames=%zu ok=%d failed=%d excluded=%d\n",
                std::string(scenario_name(r.scenario)).c_str(),
                std::string(model_name(r.model)).c_str(), r.frames.size(), r.n_ok, r.n_failed,
                r.n_excluded);
    std::printf("relative error: mean=%.6g max=%.6g min=%.6g std=%.6g (max incl. touchdown %.6g)\n",
                r.rel_mean, r.rel_max, r.rel_min, r.rel_std, r.rel_max_all);
    std::printf("mean absolute velocity error: %.6g m/s\n", r.abs_mean);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optical-flow egomotion estimation harness"};
    app.require_subcommand(1);

    std::string config_arg, out_dir, model_arg = "auto", axis;
    std::vector<double> values;
    CommonFlags flags;

    CLI::App* simulate = app.add_subcommand("simulate", "Render frames and write telemetry");
    simulate->add_option("config", config_arg, "Config file or scenario name")->required();
    simulate->add_option("-o,--output", out_dir, "Output directory")->required();
    flags.attach(simulate);

    CLI::App* estimate =
        app.add_subcommand("estimate", "Run the estimation side on a simulated directory");
    estimate->add_option("dir", config_arg, "Directory written by `simulate`")->required();
    estimate->add_option("--model", model_arg, "planar | slope | sphere | auto");
    estimate->add_option("-o,--output", out_dir, "Report directory");

    CLI::App* sweep = app.add_subcommand("sweep", "Run a single-axis sensitivity sweep");
    sweep->add_option("config", config_arg, "Config file or scenario name")->required();
    sweep->add_option("--axis", axis, "resolution | frame-rate | camera-noise | state-noise")
        ->required();
    sweep->add_option("--values", values, "Swept values")->required()->delimiter(',');
    sweep->add_option("-o,--output", out_dir, "Output directory")->required();
    flags.attach(sweep);

    CLI::App* oracle =
        app.add_subcommand("oracle", "Injected ground-truth-flow run (inversion-only check)");
    oracle->add_option("config", config_arg, "Config file or scenario name")->required();
    oracle->add_option("-o,--output", out_dir, "Report directory");
    oracle->add_option("--model", model_arg, "planar | slope | sphere | auto");
    flags.attach(oracle);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            ScenarioConfig cfg = resolve_config(config_arg);
            flags.apply(cfg);
            simulate_to_dir(cfg, out_dir);
            std::printf("wrote frames and telemetry to %s\n", out_dir.c_str());
        } else if (estimate->parsed()) {
            const RunReport report = estimate_from_dir(config_arg, model_from_name(model_arg));
            print_summary(report);
            if (!out_dir.empty()) {
                export_report(report, out_dir);
                std::printf("report written to %s\n", out_dir.c_str());
            }
        } else if (sweep->parsed()) {
            ScenarioConfig cfg = resolve_config(config_arg);
            flags.apply(cfg);
            const auto results = run_sweep(cfg, axis, values);
            for (const SweepResult& r : results) {
                std::printf("%s = %g: rel_mean=%.6g rel_max=%.6g failed=%d\n", axis.c_str(),
                            r.value, r.report.rel_mean, r.report.rel_max, r.report.n_failed);
            }
            export_sweep(results, axis, out_dir);
            std::printf("sweep written to %s\n", out_dir.c_str());
        } else if (oracle->parsed()) {
            ScenarioConfig cfg = resolve_config(config_arg);
            flags.apply(cfg);
            cfg.mode = PipelineMode::Oracle;
            cfg.model = model_from_name(model_arg);
            const RunReport report = run_pipeline(cfg);
            print_summary(report);
            if (!out_dir.empty()) {
                export_report(report, out_dir);
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
