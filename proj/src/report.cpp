#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "internal.hpp"
#include "ofnav/harness.hpp"

namespace ofnav {

namespace detail {

// Shortest round-trip formatting keeps the CSVs byte-stable and lossless.
std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string frame_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06zu.pgm", index);
    return buf;
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  std::size_t columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            row.push_back(cell == "nan" ? std::numeric_limits<double>::quiet_NaN()
                                        : std::stod(cell));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (row.size() != columns) {
            throw IoError("unexpected column count in " + path.string());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

namespace {

using detail::csv_escape;
using detail::fmt_double;
using detail::kCsvEol;

void write_per_frame_csv(const RunReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "t,est_vx,est_vy,est_vz,true_vx,true_vy,true_vz,rel_err,abs_err,n_features,"
           "residual_rms,condition_ok,converged,excluded,alpha,beta,status"
        << kCsvEol;
    for (const FrameRecord& f : report.frames) {
        out << fmt_double(f.t) << ',' << fmt_double(f.estimate.vx) << ','
            << fmt_double(f.estimate.vy) << ',' << fmt_double(f.estimate.vz) << ','
            << fmt_double(f.truth.vx) << ',' << fmt_double(f.truth.vy) << ','
            << fmt_double(f.truth.vz) << ',' << fmt_double(f.relative_error) << ','
            << fmt_double(f.absolute_error) << ',' << f.n_features << ','
            << fmt_double(f.residual_rms) << ',' << (f.condition_ok ? 1 : 0) << ','
            << (f.converged ? 1 : 0) << ',' << (f.excluded ? 1 : 0) << ',' << fmt_double(f.alpha)
            << ',' << fmt_double(f.beta) << ',' << csv_escape(f.ok() ? "ok" : f.failure) << kCsvEol;
    }
}

void write_summary_csv(const RunReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "scenario,model,seed,n_frames,n_ok,n_failed,n_excluded,mean_abs_err,rel_mean,rel_max,"
           "rel_min,rel_std,rel_max_incl_touchdown"
        << kCsvEol;
    out << scenario_name(report.scenario) << ',' << model_name(report.model) << ',' << report.seed
        << ',' << report.frames.size() << ',' << report.n_ok << ',' << report.n_failed << ','
        << report.n_excluded << ',' << fmt_double(report.abs_mean) << ','
        << fmt_double(report.rel_mean) << ',' << fmt_double(report.rel_max) << ','
        << fmt_double(report.rel_min) << ',' << fmt_double(report.rel_std) << ','
        << fmt_double(report.rel_max_all) << kCsvEol;
}

struct Series {
    std::vector<double> t, v;
};

void polyline(std::ostringstream& svg, const Series& s, double x0, double y0, double w, double h,
              double tmin, double tmax, double vmin, double vmax, const char* color, bool dashed) {
    if (s.t.empty()) return;
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\"";
    if (dashed) svg << " stroke-dasharray=\"5,3\"";
    svg << " points=\"";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double px = x0 + (s.t[i] - tmin) / (tmax - tmin) * w;
        const double py = y0 + h - (s.v[i] - vmin) / (vmax - vmin) * h;
        svg << fmt_double(px) << ',' << fmt_double(py) << ' ';
    }
    svg << "\"/>\n";
}

void write_velocity_svg(const RunReport& report, const std::filesystem::path& path) {
    Series est[3], truth[3], rel;
    for (const FrameRecord& f : report.frames) {
        if (!f.ok()) continue;
        const double ev[3] = {f.estimate.vx, f.estimate.vy, f.estimate.vz};
        const double tv[3] = {f.truth.vx, f.truth.vy, f.truth.vz};
        for (int i = 0; i < 3; ++i) {
            est[i].t.push_back(f.t);
            est[i].v.push_back(ev[i]);
            truth[i].t.push_back(f.t);
            truth[i].v.push_back(tv[i]);
        }
        if (std::isfinite(f.relative_error) && f.relative_error > 0.0) {
            rel.t.push_back(f.t);
            rel.v.push_back(std::log10(f.relative_error));
        }
    }

    double tmin = 0.0, tmax = 1.0, vmin = -1.0, vmax = 1.0;
    bool first = true;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < est[i].t.size(); ++j) {
            if (first) {
                tmin = tmax = est[i].t[j];
                vmin = vmax = est[i].v[j];
                first = false;
            }
            tmin = std::min(tmin, est[i].t[j]);
            tmax = std::max(tmax, est[i].t[j]);
            vmin = std::min({vmin, est[i].v[j], truth[i].v[j]});
            vmax = std::max({vmax, est[i].v[j], truth[i].v[j]});
        }
    }
    if (tmax <= tmin) tmax = tmin + 1.0;
    if (vmax <= vmin) vmax = vmin + 1.0;
    double rmin = -3.0, rmax = 0.0;
    if (!rel.v.empty()) {
        rmin = *std::min_element(rel.v.begin(), rel.v.end());
        rmax = *std::max_element(rel.v.begin(), rel.v.end());
        if (rmax <= rmin) rmax = rmin + 1.0;
    }

    const double width = 960, top_h = 360, bot_h = 160;
    const double mx = 60, my = 30, gap = 50;
    const double plot_w = width - 2 * mx;
    const double height = my + top_h + gap + bot_h + my + 20;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto frame_rect = [&](double x0, double y0, double w, double h) {
        svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << w << "\" height=\"" << h
            << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    };
    auto label = [&](double x, double y, const std::string& text, const char* anchor = "start") {
        svg << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"12\""
            << " text-anchor=\"" << anchor << "\">" << text << "</text>\n";
    };

    frame_rect(mx, my, plot_w, top_h);
    const char* colors[3] = {"#c0392b", "#27ae60", "#2980b9"};
    const char* names[3] = {"vx", "vy", "vz"};
    for (int i = 0; i < 3; ++i) {
        polyline(svg, truth[i], mx, my, plot_w, top_h, tmin, tmax, vmin, vmax, "#888888", true);
        polyline(svg, est[i], mx, my, plot_w, top_h, tmin, tmax, vmin, vmax, colors[i], false);
        label(mx + plot_w - 150 + i * 50, my + 16, names[i]);
        svg << "<line x1=\"" << mx + plot_w - 170 + i * 50 << "\" y1=\"" << my + 12 << "\" x2=\""
            << mx + plot_w - 155 + i * 50 << "\" y2=\"" << my + 12 << "\" stroke=\"" << colors[i]
            << "\" stroke-width=\"2\"/>\n";
    }
    label(mx, my - 8, "camera-frame velocity (m/s): estimate solid, truth dashed");
    label(mx - 6, my + 12, fmt_double(vmax), "end");
    label(mx - 6, my + top_h, fmt_double(vmin), "end");

    const double ry0 = my + top_h + gap;
    frame_rect(mx, ry0, plot_w, bot_h);
    polyline(svg, rel, mx, ry0, plot_w, bot_h, tmin, tmax, rmin, rmax, "#8e44ad", false);
    label(mx, ry0 - 8, "log10 relative velocity error");
    label(mx - 6, ry0 + 12, fmt_double(rmax), "end");
    label(mx - 6, ry0 + bot_h, fmt_double(rmin), "end");
    label(mx, ry0 + bot_h + 24, fmt_double(tmin) + " s");
    label(mx + plot_w, ry0 + bot_h + 24, fmt_double(tmax) + " s", "end");

    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << svg.str();
}

}  // namespace

void export_report(const RunReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_per_frame_csv(report, dir / "per_frame.csv");
    write_summary_csv(report, dir / "summary.csv");
    write_velocity_svg(report, dir / "velocity.svg");
}

void export_sweep(const std::vector<SweepResult>& sweep, std::string_view axis,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "sweep.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "sweep.csv").string());
    out << "axis,value,rel_mean,rel_max,rel_min,rel_std,mean_abs_err,n_ok,n_failed,n_excluded"
        << kCsvEol;
    for (const SweepResult& s : sweep) {
        out << axis << ',' << fmt_double(s.value) << ',' << fmt_double(s.report.rel_mean) << ','
            << fmt_double(s.report.rel_max) << ',' << fmt_double(s.report.rel_min) << ','
            << fmt_double(s.report.rel_std) << ',' << fmt_double(s.report.abs_mean) << ','
            << s.report.n_ok << ',' << s.report.n_failed << ',' << s.report.n_excluded << kCsvEol;
        std::ostringstream sub;
        sub << "value_" << fmt_double(s.value);
        export_report(s.report, dir / sub.str());
    }
}

void simulate_to_dir(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const CameraIntrinsics k = cfg.intrinsics();
    const TrajectoryProfile profile = TrajectoryProfile::for_scenario(cfg.scenario, cfg.duration);
    const std::vector<TrajectorySample> samples = generate_trajectory(profile, cfg.frame_rate);
    const Terrain terrain(cfg.terrain);

    RenderOptions render_opt;
    render_opt.threads = std::max(1, cfg.threads);

    std::ofstream telemetry(dir / "telemetry.csv", std::ios::binary | std::ios::trunc);
    std::ofstream truth(dir / "truth.csv", std::ios::binary | std::ios::trunc);
    if (!telemetry || !truth) throw IoError("cannot write telemetry under " + dir.string());
    const char* header = "t,px,py,pz,vx,vy,vz,phi,theta,psi,p,q,r,rho";
    telemetry << header << kCsvEol;
    truth << header << kCsvEol;

    auto row = [](std::ofstream& out, const TrajectorySample& s, double rho) {
        out << fmt_double(s.t) << ',' << fmt_double(s.position.x()) << ','
            << fmt_double(s.position.y()) << ',' << fmt_double(s.position.z()) << ','
            << fmt_double(s.velocity.x()) << ',' << fmt_double(s.velocity.y()) << ','
            << fmt_double(s.velocity.z()) << ',' << fmt_double(s.attitude.phi) << ','
            << fmt_double(s.attitude.theta) << ',' << fmt_double(s.attitude.psi) << ','
            << fmt_double(s.rates.p) << ',' << fmt_double(s.rates.q) << ',' << fmt_double(s.rates.r)
            << ',' << fmt_double(rho) << kCsvEol;
    };

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const CameraPose pose = camera_pose(samples[i]);
        const GrayImage frame =
            add_camera_noise(render_frame(terrain, pose, cfg.sun, k, render_opt), cfg.noise, i);
        save_pgm(frame, dir / detail::frame_name(i));

        double rho_true = std::numeric_limits<double>::quiet_NaN();
        double rho_meas = std::numeric_limits<double>::quiet_NaN();
        try {
            rho_true = rangefinder_reading(terrain, pose, k, {}, i);
            rho_meas = rangefinder_reading(terrain, pose, k, cfg.noise, i);
        } catch (const NoIntersectionError&) {
            // NaN marks a dropout; the estimation side records the failure
        }
        row(truth, samples[i], rho_true);
        row(telemetry, add_state_noise(samples[i], cfg.noise, i), rho_meas);
    }
    write_config(cfg, dir / "run_config.cfg");
}

}  // namespace ofnav
