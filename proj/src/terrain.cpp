#include "ofnav/terrain.hpp"

#include <algorithm>
#include <cmath>

namespace ofnav {

double value_noise2(double u, double v, std::uint64_t seed) {
    const double fu = std::floor(u), fv = std::floor(v);
    const auto iu = static_cast<std::int64_t>(fu);
    const auto iv = static_cast<std::int64_t>(fv);
    double tu = u - fu, tv = v - fv;
    // quintic fade keeps the numerical normals smooth across cell edges
    tu = tu * tu * tu * (tu * (tu * 6.0 - 15.0) + 10.0);
    tv = tv * tv * tv * (tv * (tv * 6.0 - 15.0) + 10.0);
    const double v00 = lattice_value(iu, iv, seed);
    const double v10 = lattice_value(iu + 1, iv, seed);
    const double v01 = lattice_value(iu, iv + 1, seed);
    const double v11 = lattice_value(iu + 1, iv + 1, seed);
    const double a = v00 + tu * (v10 - v00);
    const double b = v01 + tu * (v11 - v01);
    return a + tv * (b - a);
}

namespace {

// Octave weight fades detail out as its wavelength approaches the viewing
// footprint, a crude mip so texture does not alias frame to frame.
inline double lod_weight(double wavelength, double footprint) {
    if (footprint <= 0.0) return 1.0;
    const double ratio = wavelength / (2.0 * footprint);
    if (ratio >= 2.0) return 1.0;
    if (ratio <= 1.0) return 0.0;
    const double t = ratio - 1.0;
    return t * t * (3.0 - 2.0 * t);
}

double fbm2(double x, double y, double wavelength, int octaves, double gain, std::uint64_t seed,
            double footprint) {
    double sum = 0.0;
    double amp = 1.0;
    double wl = wavelength;
    for (int k = 0; k < octaves; ++k) {
        const double w = lod_weight(wl, footprint);
        if (w <= 0.0) break;  // octaves only get finer
        sum += amp * w * value_noise2(x / wl, y / wl, seed + static_cast<std::uint64_t>(k) * 0x9E37ULL);
        amp *= gain;
        wl *= 0.5;
    }
    return sum;
}

// RMS normalization factor of the active fbm octaves, so texture keeps the
// same contrast at every viewing scale.
double fbm2_norm(double wavelength, int octaves, double gain, double footprint) {
    double total = 0.0;
    double amp = 1.0;
    double wl = wavelength;
    for (int k = 0; k < octaves; ++k) {
        const double w = lod_weight(wl, footprint);
        if (w <= 0.0) break;
        total += amp * amp * w * w;
        amp *= gain;
        wl *= 0.5;
    }
    return std::sqrt(total);
}

}  // namespace

Terrain::Terrain(const TerrainParams& params) : params_(params) {
    relief_seed_ = mix_seed(params.seed, 0x7E22A1);
    albedo_seed_ = mix_seed(params.seed, 0xA1BED0);
    double amp_sum = 0.0;
    double amp = params_.relief_amplitude;
    for (int k = 0; k < params_.relief_octaves; ++k) {
        amp_sum += amp;
        amp *= params_.relief_gain;
    }
    max_up_ = amp_sum;
    max_down_ = amp_sum;
    for (const CraterSpec& c : params_.craters) {
        if (c.depth >= 0.0) {
            max_down_ += c.depth;
        } else {
            max_up_ += -c.depth;
        }
    }
}

double Terrain::relief(double x, double y, double footprint) const {
    double h = 0.0;
    if (params_.relief_amplitude > 0.0) {
        h = params_.relief_amplitude *
            fbm2(x, y, params_.relief_wavelength, params_.relief_octaves, params_.relief_gain,
                 relief_seed_, footprint);
    }
    for (const CraterSpec& c : params_.craters) {
        const double dx = x - c.x, dy = y - c.y;
        const double r2 = dx * dx + dy * dy;
        if (r2 < c.radius * c.radius) {
            const double u2 = r2 / (c.radius * c.radius);
            const double shape = (1.0 - u2) * (1.0 - u2);
            h -= c.depth * shape;
        }
    }
    return h;
}

double Terrain::height_at(double x, double y, double footprint) const {
    return params_.site_elevation + params_.slope_x * x + params_.slope_y * y +
           relief(x, y, footprint);
}

double Terrain::base_clearance(const Vec3& p) const {
    if (params_.base == BaseSurface::Plane) {
        return p.z() - (params_.site_elevation + params_.slope_x * p.x() + params_.slope_y * p.y());
    }
    return (p - sphere_center()).norm() - params_.sphere_radius;
}

double Terrain::clearance(const Vec3& p, double footprint) const {
    if (params_.base == BaseSurface::Plane) {
        return p.z() - height_at(p.x(), p.y(), footprint);
    }
    const Vec3 c = sphere_center();
    const Vec3 rel = p - c;
    const double rad = rel.norm();
    const Vec3 q = c + rel * (params_.sphere_radius / rad);  // radial surface point
    return rad - params_.sphere_radius - relief(q.x(), q.y(), footprint);
}

std::optional<double> Terrain::raycast(const Vec3& origin, const Vec3& dir, double footprint_per_m,
                                       double hint) const {
    // Analytic intersection with the base surface.
    double t_base;
    double cos_incidence;
    if (params_.base == BaseSurface::Plane) {
        const double denom = dir.z() - params_.slope_x * dir.x() - params_.slope_y * dir.y();
        const double f0 = base_clearance(origin);
        if (std::abs(denom) < 1e-15) return std::nullopt;
        t_base = -f0 / denom;
        if (!(t_base > 0.0)) return std::nullopt;
        const Vec3 n = Vec3(-params_.slope_x, -params_.slope_y, 1.0).normalized();
        cos_incidence = std::abs(dir.dot(n));
    } else {
        const Vec3 oc = origin - sphere_center();
        const double b = 2.0 * oc.dot(dir);
        const double c = oc.squaredNorm() - params_.sphere_radius * params_.sphere_radius;
        const double disc = b * b - 4.0 * c;
        if (disc < 0.0) return std::nullopt;
        const double sq = std::sqrt(disc);
        const double q = b >= 0.0 ? -0.5 * (b + sq) : -0.5 * (b - sq);
        double t = std::numeric_limits<double>::infinity();
        if (q > 0.0) t = q;
        if (q != 0.0 && c / q > 0.0 && c / q < t) t = c / q;
        if (!std::isfinite(t)) return std::nullopt;
        t_base = t;
        const Vec3 radial = (origin + t_base * dir - sphere_center()).normalized();
        cos_incidence = std::abs(dir.dot(radial));
    }

    const bool flat = params_.relief_amplitude <= 0.0 && params_.craters.empty();
    if (flat) {
        return t_base;
    }

    const double footprint = footprint_per_m * t_base;
    const double tol = std::max(1e-5, 1e-3 * footprint);
    auto f = [&](double t) { return clearance(origin + t * dir, footprint); };

    // Illinois false-position refinement inside a bracket [a, b], f(a) > 0 > f(b).
    auto refine = [&](double a, double fa, double b, double fb) {
        double side = 0.0;
        for (int i = 0; i < 28 && (b - a) > tol; ++i) {
            double m = (a * fb - b * fa) / (fb - fa);
            if (!(m > a && m < b)) m = 0.5 * (a + b);
            const double fm = f(m);
            if (fm > 0.0) {
                a = m;
                fa = fm;
                if (side == 1.0) fb *= 0.5;
                side = 1.0;
            } else {
                b = m;
                fb = fm;
                if (side == -1.0) fa *= 0.5;
                side = -1.0;
            }
        }
        return 0.5 * (a + b);
    };

    const double safe_cos = std::max(cos_incidence, 0.05);

    // Warm start: try a small bracket around the previous hit first.
    if (hint > 0.0) {
        const double w = std::max(0.25 * (max_up_ + max_down_), 8.0 * footprint + 0.5);
        const double a = std::max(hint - w / safe_cos, 1e-6);
        const double b = hint + w / safe_cos;
        const double fa = f(a), fb = f(b);
        if (fa > 0.0 && fb < 0.0) {
            return refine(a, fa, b, fb);
        }
    }

    // Full bracket around the base intersection, bounded by the relief range.
    const double margin = 1.0;
    double t_lo = t_base - (max_up_ + margin) / safe_cos;
    double t_hi = t_base + (max_down_ + margin) / safe_cos;
    t_lo = std::max(t_lo, 1e-6);

    double prev_t = t_lo;
    double prev_f = f(prev_t);
    if (prev_f <= 0.0) {
        // Ray starts below the relief envelope top; treat the entry as a hit
        // only if the origin itself is above the surface.
        return clearance(origin, footprint) > 0.0 ? std::optional<double>(prev_t) : std::nullopt;
    }
    const int steps = 24;
    const double dt = (t_hi - t_lo) / steps;
    for (int i = 1; i <= steps; ++i) {
        const double t = t_lo + i * dt;
        const double ft = f(t);
        if (ft <= 0.0) {
            return refine(prev_t, prev_f, t, ft);
        }
        prev_t = t;
        prev_f = ft;
    }
    return std::nullopt;
}

Vec3 Terrain::surface_normal(const Vec3& p, double footprint) const {
    // forward differences against the relief implied by the point itself,
    // which is exact when p lies on the surface
    const double s = std::max(footprint, 0.02);
    if (params_.base == BaseSurface::Plane) {
        const double center = p.z() - params_.site_elevation - params_.slope_x * p.x() -
                              params_.slope_y * p.y();
        const double gx =
            params_.slope_x + (relief(p.x() + s, p.y(), footprint) - center) / s;
        const double gy =
            params_.slope_y + (relief(p.x(), p.y() + s, footprint) - center) / s;
        return Vec3(-gx, -gy, 1.0).normalized();
    }
    const Vec3 c = sphere_center();
    const Vec3 rel_vec = p - c;
    const double rad = rel_vec.norm();
    const Vec3 radial = rel_vec / rad;
    const double center = rad - params_.sphere_radius;
    // tangent-plane projections of the world axes carry the relief gradient
    Vec3 tx = Vec3::UnitX() - radial.x() * radial;
    Vec3 ty = Vec3::UnitY() - radial.y() * radial;
    const double nx = tx.norm(), ny = ty.norm();
    const Vec3 q = c + rel_vec * (params_.sphere_radius / rad);
    double gx = 0.0, gy = 0.0;
    if (nx > 1e-6) {
        tx /= nx;
        gx = (relief(q.x() + s, q.y(), footprint) - center) / s;
    }
    if (ny > 1e-6) {
        ty /= ny;
        gy = (relief(q.x(), q.y() + s, footprint) - center) / s;
    }
    return (radial - gx * tx - gy * ty).normalized();
}

double Terrain::albedo(const Vec3& p, double footprint) const {
    if (params_.albedo_contrast <= 0.0) {
        return 1.0;
    }
    const double norm =
        fbm2_norm(params_.albedo_wavelength, params_.albedo_octaves, params_.albedo_gain, footprint);
    if (norm <= 0.0) return 1.0;
    const double n = fbm2(p.x(), p.y(), params_.albedo_wavelength, params_.albedo_octaves,
                          params_.albedo_gain, albedo_seed_, footprint) /
                     norm;
    return std::clamp(1.0 + params_.albedo_contrast * n, 0.05, 2.0);
}

}  // namespace ofnav
