#include "ofnav/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ofnav {

namespace {

// Box-filtered sums of the gradient products over block x block windows.
// Products are kept interleaved [gxx gxy gyy] and summed with separable
// running sums, row-contiguous in both passes. Entries closer than the block
// margin to the border are left as zero.
void structure_tensor_scores(const FloatImage& img, int block, std::vector<float>& score) {
    const int w = img.width, h = img.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<float> prod(3 * n, 0.0f);

    for (int y = 1; y + 1 < h; ++y) {
        const float* rm = &img.pixels[static_cast<std::size_t>(y - 1) * w];
        const float* r0 = &img.pixels[static_cast<std::size_t>(y) * w];
        const float* rp = &img.pixels[static_cast<std::size_t>(y + 1) * w];
        float* out = &prod[3 * (static_cast<std::size_t>(y) * w)];
        for (int x = 1; x + 1 < w; ++x) {
            const float gx = 0.5f * (r0[x + 1] - r0[x - 1]);
            const float gy = 0.5f * (rp[x] - rm[x]);
            out[3 * x] = gx * gx;
            out[3 * x + 1] = gx * gy;
            out[3 * x + 2] = gy * gy;
        }
    }

    const int lo = block / 2;  // window covers [i - lo, i + hi]
    const int hi = block - lo - 1;

    // horizontal running sum, in place via a scratch row
    std::vector<float> scratch(3 * static_cast<std::size_t>(w), 0.0f);
    for (int y = 0; y < h; ++y) {
        float* row = &prod[3 * (static_cast<std::size_t>(y) * w)];
        float a0 = 0.0f, a1 = 0.0f, a2 = 0.0f;
        for (int x = 0; x < std::min(w, hi); ++x) {
            a0 += row[3 * x];
            a1 += row[3 * x + 1];
            a2 += row[3 * x + 2];
        }
        for (int x = 0; x < w; ++x) {
            if (x + hi < w) {
                a0 += row[3 * (x + hi)];
                a1 += row[3 * (x + hi) + 1];
                a2 += row[3 * (x + hi) + 2];
            }
            if (x - lo - 1 >= 0) {
                a0 -= row[3 * (x - lo - 1)];
                a1 -= row[3 * (x - lo - 1) + 1];
                a2 -= row[3 * (x - lo - 1) + 2];
            }
            scratch[3 * x] = a0;
            scratch[3 * x + 1] = a1;
            scratch[3 * x + 2] = a2;
        }
        std::memcpy(row, scratch.data(), sizeof(float) * 3 * w);
    }

    // vertical running sum with a row-wide accumulator
    std::vector<float> summed(3 * n, 0.0f);
    std::vector<float> acc(3 * static_cast<std::size_t>(w), 0.0f);
    const std::size_t stride = 3 * static_cast<std::size_t>(w);
    for (int y = 0; y < std::min(h, hi); ++y) {
        const float* row = &prod[static_cast<std::size_t>(y) * stride];
        for (std::size_t i = 0; i < stride; ++i) acc[i] += row[i];
    }
    for (int y = 0; y < h; ++y) {
        if (y + hi < h) {
            const float* row = &prod[static_cast<std::size_t>(y + hi) * stride];
            for (std::size_t i = 0; i < stride; ++i) acc[i] += row[i];
        }
        if (y - lo - 1 >= 0) {
            const float* row = &prod[static_cast<std::size_t>(y - lo - 1) * stride];
            for (std::size_t i = 0; i < stride; ++i) acc[i] -= row[i];
        }
        std::memcpy(&summed[static_cast<std::size_t>(y) * stride], acc.data(), sizeof(float) * stride);
    }

    score.assign(n, 0.0f);
    const int margin = block / 2 + 1;
    for (int y = margin; y + margin < h; ++y) {
        const float* row = &summed[static_cast<std::size_t>(y) * stride];
        float* out = &score[static_cast<std::size_t>(y) * w];
        for (int x = margin; x + margin < w; ++x) {
            const float a = row[3 * x], c = row[3 * x + 1], b = row[3 * x + 2];
            const float half_trace = 0.5f * (a + b);
            const float delta = 0.5f * (a - b);
            out[x] = half_trace - std::sqrt(delta * delta + c * c);
        }
    }
}

}  // namespace

std::vector<FeaturePoint> shi_tomasi_detect(const GrayImage& img, const LKParams& p) {
    if (img.width <= p.block_size + 2 || img.height <= p.block_size + 2) {
        throw ImageTooSmallError("shi_tomasi_detect: image smaller than the block size");
    }
    const FloatImage f = FloatImage::from_gray(img);
    std::vector<float> score;
    structure_tensor_scores(f, p.block_size, score);

    const int w = img.width, h = img.height;
    float max_score = 0.0f;
    for (const float s : score) max_score = std::max(max_score, s);
    if (!(max_score > 0.0f)) {
        throw NoFeaturesError("shi_tomasi_detect: no gradient content in the image");
    }
    const float threshold = static_cast<float>(p.quality_level) * max_score;

    std::vector<FeaturePoint> candidates;
    for (int y = 1; y + 1 < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 1; x + 1 < w; ++x) {
            const float s = score[row + x];
            if (s < threshold || s <= 0.0f) continue;
            // 3x3 non-maximum suppression
            if (s < score[row + x - 1] || s < score[row + x + 1] || s < score[row - w + x - 1] ||
                s < score[row - w + x] || s < score[row - w + x + 1] || s < score[row + w + x - 1] ||
                s < score[row + w + x] || s < score[row + w + x + 1]) {
                continue;
            }
            candidates.push_back({static_cast<double>(x), static_cast<double>(y), s});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const FeaturePoint& a, const FeaturePoint& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    // Greedy min-distance spacing with a bucket grid.
    const double min_dist = p.min_distance;
    const double cell = std::max(min_dist, 1.0);
    const int gw = static_cast<int>(w / cell) + 1;
    const int gh = static_cast<int>(h / cell) + 1;
    std::vector<std::vector<int>> grid(static_cast<std::size_t>(gw) * gh);
    std::vector<FeaturePoint> selected;
    const double min_dist_sq = min_dist * min_dist;

    for (const FeaturePoint& cand : candidates) {
        if (static_cast<int>(selected.size()) >= p.max_corners) break;
        const int cx = static_cast<int>(cand.x / cell);
        const int cy = static_cast<int>(cand.y / cell);
        bool blocked = false;
        for (int ny = std::max(0, cy - 1); ny <= std::min(gh - 1, cy + 1) && !blocked; ++ny) {
            for (int nx = std::max(0, cx - 1); nx <= std::min(gw - 1, cx + 1) && !blocked; ++nx) {
                for (const int idx : grid[static_cast<std::size_t>(ny) * gw + nx]) {
                    const double dx = selected[idx].x - cand.x;
                    const double dy = selected[idx].y - cand.y;
                    if (dx * dx + dy * dy < min_dist_sq) {
                        blocked = true;
                        break;
                    }
                }
            }
        }
        if (!blocked) {
            grid[static_cast<std::size_t>(cy) * gw + cx].push_back(static_cast<int>(selected.size()));
            selected.push_back(cand);
        }
    }
    if (selected.empty()) {
        throw NoFeaturesError("shi_tomasi_detect: no features above the quality threshold");
    }
    return selected;
}

ImagePyramid build_pyramid(const GrayImage& img, int levels, int pad) {
    if (levels < 1) {
        throw std::invalid_argument("build_pyramid: levels must be >= 1");
    }
    const int min_side = 1 << (levels - 1);
    if (img.width < min_side || img.height < min_side) {
        throw ImageTooSmallError("build_pyramid: image smaller than 2^(levels-1) per side");
    }

    ImagePyramid pyr;
    pyr.pad = pad;
    pyr.levels.reserve(levels);
    pyr.widths.reserve(levels);
    pyr.heights.reserve(levels);

    auto padded_from = [pad](const std::vector<float>& src, int w, int h) {
        FloatImage out(w + 2 * pad, h + 2 * pad);
        for (int y = -pad; y < h + pad; ++y) {
            const int sy = std::clamp(y, 0, h - 1);
            float* dst = &out.pixels[static_cast<std::size_t>(y + pad) * out.width];
            const float* row = &src[static_cast<std::size_t>(sy) * w];
            for (int x = -pad; x < w + pad; ++x) {
                dst[x + pad] = row[std::clamp(x, 0, w - 1)];
            }
        }
        return out;
    };

    std::vector<float> current(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) current[i] = static_cast<float>(img.pixels[i]);
    int w = img.width, h = img.height;
    pyr.levels.push_back(padded_from(current, w, h));
    pyr.widths.push_back(w);
    pyr.heights.push_back(h);

    std::vector<float> smoothed, next, tmp;
    for (int level = 1; level < levels; ++level) {
        // 5-tap binomial [1 4 6 4 1]/16, separable, replicate border
        smoothed.assign(current.size(), 0.0f);
        tmp.assign(current.size(), 0.0f);
        auto tap = [&](const std::vector<float>& buf, int x, int y) {
            return buf[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
        };
        for (int y = 0; y < h; ++y) {
            const float* src = &current[static_cast<std::size_t>(y) * w];
            float* dst = &tmp[static_cast<std::size_t>(y) * w];
            for (int x = 0; x < std::min(2, w); ++x) {
                dst[x] = (tap(current, x - 2, y) + 4.0f * tap(current, x - 1, y) + 6.0f * src[x] +
                          4.0f * tap(current, x + 1, y) + tap(current, x + 2, y)) *
                         (1.0f / 16.0f);
            }
            for (int x = 2; x + 2 < w; ++x) {
                dst[x] = (src[x - 2] + 4.0f * src[x - 1] + 6.0f * src[x] + 4.0f * src[x + 1] +
                          src[x + 2]) *
                         (1.0f / 16.0f);
            }
            for (int x = std::max(2, w - 2); x < w; ++x) {
                dst[x] = (tap(current, x - 2, y) + 4.0f * tap(current, x - 1, y) + 6.0f * src[x] +
                          4.0f * tap(current, x + 1, y) + tap(current, x + 2, y)) *
                         (1.0f / 16.0f);
            }
        }
        for (int y = 0; y < h; ++y) {
            const int ym2 = std::clamp(y - 2, 0, h - 1), ym1 = std::clamp(y - 1, 0, h - 1);
            const int yp1 = std::clamp(y + 1, 0, h - 1), yp2 = std::clamp(y + 2, 0, h - 1);
            const float* rm2 = &tmp[static_cast<std::size_t>(ym2) * w];
            const float* rm1 = &tmp[static_cast<std::size_t>(ym1) * w];
            const float* r0 = &tmp[static_cast<std::size_t>(y) * w];
            const float* rp1 = &tmp[static_cast<std::size_t>(yp1) * w];
            const float* rp2 = &tmp[static_cast<std::size_t>(yp2) * w];
            float* dst = &smoothed[static_cast<std::size_t>(y) * w];
            for (int x = 0; x < w; ++x) {
                dst[x] = (rm2[x] + 4.0f * rm1[x] + 6.0f * r0[x] + 4.0f * rp1[x] + rp2[x]) *
                         (1.0f / 16.0f);
            }
        }
        const int nw = (w + 1) / 2, nh = (h + 1) / 2;
        next.assign(static_cast<std::size_t>(nw) * nh, 0.0f);
        for (int y = 0; y < nh; ++y) {
            const float* src = &smoothed[static_cast<std::size_t>(2 * y) * w];
            float* dst = &next[static_cast<std::size_t>(y) * nw];
            for (int x = 0; x < nw; ++x) {
                dst[x] = src[2 * x];
            }
        }
        current.swap(next);
        w = nw;
        h = nh;
        pyr.levels.push_back(padded_from(current, w, h));
        pyr.widths.push_back(w);
        pyr.heights.push_back(h);
    }
    return pyr;
}

namespace {

// One set of bilinear weights serves a whole window: sample offsets are
// integers, so the fractional parts are shared by every tap.
struct BilinearPatch {
    const float* base;  // top-left integer corner
    int stride;
    float w00, w10, w01, w11;

    BilinearPatch(const FloatImage& im, int pad, double x0, double y0) {
        const double px = x0 + pad, py = y0 + pad;  // >= 0 by the caller's bounds check
        const int ix = static_cast<int>(px);
        const int iy = static_cast<int>(py);
        const float fx = static_cast<float>(px - ix);
        const float fy = static_cast<float>(py - iy);
        base = &im.pixels[static_cast<std::size_t>(iy) * im.width + ix];
        stride = im.width;
        w00 = (1.0f - fx) * (1.0f - fy);
        w10 = fx * (1.0f - fy);
        w01 = (1.0f - fx) * fy;
        w11 = fx * fy;
    }

    // writes `count` samples of row `j` of the patch into dst
    void row(int j, int count, float* dst) const {
        const float* r0 = base + static_cast<std::size_t>(j) * stride;
        const float* r1 = r0 + stride;
        for (int i = 0; i < count; ++i) {
            dst[i] = w00 * r0[i] + w10 * r0[i + 1] + w01 * r1[i] + w11 * r1[i + 1];
        }
    }
};

}  // namespace

TrackResult lk_track(const ImagePyramid& prev, const ImagePyramid& next,
                     std::span<const FeaturePoint> features, const LKParams& p) {
    if (prev.level_count() != next.level_count() || prev.pad != next.pad) {
        throw std::invalid_argument("lk_track: pyramids must share geometry");
    }
    for (int l = 0; l < prev.level_count(); ++l) {
        if (prev.widths[l] != next.widths[l] || prev.heights[l] != next.heights[l]) {
            throw std::invalid_argument("lk_track: pyramids must share geometry");
        }
    }
    const int win = p.window;
    const int patch = win + 2;  // ring for the central-difference gradients
    const double hw = (win - 1) * 0.5;
    const int pad = prev.pad;
    if (static_cast<int>(hw) + 3 > pad) {
        throw std::invalid_argument("lk_track: window too large for the pyramid padding");
    }
    const double slack = pad - hw - 2.0;  // how far a center may drift outside
    const int n_levels = prev.level_count();
    const double eig_threshold = p.min_eigen_ratio * 255.0 * 255.0;

    TrackResult result;
    result.features.resize(features.size());

    std::vector<float> patch_buf(static_cast<std::size_t>(patch) * patch);
    std::vector<float> tmpl(static_cast<std::size_t>(win) * win);
    std::vector<float> gx(static_cast<std::size_t>(win) * win);
    std::vector<float> gy(static_cast<std::size_t>(win) * win);

    for (std::size_t fi = 0; fi < features.size(); ++fi) {
        TrackedFeature& out = result.features[fi];
        const double px0 = features[fi].x, py0 = features[fi].y;
        double gx_flow = 0.0, gy_flow = 0.0;  // accumulated guess, finest-level units
        bool lost = false;
        double residual = 0.0;

        for (int level = n_levels - 1; level >= 0 && !lost; --level) {
            const double scale = 1.0 / static_cast<double>(1 << level);
            const double cx = px0 * scale;
            const double cy = py0 * scale;
            const int lw = prev.widths[level], lh = prev.heights[level];

            if (cx < -slack || cx > lw - 1 + slack || cy < -slack || cy > lh - 1 + slack) {
                lost = true;
                break;
            }

            // sample the (win+2)^2 patch around the template center
            const BilinearPatch tp(prev.levels[level], pad, cx - hw - 1.0, cy - hw - 1.0);
            for (int j = 0; j < patch; ++j) {
                tp.row(j, patch, &patch_buf[static_cast<std::size_t>(j) * patch]);
            }
            double t_sum = 0.0;
            double a11 = 0.0, a12 = 0.0, a22 = 0.0;
            for (int j = 0; j < win; ++j) {
                const float* r0 = &patch_buf[static_cast<std::size_t>(j + 1) * patch + 1];
                const float* rm = r0 - patch;
                const float* rp = r0 + patch;
                float* trow = &tmpl[static_cast<std::size_t>(j) * win];
                float* gxr = &gx[static_cast<std::size_t>(j) * win];
                float* gyr = &gy[static_cast<std::size_t>(j) * win];
                for (int i = 0; i < win; ++i) {
                    const float t = r0[i];
                    const float dx = 0.5f * (r0[i + 1] - r0[i - 1]);
                    const float dy = 0.5f * (rp[i] - rm[i]);
                    trow[i] = t;
                    gxr[i] = dx;
                    gyr[i] = dy;
                    t_sum += t;
                    a11 += dx * dx;
                    a12 += dx * dy;
                    a22 += dy * dy;
                }
            }
            const double area = static_cast<double>(win) * win;
            const double t_mean = t_sum / area;
            const double half_trace = 0.5 * (a11 + a22) / area;
            const double delta = 0.5 * (a11 - a22) / area;
            const double cross = a12 / area;
            const double min_eig = half_trace - std::sqrt(delta * delta + cross * cross);
            if (min_eig < eig_threshold) {
                lost = true;
                break;
            }
            const double det = a11 * a22 - a12 * a12;
            if (det <= 0.0) {
                lost = true;
                break;
            }
            const double inv11 = a22 / det, inv12 = -a12 / det, inv22 = a11 / det;

            // iterate on the next image at this level
            double nux = gx_flow * scale;
            double nuy = gy_flow * scale;
            const FloatImage& nim = next.levels[level];
            for (int iter = 0; iter < p.max_iters; ++iter) {
                const double qx = cx + nux, qy = cy + nuy;
                if (qx < -slack || qx > lw - 1 + slack || qy < -slack || qy > lh - 1 + slack) {
                    lost = true;
                    break;
                }
                double i_sum = 0.0;
                const BilinearPatch ip(nim, pad, qx - hw, qy - hw);
                for (int j = 0; j < win; ++j) {
                    float* row = &patch_buf[static_cast<std::size_t>(j) * win];
                    ip.row(j, win, row);
                    for (int i = 0; i < win; ++i) i_sum += row[i];
                }
                const double i_mean = i_sum / area;
                const double offset = t_mean - i_mean;
                double bx = 0.0, by = 0.0, abs_diff = 0.0;
                for (int j = 0; j < win; ++j) {
                    const float* irow = &patch_buf[static_cast<std::size_t>(j) * win];
                    const float* trow = &tmpl[static_cast<std::size_t>(j) * win];
                    const float* gxr = &gx[static_cast<std::size_t>(j) * win];
                    const float* gyr = &gy[static_cast<std::size_t>(j) * win];
                    for (int i = 0; i < win; ++i) {
                        const double diff = (trow[i] - irow[i]) - offset;
                        bx += diff * gxr[i];
                        by += diff * gyr[i];
                        abs_diff += std::abs(diff);
                    }
                }
                const double sx = inv11 * bx + inv12 * by;
                const double sy2 = inv12 * bx + inv22 * by;
                const double step = std::sqrt(sx * sx + sy2 * sy2);
                if (step > 0.5 * win) {
                    lost = true;
                    break;
                }
                nux += sx;
                nuy += sy2;
                residual = abs_diff / area;
                if (step < p.epsilon) {
                    break;
                }
            }
            if (lost) break;
            // accumulated displacement in finest-level units; the next level
            // rescales it into its own coordinates
            gx_flow = nux * (1 << level);
            gy_flow = nuy * (1 << level);
        }

        if (lost) {
            out.status = TrackStatus::Lost;
            continue;
        }
        const double nx = px0 + gx_flow;
        const double ny = py0 + gy_flow;
        if (nx < 0.0 || nx > prev.widths[0] - 1 || ny < 0.0 || ny > prev.heights[0] - 1) {
            out.status = TrackStatus::Lost;
            continue;
        }
        out.x = nx;
        out.y = ny;
        out.status = TrackStatus::Tracked;
        out.residual = residual;
        ++result.n_tracked;
    }
    return result;
}

std::vector<FlowObservation> estimate_flow(const GrayImage& prev, const GrayImage& next, double dt,
                                           const LKParams& p, const CameraIntrinsics& k) {
    if (prev.width != next.width || prev.height != next.height) {
        throw std::invalid_argument("estimate_flow: frame sizes differ");
    }
    const int pad = pyramid_pad_for(p);
    const ImagePyramid pp = build_pyramid(prev, p.pyramid_levels, pad);
    const ImagePyramid np = build_pyramid(next, p.pyramid_levels, pad);
    return estimate_flow(prev, pp, np, dt, p, k);
}

std::vector<FlowObservation> estimate_flow(const GrayImage& prev, const ImagePyramid& prev_pyr,
                                           const ImagePyramid& next_pyr, double dt,
                                           const LKParams& p, const CameraIntrinsics& k) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("estimate_flow: dt must be positive");
    }
    const std::vector<FeaturePoint> features = shi_tomasi_detect(prev, p);
    const TrackResult tracked = lk_track(prev_pyr, next_pyr, features, p);

    std::vector<FlowObservation> obs;
    obs.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const TrackedFeature& t = tracked.features[i];
        if (t.status != TrackStatus::Tracked) continue;
        const double mx = 0.5 * (features[i].x + t.x);
        const double my = 0.5 * (features[i].y + t.y);
        FlowObservation o;
        o.point = raster_to_pixel(mx, my, k);
        o.flow.u = (t.x - features[i].x) / dt;
        o.flow.v = (t.y - features[i].y) / dt;
        obs.push_back(o);
    }
    return obs;
}

}  // namespace ofnav
