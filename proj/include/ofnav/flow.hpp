#pragma once

#include <span>
#include <vector>

#include "ofnav/image.hpp"
#include "ofnav/motion_field.hpp"

namespace ofnav {

/// Feature selection and tracking parameters. Defaults are the configuration
/// used for all experiment runs.
struct LKParams {
    int max_corners = 1000;
    double quality_level = 0.1;
    double min_distance = 50.0;  // px
    int block_size = 10;         // structure-tensor window (px)
    int window = 50;             // tracking window (px)
    int pyramid_levels = 4;
    double epsilon = 0.03;  // per-iteration step threshold (px)
    int max_iters = 10;
    // Lost-feature gate on the per-pixel structure-tensor eigenvalue, as a
    // fraction of (dynamic range)^2. Matches the scale of the usual pyramidal
    // LK implementations (a gradient floor of ~0.4 gray levels per pixel).
    double min_eigen_ratio = 2e-6;
};

/// Detected corner in raster coordinates with its min-eigenvalue response.
struct FeaturePoint {
    double x = 0.0;
    double y = 0.0;
    double score = 0.0;
};

/// Shi-Tomasi selection: minimum eigenvalue of the block-windowed gradient
/// structure tensor, local maxima above quality_level x (global max), greedy
/// min-distance spacing by descending score. Throws NoFeaturesError when the
/// image has no gradient content.
std::vector<FeaturePoint> shi_tomasi_detect(const GrayImage& img, const LKParams& p);

/// Image pyramid with replicated borders so tracking windows can be sampled
/// without bounds handling. Level 0 is the input image.
struct ImagePyramid {
    std::vector<FloatImage> levels;  // padded by `pad` on every side
    std::vector<int> widths;         // logical sizes per level
    std::vector<int> heights;
    int pad = 0;

    int level_count() const { return static_cast<int>(levels.size()); }
    // value at logical integer coordinates (may index into the padded border)
    float at(int level, int x, int y) const {
        const FloatImage& im = levels[level];
        return im.at(x + pad, y + pad);
    }
};

/// Builds `levels` pyramid levels; each level is a 2x decimation of the
/// previous one after a 5-tap binomial low-pass. Throws ImageTooSmallError if
/// the image has fewer than 2^(levels-1) pixels per side.
ImagePyramid build_pyramid(const GrayImage& img, int levels, int pad = 28);

enum class TrackStatus : std::uint8_t { Tracked, Lost };

struct TrackedFeature {
    double x = 0.0;  // raster position in the next frame
    double y = 0.0;
    TrackStatus status = TrackStatus::Lost;
    double residual = 0.0;  // mean absolute window difference at convergence
};

struct TrackResult {
    std::vector<TrackedFeature> features;
    int n_tracked = 0;
};

/// Coarse-to-fine iterative Lucas-Kanade with bilinear subpixel sampling and
/// window means removed (invariant to global brightness offsets).
TrackResult lk_track(const ImagePyramid& prev, const ImagePyramid& next,
                     std::span<const FeaturePoint> features, const LKParams& p);

/// Front-end entry point: detect on `prev`, track into `next`, convert to
/// principal-point-relative coordinates, flow = displacement / dt. Feature
/// positions are reported at the pair midpoint.
std::vector<FlowObservation> estimate_flow(const GrayImage& prev, const GrayImage& next, double dt,
                                           const LKParams& p, const CameraIntrinsics& k);

/// As above with caller-held pyramids, so a frame's pyramid is built once per
/// pair in streaming use.
std::vector<FlowObservation> estimate_flow(const GrayImage& prev, const ImagePyramid& prev_pyr,
                                           const ImagePyramid& next_pyr, double dt,
                                           const LKParams& p, const CameraIntrinsics& k);

/// The pyramid padding estimate_flow uses for a given window size.
inline int pyramid_pad_for(const LKParams& p) { return p.window / 2 + 3; }

}  // namespace ofnav
