#include <doctest.h>

#include <cmath>

#include "ofnav/flow.hpp"
#include "ofnav/rng.hpp"

using namespace ofnav;

namespace {

// Multi-octave value-noise texture: structure at every pyramid scale, the way
// terrain imagery behaves.
GrayImage textured_image(int w, int h, uint64_t seed) {
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    auto octave = [&](double x, double y, double wavelength, uint64_t s) {
        const double u = x / wavelength, v = y / wavelength;
        const auto ix = static_cast<std::int64_t>(std::floor(u));
        const auto iy = static_cast<std::int64_t>(std::floor(v));
        const double fx = smooth(u - ix), fy = smooth(v - iy);
        const double v00 = lattice_value(ix, iy, s), v10 = lattice_value(ix + 1, iy, s);
        const double v01 = lattice_value(ix, iy + 1, s), v11 = lattice_value(ix + 1, iy + 1, s);
        return (v00 + fx * (v10 - v00)) * (1.0 - fy) + (v01 + fx * (v11 - v01)) * fy;
    };
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double value = 0.0, amp = 1.0, wavelength = 96.0, total = 0.0;
            for (int k = 0; k < 6; ++k) {
                value += amp * octave(x, y, wavelength, seed + 131 * k);
                total += amp;
                amp *= 0.75;
                wavelength *= 0.5;
            }
            const double normed = value / total;  // roughly [-1, 1]
            img.at(x, y) = static_cast<uint8_t>(
                std::clamp(std::lround(128.0 + 95.0 * normed), 1L, 254L));
        }
    }
    return img;
}

// Crop a view of `src` with its origin at (ox, oy), so the same scene content
// appears shifted by (-ox mod) between two crops.
GrayImage crop(const GrayImage& src, int ox, int oy, int w, int h) {
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(x, y) = src.at(x + ox, y + oy);
        }
    }
    return out;
}

// Bilinear resample for fractional shifts: out(x, y) = src(x + sx, y + sy).
GrayImage shift_bilinear(const GrayImage& src, double sx, double sy) {
    GrayImage out(src.width, src.height);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            const double px = std::clamp(x + sx, 0.0, src.width - 1.001);
            const double py = std::clamp(y + sy, 0.0, src.height - 1.001);
            const int ix = static_cast<int>(px), iy = static_cast<int>(py);
            const double fx = px - ix, fy = py - iy;
            const double a = src.at(ix, iy) * (1 - fx) + src.at(ix + 1, iy) * fx;
            const double b = src.at(ix, iy + 1) * (1 - fx) + src.at(ix + 1, iy + 1) * fx;
            out.at(x, y) = static_cast<uint8_t>(std::lround(a * (1 - fy) + b * fy));
        }
    }
    return out;
}

LKParams small_image_params() {
    LKParams p;
    p.min_distance = 24.0;
    p.window = 20;
    return p;
}

}  // namespace

TEST_CASE("shi_tomasi_detect") {
    SUBCASE("constant image has no features") {
        const GrayImage img(128, 128, 77);
        CHECK_THROWS_AS(shi_tomasi_detect(img, LKParams{}), NoFeaturesError);
    }

    SUBCASE("bright square on black: features at its corners, spaced apart") {
        GrayImage img(128, 128, 0);
        // 5x5 would sit entirely inside one 10 px block; use a square large
        // enough that its corners are distinct structure-tensor maxima.
        const int x0 = 40, y0 = 48, side = 36;
        for (int y = y0; y < y0 + side; ++y) {
            for (int x = x0; x < x0 + side; ++x) {
                img.at(x, y) = 220;
            }
        }
        LKParams p;
        p.min_distance = 20.0;
        const auto features = shi_tomasi_detect(img, p);
        REQUIRE(!features.empty());
        // every feature lies near one of the four corners
        const double corners[4][2] = {{double(x0), double(y0)},
                                      {double(x0 + side - 1), double(y0)},
                                      {double(x0), double(y0 + side - 1)},
                                      {double(x0 + side - 1), double(y0 + side - 1)}};
        for (const auto& f : features) {
            double best = 1e9;
            for (const auto& c : corners) {
                best = std::min(best, std::hypot(f.x - c[0], f.y - c[1]));
            }
            CHECK(best < 6.0);
        }
        // pairwise spacing respects min_distance
        for (std::size_t i = 0; i < features.size(); ++i) {
            for (std::size_t j = i + 1; j < features.size(); ++j) {
                CHECK(std::hypot(features[i].x - features[j].x, features[i].y - features[j].y) >=
                      p.min_distance);
            }
        }
    }

    SUBCASE("scores are sorted descending and spacing holds on texture") {
        const GrayImage img = textured_image(256, 256, 99);
        LKParams p;
        p.min_distance = 30.0;
        const auto features = shi_tomasi_detect(img, p);
        REQUIRE(features.size() >= 10);
        for (std::size_t i = 1; i < features.size(); ++i) {
            CHECK(features[i].score <= features[i - 1].score);
        }
        for (std::size_t i = 0; i < features.size(); ++i) {
            for (std::size_t j = i + 1; j < features.size(); ++j) {
                CHECK(std::hypot(features[i].x - features[j].x, features[i].y - features[j].y) >=
                      p.min_distance);
            }
        }
        CHECK(static_cast<int>(features.size()) <= p.max_corners);
    }

    SUBCASE("translation equivariance away from borders") {
        const GrayImage big = textured_image(400, 400, 1234);
        const GrayImage a = crop(big, 40, 40, 256, 256);
        const GrayImage b = crop(big, 17, 29, 256, 256);  // same scene, shifted by (23, 11)
        LKParams p;
        p.min_distance = 40.0;
        const auto fa = shi_tomasi_detect(a, p);
        const auto fb = shi_tomasi_detect(b, p);
        // every strong interior feature of `a` appears shifted in `b`
        int matched = 0, considered = 0;
        for (const auto& f : fa) {
            const double ex = f.x + 23.0, ey = f.y + 11.0;
            if (ex < 30 || ex > 225 || ey < 30 || ey > 225 || f.x < 30 || f.x > 225 || f.y < 30 ||
                f.y > 225) {
                continue;
            }
            ++considered;
            for (const auto& g : fb) {
                if (std::hypot(g.x - ex, g.y - ey) < 1e-3) {
                    ++matched;
                    break;
                }
            }
        }
        REQUIRE(considered >= 5);
        // Greedy spacing near the borders interacts across views, so a small
        // fraction of interior features may differ between the two crops.
        CHECK(matched >= (considered * 4) / 5);
    }
}

TEST_CASE("build_pyramid") {
    SUBCASE("single level is the input") {
        const GrayImage img = textured_image(64, 64, 3);
        const ImagePyramid pyr = build_pyramid(img, 1);
        REQUIRE(pyr.level_count() == 1);
        CHECK(pyr.widths[0] == 64);
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                CHECK(pyr.at(0, x, y) == doctest::Approx(img.at(x, y)));
            }
        }
    }
    SUBCASE("sizes halve per level") {
        const GrayImage img(1024, 1024, 10);
        const ImagePyramid pyr = build_pyramid(img, 4);
        CHECK(pyr.widths == std::vector<int>({1024, 512, 256, 128}));
        CHECK(pyr.heights == std::vector<int>({1024, 512, 256, 128}));
    }
    SUBCASE("constant image stays constant at all levels") {
        const GrayImage img(64, 64, 137);
        const ImagePyramid pyr = build_pyramid(img, 4);
        for (int l = 0; l < 4; ++l) {
            for (int y = 0; y < pyr.heights[l]; ++y) {
                for (int x = 0; x < pyr.widths[l]; ++x) {
                    CHECK(pyr.at(l, x, y) == doctest::Approx(137.0f));
                }
            }
        }
    }
    SUBCASE("too-small image is rejected") {
        const GrayImage img(4, 4, 0);
        CHECK_THROWS_AS(build_pyramid(img, 4), ImageTooSmallError);
    }
}

TEST_CASE("lk_track") {
    SUBCASE("identical frames give zero displacement") {
        const GrayImage img = textured_image(256, 256, 41);
        LKParams p = small_image_params();
        const auto features = shi_tomasi_detect(img, p);
        const int pad = p.window / 2 + 3;
        const ImagePyramid pyr = build_pyramid(img, p.pyramid_levels, pad);
        const TrackResult r = lk_track(pyr, pyr, features, p);
        REQUIRE(r.n_tracked >= 10);
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (r.features[i].status != TrackStatus::Tracked) continue;
            CHECK(std::abs(r.features[i].x - features[i].x) < 1e-3);
            CHECK(std::abs(r.features[i].y - features[i].y) < 1e-3);
        }
    }

    SUBCASE("integer shift is recovered") {
        const GrayImage big = textured_image(360, 360, 4242);
        const GrayImage prev = crop(big, 20, 20, 256, 256);
        const GrayImage next = crop(big, 27, 23, 256, 256);  // displacement (-7, -3)
        LKParams p = small_image_params();
        const auto features = shi_tomasi_detect(prev, p);
        const int pad = p.window / 2 + 3;
        const ImagePyramid pp = build_pyramid(prev, p.pyramid_levels, pad);
        const ImagePyramid np = build_pyramid(next, p.pyramid_levels, pad);
        const TrackResult r = lk_track(pp, np, features, p);
        int checked = 0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (r.features[i].status != TrackStatus::Tracked) continue;
            if (features[i].x < 30 || features[i].x > 220 || features[i].y < 30 ||
                features[i].y > 220) {
                continue;
            }
            CHECK(std::abs((r.features[i].x - features[i].x) - (-7.0)) < 0.05);
            CHECK(std::abs((r.features[i].y - features[i].y) - (-3.0)) < 0.05);
            ++checked;
        }
        REQUIRE(checked >= 8);
    }

    SUBCASE("subpixel shift is recovered within interpolation error") {
        const GrayImage prev = textured_image(256, 256, 4343);
        const double sx = 3.5, sy = -2.25;
        const GrayImage next = shift_bilinear(prev, sx, sy);  // content moves by (-sx, -sy)
        LKParams p = small_image_params();
        const auto features = shi_tomasi_detect(prev, p);
        const int pad = p.window / 2 + 3;
        const ImagePyramid pp = build_pyramid(prev, p.pyramid_levels, pad);
        const ImagePyramid np = build_pyramid(next, p.pyramid_levels, pad);
        const TrackResult r = lk_track(pp, np, features, p);
        int checked = 0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (r.features[i].status != TrackStatus::Tracked) continue;
            if (features[i].x < 20 || features[i].x > 235 || features[i].y < 20 ||
                features[i].y > 235) {
                continue;
            }
            CHECK(std::abs((r.features[i].x - features[i].x) + sx) < 0.2);
            CHECK(std::abs((r.features[i].y - features[i].y) + sy) < 0.2);
            ++checked;
        }
        REQUIRE(checked >= 8);
    }

    SUBCASE("pyramid captures a 40 px shift that a single level cannot") {
        const GrayImage big = textured_image(480, 480, 888);
        const GrayImage prev = crop(big, 60, 60, 320, 320);
        const GrayImage next = crop(big, 100, 60, 320, 320);  // displacement (-40, 0)
        LKParams p;
        p.min_distance = 40.0;  // default 50x50 window
        const auto features = shi_tomasi_detect(prev, p);
        const int pad = p.window / 2 + 3;

        const ImagePyramid pp4 = build_pyramid(prev, 4, pad);
        const ImagePyramid np4 = build_pyramid(next, 4, pad);
        const TrackResult with_pyr = lk_track(pp4, np4, features, p);

        const ImagePyramid pp1 = build_pyramid(prev, 1, pad);
        const ImagePyramid np1 = build_pyramid(next, 1, pad);
        LKParams p1 = p;
        p1.pyramid_levels = 1;
        const TrackResult without = lk_track(pp1, np1, features, p1);

        int good4 = 0, good1 = 0, interior = 0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (features[i].x < 60 || features[i].x > 260 || features[i].y < 40 ||
                features[i].y > 280) {
                continue;
            }
            ++interior;
            if (with_pyr.features[i].status == TrackStatus::Tracked &&
                std::abs((with_pyr.features[i].x - features[i].x) + 40.0) < 0.5 &&
                std::abs(with_pyr.features[i].y - features[i].y) < 0.5) {
                ++good4;
            }
            if (without.features[i].status == TrackStatus::Tracked &&
                std::abs((without.features[i].x - features[i].x) + 40.0) < 5.0 &&
                std::abs(without.features[i].y - features[i].y) < 5.0) {
                ++good1;
            }
        }
        REQUIRE(interior >= 5);
        CHECK(good4 >= interior - 1);  // pyramidal path succeeds
        CHECK(good1 == 0);             // single level cannot reach 40 px
    }

    SUBCASE("brightness offset barely moves the result") {
        const GrayImage prev = textured_image(256, 256, 5555);
        GrayImage next = shift_bilinear(prev, 1.25, 0.75);
        GrayImage next_bright = next;
        for (auto& px : next_bright.pixels) {
            px = static_cast<uint8_t>(std::min(255, px + 20));
        }
        LKParams p = small_image_params();
        const auto features = shi_tomasi_detect(prev, p);
        const int pad = p.window / 2 + 3;
        const ImagePyramid pp = build_pyramid(prev, p.pyramid_levels, pad);
        const ImagePyramid np = build_pyramid(next, p.pyramid_levels, pad);
        const ImagePyramid nbp = build_pyramid(next_bright, p.pyramid_levels, pad);
        const TrackResult a = lk_track(pp, np, features, p);
        const TrackResult b = lk_track(pp, nbp, features, p);
        int checked = 0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (a.features[i].status != TrackStatus::Tracked ||
                b.features[i].status != TrackStatus::Tracked) {
                continue;
            }
            CHECK(std::abs(a.features[i].x - b.features[i].x) < 0.05);
            CHECK(std::abs(a.features[i].y - b.features[i].y) < 0.05);
            ++checked;
        }
        REQUIRE(checked >= 8);
    }
}

TEST_CASE("estimate_flow") {
    const CameraIntrinsics k = CameraIntrinsics::square(256, 256.0);

    SUBCASE("identical frames give near-zero flow") {
        const GrayImage img = textured_image(256, 256, 17);
        const auto obs = estimate_flow(img, img, 0.25, small_image_params(), k);
        REQUIRE(obs.size() >= 10);
        for (const auto& o : obs) {
            CHECK(std::abs(o.flow.u) < 0.01);
            CHECK(std::abs(o.flow.v) < 0.01);
        }
    }

    SUBCASE("halving dt doubles the flow exactly") {
        const GrayImage big = textured_image(360, 360, 2024);
        const GrayImage prev = crop(big, 30, 30, 256, 256);
        const GrayImage next = crop(big, 35, 27, 256, 256);
        const auto slow = estimate_flow(prev, next, 0.5, small_image_params(), k);
        const auto fast = estimate_flow(prev, next, 0.25, small_image_params(), k);
        REQUIRE(slow.size() == fast.size());
        for (std::size_t i = 0; i < slow.size(); ++i) {
            CHECK(fast[i].flow.u == doctest::Approx(2.0 * slow[i].flow.u).epsilon(1e-12));
            CHECK(fast[i].flow.v == doctest::Approx(2.0 * slow[i].flow.v).epsilon(1e-12));
        }
    }
}
