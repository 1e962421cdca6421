#pragma once

// Deterministic scenario builder for gradient checks.
//
// Central differences at h = 1e-4 only estimate the analytic derivative
// where the integrand's third derivative stays moderate. The robust kernel
// phi(s) = sqrt(s^2 + 1e-6) has curvature concentrated in |s| < ~5e-3, and
// the bilinear warp is piecewise linear with kinks at integer sample
// positions. The builder therefore quantizes everything that feeds those
// nonlinearities: photometric offsets are multiples of 0.05 (so residuals
// are exactly 0 or at least 0.05), disparity fractional parts sit on a
// 0.05 lattice inside [0.2, 0.8] (sample positions stay away from integer
// crossings), and Lidar residuals avoid the truncation point by 20%.
// At such points the analytic gradient and the central difference agree to
// first order in h^2 times a bounded third derivative.

#include <cmath>
#include <vector>

#include "lsfusion/energy.hpp"
#include "lsfusion/image_ops.hpp"
#include "lsfusion/rng.hpp"
#include "lsfusion/segmentation.hpp"
#include "lsfusion/types.hpp"

namespace lsfusion::test {

struct FdScenario {
    ImagePair pair;
    Grid<double> d_left, d_right;
    SparseDisparityMap lidar_left, lidar_right;  // validity mask = keep mask
    SuperpixelSegmentation seg_left, seg_right;
    OcclusionMask occ_left, occ_right;
    LossWeights weights;
    Side checked = Side::Left;  // the side whose residuals are margin-safe
};

namespace fd_detail {

inline Grid<double> fd_smooth(const CounterRng& rng, uint64_t stream, int h, int w, double lo,
                              double hi) {
    Grid<double> img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(y, x) = rng.uniform(stream, static_cast<uint64_t>(y) * w + x);
    Grid<double> tmp(h, w);
    for (int p = 0; p < 5; ++p) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int xl = std::max(0, x - 1), xr = std::min(w - 1, x + 1);
                tmp.at(y, x) = 0.25 * img.at(y, xl) + 0.5 * img.at(y, x) + 0.25 * img.at(y, xr);
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int yu = std::max(0, y - 1), yd = std::min(h - 1, y + 1);
                img.at(y, x) = 0.25 * tmp.at(yu, x) + 0.5 * tmp.at(y, x) + 0.25 * tmp.at(yd, x);
            }
    }
    double mn = img[0], mx = img[0];
    for (size_t i = 0; i < img.size(); ++i) {
        mn = std::min(mn, img[i]);
        mx = std::max(mx, img[i]);
    }
    for (size_t i = 0; i < img.size(); ++i)
        img[i] = mx > mn ? lo + (hi - lo) * (img[i] - mn) / (mx - mn) : 0.5 * (lo + hi);
    return img;
}

// Disparities on a 0.05 lattice with fractional part in [0.2, 0.8].
inline Grid<double> fd_disparity(const CounterRng& rng, uint64_t stream, int h, int w, int lo,
                                 int hi) {
    Grid<double> d(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const uint64_t px = static_cast<uint64_t>(y) * w + x;
            const int base = lo + static_cast<int>(rng.raw(stream, 2 * px) % (hi - lo));
            const int frac_step = static_cast<int>(rng.raw(stream, 2 * px + 1) % 13);  // 0.2..0.8
            d.at(y, x) = base + 0.2 + 0.05 * frac_step;
        }
    return d;
}

// Quantized photometric offsets: 0 with probability ~1/4, otherwise
// +-{0.10, 0.15, ..., 0.30}.
inline double fd_offset(const CounterRng& rng, uint64_t stream, uint64_t counter) {
    const uint64_t r = rng.raw(stream, counter);
    if ((r & 3) == 0) return 0.0;
    const int step = static_cast<int>((r >> 2) % 5);  // 0..4 -> 0.10..0.30
    const double mag = 0.10 + 0.05 * step;
    return (r & 4) ? mag : -mag;
}

}  // namespace fd_detail

inline FdScenario make_fd_scenario(uint64_t seed, int h, int w, Side checked = Side::Left) {
    using namespace fd_detail;
    const CounterRng rng(seed);
    FdScenario s;
    s.checked = checked;
    s.weights = LossWeights{};

    s.d_left = fd_disparity(rng, 1, h, w, 2, 10);
    s.d_right = fd_disparity(rng, 2, h, w, 2, 10);

    // The warp source is the other view's image; the checked side's target is
    // that source warped by the current field plus lattice offsets, so the
    // photometric residuals at the evaluation point are exactly the offsets.
    const RgbImage source{fd_smooth(rng, 3, h, w, 0.35, 0.65),
                          fd_smooth(rng, 4, h, w, 0.35, 0.65),
                          fd_smooth(rng, 5, h, w, 0.35, 0.65)};
    const Grid<double>& d_checked = checked == Side::Left ? s.d_left : s.d_right;
    const WarpDirection dir =
        checked == Side::Left ? WarpDirection::RightToLeft : WarpDirection::LeftToRight;
    const WarpedRgb base = warp_rgb_by_disparity(source, d_checked, dir);

    RgbImage target;
    for (int c = 0; c < 3; ++c) {
        target[c] = Grid<double>(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const uint64_t px = static_cast<uint64_t>(y) * w + x;
                const double off = fd_offset(rng, 6 + c, px);
                target[c].at(y, x) = base.valid.at(y, x)
                                         ? base.image[c].at(y, x) + off
                                         : rng.uniform_in(9 + c, px, 0.35, 0.65);
            }
    }
    if (checked == Side::Left) {
        s.pair.left = target;
        s.pair.right = source;
    } else {
        s.pair.right = target;
        s.pair.left = source;
    }

    // Lidar residuals: about half on the quadratic branch (|r| in
    // [0.2, 0.8] * epsilon), the rest truncated (|r| in [1.2, 3] * epsilon).
    const double eps = s.weights.epsilon;
    auto make_lidar = [&](const Grid<double>& d, uint64_t stream) {
        SparseDisparityMap lidar(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const uint64_t px = static_cast<uint64_t>(y) * w + x;
                if (rng.uniform(stream, 4 * px) > 0.25) continue;
                const bool quad = rng.uniform(stream, 4 * px + 1) < 0.5;
                const double mag = quad ? rng.uniform_in(stream, 4 * px + 2, 0.2 * eps, 0.8 * eps)
                                        : rng.uniform_in(stream, 4 * px + 2, 1.2 * eps, 3.0 * eps);
                double sign = (rng.raw(stream, 4 * px + 3) & 1) ? 1.0 : -1.0;
                if (d.at(y, x) - sign * mag < 0.1) sign = -1.0;  // keep the residual in its band
                lidar.values.at(y, x) = d.at(y, x) - sign * mag;
                lidar.mask.at(y, x) = 1;
            }
        return lidar;
    };
    s.lidar_left = make_lidar(s.d_left, 12);
    s.lidar_right = make_lidar(s.d_right, 13);

    s.seg_left = slic_segment(s.pair.left, std::max(2, h * w / 256), 10.0, 5);
    s.seg_right = slic_segment(s.pair.right, std::max(2, h * w / 256), 10.0, 5);

    s.occ_left = occlusion_mask(s.d_left, s.d_right, s.weights.occlusion_threshold);
    s.occ_right = occlusion_mask_right(s.d_right, s.d_left, s.weights.occlusion_threshold);
    return s;
}

// Sanity guard for the margins the construction promises; call once per
// frozen seed so regressions in the builder fail loudly.
inline bool fd_scenario_margins_ok(const FdScenario& s) {
    const Side side = s.checked;
    const RgbImage& target = side == Side::Left ? s.pair.left : s.pair.right;
    const RgbImage& source = side == Side::Left ? s.pair.right : s.pair.left;
    const Grid<double>& d = side == Side::Left ? s.d_left : s.d_right;
    const OcclusionMask& occ = side == Side::Left ? s.occ_left : s.occ_right;
    const WarpDirection dir =
        side == Side::Left ? WarpDirection::RightToLeft : WarpDirection::LeftToRight;
    const WarpedRgb warped = warp_rgb_by_disparity(source, d, dir);

    for (int y = 0; y < d.height(); ++y)
        for (int x = 0; x < d.width(); ++x) {
            if (!occ.at(y, x) || !warped.valid.at(y, x)) continue;
            for (int c = 0; c < 3; ++c) {
                const double r = std::abs(warped.image[c].at(y, x) - target[c].at(y, x));
                if (r > 1e-9 && r < 4e-2) return false;
            }
        }

    // Census distances clear of the kernel's curvature zone.
    const GrayImage gray_t = to_gray(target);
    const GrayImage gray_s = to_gray(source);
    const WarpedGray wg = warp_by_disparity(gray_s, d, dir);
    const SoftCensusField ct = soft_census(gray_t, s.weights.census_window);
    const SoftCensusField cw = soft_census_masked(wg.image, wg.valid, s.weights.census_window);
    const CensusDistance dist = census_distance(ct, cw);
    for (int y = 0; y < d.height(); ++y)
        for (int x = 0; x < d.width(); ++x) {
            if (!occ.at(y, x) || !dist.valid.at(y, x)) continue;
            const double v = dist.dist.at(y, x);
            if (v > 1e-9 && v < 8e-3) return false;
        }
    return true;
}

}  // namespace lsfusion::test
