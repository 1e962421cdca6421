#pragma once

#include <cmath>
#include <functional>
#include <string>

#include <doctest.h>

#include "lsfusion/image_ops.hpp"
#include "lsfusion/rng.hpp"
#include "lsfusion/types.hpp"

namespace lsfusion::test {

inline Grid<double> smooth_noise(uint64_t seed, int h, int w, int passes = 6, double lo = 0.1,
                                 double hi = 0.9) {
    const CounterRng rng(seed);
    Grid<double> img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(y, x) = rng.uniform(7, static_cast<uint64_t>(y) * w + x);
    Grid<double> tmp(h, w);
    for (int p = 0; p < passes; ++p) {
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

inline RgbImage random_rgb(uint64_t seed, int h, int w) {
    return RgbImage{smooth_noise(seed, h, w), smooth_noise(seed + 1, h, w),
                    smooth_noise(seed + 2, h, w)};
}

// Disparity field whose values keep their fractional part in [0.2, 0.8]: warp
// sample positions stay away from the piecewise-linear kinks of bilinear
// interpolation so finite differences are meaningful.
inline Grid<double> random_disparity(uint64_t seed, int h, int w, int lo = 2, int hi = 12) {
    const CounterRng rng(seed);
    Grid<double> d(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const uint64_t px = static_cast<uint64_t>(y) * w + x;
            const int base = lo + static_cast<int>(rng.below(11, px, hi - lo));
            d.at(y, x) = base + 0.2 + 0.6 * rng.uniform(12, px);
        }
    return d;
}

// Central-difference check of an analytic gradient. eval must be a pure
// function of the field. Checks every pixel whose analytic entry clears the
// floor; requires relative error below tol.
inline void check_gradient_full(const Grid<double>& field, const Grid<double>& analytic,
                                const std::function<double(const Grid<double>&)>& eval,
                                double h = 1e-4, double tol = 1e-4, double floor = 1e-8) {
    REQUIRE(analytic.same_shape(field));
    Grid<double> probe = field;
    size_t checked = 0;
    double worst = 0.0;
    for (int y = 0; y < field.height(); ++y)
        for (int x = 0; x < field.width(); ++x) {
            const double a = analytic.at(y, x);
            if (std::abs(a) <= floor) continue;
            const double orig = probe.at(y, x);
            probe.at(y, x) = orig + h;
            const double ep = eval(probe);
            probe.at(y, x) = orig - h;
            const double em = eval(probe);
            probe.at(y, x) = orig;
            const double fd = (ep - em) / (2.0 * h);
            const double rel = std::abs(fd - a) / std::max(std::abs(fd), std::abs(a));
            worst = std::max(worst, rel);
            ++checked;
        }
    INFO("checked ", checked, " pixels, worst relative error ", worst);
    CHECK(checked > 0);
    CHECK(worst < tol);
}

}  // namespace lsfusion::test
