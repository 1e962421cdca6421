#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lsfusion/pipeline.hpp"

namespace lsfusion {

namespace {
constexpr float kMaxCost = 4.0f;  // census distance ceiling
}

CostVolume build_cost_volume(const SoftCensusField& reference, const SoftCensusField& other,
                             Side side, int d_max) {
    if (reference.height != other.height || reference.width != other.width ||
        reference.offset_count != other.offset_count)
        throw std::invalid_argument("build_cost_volume: census field mismatch");
    if (d_max < 1) throw std::invalid_argument("build_cost_volume: d_max must be >= 1");

    const int h = reference.height, w = reference.width, kc = reference.offset_count;
    const int step = side == Side::Left ? -1 : 1;
    CostVolume vol(h, w, d_max);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float* out = &vol.at(y, x, 0);
            if (!reference.valid.at(y, x)) {
                std::fill(out, out + d_max, kMaxCost);
                continue;
            }
            const double* ra = reference.resp.data() + (static_cast<size_t>(y) * w + x) * kc;
            for (int k = 0; k < d_max; ++k) {
                const int xs = x + step * k;
                if (xs < 0 || xs >= w || !other.valid.at(y, xs)) {
                    out[k] = kMaxCost;
                    continue;
                }
                const double* rb = other.resp.data() + (static_cast<size_t>(y) * w + xs) * kc;
                double sum = 0.0;
                for (int i = 0; i < kc; ++i) {
                    const double d = ra[i] - rb[i];
                    sum += d * d;
                }
                out[k] = static_cast<float>(sum / kc);
            }
        }
    }
    return vol;
}

CostVolume build_cost_volume(const GrayImage& left, const GrayImage& right, int d_max,
                             int census_window) {
    const SoftCensusField cl = soft_census(left, census_window);
    const SoftCensusField cr = soft_census(right, census_window);
    return build_cost_volume(cl, cr, Side::Left, d_max);
}

namespace {

// One scanline pass. prev holds L(p - r, .); cur receives L(p, .).
inline void sgm_step(const float* raw, const std::vector<float>& prev, std::vector<float>& cur,
                     float p1, float p2) {
    const int d = static_cast<int>(prev.size());
    float min_prev = prev[0];
    for (int k = 1; k < d; ++k) min_prev = std::min(min_prev, prev[k]);
    for (int k = 0; k < d; ++k) {
        float best = prev[k];
        if (k > 0) best = std::min(best, prev[k - 1] + p1);
        if (k + 1 < d) best = std::min(best, prev[k + 1] + p1);
        best = std::min(best, min_prev + p2);
        cur[k] = raw[k] + best - min_prev;
    }
}

}  // namespace

CostVolume aggregate_costs(const CostVolume& vol, double p1d, double p2d, int paths) {
    if (p1d < 0 || p2d < p1d)
        throw std::invalid_argument("aggregate_costs: need P2 >= P1 >= 0");
    if (paths != 2 && paths != 4)
        throw std::invalid_argument("aggregate_costs: paths must be 2 or 4");

    const int h = vol.height, w = vol.width, d = vol.levels;
    const float p1 = static_cast<float>(p1d), p2 = static_cast<float>(p2d);
    CostVolume out(h, w, d);

    // Horizontal passes, rows independent.
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        std::vector<float> prev(d), cur(d);
        // left to right
        for (int k = 0; k < d; ++k) prev[k] = vol.at(y, 0, k);
        for (int k = 0; k < d; ++k) out.at(y, 0, k) += prev[k];
        for (int x = 1; x < w; ++x) {
            sgm_step(&vol.at(y, x, 0), prev, cur, p1, p2);
            for (int k = 0; k < d; ++k) out.at(y, x, k) += cur[k];
            prev.swap(cur);
        }
        // right to left
        for (int k = 0; k < d; ++k) prev[k] = vol.at(y, w - 1, k);
        for (int k = 0; k < d; ++k) out.at(y, w - 1, k) += prev[k];
        for (int x = w - 2; x >= 0; --x) {
            sgm_step(&vol.at(y, x, 0), prev, cur, p1, p2);
            for (int k = 0; k < d; ++k) out.at(y, x, k) += cur[k];
            prev.swap(cur);
        }
    }

    if (paths == 4) {
        // Vertical passes, columns independent.
#pragma omp parallel for schedule(static)
        for (int x = 0; x < w; ++x) {
            std::vector<float> prev(d), cur(d);
            // top to bottom
            for (int k = 0; k < d; ++k) prev[k] = vol.at(0, x, k);
            for (int k = 0; k < d; ++k) out.at(0, x, k) += prev[k];
            for (int y = 1; y < h; ++y) {
                sgm_step(&vol.at(y, x, 0), prev, cur, p1, p2);
                for (int k = 0; k < d; ++k) out.at(y, x, k) += cur[k];
                prev.swap(cur);
            }
            // bottom to top
            for (int k = 0; k < d; ++k) prev[k] = vol.at(h - 1, x, k);
            for (int k = 0; k < d; ++k) out.at(h - 1, x, k) += prev[k];
            for (int y = h - 2; y >= 0; --y) {
                sgm_step(&vol.at(y, x, 0), prev, cur, p1, p2);
                for (int k = 0; k < d; ++k) out.at(y, x, k) += cur[k];
                prev.swap(cur);
            }
        }
    }
    return out;
}

DenseDisparityField soft_argmin(const CostVolume& vol) {
    const int h = vol.height, w = vol.width, d = vol.levels;
    DenseDisparityField out(h, w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float* c = &vol.at(y, x, 0);
            float m = c[0];
            for (int k = 1; k < d; ++k) m = std::min(m, c[k]);
            double sum_w = 0.0, sum_wk = 0.0;
            for (int k = 0; k < d; ++k) {
                const double wgt = std::exp(static_cast<double>(m) - c[k]);
                sum_w += wgt;
                sum_wk += wgt * k;
            }
            out.values.at(y, x) = sum_wk / sum_w;
        }
    return out;
}

Grid<double> median_filter_3x3(const Grid<double>& img) {
    const int h = img.height(), w = img.width();
    Grid<double> out(h, w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double window[9];
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = std::clamp(y + dy, 0, h - 1);
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    window[n++] = img.at(yy, xx);
                }
            std::sort(window, window + 9);
            out.at(y, x) = window[4];
        }
    return out;
}

std::pair<DenseDisparityField, DenseDisparityField> initialize_disparity(const ImagePair& pair,
                                                                         const FusionConfig& cfg) {
    const int h = pair.height(), w = pair.width();
    const int d_max = static_cast<int>(cfg.d_max);
    const GrayImage gray_l = to_gray(pair.left);
    const GrayImage gray_r = to_gray(pair.right);
    const SoftCensusField census_l = soft_census(gray_l, cfg.stereo.census_window);
    const SoftCensusField census_r = soft_census(gray_r, cfg.stereo.census_window);

    auto readout = [&](const SoftCensusField& ref, const SoftCensusField& other, Side side) {
        CostVolume vol = build_cost_volume(ref, other, side, d_max);
        CostVolume agg = aggregate_costs(vol, cfg.stereo.sgm_p1, cfg.stereo.sgm_p2,
                                         cfg.stereo.sgm_paths);
        const float gain = static_cast<float>(cfg.stereo.readout_gain);
        for (float& c : agg.cost) c *= gain;
        DenseDisparityField field = soft_argmin(agg);

        // Pixels without a census descriptor (the window border) copy the
        // nearest interior value before the median pass.
        const int half = cfg.stereo.census_window / 2;
        const int y_lo = half, y_hi = h - 1 - half, x_lo = half, x_hi = w - 1 - half;
        Grid<double> filled = field.values;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (y < y_lo || y > y_hi || x < x_lo || x > x_hi)
                    filled.at(y, x) = field.values.at(std::clamp(y, y_lo, y_hi),
                                                      std::clamp(x, x_lo, x_hi));
        field.values = median_filter_3x3(filled);
        return field;
    };

    return {readout(census_l, census_r, Side::Left), readout(census_r, census_l, Side::Right)};
}

VerifyResult verify_clean(const DenseDisparityField& d_verify, const SparseDisparityMap& lidar,
                          double tau) {
    if (!d_verify.values.same_shape(lidar.values))
        throw std::invalid_argument("verify_clean: shape mismatch");
    const int h = lidar.height(), w = lidar.width();
    VerifyResult out{SparseDisparityMap(h, w), Grid<uint8_t>(h, w, 0)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!lidar.mask.at(y, x)) continue;
            if (std::abs(d_verify.values.at(y, x) - lidar.values.at(y, x)) < tau) {
                out.cleaned.values.at(y, x) = lidar.values.at(y, x);
                out.cleaned.mask.at(y, x) = 1;
                out.keep.at(y, x) = 1;
            }
        }
    return out;
}

}  // namespace lsfusion
