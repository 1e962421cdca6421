#include <algorithm>
#include <cmath>
#include <vector>

#include "lsfusion/data_io.hpp"
#include "lsfusion/errors.hpp"
#include "lsfusion/rng.hpp"

namespace lsfusion {

namespace {

// RNG stream ids; every draw is keyed by (stream, pixel or draw index).
enum Stream : uint64_t {
    kTexture = 1,
    kFillTexture,
    kPlaneSeeds,
    kPlaneParams,
    kRegionColor,
    kLidarMaskL,
    kLidarMaskR,
    kShuffleL,
    kShuffleR,
    kOffsetL,
    kOffsetR,
    kNoiseL,
    kNoiseR,
    kSignL,
    kSignR,
};

struct Plane {
    double a = 0, b = 0, c = 0;  // d(u, v) = a*u + b*v + c, left view
    double left_value(double u, double v) const { return a * u + b * v + c; }
    // Disparity observed at right-view column u_r for the same surface.
    double right_value(double u_r, double v) const { return (a * u_r + b * v + c) / (1.0 - a); }
};

struct RegionModel {
    std::vector<double> seed_u, seed_v;
    std::vector<Plane> planes;

    int region_of(double u, double v) const {
        int best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (size_t i = 0; i < seed_u.size(); ++i) {
            const double du = u - seed_u[i], dv = v - seed_v[i];
            const double d = du * du + dv * dv;
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        return best;
    }
};

Grid<double> band_limited_noise(const CounterRng& rng, uint64_t stream, int h, int w,
                                uint64_t channel, double frequency) {
    Grid<double> img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(y, x) = rng.uniform(stream, (static_cast<uint64_t>(y) * w + x) * 3 + channel);

    const int passes = std::max(0, static_cast<int>(std::lround(1.0 / (frequency * frequency))));
    Grid<double> tmp(h, w);
    for (int p = 0; p < passes; ++p) {
        // Separable binomial [1 2 1]/4 with clamped borders.
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

    double lo = img[0], hi = img[0];
    for (size_t i = 0; i < img.size(); ++i) {
        lo = std::min(lo, img[i]);
        hi = std::max(hi, img[i]);
    }
    const double span = hi - lo;
    for (size_t i = 0; i < img.size(); ++i)
        img[i] = span > 0 ? 0.08 + 0.84 * (img[i] - lo) / span : 0.5;
    return img;
}

double bilinear_row(const Grid<double>& img, int y, double x) {
    int x0 = static_cast<int>(std::floor(x));
    if (x0 > img.width() - 2) x0 = img.width() - 2;
    if (x0 < 0) x0 = 0;
    const double a = x - x0;
    return (1.0 - a) * img.at(y, x0) + a * img.at(y, x0 + 1);
}

CalibrationSet synthetic_calibration(int w, int h) {
    CalibrationSet calib;
    const double f = 700.0, baseline = 0.5;
    const double cx = w / 2.0, cy = h / 2.0;
    calib.p_left = Mat34{};
    calib.p_left.at(0, 0) = f;
    calib.p_left.at(0, 2) = cx;
    calib.p_left.at(1, 1) = f;
    calib.p_left.at(1, 2) = cy;
    calib.p_left.at(2, 2) = 1.0;
    calib.p_right = calib.p_left;
    calib.p_right.at(0, 3) = -f * baseline;
    calib.lidar_to_camera = Mat4::identity();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            calib.k_left.at(r, c) = calib.p_left.at(r, c);
            calib.k_right.at(r, c) = calib.p_right.at(r, c);
        }
    calib.baseline = baseline;
    calib.focal = f;
    return calib;
}

}  // namespace

void SynthSpec::validate() const {
    if (width < 32 || height < 32) throw DataError("synth spec: size must be at least 32x32");
    if (plane_count < 1) throw DataError("synth spec: plane_count must be >= 1");
    if (!(texture_frequency > 0)) throw DataError("synth spec: texture_frequency must be > 0");
    if (lidar_density < 0 || lidar_density > 1)
        throw DataError("synth spec: lidar_density must be in [0, 1]");
    if (outlier_fraction < 0 || outlier_fraction > 1)
        throw DataError("synth spec: outlier_fraction must be in [0, 1]");
    if (outlier_offset_lo < 0 || outlier_offset_hi < outlier_offset_lo)
        throw DataError("synth spec: outlier offset range must satisfy 0 <= lo <= hi");
    if (noise_sigma < 0) throw DataError("synth spec: noise_sigma must be >= 0");
    if (misalignment_band < 0) throw DataError("synth spec: misalignment_band must be >= 0");
}

SceneBundle generate_synthetic_scene(const SynthSpec& spec) {
    spec.validate();
    const CounterRng rng(spec.seed);
    const int h = spec.height, w = spec.width;

    // Voronoi regions with one disparity plane each, anchored at the image
    // center so every plane stays inside (0, d_max) over the full frame.
    RegionModel model;
    {
        std::vector<uint64_t> taken;
        uint64_t counter = 0;
        while (static_cast<int>(model.seed_u.size()) < spec.plane_count) {
            const uint64_t cell = rng.below(kPlaneSeeds, counter++, static_cast<uint64_t>(h) * w);
            if (std::find(taken.begin(), taken.end(), cell) != taken.end()) continue;
            taken.push_back(cell);
            model.seed_u.push_back(static_cast<double>(cell % w));
            model.seed_v.push_back(static_cast<double>(cell / w));
        }
        for (int i = 0; i < spec.plane_count; ++i) {
            Plane p;
            p.a = rng.uniform_in(kPlaneParams, 4 * i + 0, -6.0 / w, 6.0 / w);
            p.b = rng.uniform_in(kPlaneParams, 4 * i + 1, -6.0 / h, 6.0 / h);
            const double center = rng.uniform_in(kPlaneParams, 4 * i + 2, 0.08 * w, 0.20 * w);
            p.c = center - p.a * (w / 2.0) - p.b * (h / 2.0);
            model.planes.push_back(p);
        }
    }

    Grid<int> region(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) region.at(y, x) = model.region_of(x, y);

    // Ground truth disparity, left view: exact plane values.
    SparseDisparityMap gt(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            gt.values.at(y, x) = model.planes[region.at(y, x)].left_value(x, y);
            gt.mask.at(y, x) = 1;
        }

    // Left image: band-limited texture blended with a per-region tint.
    SceneBundle scene;
    for (int c = 0; c < 3; ++c)
        scene.pair.left[c] = band_limited_noise(rng, kTexture, h, w, c, spec.texture_frequency);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int ri = region.at(y, x);
            for (int c = 0; c < 3; ++c) {
                const double base = rng.uniform_in(kRegionColor, 3 * ri + c, 0.15, 0.85);
                double& px = scene.pair.left[c].at(y, x);
                px = 0.72 * px + 0.28 * base;
            }
        }

    // Right image: for every right-view pixel find the surface that claims it
    // (max disparity wins under occlusion), then sample the left image at the
    // matched column. Unclaimed pixels have no left source: fill with
    // independent texture and flag them.
    Grid<double> d_right(h, w, 0.0);
    Grid<uint8_t> right_claimed(h, w, 0);
    for (int c = 0; c < 3; ++c) scene.pair.right[c] = Grid<double>(h, w, 0.0);
    RgbImage fill;
    for (int c = 0; c < 3; ++c)
        fill[c] = band_limited_noise(rng, kFillTexture, h, w, c, spec.texture_frequency);

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double best_d = -1.0;
            double best_ul = 0.0;
            for (int i = 0; i < spec.plane_count; ++i) {
                const double d = model.planes[i].right_value(x, y);
                if (d <= 0.0) continue;
                const double ul = x + d;
                if (ul < 0.0 || ul > w - 1) continue;
                if (model.region_of(ul, y) != i) continue;
                if (d > best_d) {
                    best_d = d;
                    best_ul = ul;
                }
            }
            if (best_d > 0.0) {
                right_claimed.at(y, x) = 1;
                d_right.at(y, x) = best_d;
                for (int c = 0; c < 3; ++c)
                    scene.pair.right[c].at(y, x) = bilinear_row(scene.pair.left[c], y, best_ul);
            } else {
                for (int c = 0; c < 3; ++c) scene.pair.right[c].at(y, x) = fill[c].at(y, x);
            }
        }

    // Lidar sampling.
    scene.lidar_left = SparseDisparityMap(h, w);
    scene.lidar_right = SparseDisparityMap(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const uint64_t px = static_cast<uint64_t>(y) * w + x;
            if (rng.uniform(kLidarMaskL, px) < spec.lidar_density) {
                scene.lidar_left.values.at(y, x) = gt.values.at(y, x);
                scene.lidar_left.mask.at(y, x) = 1;
            }
            if (right_claimed.at(y, x) && rng.uniform(kLidarMaskR, px) < spec.lidar_density) {
                scene.lidar_right.values.at(y, x) = d_right.at(y, x);
                scene.lidar_right.mask.at(y, x) = 1;
            }
        }

    // Corruption: an exact count of points becomes outliers, the rest get
    // Gaussian noise. Points inside the misalignment band take the disparity
    // of the adjacent region when that differs enough to matter.
    auto corrupt_side = [&](SparseDisparityMap& lidar, uint64_t shuffle_stream,
                            uint64_t offset_stream, uint64_t noise_stream, uint64_t sign_stream,
                            Grid<uint8_t>& record) {
        record = Grid<uint8_t>(h, w, 0);
        std::vector<uint64_t> valid_px;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (lidar.mask.at(y, x)) valid_px.push_back(static_cast<uint64_t>(y) * w + x);
        const size_t n = valid_px.size();
        const size_t n_out = static_cast<size_t>(std::lround(spec.outlier_fraction * n));
        for (size_t j = 0; j < n_out && j < n; ++j) {
            const uint64_t r = rng.below(shuffle_stream, j, n - j);
            std::swap(valid_px[j], valid_px[j + r]);
        }
        std::vector<uint8_t> is_outlier(h * static_cast<size_t>(w), 0);
        for (size_t j = 0; j < n_out && j < n; ++j) is_outlier[valid_px[j]] = 1;

        const int band = static_cast<int>(std::ceil(spec.misalignment_band));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!lidar.mask.at(y, x)) continue;
                const uint64_t px = static_cast<uint64_t>(y) * w + x;
                double& value = lidar.values.at(y, x);
                if (is_outlier[px]) {
                    bool displaced = false;
                    if (band > 0) {
                        const int own = model.region_of(x, y);
                        for (int dy = -band; dy <= band && !displaced; ++dy)
                            for (int dx = -band; dx <= band; ++dx) {
                                if (dy * dy + dx * dx >
                                    spec.misalignment_band * spec.misalignment_band)
                                    continue;
                                const int ny = y + dy, nx = x + dx;
                                if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                                const int other = region.at(ny, nx);
                                if (other == own) continue;
                                const double cross = model.planes[other].left_value(x, y);
                                if (std::abs(cross - value) >= 2.0) {
                                    value = cross;
                                    displaced = true;
                                    break;
                                }
                            }
                    }
                    if (!displaced) {
                        const double off = rng.uniform_in(offset_stream, px, spec.outlier_offset_lo,
                                                          spec.outlier_offset_hi);
                        double sign = (rng.raw(sign_stream, px) & 1) ? 1.0 : -1.0;
                        if (value + sign * off < 0.5) sign = 1.0;
                        if (value + sign * off > kDefaultMaxDisparity - 2.0) sign = -1.0;
                        value += sign * off;
                    }
                    record.at(y, x) = 1;
                } else if (spec.noise_sigma > 0) {
                    value += spec.noise_sigma * rng.normal(noise_stream, px);
                    value = std::clamp(value, 0.1, kDefaultMaxDisparity - 1.0);
                }
            }
    };

    Grid<uint8_t> record_l, record_r;
    corrupt_side(scene.lidar_left, kShuffleL, kOffsetL, kNoiseL, kSignL, record_l);
    corrupt_side(scene.lidar_right, kShuffleR, kOffsetR, kNoiseR, kSignR, record_r);

    scene.calib = synthetic_calibration(w, h);
    scene.ground_truth = std::move(gt);
    scene.corruption_left = std::move(record_l);
    scene.corruption_right = std::move(record_r);
    SparseDisparityMap gt_right(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (right_claimed.at(y, x)) {
                gt_right.values.at(y, x) = d_right.at(y, x);
                gt_right.mask.at(y, x) = 1;
            }
    scene.ground_truth_right = std::move(gt_right);
    scene.render_valid_right = std::move(right_claimed);
    scene.region_map = std::move(region);
    scene.synth_spec = spec;
    return scene;
}

}  // namespace lsfusion
