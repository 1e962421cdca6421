#include "lsfusion/sweeps.hpp"

#include <algorithm>
#include <cmath>

#include "lsfusion/errors.hpp"
#include "lsfusion/rng.hpp"

namespace lsfusion {

SparseDisparityMap decimate_beams(const SparseDisparityMap& map, int beams, int full_beams) {
    if (beams < 0 || full_beams < 1)
        throw std::invalid_argument("decimate_beams: invalid beam counts");
    const int h = map.height(), w = map.width();
    SparseDisparityMap out(h, w);
    if (beams == 0) return out;
    if (beams >= full_beams) return map;
    const int stride = std::max(1, full_beams / beams);
    for (int y = 0; y < h; ++y) {
        const int band = static_cast<int>(static_cast<long>(y) * full_beams / h);
        if (band % stride != 0) continue;
        for (int x = 0; x < w; ++x)
            if (map.mask.at(y, x)) {
                out.values.at(y, x) = map.values.at(y, x);
                out.mask.at(y, x) = 1;
            }
    }
    return out;
}

SparseDisparityMap subsample_uniform(const SparseDisparityMap& map, double keep_fraction,
                                     uint64_t seed) {
    if (keep_fraction < 0 || keep_fraction > 1)
        throw std::invalid_argument("subsample_uniform: keep_fraction must be in [0, 1]");
    if (keep_fraction == 1.0) return map;
    const CounterRng rng(seed);
    const int h = map.height(), w = map.width();
    SparseDisparityMap out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!map.mask.at(y, x)) continue;
            const uint64_t px = static_cast<uint64_t>(y) * w + x;
            if (rng.uniform(1, px) >= keep_fraction) continue;
            out.values.at(y, x) = map.values.at(y, x);
            out.mask.at(y, x) = 1;
        }
    return out;
}

SparseDisparityMap add_disparity_noise(const SparseDisparityMap& map, double sigma,
                                       double fraction, uint64_t seed, double d_max) {
    if (sigma < 0) throw std::invalid_argument("add_disparity_noise: sigma must be >= 0");
    if (fraction < 0 || fraction > 1)
        throw std::invalid_argument("add_disparity_noise: fraction must be in [0, 1]");
    if (sigma == 0.0 || fraction == 0.0) return map;
    const CounterRng rng(seed);
    SparseDisparityMap out = map;
    const int h = map.height(), w = map.width();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!out.mask.at(y, x)) continue;
            const uint64_t px = static_cast<uint64_t>(y) * w + x;
            if (fraction < 1.0 && rng.uniform(1, px) >= fraction) continue;
            double& v = out.values.at(y, x);
            v = std::clamp(v + sigma * rng.normal(2, px), 0.1, d_max - 1.0);
        }
    return out;
}

namespace {

MetricsReport run_and_evaluate(const SceneBundle& scene, const FusionConfig& cfg) {
    const FusionResult result = run_feedback_loop(scene, cfg);
    return compute_metrics(result.disp_left, *scene.ground_truth, scene.calib);
}

void require_gt(const SceneBundle& scene, const char* who) {
    if (!scene.ground_truth) throw DataError(std::string(who) + ": scene has no ground truth");
}

}  // namespace

SweepResult sparsity_sweep(const SceneBundle& scene, const FusionConfig& cfg,
                           std::vector<int> beam_counts) {
    require_gt(scene, "sparsity_sweep");
    std::sort(beam_counts.begin(), beam_counts.end());
    beam_counts.erase(std::unique(beam_counts.begin(), beam_counts.end()), beam_counts.end());

    SweepResult sweep;
    sweep.kind = SweepKind::Sparsity;
    for (int beams : beam_counts) {
        SceneBundle sub = scene;
        sub.lidar_left = decimate_beams(scene.lidar_left, beams);
        sub.lidar_right = decimate_beams(scene.lidar_right, beams);
        sweep.points.push_back({static_cast<double>(beams), run_and_evaluate(sub, cfg)});
    }
    return sweep;
}

SweepResult sparsity_sweep_fractions(const SceneBundle& scene, const FusionConfig& cfg,
                                     std::vector<double> keep_fractions) {
    require_gt(scene, "sparsity_sweep");
    std::sort(keep_fractions.begin(), keep_fractions.end());
    keep_fractions.erase(std::unique(keep_fractions.begin(), keep_fractions.end()),
                         keep_fractions.end());
    const uint64_t seed = scene.synth_spec ? scene.synth_spec->seed : 0x5eedULL;

    SweepResult sweep;
    sweep.kind = SweepKind::Sparsity;
    for (size_t i = 0; i < keep_fractions.size(); ++i) {
        SceneBundle sub = scene;
        sub.lidar_left = subsample_uniform(scene.lidar_left, keep_fractions[i], seed + 2 * i);
        sub.lidar_right = subsample_uniform(scene.lidar_right, keep_fractions[i], seed + 2 * i + 1);
        sweep.points.push_back({keep_fractions[i], run_and_evaluate(sub, cfg)});
    }
    return sweep;
}

SweepResult noise_sweep(const SceneBundle& scene, const FusionConfig& cfg,
                        std::vector<double> sigmas, double fraction) {
    require_gt(scene, "noise_sweep");
    std::sort(sigmas.begin(), sigmas.end());
    sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());
    const uint64_t seed = scene.synth_spec ? scene.synth_spec->seed : 0x5eedULL;

    SweepResult sweep;
    sweep.kind = SweepKind::Noise;
    for (size_t i = 0; i < sigmas.size(); ++i) {
        SceneBundle sub = scene;
        sub.lidar_left =
            add_disparity_noise(scene.lidar_left, sigmas[i], fraction, seed + 2 * i, cfg.d_max);
        sub.lidar_right =
            add_disparity_noise(scene.lidar_right, sigmas[i], fraction, seed + 2 * i + 1, cfg.d_max);
        sweep.points.push_back({sigmas[i], run_and_evaluate(sub, cfg)});
    }
    return sweep;
}

}  // namespace lsfusion
