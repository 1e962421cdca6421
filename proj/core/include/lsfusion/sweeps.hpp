#pragma once

#include <vector>

#include "lsfusion/metrics.hpp"
#include "lsfusion/pipeline.hpp"

namespace lsfusion {

enum class SweepKind { Sparsity, Noise };

struct SweepPoint {
    double control = 0;  // beam count, keep fraction, or noise sigma
    MetricsReport report;
};

struct SweepResult {
    SweepKind kind = SweepKind::Sparsity;
    std::vector<SweepPoint> points;  // control strictly increasing
};

// Row-band decimation emulating beam reduction: rows map onto full_beams
// bands, keeping every (full_beams / beams)-th band. beams == 0 drops all
// points; beams >= full_beams keeps all.
SparseDisparityMap decimate_beams(const SparseDisparityMap& map, int beams, int full_beams = 64);

// Seeded uniform subsampling; keep_fraction 1.0 returns the map unchanged.
SparseDisparityMap subsample_uniform(const SparseDisparityMap& map, double keep_fraction,
                                     uint64_t seed);

// Gaussian disparity noise on a seeded fraction of valid points; sigma 0
// returns the map unchanged.
SparseDisparityMap add_disparity_noise(const SparseDisparityMap& map, double sigma,
                                       double fraction, uint64_t seed,
                                       double d_max = kDefaultMaxDisparity);

// Full pipeline per setting, evaluated against the scene's ground truth
// (required). Control values are sorted ascending before running.
SweepResult sparsity_sweep(const SceneBundle& scene, const FusionConfig& cfg,
                           std::vector<int> beam_counts);
SweepResult sparsity_sweep_fractions(const SceneBundle& scene, const FusionConfig& cfg,
                                     std::vector<double> keep_fractions);
SweepResult noise_sweep(const SceneBundle& scene, const FusionConfig& cfg,
                        std::vector<double> sigmas, double fraction = 1.0);

}  // namespace lsfusion
