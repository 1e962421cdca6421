#pragma once

#include <string>
#include <vector>

#include "lsfusion/energy.hpp"
#include "lsfusion/types.hpp"

namespace lsfusion {

struct CostVolume {
    int height = 0, width = 0, levels = 0;
    std::vector<float> cost;  // ((y * width) + x) * levels + k

    CostVolume() = default;
    CostVolume(int h, int w, int d)
        : height(h), width(w), levels(d),
          cost(static_cast<size_t>(h) * w * d, 0.0f) {}

    const float& at(int y, int x, int k) const {
        return cost[(static_cast<size_t>(y) * width + x) * levels + k];
    }
    float& at(int y, int x, int k) {
        return cost[(static_cast<size_t>(y) * width + x) * levels + k];
    }
};

struct StereoInitConfig {
    double sgm_p1 = 0.03;       // penalty for +-1 level changes
    double sgm_p2 = 0.48;       // penalty for larger jumps
    int sgm_paths = 4;
    double readout_gain = 40.0; // cost scale applied before the soft-argmin readout
    int census_window = 5;
};

struct OptimizerConfig {
    int pyramid_levels = 3;
    std::vector<int> iterations{200, 150, 100};  // indexed by level, 0 = finest
    double initial_step_px = 1.0;
    int step_halving_patience = 8;
    double step_growth = 1.25;
    double step_cap_factor = 4.0;
    int mask_refresh_interval = 25;
    double convergence_rel_decrease = 1e-5;
    int convergence_window = 10;
};

struct FusionConfig {
    LossWeights weights;
    double verify_threshold = 1.5;  // px
    int feedback_rounds = 5;
    double d_max = kDefaultMaxDisparity;
    StereoInitConfig stereo;
    OptimizerConfig optimizer;
    int slic_target = 0;  // 0 = automatic from the image area
    double slic_compactness = 10.0;
    int slic_iterations = 10;

    void validate() const;  // throws std::invalid_argument
};

// cost(u, v, k) = census distance between the reference descriptor at (u, v)
// and the other view's descriptor at (u -+ k, v); out-of-range or invalid
// descriptors cost the census-distance ceiling of 4.
CostVolume build_cost_volume(const SoftCensusField& reference, const SoftCensusField& other,
                             Side side, int d_max = static_cast<int>(kDefaultMaxDisparity));
// Convenience overload, left view as reference.
CostVolume build_cost_volume(const GrayImage& left, const GrayImage& right,
                             int d_max = static_cast<int>(kDefaultMaxDisparity),
                             int census_window = 5);

// Scanline aggregation with per-path minima summed; paths is 2 (horizontal)
// or 4 (horizontal + vertical).
CostVolume aggregate_costs(const CostVolume& vol, double p1, double p2, int paths = 4);

// d(u, v) = sum_k k softmax_k(-cost(u, v, k)), unit temperature.
DenseDisparityField soft_argmin(const CostVolume& vol);

Grid<double> median_filter_3x3(const Grid<double>& img);

// Census cost volumes both directions, aggregation, gain-scaled soft-argmin
// readout, border fill, 3x3 median.
std::pair<DenseDisparityField, DenseDisparityField> initialize_disparity(const ImagePair& pair,
                                                                         const FusionConfig& cfg);

// Keeps Lidar points within tau of the verify disparity; the returned map is
// restricted to the keep mask.
struct VerifyResult {
    SparseDisparityMap cleaned;
    Grid<uint8_t> keep;
};
VerifyResult verify_clean(const DenseDisparityField& d_verify, const SparseDisparityMap& lidar,
                          double tau);

struct TraceEntry {
    int round = 0;
    int level = 0;
    int iteration = 0;
    double step_px = 0;
    bool accepted = false;
    bool masks_refreshed = false;
    EnergyBreakdown energy;  // scalars only
};
std::string format_trace_entry(const TraceEntry& e);

struct UpdateResult {
    DenseDisparityField left, right;
    std::vector<TraceEntry> trace;
};

// Coarse-to-fine projected gradient descent on the total energy over both
// disparity fields. Cleaned Lidar maps carry their keep mask as validity.
// Throws NumericalError when the energy turns non-finite.
UpdateResult update_optimize(const ImagePair& pair, const SparseDisparityMap& cleaned_left,
                             const SparseDisparityMap& cleaned_right,
                             const DenseDisparityField& init_left,
                             const DenseDisparityField& init_right, const FusionConfig& cfg,
                             int round_tag = 1);

struct RoundDiagnostics {
    int round = 0;
    size_t input_valid_left = 0, kept_left = 0;
    size_t input_valid_right = 0, kept_right = 0;
};

struct FusionResult {
    DenseDisparityField disp_left, disp_right;
    SparseDisparityMap cleaned_left, cleaned_right;
    Grid<uint8_t> keep_left, keep_right;
    std::vector<TraceEntry> trace;
    std::vector<RoundDiagnostics> rounds;
    DenseDisparityField init_left, init_right;  // stereo-only initialization
};

// Verify/Update rounds: the round-0 verify disparity comes from
// initialize_disparity, each round re-filters the raw Lidar against the
// current estimate and re-optimizes.
FusionResult run_feedback_loop(const SceneBundle& scene, const FusionConfig& cfg);

}  // namespace lsfusion
