#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lsfusion/grid.hpp"

namespace lsfusion {

// Disparity values at or above this are outside the matching range and are
// dropped or clamped throughout the pipeline.
inline constexpr double kDefaultMaxDisparity = 192.0;

enum class Side { Left, Right };

struct LidarPoint {
    double x = 0, y = 0, z = 0;  // meters, sensor frame
    float reflectance = 0;       // carried through, unused by fusion
};

struct RawScan {
    std::vector<LidarPoint> points;
};

struct Mat3 {
    std::array<double, 9> m{};  // row-major
    double at(int r, int c) const { return m[3 * r + c]; }
    double& at(int r, int c) { return m[3 * r + c]; }
};

struct Mat34 {
    std::array<double, 12> m{};  // row-major
    double at(int r, int c) const { return m[4 * r + c]; }
    double& at(int r, int c) { return m[4 * r + c]; }
};

struct Mat4 {
    std::array<double, 16> m{};  // row-major
    double at(int r, int c) const { return m[4 * r + c]; }
    double& at(int r, int c) { return m[4 * r + c]; }
    static Mat4 identity() {
        Mat4 t;
        t.at(0, 0) = t.at(1, 1) = t.at(2, 2) = t.at(3, 3) = 1.0;
        return t;
    }
};

struct CalibrationSet {
    Mat3 k_left, k_right;    // intrinsics, pixels
    Mat34 p_left, p_right;   // projection matrices
    Mat4 lidar_to_camera;    // rigid extrinsic
    double baseline = 0;     // meters
    double focal = 0;        // pixels

    // Throws DataError when the baseline/focal are non-positive or the
    // extrinsic rotation block is not orthonormal within 1e-6.
    void validate() const;
};

// Per-pixel disparity with a validity mask. Invalid entries hold 0 as a
// sentinel; their value is meaningless.
struct SparseDisparityMap {
    Grid<double> values;
    Grid<uint8_t> mask;

    SparseDisparityMap() = default;
    SparseDisparityMap(int height, int width)
        : values(height, width, 0.0), mask(height, width, 0) {}

    int height() const { return values.height(); }
    int width() const { return values.width(); }
    size_t valid_count() const {
        size_t n = 0;
        for (size_t i = 0; i < mask.size(); ++i) n += mask[i] != 0;
        return n;
    }
};

// Dense non-negative disparity grid, the optimization variable.
struct DenseDisparityField {
    Grid<double> values;

    DenseDisparityField() = default;
    DenseDisparityField(int height, int width, double fill = 0.0) : values(height, width, fill) {}

    int height() const { return values.height(); }
    int width() const { return values.width(); }
};

// RGB stereo pair with channels in [0, 1], stored planar.
struct ImagePair {
    std::array<Grid<double>, 3> left;
    std::array<Grid<double>, 3> right;

    int height() const { return left[0].height(); }
    int width() const { return left[0].width(); }
};

struct SynthSpec {
    int width = 256;
    int height = 128;
    double texture_frequency = 0.35;  // higher is finer texture
    int plane_count = 4;
    double lidar_density = 0.10;      // fraction of pixels carrying a point
    double outlier_fraction = 0.0;
    double outlier_offset_lo = 5.0;   // px
    double outlier_offset_hi = 30.0;  // px
    double noise_sigma = 0.0;         // px, Gaussian on non-outlier points
    double misalignment_band = 0.0;   // px around region boundaries
    uint64_t seed = 1;

    void validate() const;  // throws DataError on violated bounds
};

struct SceneBundle {
    ImagePair pair;
    SparseDisparityMap lidar_left, lidar_right;
    CalibrationSet calib;
    std::optional<SparseDisparityMap> ground_truth;  // left view
    // Synthetic scenes only: marks Lidar pixels whose value was displaced.
    std::optional<Grid<uint8_t>> corruption_left, corruption_right;
    // Synthetic scenes only: right-view pixels with no left-image source.
    std::optional<Grid<uint8_t>> render_valid_right;
    // Synthetic scenes only, in-memory: right-view disparity on claimed
    // pixels and the generator's plane-region labeling.
    std::optional<SparseDisparityMap> ground_truth_right;
    std::optional<Grid<int>> region_map;
    std::optional<SynthSpec> synth_spec;

    int height() const { return pair.height(); }
    int width() const { return pair.width(); }
};

}  // namespace lsfusion
