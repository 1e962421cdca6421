#pragma once

#include "lsfusion/types.hpp"

namespace lsfusion {

// D = B*f/depth. Throws std::domain_error for depth <= 0.
double depth_to_disparity(double depth_m, double baseline_m, double focal_px);

// depth = B*f/disparity. Throws std::domain_error for disparity <= 0.
double disparity_to_depth(double disparity_px, double baseline_m, double focal_px);

struct ProjectionStats {
    size_t behind_camera = 0;
    size_t outside_frame = 0;
    size_t over_range = 0;  // disparity >= d_max
    size_t collisions = 0;  // landed on an already-filled pixel
};

// Projects a scan into a sparse disparity map for one camera. Points behind
// the camera or outside the frame are dropped; pixel collisions keep the
// nearest point (largest disparity). Sub-pixel coordinates round half-up.
SparseDisparityMap project_lidar(const RawScan& scan, const CalibrationSet& calib, int height,
                                 int width, Side side, double d_max = kDefaultMaxDisparity,
                                 ProjectionStats* stats = nullptr);

// Valid fraction of a sparse map.
double density(const SparseDisparityMap& map);

}  // namespace lsfusion
