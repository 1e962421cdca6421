#include "lsfusion/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "lsfusion/errors.hpp"

namespace lsfusion {

void CalibrationSet::validate() const {
    if (!(baseline > 0)) throw DataError("calibration: baseline must be positive");
    if (!(focal > 0)) throw DataError("calibration: focal length must be positive");
    // Rotation block must be orthonormal with determinant +1.
    const Mat4& t = lidar_to_camera;
    double dot[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            dot[i][j] = 0;
            for (int k = 0; k < 3; ++k) dot[i][j] += t.at(k, i) * t.at(k, j);
        }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(dot[i][j] - want) > 1e-6)
                throw DataError("calibration: extrinsic rotation block is not orthonormal");
        }
    const double det = t.at(0, 0) * (t.at(1, 1) * t.at(2, 2) - t.at(1, 2) * t.at(2, 1)) -
                       t.at(0, 1) * (t.at(1, 0) * t.at(2, 2) - t.at(1, 2) * t.at(2, 0)) +
                       t.at(0, 2) * (t.at(1, 0) * t.at(2, 1) - t.at(1, 1) * t.at(2, 0));
    if (std::abs(det - 1.0) > 1e-6)
        throw DataError("calibration: extrinsic rotation block has determinant != +1");
}

double depth_to_disparity(double depth_m, double baseline_m, double focal_px) {
    if (!(depth_m > 0)) throw std::domain_error("depth_to_disparity: depth must be positive");
    if (!(baseline_m > 0) || !(focal_px > 0))
        throw std::domain_error("depth_to_disparity: baseline and focal must be positive");
    return baseline_m * focal_px / depth_m;
}

double disparity_to_depth(double disparity_px, double baseline_m, double focal_px) {
    if (!(disparity_px > 0)) throw std::domain_error("disparity_to_depth: disparity must be positive");
    if (!(baseline_m > 0) || !(focal_px > 0))
        throw std::domain_error("disparity_to_depth: baseline and focal must be positive");
    return baseline_m * focal_px / disparity_px;
}

SparseDisparityMap project_lidar(const RawScan& scan, const CalibrationSet& calib, int height,
                                 int width, Side side, double d_max, ProjectionStats* stats) {
    SparseDisparityMap out(height, width);
    const Mat4& t = calib.lidar_to_camera;
    const Mat34& p = side == Side::Left ? calib.p_left : calib.p_right;

    for (const LidarPoint& pt : scan.points) {
        // Camera frame.
        const double cx = t.at(0, 0) * pt.x + t.at(0, 1) * pt.y + t.at(0, 2) * pt.z + t.at(0, 3);
        const double cy = t.at(1, 0) * pt.x + t.at(1, 1) * pt.y + t.at(1, 2) * pt.z + t.at(1, 3);
        const double cz = t.at(2, 0) * pt.x + t.at(2, 1) * pt.y + t.at(2, 2) * pt.z + t.at(2, 3);
        // Projective image coordinates.
        const double su = p.at(0, 0) * cx + p.at(0, 1) * cy + p.at(0, 2) * cz + p.at(0, 3);
        const double sv = p.at(1, 0) * cx + p.at(1, 1) * cy + p.at(1, 2) * cz + p.at(1, 3);
        const double s = p.at(2, 0) * cx + p.at(2, 1) * cy + p.at(2, 2) * cz + p.at(2, 3);
        if (!(s > 0)) {
            if (stats) ++stats->behind_camera;
            continue;
        }
        const double u = su / s;
        const double v = sv / s;
        const int px = static_cast<int>(std::floor(u + 0.5));
        const int py = static_cast<int>(std::floor(v + 0.5));
        if (px < 0 || px >= width || py < 0 || py >= height) {
            if (stats) ++stats->outside_frame;
            continue;
        }
        const double disp = calib.baseline * calib.focal / s;
        if (disp >= d_max) {
            if (stats) ++stats->over_range;
            continue;
        }
        if (out.mask.at(py, px)) {
            if (stats) ++stats->collisions;
            if (disp <= out.values.at(py, px)) continue;
        }
        out.values.at(py, px) = disp;
        out.mask.at(py, px) = 1;
    }
    return out;
}

double density(const SparseDisparityMap& map) {
    if (map.mask.size() == 0) return 0.0;
    return static_cast<double>(map.valid_count()) / static_cast<double>(map.mask.size());
}

}  // namespace lsfusion
