#pragma once

#include <string>

#include "lsfusion/image_ops.hpp"
#include "lsfusion/types.hpp"

namespace lsfusion {

// Velodyne binary scan: consecutive little-endian float32 quadruples
// (x, y, z, reflectance). Throws DataError when the byte length is not a
// multiple of 16 or the file cannot be read.
RawScan load_velodyne_scan(const std::string& path);
void save_velodyne_scan(const std::string& path, const RawScan& scan);

// 16-bit grayscale PNG, disparity = raw / 256, raw 0 marks invalid.
SparseDisparityMap load_disparity_png(const std::string& path);
// Valid pixels are written as max(1, round(256 * d)) so the validity mask
// survives a round trip; values clamp at the 16-bit ceiling.
void save_disparity_png(const std::string& path, const SparseDisparityMap& map);

// Labeled whitespace-separated matrices, one per line: "P_l:" and "P_r:"
// (12 values, row-major 3x4; aliases P2/P0 and P3/P1 accepted), "Tr:" (12
// values, Lidar-to-camera; aliases T/Tr_velo_to_cam), optional "K_l:"/"K_r:"
// (9 values, derived from the projections when absent). The baseline comes
// from (P_l(0,3) - P_r(0,3)) / f with f = P_l(0,0).
CalibrationSet load_calibration(const std::string& path);
void save_calibration(const std::string& path, const CalibrationSet& calib);

// 8-bit RGB PNG <-> planar [0,1] channels.
RgbImage load_rgb_image(const std::string& path);
void save_rgb_image(const std::string& path, const RgbImage& image);

// Seeded piecewise-planar scene with controlled Lidar corruption. The same
// spec and seed always produce a bit-identical bundle.
SceneBundle generate_synthetic_scene(const SynthSpec& spec);

// Scene directory layout: left.png, right.png, calib.txt, and either
// lidar_l.png/lidar_r.png or scan.bin; optional gt.png, corrupt_l.png,
// corrupt_r.png, and meta.txt (key-value SynthSpec + seed).
SceneBundle load_scene(const std::string& dir, double d_max = kDefaultMaxDisparity);
void save_scene(const std::string& dir, const SceneBundle& scene);

}  // namespace lsfusion
