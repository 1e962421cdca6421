#pragma once

#include <array>
#include <vector>

#include "lsfusion/types.hpp"

namespace lsfusion {

using GrayImage = Grid<double>;
using RgbImage = std::array<Grid<double>, 3>;

// BT.601 luma: 0.299 R + 0.587 G + 0.114 B.
GrayImage to_gray(const RgbImage& rgb);

struct GradientPair {
    Grid<double> du, dv;
};

// order 1: forward differences, last column/row zero-padded.
// order 2: second central differences, borders zero.
GradientPair spatial_gradients(const Grid<double>& img, int order);

// Per-pixel mean over channels of |du| + |dv| for the requested order; the
// color weight input of the smoothness term.
Grid<double> gradient_magnitude(const RgbImage& rgb, int order);

// RightToLeft samples the source at (u - d, v): reconstructs the left view
// from the right image. LeftToRight samples at (u + d, v).
enum class WarpDirection { RightToLeft, LeftToRight };

struct WarpedGray {
    Grid<double> image;   // 0 where invalid
    Grid<double> ddisp;   // d(warped)/d(disparity), 0 where invalid
    Grid<uint8_t> valid;  // bilinear footprint fully inside the source
};

struct WarpedRgb {
    RgbImage image;
    RgbImage ddisp;
    Grid<uint8_t> valid;
};

WarpedGray warp_by_disparity(const Grid<double>& source, const Grid<double>& disparity,
                             WarpDirection dir);
WarpedRgb warp_rgb_by_disparity(const RgbImage& source, const Grid<double>& disparity,
                                WarpDirection dir);

// Soft census: bounded ternary responses rho = t / sqrt(0.81 + t^2) for each
// center-minus-neighbor difference t in a w x w window (center excluded).
struct SoftCensusField {
    int window = 5;
    int offset_count = 24;
    int height = 0, width = 0;
    std::vector<double> resp;  // ((y * width) + x) * offset_count + k
    Grid<uint8_t> valid;       // border and unsampled pixels flagged invalid

    double response(int y, int x, int k) const {
        return resp[(static_cast<size_t>(y) * width + x) * offset_count + k];
    }
};

SoftCensusField soft_census(const GrayImage& img, int window = 5);
// Variant for warped inputs: a pixel is valid only if every sample in its
// window carries a valid warped value.
SoftCensusField soft_census_masked(const GrayImage& img, const Grid<uint8_t>& sample_valid,
                                   int window = 5);

struct CensusDistance {
    Grid<double> dist;    // mean over offsets of squared response difference, in [0, 4)
    Grid<uint8_t> valid;  // both inputs valid
};

// Throws std::invalid_argument on shape or window mismatch.
CensusDistance census_distance(const SoftCensusField& a, const SoftCensusField& b);

using OcclusionMask = Grid<uint8_t>;

// O(u,v) = 1 iff |d_left(u,v) - d_right(u - d_left(u,v), v)| < thresh with the
// bilinear sample in bounds; out-of-bounds pixels get 0.
OcclusionMask occlusion_mask(const Grid<double>& d_left, const Grid<double>& d_right,
                             double thresh = 1.0);
// Symmetric right-view mask, sampling d_left at (u + d_right(u,v), v).
OcclusionMask occlusion_mask_right(const Grid<double>& d_right, const Grid<double>& d_left,
                                   double thresh = 1.0);

}  // namespace lsfusion
