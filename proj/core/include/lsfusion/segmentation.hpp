#pragma once

#include <string>
#include <vector>

#include "lsfusion/image_ops.hpp"
#include "lsfusion/types.hpp"

namespace lsfusion {

struct SuperpixelSegmentation {
    Grid<int> labels;   // segment id per pixel, contiguous 0..segment_count-1
    int segment_count = 0;
    // Linear pixel indices (y * width + x) per segment, ascending.
    std::vector<std::vector<int>> segment_pixels;

    int width() const { return labels.width(); }
    int height() const { return labels.height(); }
};

// Keeps the mean segment area near 780 px.
int default_segment_target(int height, int width);

// SLIC clustering in (scaled opponent color, u, v) space with grid-seeded
// centers at spacing sqrt(HW/target), distance = color + (compactness /
// spacing) * spatial, and a connectivity pass that merges fragments smaller
// than spacing^2/4 into the neighbor sharing the longest boundary. Every
// returned segment is one 4-connected component. Throws on images smaller
// than 16x16 or target outside [1, H*W].
SuperpixelSegmentation slic_segment(const RgbImage& img, int target_segments,
                                    double compactness = 10.0, int iterations = 10);

// Debug export, labels as 16-bit grayscale.
void save_label_png(const std::string& path, const SuperpixelSegmentation& seg);

}  // namespace lsfusion
