#include "lsfusion/image_ops.hpp"

#include <cmath>
#include <stdexcept>

namespace lsfusion {

GrayImage to_gray(const RgbImage& rgb) {
    const int h = rgb[0].height(), w = rgb[0].width();
    GrayImage out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(y, x) = 0.299 * rgb[0].at(y, x) + 0.587 * rgb[1].at(y, x) + 0.114 * rgb[2].at(y, x);
    return out;
}

GradientPair spatial_gradients(const Grid<double>& img, int order) {
    const int h = img.height(), w = img.width();
    GradientPair g{Grid<double>(h, w, 0.0), Grid<double>(h, w, 0.0)};
    if (order == 1) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (x + 1 < w) g.du.at(y, x) = img.at(y, x + 1) - img.at(y, x);
                if (y + 1 < h) g.dv.at(y, x) = img.at(y + 1, x) - img.at(y, x);
            }
    } else if (order == 2) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (x >= 1 && x + 1 < w)
                    g.du.at(y, x) = img.at(y, x + 1) - 2.0 * img.at(y, x) + img.at(y, x - 1);
                if (y >= 1 && y + 1 < h)
                    g.dv.at(y, x) = img.at(y + 1, x) - 2.0 * img.at(y, x) + img.at(y - 1, x);
            }
    } else {
        throw std::invalid_argument("spatial_gradients: order must be 1 or 2");
    }
    return g;
}

Grid<double> gradient_magnitude(const RgbImage& rgb, int order) {
    const int h = rgb[0].height(), w = rgb[0].width();
    Grid<double> out(h, w, 0.0);
    for (const Grid<double>& channel : rgb) {
        GradientPair g = spatial_gradients(channel, order);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(y, x) += std::abs(g.du.at(y, x)) + std::abs(g.dv.at(y, x));
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(y, x) /= 3.0;
    return out;
}

WarpedGray warp_by_disparity(const Grid<double>& source, const Grid<double>& disparity,
                             WarpDirection dir) {
    if (!source.same_shape(disparity))
        throw std::invalid_argument("warp_by_disparity: shape mismatch");
    const int h = source.height(), w = source.width();
    WarpedGray out{Grid<double>(h, w, 0.0), Grid<double>(h, w, 0.0), Grid<uint8_t>(h, w, 0)};
    const double sign = dir == WarpDirection::RightToLeft ? -1.0 : 1.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double xs = x + sign * disparity.at(y, x);
            if (!(xs >= 0.0 && xs <= w - 1)) continue;
            int x0 = static_cast<int>(std::floor(xs));
            if (x0 > w - 2) x0 = w - 2;
            const double a = xs - x0;
            const double v0 = source.at(y, x0), v1 = source.at(y, x0 + 1);
            out.image.at(y, x) = (1.0 - a) * v0 + a * v1;
            out.ddisp.at(y, x) = sign * (v1 - v0);
            out.valid.at(y, x) = 1;
        }
    return out;
}

WarpedRgb warp_rgb_by_disparity(const RgbImage& source, const Grid<double>& disparity,
                                WarpDirection dir) {
    const int h = source[0].height(), w = source[0].width();
    if (h != disparity.height() || w != disparity.width())
        throw std::invalid_argument("warp_rgb_by_disparity: shape mismatch");
    WarpedRgb out;
    out.valid = Grid<uint8_t>(h, w, 0);
    for (int c = 0; c < 3; ++c) {
        out.image[c] = Grid<double>(h, w, 0.0);
        out.ddisp[c] = Grid<double>(h, w, 0.0);
    }
    const double sign = dir == WarpDirection::RightToLeft ? -1.0 : 1.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double xs = x + sign * disparity.at(y, x);
            if (!(xs >= 0.0 && xs <= w - 1)) continue;
            int x0 = static_cast<int>(std::floor(xs));
            if (x0 > w - 2) x0 = w - 2;
            const double a = xs - x0;
            for (int c = 0; c < 3; ++c) {
                const double v0 = source[c].at(y, x0), v1 = source[c].at(y, x0 + 1);
                out.image[c].at(y, x) = (1.0 - a) * v0 + a * v1;
                out.ddisp[c].at(y, x) = sign * (v1 - v0);
            }
            out.valid.at(y, x) = 1;
        }
    return out;
}

namespace {

constexpr double kCensusDamping = 0.81;

inline double census_response(double diff) {
    return diff / std::sqrt(kCensusDamping + diff * diff);
}

SoftCensusField census_impl(const GrayImage& img, const Grid<uint8_t>* sample_valid, int window) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("soft_census: window must be odd and >= 3");
    const int h = img.height(), w = img.width();
    const int half = window / 2;
    const int k_count = window * window - 1;

    SoftCensusField field;
    field.window = window;
    field.offset_count = k_count;
    field.height = h;
    field.width = w;
    field.resp.assign(static_cast<size_t>(h) * w * k_count, 0.0);
    field.valid = Grid<uint8_t>(h, w, 0);

    for (int y = half; y < h - half; ++y) {
        for (int x = half; x < w - half; ++x) {
            bool ok = true;
            if (sample_valid) {
                for (int dy = -half; dy <= half && ok; ++dy)
                    for (int dx = -half; dx <= half; ++dx)
                        if (!sample_valid->at(y + dy, x + dx)) {
                            ok = false;
                            break;
                        }
            }
            if (!ok) continue;
            const double center = img.at(y, x);
            double* r = field.resp.data() + (static_cast<size_t>(y) * w + x) * k_count;
            int k = 0;
            for (int dy = -half; dy <= half; ++dy)
                for (int dx = -half; dx <= half; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    r[k++] = census_response(center - img.at(y + dy, x + dx));
                }
            field.valid.at(y, x) = 1;
        }
    }
    return field;
}

}  // namespace

SoftCensusField soft_census(const GrayImage& img, int window) {
    return census_impl(img, nullptr, window);
}

SoftCensusField soft_census_masked(const GrayImage& img, const Grid<uint8_t>& sample_valid,
                                   int window) {
    if (!img.same_shape(sample_valid))
        throw std::invalid_argument("soft_census_masked: shape mismatch");
    return census_impl(img, &sample_valid, window);
}

CensusDistance census_distance(const SoftCensusField& a, const SoftCensusField& b) {
    if (a.height != b.height || a.width != b.width || a.offset_count != b.offset_count)
        throw std::invalid_argument("census_distance: field shape mismatch");
    const int h = a.height, w = a.width, kc = a.offset_count;
    CensusDistance out{Grid<double>(h, w, 0.0), Grid<uint8_t>(h, w, 0)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!a.valid.at(y, x) || !b.valid.at(y, x)) continue;
            const double* ra = a.resp.data() + (static_cast<size_t>(y) * w + x) * kc;
            const double* rb = b.resp.data() + (static_cast<size_t>(y) * w + x) * kc;
            double sum = 0;
            for (int k = 0; k < kc; ++k) {
                const double d = ra[k] - rb[k];
                sum += d * d;
            }
            out.dist.at(y, x) = sum / kc;
            out.valid.at(y, x) = 1;
        }
    return out;
}

namespace {

OcclusionMask consistency_mask(const Grid<double>& d_this, const Grid<double>& d_other,
                               double thresh, double sign) {
    if (!d_this.same_shape(d_other))
        throw std::invalid_argument("occlusion_mask: shape mismatch");
    const int h = d_this.height(), w = d_this.width();
    OcclusionMask out(h, w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double xs = x + sign * d_this.at(y, x);
            if (!(xs >= 0.0 && xs <= w - 1)) continue;
            int x0 = static_cast<int>(std::floor(xs));
            if (x0 > w - 2) x0 = w - 2;
            const double a = xs - x0;
            const double sample = (1.0 - a) * d_other.at(y, x0) + a * d_other.at(y, x0 + 1);
            if (std::abs(d_this.at(y, x) - sample) < thresh) out.at(y, x) = 1;
        }
    return out;
}

}  // namespace

OcclusionMask occlusion_mask(const Grid<double>& d_left, const Grid<double>& d_right,
                             double thresh) {
    return consistency_mask(d_left, d_right, thresh, -1.0);
}

OcclusionMask occlusion_mask_right(const Grid<double>& d_right, const Grid<double>& d_left,
                                   double thresh) {
    return consistency_mask(d_right, d_left, thresh, 1.0);
}

}  // namespace lsfusion
