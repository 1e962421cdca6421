#include <cmath>

#include "lsfusion/energy.hpp"

namespace lsfusion {

std::optional<PlaneCoeffs> plane_params(const std::vector<int>& pixel_indices, int width,
                                        const Grid<double>& disparity) {
    const size_t n = pixel_indices.size();
    if (n < 3) return std::nullopt;

    double mu = 0, mv = 0, md = 0;
    for (int p : pixel_indices) {
        mu += p % width;
        mv += p / width;
        md += disparity[static_cast<size_t>(p)];
    }
    mu /= n;
    mv /= n;
    md /= n;

    double suu = 0, svv = 0, suv = 0, sud = 0, svd = 0;
    for (int p : pixel_indices) {
        const double du = p % width - mu;
        const double dv = p / width - mv;
        const double dd = disparity[static_cast<size_t>(p)] - md;
        suu += du * du;
        svv += dv * dv;
        suv += du * dv;
        sud += du * dd;
        svd += dv * dd;
    }

    const double det = suu * svv - suv * suv;
    if (det <= 1e-10 * std::max(suu * svv, 1e-300)) return std::nullopt;

    PlaneCoeffs coeffs;
    coeffs.a = (svv * sud - suv * svd) / det;
    coeffs.b = (suu * svd - suv * sud) / det;
    coeffs.c = md - coeffs.a * mu - coeffs.b * mv;
    return coeffs;
}

TermResult plane_fit_loss(const Grid<double>& disparity, const SuperpixelSegmentation& seg,
                          bool root_norm, bool with_grad) {
    TermResult out;
    if (with_grad) out.grad = Grid<double>(disparity.height(), disparity.width(), 0.0);
    if (seg.segment_count == 0) return out;

    const int w = disparity.width();
    const double seg_count = static_cast<double>(seg.segment_count);
    double total = 0.0;

    std::vector<double> residuals;
    for (const std::vector<int>& pixels : seg.segment_pixels) {
        const auto coeffs = plane_params(pixels, w, disparity);
        if (!coeffs) continue;
        const double n = static_cast<double>(pixels.size());

        residuals.resize(pixels.size());
        double sq = 0.0;
        for (size_t i = 0; i < pixels.size(); ++i) {
            const int p = pixels[i];
            const double fitted = coeffs->a * (p % w) + coeffs->b * (p / w) + coeffs->c;
            residuals[i] = disparity[static_cast<size_t>(p)] - fitted;
            sq += residuals[i] * residuals[i];
        }

        if (root_norm) {
            const double norm = std::sqrt(sq);
            total += norm / n;
            if (with_grad && norm > 1e-150) {
                // The residual operator is a projector, so the chain through
                // the refit coefficients is already contained in r itself.
                const double scale = 1.0 / (norm * n * seg_count);
                for (size_t i = 0; i < pixels.size(); ++i)
                    out.grad[static_cast<size_t>(pixels[i])] += scale * residuals[i];
            }
        } else {
            total += sq / n;
            if (with_grad) {
                const double scale = 2.0 / (n * seg_count);
                for (size_t i = 0; i < pixels.size(); ++i)
                    out.grad[static_cast<size_t>(pixels[i])] += scale * residuals[i];
            }
        }
    }
    out.value = total / seg_count;
    return out;
}

}  // namespace lsfusion
