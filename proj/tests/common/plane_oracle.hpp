#pragma once

// Brute-force plane-fit loss through the explicit projector
// H = P (P^T P)^{-1} P^T on raw homogeneous coordinates. Independent of the
// production path, which solves centered normal equations per segment.

#include <array>
#include <cmath>
#include <vector>

#include "lsfusion/segmentation.hpp"
#include "lsfusion/types.hpp"

namespace lsfusion::test::oracle {

struct PlaneLossResult {
    double value = 0.0;
    Grid<double> grad;
};

// Gauss-Jordan inverse with partial pivoting; returns false when singular.
inline bool invert3(const std::array<double, 9>& m, std::array<double, 9>& inv) {
    std::array<double, 18> a{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a[6 * r + c] = m[3 * r + c];
        a[6 * r + 3 + r] = 1.0;
    }
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[6 * r + col]) > std::abs(a[6 * pivot + col])) pivot = r;
        if (std::abs(a[6 * pivot + col]) < 1e-12) return false;
        if (pivot != col)
            for (int c = 0; c < 6; ++c) std::swap(a[6 * pivot + c], a[6 * col + c]);
        const double p = a[6 * col + col];
        for (int c = 0; c < 6; ++c) a[6 * col + c] /= p;
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = a[6 * r + col];
            for (int c = 0; c < 6; ++c) a[6 * r + c] -= f * a[6 * col + c];
        }
    }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) inv[3 * r + c] = a[6 * r + 3 + c];
    return true;
}

inline PlaneLossResult plane_fit_loss_bruteforce(const Grid<double>& disparity,
                                                 const SuperpixelSegmentation& seg,
                                                 bool root_norm) {
    PlaneLossResult out;
    out.grad = Grid<double>(disparity.height(), disparity.width(), 0.0);
    if (seg.segment_count == 0) return out;
    const int w = disparity.width();
    const double seg_count = static_cast<double>(seg.segment_count);

    for (const std::vector<int>& pixels : seg.segment_pixels) {
        const size_t n = pixels.size();
        if (n < 3) continue;

        // P is n x 3 with rows (u, v, 1).
        std::array<double, 9> ptp{};
        for (int p : pixels) {
            const double row[3] = {static_cast<double>(p % w), static_cast<double>(p / w), 1.0};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) ptp[3 * i + j] += row[i] * row[j];
        }
        std::array<double, 9> inv{};
        if (!invert3(ptp, inv)) continue;

        // Guard against numerically singular but invertible scatter (collinear
        // segments): check P^T P * inv against identity.
        double id_err = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += ptp[3 * i + k] * inv[3 * k + j];
                id_err = std::max(id_err, std::abs(s - (i == j ? 1.0 : 0.0)));
            }
        if (id_err > 1e-6) continue;

        // H d = P (P^T P)^{-1} (P^T d).
        double ptd[3] = {0, 0, 0};
        for (int p : pixels) {
            const double d = disparity[static_cast<size_t>(p)];
            ptd[0] += (p % w) * d;
            ptd[1] += (p / w) * d;
            ptd[2] += d;
        }
        double coeff[3];
        for (int i = 0; i < 3; ++i)
            coeff[i] = inv[3 * i + 0] * ptd[0] + inv[3 * i + 1] * ptd[1] + inv[3 * i + 2] * ptd[2];

        double sq = 0.0;
        std::vector<double> residuals(n);
        for (size_t i = 0; i < n; ++i) {
            const int p = pixels[i];
            const double fitted = coeff[0] * (p % w) + coeff[1] * (p / w) + coeff[2];
            residuals[i] = disparity[static_cast<size_t>(p)] - fitted;
            sq += residuals[i] * residuals[i];
        }

        const double nn = static_cast<double>(n);
        if (root_norm) {
            const double norm = std::sqrt(sq);
            out.value += norm / nn;
            if (norm > 1e-150)
                for (size_t i = 0; i < n; ++i)
                    out.grad[static_cast<size_t>(pixels[i])] +=
                        residuals[i] / (norm * nn * seg_count);
        } else {
            out.value += sq / nn;
            for (size_t i = 0; i < n; ++i)
                out.grad[static_cast<size_t>(pixels[i])] +=
                    2.0 * residuals[i] / (nn * seg_count);
        }
    }
    out.value /= seg_count;
    return out;
}

}  // namespace lsfusion::test::oracle
