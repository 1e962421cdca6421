#include "lsfusion/energy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lsfusion {

namespace {

constexpr double kPhiEps2 = 0.001 * 0.001;
constexpr double kAbsEps = 1e-6;
constexpr double kCensusDamping = 0.81;

// Smoothed absolute value with sabs(0) = 0 exactly.
inline double sabs(double x) { return std::sqrt(x * x + kAbsEps * kAbsEps) - kAbsEps; }
inline double sabs_deriv(double x) { return x / std::sqrt(x * x + kAbsEps * kAbsEps); }

inline double census_deriv_from_diff(double t) {
    const double q = kCensusDamping + t * t;
    return kCensusDamping / (q * std::sqrt(q));
}

WarpedGray gray_from_rgb_warp(const WarpedRgb& w) {
    const int h = w.valid.height(), wd = w.valid.width();
    WarpedGray g{Grid<double>(h, wd, 0.0), Grid<double>(h, wd, 0.0), w.valid};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < wd; ++x) {
            g.image.at(y, x) = 0.299 * w.image[0].at(y, x) + 0.587 * w.image[1].at(y, x) +
                               0.114 * w.image[2].at(y, x);
            g.ddisp.at(y, x) = 0.299 * w.ddisp[0].at(y, x) + 0.587 * w.ddisp[1].at(y, x) +
                               0.114 * w.ddisp[2].at(y, x);
        }
    return g;
}

}  // namespace

void LossWeights::validate() const {
    if (mu1 < 0 || mu2 < 0 || mu3 < 0 || lambda1 < 0 || lambda2 < 0 || alpha1 < 0 || alpha2 < 0)
        throw std::invalid_argument("loss weights must be non-negative");
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
    if (census_window < 3 || census_window % 2 == 0)
        throw std::invalid_argument("census window must be odd and >= 3");
    if (!(occlusion_threshold > 0))
        throw std::invalid_argument("occlusion threshold must be positive");
}

double robust_phi(double s) { return std::sqrt(s * s + kPhiEps2); }
double robust_phi_deriv(double s) { return s / std::sqrt(s * s + kPhiEps2); }

TermResult photometric_loss(const RgbImage& target, const WarpedRgb& warped,
                            const Grid<uint8_t>& occlusion, bool with_grad) {
    const int h = target[0].height(), w = target[0].width();
    double num = 0.0;
    double denom = 0.0;
    for (int y = 0; y < h; ++y) {
        double row_num = 0.0;
        double row_den = 0.0;
        for (int x = 0; x < w; ++x) {
            if (!occlusion.at(y, x) || !warped.valid.at(y, x)) continue;
            double s = 0.0;
            for (int c = 0; c < 3; ++c)
                s += robust_phi(warped.image[c].at(y, x) - target[c].at(y, x));
            row_num += s / 3.0;
            row_den += 1.0;
        }
        num += row_num;
        denom += row_den;
    }

    TermResult out;
    if (denom == 0.0) {
        if (with_grad) out.grad = Grid<double>(h, w, 0.0);
        return out;
    }
    out.value = num / denom;
    if (with_grad) {
        out.grad = Grid<double>(h, w, 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!occlusion.at(y, x) || !warped.valid.at(y, x)) continue;
                double g = 0.0;
                for (int c = 0; c < 3; ++c)
                    g += robust_phi_deriv(warped.image[c].at(y, x) - target[c].at(y, x)) *
                         warped.ddisp[c].at(y, x);
                out.grad.at(y, x) = g / (3.0 * denom);
            }
    }
    return out;
}

TermResult census_loss(const SoftCensusField& target_census, const SoftCensusField& warped_census,
                       const WarpedGray& warped, const Grid<uint8_t>& occlusion, bool with_grad) {
    if (target_census.height != warped_census.height ||
        target_census.width != warped_census.width ||
        target_census.offset_count != warped_census.offset_count)
        throw std::invalid_argument("census_loss: field shape mismatch");
    const int h = target_census.height, w = target_census.width;
    const int kc = target_census.offset_count;
    const int window = target_census.window;
    const int half = window / 2;

    // Offset table in the census field's fixed order.
    std::vector<int> off_y, off_x;
    off_y.reserve(kc);
    off_x.reserve(kc);
    for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx) {
            if (dy == 0 && dx == 0) continue;
            off_y.push_back(dy);
            off_x.push_back(dx);
        }

    Grid<double> dist(h, w, 0.0);
    Grid<uint8_t> mask(h, w, 0);
    double num = 0.0;
    double denom = 0.0;
    for (int y = 0; y < h; ++y) {
        double row_num = 0.0;
        double row_den = 0.0;
        for (int x = 0; x < w; ++x) {
            if (!occlusion.at(y, x) || !target_census.valid.at(y, x) ||
                !warped_census.valid.at(y, x))
                continue;
            const double* rt =
                target_census.resp.data() + (static_cast<size_t>(y) * w + x) * kc;
            const double* rw =
                warped_census.resp.data() + (static_cast<size_t>(y) * w + x) * kc;
            double sum = 0.0;
            for (int k = 0; k < kc; ++k) {
                const double d = rw[k] - rt[k];
                sum += d * d;
            }
            dist.at(y, x) = sum / kc;
            mask.at(y, x) = 1;
            row_num += robust_phi(sum / kc);
            row_den += 1.0;
        }
        num += row_num;
        denom += row_den;
    }

    TermResult out;
    if (denom == 0.0) {
        if (with_grad) out.grad = Grid<double>(h, w, 0.0);
        return out;
    }
    out.value = num / denom;

    if (with_grad) {
        // First the loss derivative with respect to the warped image, then
        // chain through the sampling derivative.
        Grid<double> dldi(h, w, 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!mask.at(y, x)) continue;
                const double wp = robust_phi_deriv(dist.at(y, x)) / denom;
                const double* rt =
                    target_census.resp.data() + (static_cast<size_t>(y) * w + x) * kc;
                const double* rw =
                    warped_census.resp.data() + (static_cast<size_t>(y) * w + x) * kc;
                const double center = warped.image.at(y, x);
                for (int k = 0; k < kc; ++k) {
                    const double t = center - warped.image.at(y + off_y[k], x + off_x[k]);
                    const double g =
                        wp * (2.0 / kc) * (rw[k] - rt[k]) * census_deriv_from_diff(t);
                    dldi.at(y, x) += g;
                    dldi.at(y + off_y[k], x + off_x[k]) -= g;
                }
            }
        out.grad = Grid<double>(h, w, 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.grad.at(y, x) = dldi.at(y, x) * warped.ddisp.at(y, x);
    }
    return out;
}

TermResult gradient_loss(const RgbImage& target, const WarpedRgb& warped,
                         const Grid<uint8_t>& occlusion, bool with_grad) {
    const int h = target[0].height(), w = target[0].width();

    // A pixel participates when its own warp sample and the forward-difference
    // neighbors it uses are valid; the padded last row/column only needs the
    // pixel itself.
    Grid<uint8_t> mask(h, w, 0);
    double denom = 0.0;
    for (int y = 0; y < h; ++y) {
        double row_den = 0.0;
        for (int x = 0; x < w; ++x) {
            if (!occlusion.at(y, x) || !warped.valid.at(y, x)) continue;
            if (x + 1 < w && !warped.valid.at(y, x + 1)) continue;
            if (y + 1 < h && !warped.valid.at(y + 1, x)) continue;
            mask.at(y, x) = 1;
            row_den += 1.0;
        }
        denom += row_den;
    }

    TermResult out;
    if (denom == 0.0) {
        if (with_grad) out.grad = Grid<double>(h, w, 0.0);
        return out;
    }

    auto fwd_u = [w](const Grid<double>& img, int y, int x) {
        return x + 1 < w ? img.at(y, x + 1) - img.at(y, x) : 0.0;
    };
    auto fwd_v = [h](const Grid<double>& img, int y, int x) {
        return y + 1 < h ? img.at(y + 1, x) - img.at(y, x) : 0.0;
    };

    double num = 0.0;
    for (int y = 0; y < h; ++y) {
        double row_num = 0.0;
        for (int x = 0; x < w; ++x) {
            if (!mask.at(y, x)) continue;
            double s = 0.0;
            for (int c = 0; c < 3; ++c) {
                s += robust_phi(fwd_u(warped.image[c], y, x) - fwd_u(target[c], y, x));
                s += robust_phi(fwd_v(warped.image[c], y, x) - fwd_v(target[c], y, x));
            }
            row_num += s / 6.0;
        }
        num += row_num;
    }
    out.value = num / denom;

    if (with_grad) {
        out.grad = Grid<double>(h, w, 0.0);
        std::array<Grid<double>, 3> dldi{Grid<double>(h, w, 0.0), Grid<double>(h, w, 0.0),
                                         Grid<double>(h, w, 0.0)};
        const double scale = 1.0 / (6.0 * denom);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!mask.at(y, x)) continue;
                for (int c = 0; c < 3; ++c) {
                    if (x + 1 < w) {
                        const double coeff =
                            scale *
                            robust_phi_deriv(fwd_u(warped.image[c], y, x) - fwd_u(target[c], y, x));
                        dldi[c].at(y, x + 1) += coeff;
                        dldi[c].at(y, x) -= coeff;
                    }
                    if (y + 1 < h) {
                        const double coeff =
                            scale *
                            robust_phi_deriv(fwd_v(warped.image[c], y, x) - fwd_v(target[c], y, x));
                        dldi[c].at(y + 1, x) += coeff;
                        dldi[c].at(y, x) -= coeff;
                    }
                }
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double g = 0.0;
                for (int c = 0; c < 3; ++c) g += dldi[c].at(y, x) * warped.ddisp[c].at(y, x);
                out.grad.at(y, x) = g;
            }
    }
    return out;
}

TermResult lidar_loss(const Grid<double>& disparity, const SparseDisparityMap& lidar,
                      const Grid<uint8_t>& keep_mask, double epsilon, bool with_grad) {
    const int h = disparity.height(), w = disparity.width();
    double num = 0.0;
    double count = 0.0;
    for (int y = 0; y < h; ++y) {
        double row_num = 0.0;
        double row_count = 0.0;
        for (int x = 0; x < w; ++x) {
            if (!keep_mask.at(y, x) || !lidar.mask.at(y, x)) continue;
            const double r = disparity.at(y, x) - lidar.values.at(y, x);
            row_num += std::abs(r) < epsilon ? 0.5 * r * r : 0.5 * epsilon * epsilon;
            row_count += 1.0;
        }
        num += row_num;
        count += row_count;
    }

    TermResult out;
    if (count == 0.0) {
        if (with_grad) out.grad = Grid<double>(h, w, 0.0);
        return out;
    }
    out.value = num / count;
    if (with_grad) {
        out.grad = Grid<double>(h, w, 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!keep_mask.at(y, x) || !lidar.mask.at(y, x)) continue;
                const double r = disparity.at(y, x) - lidar.values.at(y, x);
                if (std::abs(r) < epsilon) out.grad.at(y, x) = r / count;
            }
    }
    return out;
}

TermResult smoothness_loss(const Grid<double>& disparity, const RgbImage& image, double alpha1,
                           double alpha2, bool with_grad) {
    const int h = disparity.height(), w = disparity.width();
    const Grid<double> mag1 = gradient_magnitude(image, 1);
    const Grid<double> mag2 = gradient_magnitude(image, 2);
    Grid<double> w1(h, w), w2(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            w1.at(y, x) = std::exp(-alpha1 * mag1.at(y, x));
            w2.at(y, x) = std::exp(-alpha2 * mag2.at(y, x));
        }
    return smoothness_loss_weighted(disparity, w1, w2, with_grad);
}

TermResult smoothness_loss_weighted(const Grid<double>& disparity, const Grid<double>& weight1,
                                    const Grid<double>& weight2, bool with_grad) {
    const int h = disparity.height(), w = disparity.width();
    const double n = static_cast<double>(h) * w;

    TermResult out;
    double total = 0.0;
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            double first = 0.0;
            if (x + 1 < w) first += sabs(disparity.at(y, x + 1) - disparity.at(y, x));
            if (y + 1 < h) first += sabs(disparity.at(y + 1, x) - disparity.at(y, x));
            double second = 0.0;
            if (x >= 1 && x + 1 < w)
                second += sabs(disparity.at(y, x + 1) - 2.0 * disparity.at(y, x) +
                               disparity.at(y, x - 1));
            if (y >= 1 && y + 1 < h)
                second += sabs(disparity.at(y + 1, x) - 2.0 * disparity.at(y, x) +
                               disparity.at(y - 1, x));
            row += weight1.at(y, x) * first + weight2.at(y, x) * second;
        }
        total += row;
    }
    out.value = total / n;

    if (with_grad) {
        out.grad = Grid<double>(h, w, 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (x + 1 < w) {
                    const double a = weight1.at(y, x) / n *
                                     sabs_deriv(disparity.at(y, x + 1) - disparity.at(y, x));
                    out.grad.at(y, x + 1) += a;
                    out.grad.at(y, x) -= a;
                }
                if (y + 1 < h) {
                    const double a = weight1.at(y, x) / n *
                                     sabs_deriv(disparity.at(y + 1, x) - disparity.at(y, x));
                    out.grad.at(y + 1, x) += a;
                    out.grad.at(y, x) -= a;
                }
                if (x >= 1 && x + 1 < w) {
                    const double b = weight2.at(y, x) / n *
                                     sabs_deriv(disparity.at(y, x + 1) - 2.0 * disparity.at(y, x) +
                                                disparity.at(y, x - 1));
                    out.grad.at(y, x - 1) += b;
                    out.grad.at(y, x) -= 2.0 * b;
                    out.grad.at(y, x + 1) += b;
                }
                if (y >= 1 && y + 1 < h) {
                    const double b = weight2.at(y, x) / n *
                                     sabs_deriv(disparity.at(y + 1, x) - 2.0 * disparity.at(y, x) +
                                                disparity.at(y - 1, x));
                    out.grad.at(y - 1, x) += b;
                    out.grad.at(y, x) -= 2.0 * b;
                    out.grad.at(y + 1, x) += b;
                }
            }
    }
    return out;
}

bool EnergyBreakdown::finite() const {
    return std::isfinite(L_i) && std::isfinite(L_c) && std::isfinite(L_g) && std::isfinite(L_w) &&
           std::isfinite(L_l) && std::isfinite(L_s) && std::isfinite(L_p) && std::isfinite(total);
}

std::string EnergyBreakdown::to_kv() const {
    std::ostringstream ss;
    ss.precision(12);
    ss << "total=" << total << " L_i=" << L_i << " L_c=" << L_c << " L_g=" << L_g
       << " L_w=" << L_w << " L_l=" << L_l << " L_s=" << L_s << " L_p=" << L_p;
    return ss.str();
}

EnergyContext::EnergyContext(ImagePair pair, SparseDisparityMap lidar_left,
                             SparseDisparityMap lidar_right, SuperpixelSegmentation seg_left,
                             SuperpixelSegmentation seg_right, LossWeights weights)
    : pair_(std::move(pair)),
      lidar_left_(std::move(lidar_left)),
      lidar_right_(std::move(lidar_right)),
      seg_left_(std::move(seg_left)),
      seg_right_(std::move(seg_right)),
      weights_(weights) {
    weights_.validate();
    gray_left_ = to_gray(pair_.left);
    gray_right_ = to_gray(pair_.right);
    census_left_ = soft_census(gray_left_, weights_.census_window);
    census_right_ = soft_census(gray_right_, weights_.census_window);

    const int h = pair_.height(), w = pair_.width();
    auto weights_for = [&](const RgbImage& img, Grid<double>& w1, Grid<double>& w2) {
        const Grid<double> mag1 = gradient_magnitude(img, 1);
        const Grid<double> mag2 = gradient_magnitude(img, 2);
        w1 = Grid<double>(h, w);
        w2 = Grid<double>(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                w1.at(y, x) = std::exp(-weights_.alpha1 * mag1.at(y, x));
                w2.at(y, x) = std::exp(-weights_.alpha2 * mag2.at(y, x));
            }
    };
    weights_for(pair_.left, weight1_left_, weight2_left_);
    weights_for(pair_.right, weight1_right_, weight2_right_);
}

std::pair<OcclusionMask, OcclusionMask> EnergyContext::occlusion(const Grid<double>& d_left,
                                                                 const Grid<double>& d_right) const {
    return {occlusion_mask(d_left, d_right, weights_.occlusion_threshold),
            occlusion_mask_right(d_right, d_left, weights_.occlusion_threshold)};
}

WarpingSideResult EnergyContext::warping_side(Side side, const Grid<double>& disparity,
                                              const OcclusionMask& occlusion,
                                              bool with_grad) const {
    const RgbImage& target = side == Side::Left ? pair_.left : pair_.right;
    const RgbImage& source = side == Side::Left ? pair_.right : pair_.left;
    const SoftCensusField& target_census = side == Side::Left ? census_left_ : census_right_;
    const WarpDirection dir =
        side == Side::Left ? WarpDirection::RightToLeft : WarpDirection::LeftToRight;

    const WarpedRgb warped = warp_rgb_by_disparity(source, disparity, dir);

    WarpingSideResult out;
    const int h = disparity.height(), w = disparity.width();
    if (with_grad) out.grad = Grid<double>(h, w, 0.0);

    const LossWeights& lw = weights_;
    if (lw.enable_photometric) {
        TermResult t = photometric_loss(target, warped, occlusion, with_grad);
        out.L_i = t.value;
        if (with_grad)
            for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += t.grad[i];
    }
    if (lw.enable_census) {
        const WarpedGray warped_gray = gray_from_rgb_warp(warped);
        const SoftCensusField warped_census =
            soft_census_masked(warped_gray.image, warped_gray.valid, lw.census_window);
        TermResult t = census_loss(target_census, warped_census, warped_gray, occlusion, with_grad);
        out.L_c = t.value;
        if (with_grad)
            for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += lw.lambda1 * t.grad[i];
    }
    if (lw.enable_gradient) {
        TermResult t = gradient_loss(target, warped, occlusion, with_grad);
        out.L_g = t.value;
        if (with_grad)
            for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += lw.lambda2 * t.grad[i];
    }
    out.L_w = out.L_i + lw.lambda1 * out.L_c + lw.lambda2 * out.L_g;
    return out;
}

EnergyBreakdown EnergyContext::evaluate(const Grid<double>& d_left, const Grid<double>& d_right,
                                        const OcclusionMask& occ_left,
                                        const OcclusionMask& occ_right, bool with_grad) const {
    const int h = pair_.height(), w = pair_.width();
    EnergyBreakdown out;
    if (with_grad) {
        out.grad_left = Grid<double>(h, w, 0.0);
        out.grad_right = Grid<double>(h, w, 0.0);
    }
    const LossWeights& lw = weights_;

    auto add_scaled = [](Grid<double>& dst, const Grid<double>& src, double scale) {
        for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    };

    if (lw.enable_warping) {
        const WarpingSideResult left = warping_side(Side::Left, d_left, occ_left, with_grad);
        const WarpingSideResult right = warping_side(Side::Right, d_right, occ_right, with_grad);
        out.L_i = 0.5 * (left.L_i + right.L_i);
        out.L_c = 0.5 * (left.L_c + right.L_c);
        out.L_g = 0.5 * (left.L_g + right.L_g);
        out.L_w = 0.5 * (left.L_w + right.L_w);
        if (with_grad) {
            add_scaled(out.grad_left, left.grad, 0.5 * lw.mu1);
            add_scaled(out.grad_right, right.grad, 0.5 * lw.mu1);
        }
    }
    if (lw.enable_lidar) {
        TermResult l = lidar_loss(d_left, lidar_left_, lidar_left_.mask, lw.epsilon, with_grad);
        TermResult r = lidar_loss(d_right, lidar_right_, lidar_right_.mask, lw.epsilon, with_grad);
        out.L_l = 0.5 * (l.value + r.value);
        if (with_grad) {
            add_scaled(out.grad_left, l.grad, 0.5);
            add_scaled(out.grad_right, r.grad, 0.5);
        }
    }
    if (lw.enable_smoothness) {
        TermResult l = smoothness_loss_weighted(d_left, weight1_left_, weight2_left_, with_grad);
        TermResult r =
            smoothness_loss_weighted(d_right, weight1_right_, weight2_right_, with_grad);
        out.L_s = 0.5 * (l.value + r.value);
        if (with_grad) {
            add_scaled(out.grad_left, l.grad, 0.5 * lw.mu2);
            add_scaled(out.grad_right, r.grad, 0.5 * lw.mu2);
        }
    }
    if (lw.enable_plane) {
        TermResult l = plane_fit_loss(d_left, seg_left_, lw.plane_root_norm, with_grad);
        TermResult r = plane_fit_loss(d_right, seg_right_, lw.plane_root_norm, with_grad);
        out.L_p = 0.5 * (l.value + r.value);
        if (with_grad) {
            add_scaled(out.grad_left, l.grad, 0.5 * lw.mu3);
            add_scaled(out.grad_right, r.grad, 0.5 * lw.mu3);
        }
    }
    out.total = out.L_l + lw.mu1 * out.L_w + lw.mu2 * out.L_s + lw.mu3 * out.L_p;
    return out;
}

WarpingLossResult warping_loss(const ImagePair& pair, const DenseDisparityField& d_left,
                               const DenseDisparityField& d_right, const LossWeights& weights,
                               bool with_grad) {
    const int h = pair.height(), w = pair.width();
    LossWeights only_warp = weights;
    only_warp.enable_warping = true;
    only_warp.enable_lidar = only_warp.enable_smoothness = only_warp.enable_plane = false;
    only_warp.mu1 = 1.0;  // gradients of L_w itself, not of mu1 L_w

    EnergyContext ctx(pair, SparseDisparityMap(h, w), SparseDisparityMap(h, w),
                      SuperpixelSegmentation{}, SuperpixelSegmentation{}, only_warp);
    const auto [occ_l, occ_r] = ctx.occlusion(d_left.values, d_right.values);
    EnergyBreakdown b = ctx.evaluate(d_left.values, d_right.values, occ_l, occ_r, with_grad);

    WarpingLossResult out;
    out.L_i = b.L_i;
    out.L_c = b.L_c;
    out.L_g = b.L_g;
    out.L_w = b.L_w;
    if (with_grad) {
        out.grad_left = std::move(b.grad_left);
        out.grad_right = std::move(b.grad_right);
    }
    return out;
}

EnergyBreakdown total_energy(const ImagePair& pair, const DenseDisparityField& d_left,
                             const DenseDisparityField& d_right,
                             const SparseDisparityMap& lidar_left,
                             const SparseDisparityMap& lidar_right,
                             const SuperpixelSegmentation& seg_left,
                             const SuperpixelSegmentation& seg_right, const LossWeights& weights,
                             bool with_grad) {
    EnergyContext ctx(pair, lidar_left, lidar_right, seg_left, seg_right, weights);
    const auto [occ_l, occ_r] = ctx.occlusion(d_left.values, d_right.values);
    return ctx.evaluate(d_left.values, d_right.values, occ_l, occ_r, with_grad);
}

}  // namespace lsfusion
