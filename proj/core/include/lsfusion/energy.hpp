#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsfusion/image_ops.hpp"
#include "lsfusion/segmentation.hpp"
#include "lsfusion/types.hpp"

namespace lsfusion {

struct LossWeights {
    // Total composition: L = L_l + mu1 L_w + mu2 L_s + mu3 L_p.
    double mu1 = 1.0, mu2 = 0.001, mu3 = 0.01;
    // Warping composition: L_w = L_i + lambda1 L_c + lambda2 L_g.
    double lambda1 = 0.1, lambda2 = 1.0;
    // Smoothness color weights.
    double alpha1 = 0.5, alpha2 = 0.5;
    // Truncation point of the Lidar penalty, px.
    double epsilon = 3.0;

    bool enable_warping = true;
    bool enable_photometric = true;
    bool enable_census = true;
    bool enable_gradient = true;
    bool enable_lidar = true;
    bool enable_smoothness = true;
    bool enable_plane = true;

    // Alternate reading of the plane-fit norm: per-segment root instead of
    // mean squared residual.
    bool plane_root_norm = false;

    int census_window = 5;
    double occlusion_threshold = 1.0;  // px

    void validate() const;  // throws std::invalid_argument on violations
};

// Shared robust kernel phi(s) = sqrt(s^2 + 0.001^2).
double robust_phi(double s);
double robust_phi_deriv(double s);

struct TermResult {
    double value = 0.0;
    Grid<double> grad;  // empty when gradients were not requested
};

// Single-side warping sub-terms. `target` is the observed image of the view
// being reconstructed; `warped` is the other image resampled by the current
// disparity. Gradients chain through the warp sampling derivative.
TermResult photometric_loss(const RgbImage& target, const WarpedRgb& warped,
                            const Grid<uint8_t>& occlusion, bool with_grad = true);

TermResult census_loss(const SoftCensusField& target_census, const SoftCensusField& warped_census,
                       const WarpedGray& warped, const Grid<uint8_t>& occlusion,
                       bool with_grad = true);

TermResult gradient_loss(const RgbImage& target, const WarpedRgb& warped,
                         const Grid<uint8_t>& occlusion, bool with_grad = true);

// Truncated-l2 penalty against cleaned Lidar points: mean over keep-masked
// points of 0.5 x^2 for |x| < epsilon, else the constant 0.5 epsilon^2.
TermResult lidar_loss(const Grid<double>& disparity, const SparseDisparityMap& lidar,
                      const Grid<uint8_t>& keep_mask, double epsilon, bool with_grad = true);

// Color-weighted first/second order smoothness, normalized by pixel count.
TermResult smoothness_loss(const Grid<double>& disparity, const RgbImage& image, double alpha1,
                           double alpha2, bool with_grad = true);
// Same with precomputed weights exp(-alpha1 |grad I|) and exp(-alpha2 |grad2 I|).
TermResult smoothness_loss_weighted(const Grid<double>& disparity, const Grid<double>& weight1,
                                    const Grid<double>& weight2, bool with_grad = true);

struct PlaneCoeffs {
    double a = 0, b = 0, c = 0;  // d(u, v) = a u + b v + c
};

// Least-squares plane over a segment's pixels, solved on centered coordinates.
// Returns nullopt for rank-deficient segments (fewer than 3 pixels or
// collinear coordinates).
std::optional<PlaneCoeffs> plane_params(const std::vector<int>& pixel_indices, int width,
                                        const Grid<double>& disparity);

// Per segment mean squared residual against its own best-fit plane, averaged
// over segments; degenerate segments contribute zero.
TermResult plane_fit_loss(const Grid<double>& disparity, const SuperpixelSegmentation& seg,
                          bool root_norm = false, bool with_grad = true);

struct EnergyBreakdown {
    double L_i = 0, L_c = 0, L_g = 0, L_w = 0;
    double L_l = 0, L_s = 0, L_p = 0;
    double total = 0;
    Grid<double> grad_left, grad_right;  // d(total)/d(field), empty without gradients

    bool finite() const;
    std::string to_kv() const;  // "total=... L_i=... ..." single line
};

// One side of the warping loss: L_i + lambda1 L_c + lambda2 L_g with masks and
// sub-term toggles applied. Exposed for the solver and tests.
struct WarpingSideResult {
    double L_i = 0, L_c = 0, L_g = 0, L_w = 0;
    Grid<double> grad;
};

// Precomputed per-resolution data so repeated evaluations only pay for the
// disparity-dependent work. Occlusion masks are passed per call: their
// refresh cadence belongs to the solver.
class EnergyContext {
public:
    EnergyContext(ImagePair pair, SparseDisparityMap lidar_left, SparseDisparityMap lidar_right,
                  SuperpixelSegmentation seg_left, SuperpixelSegmentation seg_right,
                  LossWeights weights);

    EnergyBreakdown evaluate(const Grid<double>& d_left, const Grid<double>& d_right,
                             const OcclusionMask& occ_left, const OcclusionMask& occ_right,
                             bool with_grad) const;

    // Occlusion masks from the current fields using the configured threshold.
    std::pair<OcclusionMask, OcclusionMask> occlusion(const Grid<double>& d_left,
                                                      const Grid<double>& d_right) const;

    const ImagePair& pair() const { return pair_; }
    const LossWeights& weights() const { return weights_; }
    const SparseDisparityMap& lidar_left() const { return lidar_left_; }
    const SparseDisparityMap& lidar_right() const { return lidar_right_; }

private:
    WarpingSideResult warping_side(Side side, const Grid<double>& disparity,
                                   const OcclusionMask& occlusion, bool with_grad) const;

    ImagePair pair_;
    SparseDisparityMap lidar_left_, lidar_right_;
    SuperpixelSegmentation seg_left_, seg_right_;
    LossWeights weights_;

    GrayImage gray_left_, gray_right_;
    SoftCensusField census_left_, census_right_;
    Grid<double> weight1_left_, weight2_left_, weight1_right_, weight2_right_;
};

// Warping loss over both reconstructions, occlusion masks recomputed from the
// current fields. Returns the side-averaged composite and per-field gradients.
struct WarpingLossResult {
    double L_i = 0, L_c = 0, L_g = 0, L_w = 0;
    Grid<double> grad_left, grad_right;
};
WarpingLossResult warping_loss(const ImagePair& pair, const DenseDisparityField& d_left,
                               const DenseDisparityField& d_right, const LossWeights& weights,
                               bool with_grad = true);

// Full objective with occlusion masks recomputed from the current fields.
// Lidar maps must already be restricted to their keep masks.
EnergyBreakdown total_energy(const ImagePair& pair, const DenseDisparityField& d_left,
                             const DenseDisparityField& d_right,
                             const SparseDisparityMap& lidar_left,
                             const SparseDisparityMap& lidar_right,
                             const SuperpixelSegmentation& seg_left,
                             const SuperpixelSegmentation& seg_right, const LossWeights& weights,
                             bool with_grad = true);

}  // namespace lsfusion
