#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lsfusion/errors.hpp"
#include "lsfusion/pipeline.hpp"
#include "lsfusion/segmentation.hpp"

namespace lsfusion {

void FusionConfig::validate() const {
    weights.validate();
    if (!(verify_threshold > 0)) throw std::invalid_argument("verify_threshold must be positive");
    if (feedback_rounds < 1) throw std::invalid_argument("feedback_rounds must be >= 1");
    if (!(d_max > 0)) throw std::invalid_argument("d_max must be positive");
    if (stereo.sgm_p1 < 0 || stereo.sgm_p2 < stereo.sgm_p1)
        throw std::invalid_argument("SGM penalties need P2 >= P1 >= 0");
    if (stereo.sgm_paths != 2 && stereo.sgm_paths != 4)
        throw std::invalid_argument("SGM paths must be 2 or 4");
    if (!(stereo.readout_gain > 0)) throw std::invalid_argument("readout_gain must be positive");
    if (stereo.census_window < 3 || stereo.census_window % 2 == 0)
        throw std::invalid_argument("stereo census window must be odd and >= 3");
    if (optimizer.pyramid_levels < 1) throw std::invalid_argument("pyramid_levels must be >= 1");
    if (optimizer.iterations.empty()) throw std::invalid_argument("iteration budgets missing");
    for (int it : optimizer.iterations)
        if (it < 0) throw std::invalid_argument("iteration budgets must be >= 0");
    if (!(optimizer.initial_step_px > 0)) throw std::invalid_argument("initial step must be positive");
    if (optimizer.step_halving_patience < 0)
        throw std::invalid_argument("step_halving_patience must be >= 0");
    if (optimizer.step_growth < 1.0) throw std::invalid_argument("step_growth must be >= 1");
    if (optimizer.step_cap_factor < 1.0) throw std::invalid_argument("step_cap_factor must be >= 1");
    if (optimizer.mask_refresh_interval < 1)
        throw std::invalid_argument("mask_refresh_interval must be >= 1");
    if (optimizer.convergence_window < 1)
        throw std::invalid_argument("convergence_window must be >= 1");
    if (optimizer.convergence_rel_decrease < 0)
        throw std::invalid_argument("convergence_rel_decrease must be >= 0");
    if (slic_target < 0) throw std::invalid_argument("slic_target must be >= 0");
    if (!(slic_compactness > 0)) throw std::invalid_argument("slic_compactness must be positive");
    if (slic_iterations < 1) throw std::invalid_argument("slic_iterations must be >= 1");
}

std::string format_trace_entry(const TraceEntry& e) {
    std::ostringstream ss;
    ss.precision(12);
    ss << "round=" << e.round << " level=" << e.level << " iter=" << e.iteration
       << " accepted=" << (e.accepted ? 1 : 0) << " refreshed=" << (e.masks_refreshed ? 1 : 0)
       << " step_px=" << e.step_px << " " << e.energy.to_kv();
    return ss.str();
}

namespace {

Grid<double> downsample_half(const Grid<double>& img) {
    const int h = img.height(), w = img.width();
    const int hc = (h + 1) / 2, wc = (w + 1) / 2;
    Grid<double> out(hc, wc);
    for (int y = 0; y < hc; ++y)
        for (int x = 0; x < wc; ++x) {
            double sum = 0.0;
            int n = 0;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const int yy = 2 * y + dy, xx = 2 * x + dx;
                    if (yy < h && xx < w) {
                        sum += img.at(yy, xx);
                        ++n;
                    }
                }
            out.at(y, x) = sum / n;
        }
    return out;
}

ImagePair downsample_pair(const ImagePair& pair) {
    ImagePair out;
    for (int c = 0; c < 3; ++c) {
        out.left[c] = downsample_half(pair.left[c]);
        out.right[c] = downsample_half(pair.right[c]);
    }
    return out;
}

// Disparities halve with the resolution; collisions keep the nearest point.
SparseDisparityMap downsample_lidar(const SparseDisparityMap& map) {
    const int h = map.height(), w = map.width();
    SparseDisparityMap out((h + 1) / 2, (w + 1) / 2);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!map.mask.at(y, x)) continue;
            const int cy = y / 2, cx = x / 2;
            const double d = 0.5 * map.values.at(y, x);
            if (!out.mask.at(cy, cx) || d > out.values.at(cy, cx)) {
                out.values.at(cy, cx) = d;
                out.mask.at(cy, cx) = 1;
            }
        }
    return out;
}

Grid<double> downsample_field(const Grid<double>& field) {
    Grid<double> out = downsample_half(field);
    for (size_t i = 0; i < out.size(); ++i) out[i] *= 0.5;
    return out;
}

Grid<double> upsample_field(const Grid<double>& coarse, int th, int tw) {
    const int hc = coarse.height(), wc = coarse.width();
    Grid<double> out(th, tw);
    for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x) {
            double sy = (y - 0.5) / 2.0, sx = (x - 0.5) / 2.0;
            sy = std::clamp(sy, 0.0, static_cast<double>(hc - 1));
            sx = std::clamp(sx, 0.0, static_cast<double>(wc - 1));
            int y0 = std::min(static_cast<int>(sy), hc - 2 >= 0 ? hc - 2 : 0);
            int x0 = std::min(static_cast<int>(sx), wc - 2 >= 0 ? wc - 2 : 0);
            const int y1 = std::min(y0 + 1, hc - 1), x1 = std::min(x0 + 1, wc - 1);
            const double ay = sy - y0, ax = sx - x0;
            const double v = (1 - ay) * ((1 - ax) * coarse.at(y0, x0) + ax * coarse.at(y0, x1)) +
                             ay * ((1 - ax) * coarse.at(y1, x0) + ax * coarse.at(y1, x1));
            out.at(y, x) = 2.0 * v;
        }
    return out;
}

int effective_levels(int requested, int h, int w) {
    int lv = std::max(1, requested);
    while (lv > 1 && (std::min(h, w) >> (lv - 1)) < 16) --lv;
    return lv;
}

void clamp_field(Grid<double>& field, double d_max) {
    for (size_t i = 0; i < field.size(); ++i) field[i] = std::clamp(field[i], 0.0, d_max);
}

std::string trace_tail(const std::vector<TraceEntry>& trace) {
    std::ostringstream ss;
    const size_t begin = trace.size() > 5 ? trace.size() - 5 : 0;
    for (size_t i = begin; i < trace.size(); ++i) ss << "\n  " << format_trace_entry(trace[i]);
    return ss.str();
}

}  // namespace

UpdateResult update_optimize(const ImagePair& pair, const SparseDisparityMap& cleaned_left,
                             const SparseDisparityMap& cleaned_right,
                             const DenseDisparityField& init_left,
                             const DenseDisparityField& init_right, const FusionConfig& cfg,
                             int round_tag) {
    cfg.validate();
    const int h = pair.height(), w = pair.width();
    if (init_left.height() != h || init_left.width() != w || init_right.height() != h ||
        init_right.width() != w || cleaned_left.height() != h || cleaned_left.width() != w ||
        cleaned_right.height() != h || cleaned_right.width() != w)
        throw std::invalid_argument("update_optimize: input dimensions differ");

    UpdateResult result;
    long total_budget = 0;
    for (int level = 0; level < cfg.optimizer.pyramid_levels; ++level) {
        const size_t idx = std::min(static_cast<size_t>(level), cfg.optimizer.iterations.size() - 1);
        total_budget += cfg.optimizer.iterations[idx];
    }
    if (total_budget == 0) {
        result.left = init_left;
        result.right = init_right;
        return result;
    }

    const int levels = effective_levels(cfg.optimizer.pyramid_levels, h, w);

    std::vector<ImagePair> pyr_pair(levels);
    std::vector<SparseDisparityMap> pyr_lidar_l(levels), pyr_lidar_r(levels);
    pyr_pair[0] = pair;
    pyr_lidar_l[0] = cleaned_left;
    pyr_lidar_r[0] = cleaned_right;
    for (int level = 1; level < levels; ++level) {
        pyr_pair[level] = downsample_pair(pyr_pair[level - 1]);
        pyr_lidar_l[level] = downsample_lidar(pyr_lidar_l[level - 1]);
        pyr_lidar_r[level] = downsample_lidar(pyr_lidar_r[level - 1]);
    }

    Grid<double> d_l = init_left.values, d_r = init_right.values;
    for (int level = 1; level < levels; ++level) {
        d_l = downsample_field(d_l);
        d_r = downsample_field(d_r);
    }

    for (int level = levels - 1; level >= 0; --level) {
        const ImagePair& lp = pyr_pair[level];
        const int lh = lp.height(), lw = lp.width();
        const double dmax_level = cfg.d_max / (1 << level);

        if (level != levels - 1) {
            d_l = upsample_field(d_l, lh, lw);
            d_r = upsample_field(d_r, lh, lw);
        }
        clamp_field(d_l, dmax_level);
        clamp_field(d_r, dmax_level);

        LossWeights level_weights = cfg.weights;
        level_weights.epsilon = cfg.weights.epsilon / (1 << level);

        const int target = cfg.slic_target > 0
                               ? std::max(1, cfg.slic_target >> (2 * level))
                               : default_segment_target(lh, lw);
        SuperpixelSegmentation seg_l =
            slic_segment(lp.left, target, cfg.slic_compactness, cfg.slic_iterations);
        SuperpixelSegmentation seg_r =
            slic_segment(lp.right, target, cfg.slic_compactness, cfg.slic_iterations);

        const EnergyContext ctx(lp, pyr_lidar_l[level], pyr_lidar_r[level], std::move(seg_l),
                                std::move(seg_r), level_weights);

        const size_t bidx = std::min(static_cast<size_t>(level), cfg.optimizer.iterations.size() - 1);
        const int budget = cfg.optimizer.iterations[bidx];
        if (budget == 0) continue;

        OcclusionMask occ_l, occ_r;
        double sigma = cfg.optimizer.initial_step_px;
        const double sigma_cap = cfg.optimizer.initial_step_px * cfg.optimizer.step_cap_factor;
        std::vector<double> history;
        history.reserve(budget);
        int last_refresh = 1;

        for (int it = 1; it <= budget; ++it) {
            bool refreshed = false;
            if ((it - 1) % cfg.optimizer.mask_refresh_interval == 0) {
                std::tie(occ_l, occ_r) = ctx.occlusion(d_l, d_r);
                refreshed = true;
                last_refresh = it;
            }

            EnergyBreakdown current = ctx.evaluate(d_l, d_r, occ_l, occ_r, true);
            if (!current.finite())
                throw NumericalError("update_optimize: non-finite energy at round " +
                                     std::to_string(round_tag) + " level " + std::to_string(level) +
                                     " iter " + std::to_string(it) + trace_tail(result.trace));

            double gmax = 0.0;
            for (size_t i = 0; i < current.grad_left.size(); ++i)
                gmax = std::max(gmax, std::abs(current.grad_left[i]));
            for (size_t i = 0; i < current.grad_right.size(); ++i)
                gmax = std::max(gmax, std::abs(current.grad_right[i]));

            bool accepted = false;
            EnergyBreakdown post = current;
            if (gmax > 1e-14) {
                Grid<double> cand_l(lh, lw), cand_r(lh, lw);
                for (int attempt = 0; attempt <= cfg.optimizer.step_halving_patience; ++attempt) {
                    const double scale = sigma / gmax;
                    for (size_t i = 0; i < cand_l.size(); ++i) {
                        cand_l[i] = std::clamp(d_l[i] - scale * current.grad_left[i], 0.0, dmax_level);
                        cand_r[i] = std::clamp(d_r[i] - scale * current.grad_right[i], 0.0, dmax_level);
                    }
                    EnergyBreakdown cand = ctx.evaluate(cand_l, cand_r, occ_l, occ_r, false);
                    if (!cand.finite())
                        throw NumericalError("update_optimize: non-finite candidate energy" +
                                             trace_tail(result.trace));
                    if (cand.total <= current.total) {
                        d_l = cand_l;
                        d_r = cand_r;
                        post = cand;
                        accepted = true;
                        sigma = std::min(sigma * cfg.optimizer.step_growth, sigma_cap);
                        break;
                    }
                    sigma *= 0.5;
                }
            }

            post.grad_left = Grid<double>();
            post.grad_right = Grid<double>();
            TraceEntry entry;
            entry.round = round_tag;
            entry.level = level;
            entry.iteration = it;
            entry.step_px = sigma;
            entry.accepted = accepted;
            entry.masks_refreshed = refreshed;
            entry.energy = post;
            result.trace.push_back(std::move(entry));
            history.push_back(post.total);

            const int window = cfg.optimizer.convergence_window;
            if (static_cast<int>(history.size()) > window && it - last_refresh >= window) {
                const double e0 = history[history.size() - 1 - window];
                const double e1 = history.back();
                if ((e0 - e1) / std::max(std::abs(e0), 1e-300) <
                    cfg.optimizer.convergence_rel_decrease)
                    break;
            }
        }
    }

    result.left = DenseDisparityField{};
    result.left.values = std::move(d_l);
    result.right = DenseDisparityField{};
    result.right.values = std::move(d_r);
    return result;
}

}  // namespace lsfusion
