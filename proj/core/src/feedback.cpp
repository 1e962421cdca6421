#include <stdexcept>

#include "lsfusion/pipeline.hpp"

namespace lsfusion {

FusionResult run_feedback_loop(const SceneBundle& scene, const FusionConfig& cfg) {
    cfg.validate();
    const int h = scene.height(), w = scene.width();
    if (scene.lidar_left.height() != h || scene.lidar_left.width() != w ||
        scene.lidar_right.height() != h || scene.lidar_right.width() != w)
        throw std::invalid_argument("run_feedback_loop: Lidar and image dimensions differ");

    FusionResult result;
    auto [init_l, init_r] = initialize_disparity(scene.pair, cfg);
    result.init_left = init_l;
    result.init_right = init_r;

    DenseDisparityField verify_l = init_l, verify_r = init_r;
    VerifyResult ver_l, ver_r;

    for (int round = 1; round <= cfg.feedback_rounds; ++round) {
        // Verify phase: re-filter the raw Lidar against the current estimate;
        // points removed earlier can return if the estimate moved toward them.
        ver_l = verify_clean(verify_l, scene.lidar_left, cfg.verify_threshold);
        ver_r = verify_clean(verify_r, scene.lidar_right, cfg.verify_threshold);

        RoundDiagnostics diag;
        diag.round = round;
        diag.input_valid_left = scene.lidar_left.valid_count();
        diag.kept_left = ver_l.cleaned.valid_count();
        diag.input_valid_right = scene.lidar_right.valid_count();
        diag.kept_right = ver_r.cleaned.valid_count();
        result.rounds.push_back(diag);

        // Update phase.
        UpdateResult update = update_optimize(scene.pair, ver_l.cleaned, ver_r.cleaned, verify_l,
                                              verify_r, cfg, round);
        verify_l = std::move(update.left);
        verify_r = std::move(update.right);
        result.trace.insert(result.trace.end(), update.trace.begin(), update.trace.end());
    }

    result.disp_left = std::move(verify_l);
    result.disp_right = std::move(verify_r);
    result.cleaned_left = std::move(ver_l.cleaned);
    result.cleaned_right = std::move(ver_r.cleaned);
    result.keep_left = std::move(ver_l.keep);
    result.keep_right = std::move(ver_r.keep);
    return result;
}

}  // namespace lsfusion
