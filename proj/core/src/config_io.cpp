#include "lsfusion/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lsfusion/errors.hpp"

namespace lsfusion {

using nlohmann::json;

namespace {

void read_weights(const json& j, LossWeights& w) {
    w.mu1 = j.value("mu1", w.mu1);
    w.mu2 = j.value("mu2", w.mu2);
    w.mu3 = j.value("mu3", w.mu3);
    w.lambda1 = j.value("lambda1", w.lambda1);
    w.lambda2 = j.value("lambda2", w.lambda2);
    w.alpha1 = j.value("alpha1", w.alpha1);
    w.alpha2 = j.value("alpha2", w.alpha2);
    w.epsilon = j.value("epsilon", w.epsilon);
    w.enable_warping = j.value("enable_warping", w.enable_warping);
    w.enable_photometric = j.value("enable_photometric", w.enable_photometric);
    w.enable_census = j.value("enable_census", w.enable_census);
    w.enable_gradient = j.value("enable_gradient", w.enable_gradient);
    w.enable_lidar = j.value("enable_lidar", w.enable_lidar);
    w.enable_smoothness = j.value("enable_smoothness", w.enable_smoothness);
    w.enable_plane = j.value("enable_plane", w.enable_plane);
    w.plane_root_norm = j.value("plane_root_norm", w.plane_root_norm);
    w.census_window = j.value("census_window", w.census_window);
    w.occlusion_threshold = j.value("occlusion_threshold", w.occlusion_threshold);
}

json write_weights(const LossWeights& w) {
    return json{{"mu1", w.mu1},
                {"mu2", w.mu2},
                {"mu3", w.mu3},
                {"lambda1", w.lambda1},
                {"lambda2", w.lambda2},
                {"alpha1", w.alpha1},
                {"alpha2", w.alpha2},
                {"epsilon", w.epsilon},
                {"enable_warping", w.enable_warping},
                {"enable_photometric", w.enable_photometric},
                {"enable_census", w.enable_census},
                {"enable_gradient", w.enable_gradient},
                {"enable_lidar", w.enable_lidar},
                {"enable_smoothness", w.enable_smoothness},
                {"enable_plane", w.enable_plane},
                {"plane_root_norm", w.plane_root_norm},
                {"census_window", w.census_window},
                {"occlusion_threshold", w.occlusion_threshold}};
}

}  // namespace

FusionConfig fusion_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("config: ") + e.what());
    }

    FusionConfig cfg;
    if (j.contains("weights")) read_weights(j["weights"], cfg.weights);
    cfg.verify_threshold = j.value("verify_threshold", cfg.verify_threshold);
    cfg.feedback_rounds = j.value("feedback_rounds", cfg.feedback_rounds);
    cfg.d_max = j.value("d_max", cfg.d_max);
    if (j.contains("stereo")) {
        const json& s = j["stereo"];
        cfg.stereo.sgm_p1 = s.value("sgm_p1", cfg.stereo.sgm_p1);
        cfg.stereo.sgm_p2 = s.value("sgm_p2", cfg.stereo.sgm_p2);
        cfg.stereo.sgm_paths = s.value("sgm_paths", cfg.stereo.sgm_paths);
        cfg.stereo.readout_gain = s.value("readout_gain", cfg.stereo.readout_gain);
        cfg.stereo.census_window = s.value("census_window", cfg.stereo.census_window);
    }
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        cfg.optimizer.pyramid_levels = o.value("pyramid_levels", cfg.optimizer.pyramid_levels);
        if (o.contains("iterations"))
            cfg.optimizer.iterations = o["iterations"].get<std::vector<int>>();
        cfg.optimizer.initial_step_px = o.value("initial_step_px", cfg.optimizer.initial_step_px);
        cfg.optimizer.step_halving_patience =
            o.value("step_halving_patience", cfg.optimizer.step_halving_patience);
        cfg.optimizer.step_growth = o.value("step_growth", cfg.optimizer.step_growth);
        cfg.optimizer.step_cap_factor = o.value("step_cap_factor", cfg.optimizer.step_cap_factor);
        cfg.optimizer.mask_refresh_interval =
            o.value("mask_refresh_interval", cfg.optimizer.mask_refresh_interval);
        cfg.optimizer.convergence_rel_decrease =
            o.value("convergence_rel_decrease", cfg.optimizer.convergence_rel_decrease);
        cfg.optimizer.convergence_window =
            o.value("convergence_window", cfg.optimizer.convergence_window);
    }
    cfg.slic_target = j.value("slic_target", cfg.slic_target);
    cfg.slic_compactness = j.value("slic_compactness", cfg.slic_compactness);
    cfg.slic_iterations = j.value("slic_iterations", cfg.slic_iterations);

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    return cfg;
}

std::string fusion_config_to_json(const FusionConfig& cfg) {
    json j;
    j["weights"] = write_weights(cfg.weights);
    j["verify_threshold"] = cfg.verify_threshold;
    j["feedback_rounds"] = cfg.feedback_rounds;
    j["d_max"] = cfg.d_max;
    j["stereo"] = json{{"sgm_p1", cfg.stereo.sgm_p1},
                       {"sgm_p2", cfg.stereo.sgm_p2},
                       {"sgm_paths", cfg.stereo.sgm_paths},
                       {"readout_gain", cfg.stereo.readout_gain},
                       {"census_window", cfg.stereo.census_window}};
    j["optimizer"] = json{{"pyramid_levels", cfg.optimizer.pyramid_levels},
                          {"iterations", cfg.optimizer.iterations},
                          {"initial_step_px", cfg.optimizer.initial_step_px},
                          {"step_halving_patience", cfg.optimizer.step_halving_patience},
                          {"step_growth", cfg.optimizer.step_growth},
                          {"step_cap_factor", cfg.optimizer.step_cap_factor},
                          {"mask_refresh_interval", cfg.optimizer.mask_refresh_interval},
                          {"convergence_rel_decrease", cfg.optimizer.convergence_rel_decrease},
                          {"convergence_window", cfg.optimizer.convergence_window}};
    j["slic_target"] = cfg.slic_target;
    j["slic_compactness"] = cfg.slic_compactness;
    j["slic_iterations"] = cfg.slic_iterations;
    return j.dump(2);
}

FusionConfig load_fusion_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return fusion_config_from_json(ss.str());
}

void save_fusion_config(const std::string& path, const FusionConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot create config '" + path + "'");
    out << fusion_config_to_json(cfg) << "\n";
}

}  // namespace lsfusion
