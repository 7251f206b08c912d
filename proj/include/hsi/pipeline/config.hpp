#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "hsi/lifting/energy.hpp"
#include "hsi/lifting/optimize.hpp"
#include "hsi/masking/controller.hpp"
#include "hsi/scene/camera_sampling.hpp"

namespace hsi {

struct ProviderConfig {
    std::string kind = "synthetic";  // synthetic | files | adapter
    // synthetic
    std::string gt_params;           // BodyParams file; empty -> drawn from the seed
    double gt_theta_sd = 0.5;
    double gt_phi_sd = 0.5;
    double gt_sink = 0.01;           // ground truth lowered this far into its support (m)
    double gt_yaw_max_deg = 60.0;    // ground-truth turn about z away from the init facing
    std::string gt_posture = "standing";  // standing | seated
    double noise_px = 0.0;
    std::set<int> outlier_views;     // indices into the sampled camera list
    double refine_noise_px = 0.0;
    // files
    std::string dir;                 // view_<id>.json, round r > 0 under round_<r>/
    // adapter
    std::vector<std::string> command;
};

struct RefinementConfig {
    int iterations = 1;
    bool warm_start = true;
    int dilation = 11;
};

struct PipelineConfig {
    std::string scene;               // mesh path (.obj / .ply)
    std::string sdf;                 // optional cached grid; built from the mesh when empty
    std::uint32_t sdf_resolution = 96;
    double sdf_padding = 0.2;
    Vec3 point = Vec3::Zero();
    std::string prompt;
    CameraSamplingConfig cameras;
    EnergyWeights energy;
    OptimizerConfig optimizer;
    MaskingConfig masking;
    RefinementConfig refinement;
    ProviderConfig provider;
    std::uint64_t seed = 0;
    std::string output = "out";

    void validate() const;
};

nlohmann::json to_json(const PipelineConfig& c);
// Keys absent from j keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& c, const std::string& path);

}  // namespace hsi
