#include <fstream>
#include <set>

#include "hsi/common/error.hpp"
#include "hsi/pipeline/config.hpp"

namespace hsi {

using nlohmann::json;

void PipelineConfig::validate() const {
    if (sdf_resolution < 2) throw ValidationError("config: sdf_resolution must be >= 2");
    if (!point.allFinite()) throw ValidationError("config: point must be finite");
    if (refinement.iterations < 0) throw ValidationError("config: refinement.iterations must be >= 0");
    if (refinement.dilation < 1 || refinement.dilation % 2 == 0) throw ValidationError("config: refinement.dilation must be odd and positive");
    const std::string& k = provider.kind;
    if (k != "synthetic" && k != "files" && k != "adapter") throw ValidationError("config: unknown provider '" + k + "'");
    if (k == "files" && provider.dir.empty()) throw ValidationError("config: files provider needs provider.dir");
    if (k == "adapter" && provider.command.empty()) throw ValidationError("config: adapter provider needs provider.command");
    if (provider.gt_posture != "standing" && provider.gt_posture != "seated")
        throw ValidationError("config: provider.gt_posture must be standing or seated");
    if (provider.noise_px < 0 || provider.refine_noise_px < 0) throw ValidationError("config: noise must be >= 0");
    cameras.validate();
    energy.validate();
    optimizer.validate();
    masking.validate();
}

namespace {

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Reads known keys, then complains about anything left over.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw ValidationError("config: " + where_ + " must be an object");
    }

    template <class T>
    Reader& get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return *this;
        try {
            if constexpr (std::is_same_v<T, Vec3>) {
                const auto a = j_.at(key).get<std::vector<double>>();
                if (a.size() != 3) throw ValidationError("expected 3 numbers");
                out = Vec3(a[0], a[1], a[2]);
            } else {
                out = j_.at(key).get<T>();
            }
        } catch (const std::exception& e) {
            throw ValidationError("config: " + where_ + key + ": " + e.what());
        }
        return *this;
    }

    const json* sub(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ValidationError("config: unknown key '" + where_ + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

}  // namespace

json to_json(const PipelineConfig& c) {
    const auto& cs = c.cameras;
    const auto& e = c.energy;
    const auto& o = c.optimizer;
    const auto& m = c.masking;
    const auto& p = c.provider;
    return {
        {"scene", c.scene},
        {"sdf", c.sdf},
        {"sdf_resolution", c.sdf_resolution},
        {"sdf_padding", c.sdf_padding},
        {"point", vec3(c.point)},
        {"prompt", c.prompt},
        {"seed", c.seed},
        {"output", c.output},
        {"cameras",
         {{"k", cs.k}, {"d", cs.d}, {"r", cs.r}, {"min_elevation_deg", cs.min_elevation_deg},
          {"patch_samples", cs.patch_samples}, {"depth_tolerance", cs.depth_tolerance}, {"candidates", cs.candidates},
          {"width", cs.intrinsics.width}, {"height", cs.intrinsics.height}, {"fov_deg", cs.intrinsics.fov_deg}}},
        {"energy",
         {{"lambda_pf", e.lambda_pf}, {"lambda_vs", e.lambda_vs}, {"lambda_bp", e.lambda_bp}, {"lambda_bs", e.lambda_bs},
          {"lambda_sc", e.lambda_sc}, {"lambda_sp", e.lambda_sp}, {"sigma_gm", e.sigma_gm}, {"tau", e.tau},
          {"eps", e.eps}, {"sc_temperature", e.sc_temperature}}},
        {"optimizer",
         {{"steps", o.steps}, {"lr_trans", o.lr_trans}, {"lr_rot", o.lr_rot}, {"lr_theta", o.lr_theta},
          {"lr_phi", o.lr_phi}, {"lr_logits", o.lr_logits}, {"beta1", o.beta1}, {"beta2", o.beta2},
          {"adam_eps", o.adam_eps}, {"weight_decay", o.weight_decay}, {"lr_final_fraction", o.lr_final_fraction},
          {"trace_every", o.trace_every}, {"init_view_weight", o.init_view_weight}}},
        {"masking",
         {{"T", m.T}, {"T_min", m.T_min}, {"token_indices", m.token_indices}, {"threshold", m.threshold},
          {"latent_width", m.latent_width}, {"latent_height", m.latent_height}}},
        {"refinement",
         {{"iterations", c.refinement.iterations}, {"warm_start", c.refinement.warm_start},
          {"dilation", c.refinement.dilation}}},
        {"provider",
         {{"kind", p.kind}, {"gt_params", p.gt_params}, {"gt_theta_sd", p.gt_theta_sd}, {"gt_phi_sd", p.gt_phi_sd},
          {"gt_sink", p.gt_sink}, {"gt_yaw_max_deg", p.gt_yaw_max_deg},
          {"gt_posture", p.gt_posture}, {"noise_px", p.noise_px}, {"outlier_views", p.outlier_views},
          {"refine_noise_px", p.refine_noise_px}, {"dir", p.dir}, {"command", p.command}}},
    };
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    Reader r(j, "");
    r.get("scene", c.scene).get("sdf", c.sdf).get("sdf_resolution", c.sdf_resolution).get("sdf_padding", c.sdf_padding);
    r.get("point", c.point).get("prompt", c.prompt).get("seed", c.seed).get("output", c.output);
    if (const json* s = r.sub("cameras")) {
        auto& cs = c.cameras;
        Reader q(*s, "cameras.");
        q.get("k", cs.k).get("d", cs.d).get("r", cs.r).get("min_elevation_deg", cs.min_elevation_deg);
        q.get("patch_samples", cs.patch_samples).get("depth_tolerance", cs.depth_tolerance).get("candidates", cs.candidates);
        q.get("width", cs.intrinsics.width).get("height", cs.intrinsics.height).get("fov_deg", cs.intrinsics.fov_deg);
        q.finish();
    }
    if (const json* s = r.sub("energy")) {
        auto& e = c.energy;
        Reader q(*s, "energy.");
        q.get("lambda_pf", e.lambda_pf).get("lambda_vs", e.lambda_vs).get("lambda_bp", e.lambda_bp);
        q.get("lambda_bs", e.lambda_bs).get("lambda_sc", e.lambda_sc).get("lambda_sp", e.lambda_sp);
        q.get("sigma_gm", e.sigma_gm).get("tau", e.tau).get("eps", e.eps).get("sc_temperature", e.sc_temperature);
        q.finish();
    }
    if (const json* s = r.sub("optimizer")) {
        auto& o = c.optimizer;
        Reader q(*s, "optimizer.");
        q.get("steps", o.steps).get("lr_trans", o.lr_trans).get("lr_rot", o.lr_rot).get("lr_theta", o.lr_theta);
        q.get("lr_phi", o.lr_phi).get("lr_logits", o.lr_logits).get("beta1", o.beta1).get("beta2", o.beta2);
        q.get("adam_eps", o.adam_eps).get("weight_decay", o.weight_decay).get("lr_final_fraction", o.lr_final_fraction);
        q.get("trace_every", o.trace_every).get("init_view_weight", o.init_view_weight);
        q.finish();
    }
    if (const json* s = r.sub("masking")) {
        auto& m = c.masking;
        Reader q(*s, "masking.");
        q.get("T", m.T).get("T_min", m.T_min).get("token_indices", m.token_indices).get("threshold", m.threshold);
        q.get("latent_width", m.latent_width).get("latent_height", m.latent_height);
        q.finish();
    }
    if (const json* s = r.sub("refinement")) {
        Reader q(*s, "refinement.");
        q.get("iterations", c.refinement.iterations).get("warm_start", c.refinement.warm_start).get("dilation", c.refinement.dilation);
        q.finish();
    }
    if (const json* s = r.sub("provider")) {
        auto& p = c.provider;
        Reader q(*s, "provider.");
        q.get("kind", p.kind).get("gt_params", p.gt_params).get("gt_theta_sd", p.gt_theta_sd).get("gt_phi_sd", p.gt_phi_sd);
        q.get("gt_sink", p.gt_sink).get("gt_yaw_max_deg", p.gt_yaw_max_deg).get("gt_posture", p.gt_posture).get("noise_px", p.noise_px).get("outlier_views", p.outlier_views);
        q.get("refine_noise_px", p.refine_noise_px).get("dir", p.dir).get("command", p.command);
        q.finish();
    }
    r.finish();
    c.optimizer.seed = c.seed;
    c.validate();
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const PipelineConfig& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << to_json(c).dump(2) << '\n';
}

}  // namespace hsi
