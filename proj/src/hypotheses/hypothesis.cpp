#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

#include "hsi/common/error.hpp"
#include "hsi/hypotheses/hypothesis.hpp"

namespace hsi {

using nlohmann::json;

void JointMap::validate(int hypothesis_joints) const {
    std::set<int> seen;
    for (auto [h, b] : pairs) {
        if (h < 0 || h >= hypothesis_joints) throw ValidationError("joint map: hypothesis index out of range");
        if (b < 0 || b >= kNumJoints) throw ValidationError("joint map: body index out of range");
        if (!seen.insert(b).second) throw ValidationError("joint map: body joint mapped twice");
    }
}

const JointLayout& joint_layout(const std::string& id) {
    static const JointLayout coco{
        "coco17",
        {"nose", "left_eye", "right_eye", "left_ear", "right_ear", "left_shoulder", "right_shoulder",
         "left_elbow", "right_elbow", "left_wrist", "right_wrist", "left_hip", "right_hip", "left_knee",
         "right_knee", "left_ankle", "right_ankle"},
        // Eyes and ears have no body counterpart; the nose stands in for the head joint.
        {{{0, 15}, {5, 16}, {6, 17}, {7, 18}, {8, 19}, {9, 20}, {10, 21}, {11, 1}, {12, 2}, {13, 4}, {14, 5},
          {15, 7}, {16, 8}}}};
    static const JointLayout body22 = [] {
        JointLayout l{"body22", {}, {}};
        for (int j = 0; j < kNumJoints; ++j) {
            l.names.push_back(kJointNames[j]);
            l.map.pairs.push_back({j, j});
        }
        return l;
    }();
    if (id == coco.id) return coco;
    if (id == body22.id) return body22;
    throw ValidationError("unknown layout_id: " + id);
}

void validate(const PoseHypothesis& h) {
    const JointLayout& l = joint_layout(h.layout_id);
    const std::string where = "hypothesis for view " + std::to_string(h.view_id) + ": ";
    if (h.joints2d.size() != h.confidence.size())
        throw ValidationError(where + "joints2d and confidence differ in length");
    if (h.joints2d.size() != l.names.size())
        throw ValidationError(where + "layout " + l.id + " expects " + std::to_string(l.names.size()) + " joints");
    if (h.width <= 0 || h.height <= 0) throw ValidationError(where + "image size must be positive");
    for (size_t i = 0; i < h.joints2d.size(); ++i) {
        if (!h.joints2d[i].allFinite()) throw ValidationError(where + "non-finite joint " + std::to_string(i));
        if (!(h.confidence[i] >= 0.0 && h.confidence[i] <= 1.0))
            throw ValidationError(where + "confidence " + std::to_string(h.confidence[i]) + " outside [0, 1]");
    }
}

void save_hypotheses(const std::vector<PoseHypothesis>& hyps, const std::string& path) {
    json doc;
    doc["format"] = "hsi.hypotheses";
    doc["version"] = 1;
    doc["views"] = json::array();
    for (const PoseHypothesis& h : hyps) {
        validate(h);
        json v;
        v["view_id"] = h.view_id;
        v["width"] = h.width;
        v["height"] = h.height;
        v["layout_id"] = h.layout_id;
        v["joints2d"] = json::array();
        for (const Vec2& p : h.joints2d) v["joints2d"].push_back({p.x(), p.y()});
        v["confidence"] = h.confidence;
        doc["views"].push_back(v);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write hypotheses file: " + path);
    out << doc.dump(2) << "\n";
}

std::vector<PoseHypothesis> load_hypotheses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open hypotheses file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("hypotheses file is not valid JSON: " + path + ": " + e.what());
    }
    std::vector<PoseHypothesis> out;
    try {
        if (doc.at("format").get<std::string>() != "hsi.hypotheses")
            throw ValidationError("not a hypotheses file: " + path);
        if (doc.at("version").get<int>() != 1) throw ValidationError("unsupported hypotheses version: " + path);
        for (const json& v : doc.at("views")) {
            PoseHypothesis h;
            h.view_id = v.at("view_id").get<int>();
            h.width = v.value("width", 512);
            h.height = v.value("height", 512);
            h.layout_id = v.at("layout_id").get<std::string>();
            for (const json& p : v.at("joints2d")) {
                if (!p.is_array() || p.size() != 2) throw ValidationError("joints2d entries must be [x, y]");
                h.joints2d.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            h.confidence = v.at("confidence").get<std::vector<double>>();
            validate(h);
            out.push_back(std::move(h));
        }
    } catch (const json::exception& e) {
        throw ValidationError("malformed hypotheses file " + path + ": " + e.what());
    }
    return out;
}

ViewObservation map_to_body(const PoseHypothesis& h) {
    const JointLayout& l = joint_layout(h.layout_id);
    ViewObservation o;
    o.view_id = h.view_id;
    for (auto [hi, bi] : l.map.pairs) {
        if (hi >= static_cast<int>(h.joints2d.size())) continue;
        o.body_joint.push_back(bi);
        o.pixel.push_back(h.joints2d[hi]);
        o.confidence.push_back(h.confidence[hi]);
    }
    return o;
}

std::vector<PoseHypothesis> synth_hypotheses(const BodyModel& model, const BodyParams& gt,
                                             const std::vector<Camera>& cameras, double noise_px,
                                             const std::set<int>& outlier_views, std::uint64_t seed,
                                             const std::string& layout_id) {
    if (cameras.empty()) throw ValidationError("synth_hypotheses: no cameras");
    const JointLayout& layout = joint_layout(layout_id);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const auto gt_joints = forward<double>(model, gt).joints;

    std::vector<PoseHypothesis> out;
    for (size_t v = 0; v < cameras.size(); ++v) {
        const Camera& cam = cameras[v];
        auto joints = gt_joints;
        if (outlier_views.count(static_cast<int>(v))) {
            // Unrelated body: random articulation, heading and placement.
            BodyParams other;
            for (int i = 0; i < kLatentDim; ++i) other.theta[i] = gauss(rng);
            for (int i = 0; i < kShapeDim; ++i) other.phi[i] = gauss(rng);
            const double yaw = M_PI * unif(rng);
            other.rot6d << std::cos(yaw), std::sin(yaw), 0.0, -std::sin(yaw), std::cos(yaw), 0.0;
            other.trans = gt.trans + Vec3(0.5 * unif(rng), 0.5 * unif(rng), 0.2 * unif(rng));
            joints = forward<double>(model, other).joints;
        }
        PoseHypothesis h;
        h.view_id = cam.view_id;
        h.width = cam.width;
        h.height = cam.height;
        h.layout_id = layout.id;
        h.joints2d.assign(layout.names.size(), Vec2::Zero());
        h.confidence.assign(layout.names.size(), 0.0);
        for (auto [hi, bi] : layout.map.pairs) {
            Vec2 px;
            const bool ok = cam.project(joints[bi], &px);
            const double nx = gauss(rng), ny = gauss(rng);  // drawn regardless, keeps streams aligned
            if (!ok) continue;
            h.joints2d[hi] = px + noise_px * Vec2(nx, ny);
            h.confidence[hi] = 1.0;
        }
        out.push_back(std::move(h));
    }
    return out;
}

}  // namespace hsi
