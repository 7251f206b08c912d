#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hsi/body/body_model.hpp"
#include "hsi/scene/camera.hpp"

namespace hsi {

// Per-view 2D joints and confidences in some estimator joint ordering.
struct PoseHypothesis {
    int view_id = 0;
    int width = 512;
    int height = 512;
    std::string layout_id = "coco17";
    std::vector<Vec2> joints2d;
    std::vector<double> confidence;

    bool operator==(const PoseHypothesis&) const = default;
};

// (hypothesis joint index -> body joint index); injective on body joints.
struct JointMap {
    std::vector<std::pair<int, int>> pairs;

    void validate(int hypothesis_joints) const;
};

struct JointLayout {
    std::string id;
    std::vector<std::string> names;
    JointMap map;
};

// Known layouts: "coco17" (17-joint detector order) and "body22" (the body's
// own joints, identity map). Throws ValidationError for unknown ids.
const JointLayout& joint_layout(const std::string& id);

// Throws ValidationError on length mismatch, non-finite joints, confidences
// outside [0, 1], or an unknown layout.
void validate(const PoseHypothesis& h);

// Versioned JSON document {"format": "hsi.hypotheses", "version": 1,
// "views": [{view_id, width, height, layout_id, joints2d, confidence}]}.
void save_hypotheses(const std::vector<PoseHypothesis>& hyps, const std::string& path);
std::vector<PoseHypothesis> load_hypotheses(const std::string& path);

// Hypotheses rewritten onto body joints for one view.
struct ViewObservation {
    int view_id = 0;
    std::vector<int> body_joint;
    std::vector<Vec2> pixel;
    std::vector<double> confidence;
};

ViewObservation map_to_body(const PoseHypothesis& h);

// Test oracle: projects the ground-truth joints through each camera with
// Gaussian pixel noise. Views whose index is in outlier_views get the joints
// of an independently drawn random body instead. Confidence is 1 for joints
// in front of the camera, 0 behind it.
std::vector<PoseHypothesis> synth_hypotheses(const BodyModel& model, const BodyParams& gt,
                                             const std::vector<Camera>& cameras, double noise_px,
                                             const std::set<int>& outlier_views, std::uint64_t seed,
                                             const std::string& layout_id = "body22");

}  // namespace hsi
