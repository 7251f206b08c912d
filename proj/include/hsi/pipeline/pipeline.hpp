#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hsi/body/body_model.hpp"
#include "hsi/common/image.hpp"
#include "hsi/hypotheses/hypothesis.hpp"
#include "hsi/lifting/optimize.hpp"
#include "hsi/pipeline/config.hpp"
#include "hsi/scene/mesh.hpp"
#include "hsi/scene/sdf.hpp"

namespace hsi {

struct Scene {
    TriMesh mesh;
    SdfGrid sdf;
};

Scene load_scene(const PipelineConfig& cfg);

// Source of 2D pose hypotheses for a set of views. Round 0 is the initial
// acquisition; round r > 0 is refinement round r, with one inpainting mask per
// camera (same order).
class HypothesisProvider {
public:
    virtual ~HypothesisProvider() = default;
    virtual std::vector<PoseHypothesis> acquire(const std::vector<Camera>& cameras, const std::vector<Mask>* masks,
                                                int round) = 0;
};

// Ground-truth projections. Round 0: Gaussian noise and outlier views as
// configured. Refinement rounds: joints whose ground-truth pixel falls
// outside the view's mask get confidence 0; no outliers.
class SyntheticProvider : public HypothesisProvider {
public:
    SyntheticProvider(const BodyModel& model, BodyParams gt, ProviderConfig cfg, std::uint64_t seed);
    std::vector<PoseHypothesis> acquire(const std::vector<Camera>& cameras, const std::vector<Mask>* masks,
                                        int round) override;
    const BodyParams& ground_truth() const { return gt_; }

private:
    const BodyModel& model_;
    BodyParams gt_;
    ProviderConfig cfg_;
    std::uint64_t seed_;
};

// Reads <dir>/view_<id>.json (round 0) or <dir>/round_<r>/view_<id>.json.
class FilesProvider : public HypothesisProvider {
public:
    explicit FilesProvider(std::string dir) : dir_(std::move(dir)) {}
    std::vector<PoseHypothesis> acquire(const std::vector<Camera>& cameras, const std::vector<Mask>* masks,
                                        int round) override;

private:
    std::string dir_;
};

// Runs an external command, then reads its per-view files like FilesProvider.
// The command gets: --cameras <json> --prompt <text> --round <r> --out <dir>
// [--masks <dir>] with masks as masks/view_<id>.png.
class AdapterProvider : public HypothesisProvider {
public:
    AdapterProvider(std::vector<std::string> command, std::string workdir, std::string prompt)
        : command_(std::move(command)), workdir_(std::move(workdir)), prompt_(std::move(prompt)) {}
    std::vector<PoseHypothesis> acquire(const std::vector<Camera>& cameras, const std::vector<Mask>* masks,
                                        int round) override;

private:
    std::vector<std::string> command_;
    std::string workdir_;
    std::string prompt_;
};

enum class Posture { standing, seated };
Posture parse_posture(const std::string& s);

// Random articulated body (seated: hips and knees flexed about 86 degrees
// before the noise) near (p.x, p.y), turned about z by at most yaw_max and
// lowered until it sits `sink` inside whatever supports it. Nothing
// penetrates deeper than `sink`. Rejected: self-collision, standing draws
// supported by anything but their lowest 5 cm, seated draws whose pelvis
// ends up more than 20 cm from p.z.
BodyParams random_ground_truth(const BodyModel& model, const SdfGrid& sdf, const Vec3& p, double theta_sd,
                               double phi_sd, double sink, std::uint64_t seed, double yaw_max = M_PI / 3,
                               Posture posture = Posture::standing);

std::unique_ptr<HypothesisProvider> make_provider(const PipelineConfig& cfg, const BodyModel& model, const Scene& scene);

struct Stage {
    std::string name;  // "initial", "refine_1", ...
    std::vector<PoseHypothesis> hypotheses;
    std::vector<Mask> masks;  // refinement stages only
    LiftResult result;
};

struct PipelineRun {
    std::vector<Camera> cameras;
    std::vector<Stage> stages;
    Warnings warnings;
    const LiftResult& final() const { return stages.back().result; }
};

// Camera sampling, hypothesis acquisition and lifting.
PipelineRun run_initial(const PipelineConfig& cfg, const BodyModel& model, const Scene& scene,
                        HypothesisProvider& provider);

// One more refinement round on top of `run`: silhouette masks of the current
// body, fresh hypotheses, lifting warm-started at the current parameters
// (or from the default init when warm_start is off).
void refine(const PipelineConfig& cfg, const BodyModel& model, const Scene& scene, HypothesisProvider& provider,
            PipelineRun& run);

// run_initial followed by cfg.refinement.iterations refinement rounds.
PipelineRun run_pipeline(const PipelineConfig& cfg, const BodyModel& model, const Scene& scene,
                         HypothesisProvider& provider);

// Output layout: config.json, cameras/cameras.json, hypotheses/<stage>.json,
// masks/<stage>/view_<id>.png, params.<stage>, params.final, trace.log.
void write_outputs(const PipelineConfig& cfg, const PipelineRun& run, const std::string& dir);

}  // namespace hsi
