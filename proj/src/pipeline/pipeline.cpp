#include <spawn.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <spdlog/spdlog.h>

#include "hsi/body/params_io.hpp"
#include "hsi/common/error.hpp"
#include "hsi/common/parallel.hpp"
#include "hsi/lifting/collisions.hpp"
#include "hsi/masking/mask_io.hpp"
#include "hsi/pipeline/pipeline.hpp"

extern char** environ;

namespace hsi {

namespace fs = std::filesystem;

Scene load_scene(const PipelineConfig& cfg) {
    if (cfg.scene.empty()) throw ValidationError("config: scene mesh path is required");
    Scene s;
    s.mesh = load_mesh(cfg.scene);
    if (!cfg.sdf.empty() && fs::exists(cfg.sdf)) {
        s.sdf = load_sdf(cfg.sdf);
    } else {
        const std::uint32_t n = cfg.sdf_resolution;
        s.sdf = build_sdf(s.mesh, {n, n, n}, cfg.sdf_padding);
        if (!cfg.sdf.empty()) save_sdf(s.sdf, cfg.sdf);
    }
    return s;
}

// ---- providers ----

SyntheticProvider::SyntheticProvider(const BodyModel& model, BodyParams gt, ProviderConfig cfg, std::uint64_t seed)
    : model_(model), gt_(std::move(gt)), cfg_(std::move(cfg)), seed_(seed) {}

std::vector<PoseHypothesis> SyntheticProvider::acquire(const std::vector<Camera>& cameras,
                                                       const std::vector<Mask>* masks, int round) {
    const std::uint64_t seed = seed_ + 7919ull * static_cast<std::uint64_t>(round);
    if (round == 0) return synth_hypotheses(model_, gt_, cameras, cfg_.noise_px, cfg_.outlier_views, seed);

    if (!masks || masks->size() != cameras.size())
        throw ValidationError("synthetic provider: refinement round needs one mask per camera");
    auto hyps = synth_hypotheses(model_, gt_, cameras, cfg_.refine_noise_px, {}, seed);
    const auto joints = forward<double>(model_, gt_).joints;
    for (size_t v = 0; v < cameras.size(); ++v) {
        const Mask& m = (*masks)[v];
        for (int j = 0; j < kNumJoints; ++j) {
            Vec2 px;
            bool inside = cameras[v].project(joints[j], &px);
            if (inside) {
                const int x = static_cast<int>(std::floor(px.x())), y = static_cast<int>(std::floor(px.y()));
                inside = m.contains(x, y) && m(x, y) != 0;
            }
            if (!inside) hyps[v].confidence[j] = 0.0;
        }
    }
    return hyps;
}

namespace {

std::vector<PoseHypothesis> read_view_files(const fs::path& dir, const std::vector<Camera>& cameras) {
    std::vector<PoseHypothesis> out;
    for (const Camera& c : cameras) {
        const fs::path f = dir / ("view_" + std::to_string(c.view_id) + ".json");
        if (!fs::exists(f))
            throw ValidationError("no hypothesis file for view " + std::to_string(c.view_id) + " (" + f.string() + ")");
        auto hs = load_hypotheses(f.string());
        if (hs.size() != 1 || hs[0].view_id != c.view_id)
            throw ValidationError(f.string() + ": expected exactly one hypothesis for view " + std::to_string(c.view_id));
        out.push_back(std::move(hs[0]));
    }
    return out;
}

int run_command(const std::vector<std::string>& argv) {
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    pid_t pid;
    if (posix_spawnp(&pid, args[0], nullptr, nullptr, args.data(), environ) != 0)
        throw IoError("cannot start adapter command '" + argv[0] + "'");
    int status = 0;
    if (waitpid(pid, &status, 0) < 0) throw IoError("waitpid failed for adapter command");
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128;
}

}  // namespace

std::vector<PoseHypothesis> FilesProvider::acquire(const std::vector<Camera>& cameras, const std::vector<Mask>*,
                                                   int round) {
    fs::path dir = dir_;
    if (round > 0) dir /= "round_" + std::to_string(round);
    return read_view_files(dir, cameras);
}

std::vector<PoseHypothesis> AdapterProvider::acquire(const std::vector<Camera>& cameras,
                                                     const std::vector<Mask>* masks, int round) {
    const fs::path base = fs::path(workdir_) / ("round_" + std::to_string(round));
    fs::create_directories(base / "out");
    save_cameras(cameras, (base / "cameras.json").string());
    std::vector<std::string> argv = command_;
    argv.insert(argv.end(), {"--cameras", (base / "cameras.json").string(), "--prompt", prompt_, "--round",
                             std::to_string(round), "--out", (base / "out").string()});
    if (masks) {
        fs::create_directories(base / "masks");
        for (size_t v = 0; v < cameras.size(); ++v)
            save_mask_png((*masks)[v], (base / "masks" / ("view_" + std::to_string(cameras[v].view_id) + ".png")).string());
        argv.insert(argv.end(), {"--masks", (base / "masks").string()});
    }
    const int rc = run_command(argv);
    if (rc != 0) throw IoError("adapter command exited with status " + std::to_string(rc));
    return read_view_files(base / "out", cameras);
}

Posture parse_posture(const std::string& s) {
    if (s == "standing") return Posture::standing;
    if (s == "seated") return Posture::seated;
    throw ValidationError("unknown posture '" + s + "'");
}

BodyParams random_ground_truth(const BodyModel& model, const SdfGrid& sdf, const Vec3& p, double theta_sd,
                               double phi_sd, double sink, std::uint64_t seed, double yaw_max, Posture posture) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    for (int attempt = 0; attempt < 1000; ++attempt) {
        BodyParams b;
        for (int i = 0; i < kLatentDim; ++i) b.theta[i] = theta_sd * n(rng);
        if (posture == Posture::seated) {
            // Hip flexion (columns 0, 1) and knee flexion (4, 5), 1.5 rad each.
            b.theta[0] += 1.875;
            b.theta[1] += 1.875;
            b.theta[4] -= 1.875;
            b.theta[5] -= 1.875;
        }
        for (int i = 0; i < kShapeDim; ++i) b.phi[i] = phi_sd * n(rng);
        const double yaw = yaw_max * u(rng);
        b.rot6d << std::cos(yaw), std::sin(yaw), 0, -std::sin(yaw), std::cos(yaw), 0;
        b.trans = Vec3(p.x() + 0.05 * u(rng), p.y() + 0.05 * u(rng), 0.0);
        const auto rest = forward<double>(model, b).vertices;
        if (!bvh_collisions(rest, model.faces).empty()) continue;

        double zmin = 1e300;
        for (const Vec3& v : rest) zmin = std::min(zmin, v.z());
        // f(dz) = min sdf after lifting by dz, plus sink; root where the body
        // is lowered exactly `sink` into whatever lies below it.
        auto f = [&](double dz) {
            double m = 1e300;
            for (const Vec3& v : rest) m = std::min(m, sdf.sample(Vec3(v.x(), v.y(), v.z() + dz)));
            return m + sink;
        };
        double hi = p.z() + 0.3 - zmin;
        if (f(hi) <= 0) continue;
        double lo = hi;
        bool found = false;
        for (int i = 0; i < 120 && !found; ++i) {
            lo -= 0.05;
            found = f(lo) <= 0;
            if (!found) hi = lo;
        }
        if (!found) continue;
        for (int i = 0; i < 50; ++i) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) > 0 ? hi : lo) = mid;
        }
        b.trans.z() = hi;
        const auto placed = forward<double>(model, b);
        if (posture == Posture::seated) {
            // A seated draw that came to rest on its feet is not seated.
            if (std::abs(placed.joints[0].z() - p.z()) > 0.2) continue;
        } else {
            // Standing means the feet carry it, not an arm over a wall top.
            double low = 1e300, contact_z = 0, best = 1e300;
            for (const Vec3& v : placed.vertices) {
                low = std::min(low, v.z());
                const double d = sdf.sample(v);
                if (d < best) best = d, contact_z = v.z();
            }
            if (contact_z > low + 0.05) continue;
        }
        return b;
    }
    throw ValidationError("could not place a ground-truth body near the interaction point");
}

std::unique_ptr<HypothesisProvider> make_provider(const PipelineConfig& cfg, const BodyModel& model,
                                                  const Scene& scene) {
    const ProviderConfig& p = cfg.provider;
    if (p.kind == "files") return std::make_unique<FilesProvider>(p.dir);
    if (p.kind == "adapter")
        return std::make_unique<AdapterProvider>(p.command, (fs::path(cfg.output) / "adapter").string(), cfg.prompt);
    BodyParams gt = p.gt_params.empty()
                        ? random_ground_truth(model, scene.sdf, cfg.point, p.gt_theta_sd, p.gt_phi_sd, p.gt_sink, cfg.seed,
                                              p.gt_yaw_max_deg * M_PI / 180.0, parse_posture(p.gt_posture))
                        : load_params(p.gt_params).params;
    return std::make_unique<SyntheticProvider>(model, std::move(gt), p, cfg.seed + 1);
}

// ---- stages ----

namespace {

void log_stage(const Stage& s) {
    const EnergyTerms& e = s.result.final_terms;
    spdlog::info("{}: total {:.6g} (pf {:.6g}, sc {:.6g}, sp {:.6g})", s.name, e.total, e.pf, e.sc, e.sp);
}

}  // namespace

PipelineRun run_initial(const PipelineConfig& cfg, const BodyModel& model, const Scene& scene,
                        HypothesisProvider& provider) {
    cfg.validate();
    PipelineRun run;
    CameraSampling cs = sample_cameras(scene.mesh, cfg.point, cfg.cameras, cfg.seed);
    for (auto& m : cs.warnings.messages) run.warnings.messages.push_back(m);
    if (cs.cameras.empty()) throw ValidationError("no sampled camera sees the interaction point");
    run.cameras = std::move(cs.cameras);

    Stage s;
    s.name = "initial";
    s.hypotheses = provider.acquire(run.cameras, nullptr, 0);
    const LiftProblem pr = make_problem(model, &scene.sdf, run.cameras, s.hypotheses, cfg.energy);
    OptimizerConfig oc = cfg.optimizer;
    oc.seed = cfg.seed;
    s.result = optimize(pr, default_init(cfg.point), oc);
    for (auto& m : s.result.warnings.messages) run.warnings.messages.push_back(m);
    log_stage(s);
    run.stages.push_back(std::move(s));
    return run;
}

void refine(const PipelineConfig& cfg, const BodyModel& model, const Scene& scene, HypothesisProvider& provider,
            PipelineRun& run) {
    if (run.stages.empty()) throw ValidationError("refine: no initial stage");
    const BodyParams current = run.final().params;
    const TriMesh body{forward<double>(model, current).vertices, model.faces};

    Stage s;
    const int round = static_cast<int>(run.stages.size());
    s.name = "refine_" + std::to_string(round);
    s.masks.resize(run.cameras.size());
    parallel_for(run.cameras.size(),
                 [&](size_t v) { s.masks[v] = silhouette_mask(body, run.cameras[v], cfg.refinement.dilation); });
    s.hypotheses = provider.acquire(run.cameras, &s.masks, round);
    const LiftProblem pr = make_problem(model, &scene.sdf, run.cameras, s.hypotheses, cfg.energy);
    OptimizerConfig oc = cfg.optimizer;
    oc.seed = cfg.seed;
    s.result = optimize(pr, cfg.refinement.warm_start ? current : default_init(cfg.point), oc);
    for (auto& m : s.result.warnings.messages) run.warnings.messages.push_back(m);
    log_stage(s);
    run.stages.push_back(std::move(s));
}

PipelineRun run_pipeline(const PipelineConfig& cfg, const BodyModel& model, const Scene& scene,
                         HypothesisProvider& provider) {
    PipelineRun run = run_initial(cfg, model, scene, provider);
    for (int i = 0; i < cfg.refinement.iterations; ++i) refine(cfg, model, scene, provider, run);
    return run;
}

void write_outputs(const PipelineConfig& cfg, const PipelineRun& run, const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root / "cameras");
    fs::create_directories(root / "hypotheses");
    save_config(cfg, (root / "config.json").string());
    save_cameras(run.cameras, (root / "cameras" / "cameras.json").string());

    std::ofstream trace(root / "trace.log");
    if (!trace) throw IoError("cannot write " + (root / "trace.log").string());
    trace << "# stage step total pf vs bp bs sc sp\n";

    auto doc_of = [&](const LiftResult& r) {
        ParamsDocument d;
        d.params = r.params;
        for (const Camera& c : run.cameras) d.view_ids.push_back(c.view_id);
        d.view_weights = r.view_weights.weights();
        const EnergyTerms& e = r.final_terms;
        d.energy = {{"total", e.total}, {"pf", e.pf}, {"vs", e.vs}, {"bp", e.bp},
                    {"bs", e.bs},       {"sc", e.sc}, {"sp", e.sp}};
        return d;
    };

    char line[512];
    for (const Stage& s : run.stages) {
        save_hypotheses(s.hypotheses, (root / "hypotheses" / (s.name + ".json")).string());
        if (!s.masks.empty()) {
            fs::create_directories(root / "masks" / s.name);
            for (size_t v = 0; v < s.masks.size(); ++v)
                save_mask_png(s.masks[v],
                              (root / "masks" / s.name / ("view_" + std::to_string(run.cameras[v].view_id) + ".png")).string());
        }
        save_params(doc_of(s.result), (root / ("params." + s.name)).string());
        for (const TraceEntry& t : s.result.trace) {
            const EnergyTerms& e = t.terms;
            std::snprintf(line, sizeof line, "%s %d %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", s.name.c_str(),
                          t.step, e.total, e.pf, e.vs, e.bp, e.bs, e.sc, e.sp);
            trace << line;
        }
    }
    save_params(doc_of(run.final()), (root / "params.final").string());
}

}  // namespace hsi
