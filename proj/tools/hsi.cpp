// Command-line front end: one subcommand per pipeline stage plus a full run.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "hsi/body/params_io.hpp"
#include "hsi/common/error.hpp"
#include "hsi/masking/mask_io.hpp"
#include "hsi/masking/protocol.hpp"
#include "hsi/metrics/metrics.hpp"
#include "hsi/pipeline/pipeline.hpp"

using namespace hsi;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kOptimization = 3, kBackend = 4 };

BodyModel body_model(const std::string& path) { return path.empty() ? capsule_person() : load_body_model(path); }

Vec3 to_vec3(const std::vector<double>& v) { return Vec3(v[0], v[1], v[2]); }

void print_terms(const EnergyTerms& e) {
    std::printf("total %.6g  pf %.6g  vs %.6g  bp %.6g  bs %.6g  sc %.6g  sp %.6g\n", e.total, e.pf, e.vs, e.bp, e.bs,
                e.sc, e.sp);
}

ParamsDocument document(const LiftResult& r, const std::vector<Camera>& cams) {
    ParamsDocument d;
    d.params = r.params;
    for (const Camera& c : cams) d.view_ids.push_back(c.view_id);
    d.view_weights = r.view_weights.weights();
    const EnergyTerms& e = r.final_terms;
    d.energy = {{"total", e.total}, {"pf", e.pf}, {"vs", e.vs}, {"bp", e.bp}, {"bs", e.bs}, {"sc", e.sc}, {"sp", e.sp}};
    return d;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-scene interaction synthesis from multi-view 2D pose hypotheses"};
    app.require_subcommand(1);
    std::string model_path;
    bool verbose = false, quiet = false;
    app.add_option("--model", model_path, "Body model file (default: built-in capsule body)");
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

    // config
    auto* cmd_config = app.add_subcommand("config", "Write the default configuration");
    std::string config_out = "-";
    cmd_config->add_option("-o,--out", config_out, "Output file ('-' for stdout)");

    // sdf
    auto* cmd_sdf = app.add_subcommand("sdf", "Build a signed distance grid from a scene mesh");
    std::string sdf_mesh, sdf_out;
    std::uint32_t sdf_res = 96;
    double sdf_pad = 0.2;
    cmd_sdf->add_option("--mesh", sdf_mesh)->required()->check(CLI::ExistingFile);
    cmd_sdf->add_option("--resolution", sdf_res)->check(CLI::Range(2u, 1024u));
    cmd_sdf->add_option("--padding", sdf_pad);
    cmd_sdf->add_option("-o,--out", sdf_out)->required();

    // cameras
    auto* cmd_cams = app.add_subcommand("cameras", "Sample virtual cameras around an interaction point");
    std::string cams_mesh, cams_out;
    std::vector<double> cams_point;
    CameraSamplingConfig cams_cfg;
    std::uint64_t cams_seed = 0;
    cmd_cams->add_option("--mesh", cams_mesh)->required()->check(CLI::ExistingFile);
    cmd_cams->add_option("--point", cams_point)->required()->expected(3);
    cmd_cams->add_option("-k", cams_cfg.k);
    cmd_cams->add_option("-d,--distance", cams_cfg.d);
    cmd_cams->add_option("-r,--radius", cams_cfg.r);
    cmd_cams->add_option("--seed", cams_seed);
    cmd_cams->add_option("-o,--out", cams_out)->required();

    // synth
    auto* cmd_synth = app.add_subcommand("synth", "Synthetic hypotheses from ground-truth parameters");
    std::string synth_cams, synth_gt, synth_out, synth_dir;
    double synth_noise = 0.0;
    std::vector<int> synth_outliers;
    std::uint64_t synth_seed = 0;
    cmd_synth->add_option("--cameras", synth_cams)->required()->check(CLI::ExistingFile);
    cmd_synth->add_option("--gt", synth_gt, "Ground-truth parameter file")->required()->check(CLI::ExistingFile);
    cmd_synth->add_option("--noise", synth_noise, "Pixel noise sd");
    cmd_synth->add_option("--outliers", synth_outliers, "Camera indices replaced by an unrelated pose");
    cmd_synth->add_option("--seed", synth_seed);
    cmd_synth->add_option("-o,--out", synth_out, "Single hypotheses file");
    cmd_synth->add_option("--per-view", synth_dir, "Directory of view_<id>.json files");

    // lift
    auto* cmd_lift = app.add_subcommand("lift", "Fit body parameters to hypotheses");
    std::string lift_cfg, lift_sdf, lift_cams, lift_hyps, lift_init, lift_out;
    std::vector<double> lift_point;
    int lift_steps = -1;
    cmd_lift->add_option("--config", lift_cfg, "Energy and optimizer settings")->check(CLI::ExistingFile);
    cmd_lift->add_option("--sdf", lift_sdf)->check(CLI::ExistingFile);
    cmd_lift->add_option("--cameras", lift_cams)->required()->check(CLI::ExistingFile);
    cmd_lift->add_option("--hypotheses", lift_hyps)->required()->check(CLI::ExistingFile);
    cmd_lift->add_option("--point", lift_point, "Default init location")->expected(3);
    cmd_lift->add_option("--init", lift_init, "Initial parameter file")->check(CLI::ExistingFile);
    cmd_lift->add_option("--steps", lift_steps);
    cmd_lift->add_option("-o,--out", lift_out)->required();

    // run / refine
    auto* cmd_run = app.add_subcommand("run", "Full pipeline: cameras, hypotheses, lifting, refinement");
    std::string run_cfg, run_out;
    cmd_run->add_option("config", run_cfg)->required()->check(CLI::ExistingFile);
    cmd_run->add_option("-o,--out", run_out, "Output directory (overrides the config)");

    auto* cmd_refine = app.add_subcommand("refine", "Refinement rounds on top of an existing fit");
    std::string ref_cfg, ref_params, ref_cams, ref_out;
    int ref_rounds = 1;
    cmd_refine->add_option("config", ref_cfg)->required()->check(CLI::ExistingFile);
    cmd_refine->add_option("--params", ref_params)->required()->check(CLI::ExistingFile);
    cmd_refine->add_option("--cameras", ref_cams)->required()->check(CLI::ExistingFile);
    cmd_refine->add_option("--rounds", ref_rounds)->check(CLI::PositiveNumber);
    cmd_refine->add_option("-o,--out", ref_out)->required();

    // eval
    auto* cmd_eval = app.add_subcommand("eval", "Plausibility and diversity metrics");
    std::string eval_sdf, eval_json, eval_csv;
    std::vector<std::string> eval_params;
    int eval_clusters = 20;
    std::uint64_t eval_seed = 0;
    cmd_eval->add_option("--sdf", eval_sdf)->required()->check(CLI::ExistingFile);
    cmd_eval->add_option("params", eval_params)->required()->check(CLI::ExistingFile);
    cmd_eval->add_option("--clusters", eval_clusters)->check(CLI::PositiveNumber);
    cmd_eval->add_option("--seed", eval_seed);
    cmd_eval->add_option("--json", eval_json);
    cmd_eval->add_option("--csv", eval_csv);

    // mask
    auto* cmd_mask = app.add_subcommand("mask", "Run the attention-driven inpainting mask loop");
    std::string mask_backend;
    std::string mask_prompt = "a person", mask_out;
    int mask_size = 512;
    std::uint64_t mask_seed = 0;
    MaskingConfig mask_cfg;
    cmd_mask->add_option("--backend-cmd", mask_backend, "Backend command line, split on whitespace (default: built-in mock)");
    cmd_mask->add_option("--prompt", mask_prompt);
    cmd_mask->add_option("--size", mask_size, "Square input image size")->check(CLI::PositiveNumber);
    cmd_mask->add_option("-T,--steps", mask_cfg.T);
    cmd_mask->add_option("--t-min", mask_cfg.T_min);
    cmd_mask->add_option("--threshold", mask_cfg.threshold);
    cmd_mask->add_option("--tokens", mask_cfg.token_indices);
    cmd_mask->add_option("--seed", mask_seed);
    cmd_mask->add_option("-o,--out", mask_out)->required();

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (*cmd_config) {
            const std::string text = to_json(PipelineConfig{}).dump(2) + "\n";
            if (config_out == "-") {
                std::cout << text;
            } else {
                std::ofstream(config_out) << text;
            }
        } else if (*cmd_sdf) {
            Warnings w;
            const SdfGrid g = build_sdf(load_mesh(sdf_mesh), {sdf_res, sdf_res, sdf_res}, sdf_pad, &w);
            save_sdf(g, sdf_out);
        } else if (*cmd_cams) {
            const CameraSampling cs = sample_cameras(load_mesh(cams_mesh), to_vec3(cams_point), cams_cfg, cams_seed);
            if (cs.cameras.empty()) throw ValidationError("no camera sees the interaction point");
            save_cameras(cs.cameras, cams_out);
            for (size_t i = 0; i < cs.cameras.size(); ++i)
                std::printf("view %d  visible %.3f\n", cs.cameras[i].view_id, cs.scores[i]);
        } else if (*cmd_synth) {
            if (synth_out.empty() && synth_dir.empty()) throw ValidationError("synth: give --out and/or --per-view");
            const BodyModel m = body_model(model_path);
            const auto hyps = synth_hypotheses(m, load_params(synth_gt).params, load_cameras(synth_cams), synth_noise,
                                               {synth_outliers.begin(), synth_outliers.end()}, synth_seed);
            if (!synth_out.empty()) save_hypotheses(hyps, synth_out);
            if (!synth_dir.empty()) {
                fs::create_directories(synth_dir);
                for (const auto& h : hyps)
                    save_hypotheses({h}, (fs::path(synth_dir) / ("view_" + std::to_string(h.view_id) + ".json")).string());
            }
        } else if (*cmd_lift) {
            const PipelineConfig cfg = lift_cfg.empty() ? PipelineConfig{} : load_config(lift_cfg);
            const BodyModel m = body_model(model_path);
            SdfGrid sdf;
            if (!lift_sdf.empty()) sdf = load_sdf(lift_sdf);
            const auto cams = load_cameras(lift_cams);
            const LiftProblem pr = make_problem(m, lift_sdf.empty() ? nullptr : &sdf, cams, load_hypotheses(lift_hyps), cfg.energy);
            OptimizerConfig oc = cfg.optimizer;
            if (lift_steps >= 0) oc.steps = lift_steps;
            BodyParams init;
            if (!lift_init.empty()) {
                init = load_params(lift_init).params;
            } else {
                init = default_init(lift_point.empty() ? cfg.point : to_vec3(lift_point));
            }
            const LiftResult r = optimize(pr, init, oc);
            save_params(document(r, cams), lift_out);
            print_terms(r.final_terms);
        } else if (*cmd_run) {
            PipelineConfig cfg = load_config(run_cfg);
            if (!run_out.empty()) cfg.output = run_out;
            const BodyModel m = body_model(model_path);
            const Scene scene = load_scene(cfg);
            auto provider = make_provider(cfg, m, scene);
            const PipelineRun run = run_pipeline(cfg, m, scene, *provider);
            write_outputs(cfg, run, cfg.output);
            print_terms(run.final().final_terms);
        } else if (*cmd_refine) {
            const PipelineConfig cfg = load_config(ref_cfg);
            const BodyModel m = body_model(model_path);
            const Scene scene = load_scene(cfg);
            auto provider = make_provider(cfg, m, scene);
            PipelineRun run;
            run.cameras = load_cameras(ref_cams);
            Stage start;
            start.name = "initial";
            const ParamsDocument d = load_params(ref_params);
            start.result.params = d.params;
            start.result.view_weights = ViewWeights::constant(run.cameras.size(), cfg.optimizer.init_view_weight);
            start.result.final_terms.total = d.energy.count("total") ? d.energy.at("total") : 0.0;
            run.stages.push_back(start);
            for (int i = 0; i < ref_rounds; ++i) refine(cfg, m, scene, *provider, run);
            write_outputs(cfg, run, ref_out);
            print_terms(run.final().final_terms);
        } else if (*cmd_eval) {
            const BodyModel m = body_model(model_path);
            std::vector<BodyParams> ps;
            for (const auto& f : eval_params) ps.push_back(load_params(f).params);
            const EvalReport r = evaluate(m, ps, load_sdf(eval_sdf), eval_clusters, eval_seed);
            if (!eval_json.empty()) save_report_json(r, eval_json);
            if (!eval_csv.empty()) save_report_csv(r, eval_csv);
            std::printf("non_collision %.4f  contact %.4f", r.non_collision, r.contact);
            if (r.entropy) std::printf("  entropy %.4f  cluster_size %.4f", *r.entropy, *r.cluster_size);
            std::printf("\n");
        } else if (*cmd_mask) {
            std::unique_ptr<InpaintBackend> backend;
            if (mask_backend.empty()) {
                backend = std::make_unique<MockInpaintBackend>();
            } else {
                std::istringstream words(mask_backend);
                std::vector<std::string> args{std::istream_iterator<std::string>(words), {}};
                backend = std::make_unique<ProcessBackend>(args);
            }
            const RgbImage image(mask_size, mask_size, Rgb{128, 128, 128});
            const InpaintResult r = run_inpaint_loop(*backend, image, mask_prompt, mask_cfg, mask_seed);
            fs::create_directories(mask_out);
            for (size_t t = 0; t < r.masks.size(); ++t) {
                char name[32];
                std::snprintf(name, sizeof name, "mask_t%03zu.png", t);
                save_mask_png(r.masks[t], (fs::path(mask_out) / name).string());
            }
            save_mask_png(r.final_mask, (fs::path(mask_out) / "final_mask.png").string());
            std::printf("%d mask updates, final mask %zu px\n", r.updates, count_set(r.final_mask));
        }
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return kInvalid;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kInvalid;
    } catch (const OptimizationError& e) {
        spdlog::error("{}", e.what());
        return kOptimization;
    } catch (const BackendError& e) {
        spdlog::error("{}", e.what());
        return kBackend;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kFailure;
    }
    return kOk;
}
