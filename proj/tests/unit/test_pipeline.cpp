#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hsi/body/params_io.hpp"
#include "hsi/common/error.hpp"
#include "hsi/lifting/collisions.hpp"
#include "hsi/masking/mask_io.hpp"
#include "hsi/pipeline/pipeline.hpp"
#include "support/lift_fixtures.hpp"
#include "support/scenes.hpp"

using namespace hsi;
namespace fs = std::filesystem;

namespace {

const BodyModel& model() {
    static const BodyModel m = capsule_person();
    return m;
}

const Scene& wall() {
    static const Scene s = [] {
        Scene sc;
        sc.mesh = fixture::wall_scene();
        sc.sdf = fixture::scene_sdf(sc.mesh, 64);
        return sc;
    }();
    return s;
}

PipelineConfig small_config(int steps) {
    PipelineConfig c;
    c.point = Vec3(0.0, -0.2, 1.0);  // 10 cm off the wall face
    c.cameras.k = 6;
    c.cameras.patch_samples = 128;
    c.optimizer.steps = steps;
    c.refinement.iterations = 1;
    c.seed = 5;
    return c;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("hsi_pipeline_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

}  // namespace

TEST_CASE("config json round trip and strictness") {
    PipelineConfig c = small_config(123);
    c.scene = "scene.obj";
    c.prompt = "a person sitting";
    c.provider.outlier_views = {1, 4};
    c.provider.command = {"echo", "hi"};
    c.masking.token_indices = {2, 3};
    const nlohmann::json j = to_json(c);
    CHECK(to_json(config_from_json(j)).dump() == j.dump());

    // Partial documents fill in defaults.
    const PipelineConfig d = config_from_json(nlohmann::json{{"optimizer", {{"steps", 7}}}});
    CHECK(d.optimizer.steps == 7);
    CHECK(d.optimizer.lr_phi == doctest::Approx(1e-3));
    CHECK(d.cameras.k == 16);
    CHECK(d.masking.T == 50);

    auto message = [](const nlohmann::json& bad) {
        try {
            config_from_json(bad);
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message({{"optimiser", {}}}).find("optimiser") != std::string::npos);
    CHECK(message({{"energy", {{"lambda_xx", 1}}}}).find("energy.lambda_xx") != std::string::npos);
    CHECK(message({{"point", {1, 2}}}).find("point") != std::string::npos);
    CHECK(message({{"cameras", {{"k", "many"}}}}).find("cameras.k") != std::string::npos);
    CHECK(message({{"provider", {{"kind", "oracle"}}}}).find("oracle") != std::string::npos);
    CHECK(message({{"refinement", {{"dilation", 4}}}}).find("dilation") != std::string::npos);
    CHECK(message({{"provider", {{"kind", "files"}}}}).find("dir") != std::string::npos);
}

TEST_CASE("random ground truth rests on its support") {
    Scene s;
    s.mesh = merge_meshes({fixture::ground(2.0), make_box({-0.4, -0.3, 0.0}, {0.4, 0.3, 0.45})});
    s.sdf = fixture::scene_sdf(s.mesh, 96);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const double sink = 0.01;
        const BodyParams b = random_ground_truth(model(), s.sdf, Vec3(0, 0, 1.4), 0.4, 0.4, sink, seed);
        const auto v = forward<double>(model(), b).vertices;
        CHECK(fixture::min_sdf(v, s.sdf) == doctest::Approx(-sink).epsilon(0).scale(1).epsilon(1e-4));
        CHECK(bvh_collisions(v, model().faces).empty());
        // Standing on the box top, not the ground.
        double low = 1e300;
        for (const Vec3& x : v) low = std::min(low, x.z());
        CHECK(low == doctest::Approx(0.45 - sink).epsilon(0.02));
        CHECK(to_vector(b) == to_vector(random_ground_truth(model(), s.sdf, Vec3(0, 0, 1.4), 0.4, 0.4, sink, seed)));
    }
}

TEST_CASE("noiseless synthetic run recovers the body and refinement keeps E_PF low") {
    PipelineConfig c = small_config(1600);
    c.cameras.k = 8;
    const BodyParams gt = random_ground_truth(model(), wall().sdf, c.point, 0.5, 0.5, 0.01, 11);
    SyntheticProvider provider(model(), gt, c.provider, 3);
    const PipelineRun run = run_pipeline(c, model(), wall(), provider);
    REQUIRE(run.stages.size() == 2);
    CHECK(run.cameras.size() == 8);
    const double e0 = fixture::mean_joint_error(model(), run.stages[0].result.params, gt);
    const double e1 = fixture::mean_joint_error(model(), run.final().params, gt);
    MESSAGE("joint error initial " << e0 << " refined " << e1);
    CHECK(e0 < 0.02);
    CHECK(e1 < 0.02);
    CHECK(run.stages[1].result.final_terms.pf <= run.stages[0].result.final_terms.pf + 1e-6);
    CHECK(run.stages[1].masks.size() == 8);
    for (const Mask& m : run.stages[1].masks) CHECK(count_set(m) > 0);
}

TEST_CASE("zero refinement rounds leave the initial result untouched") {
    PipelineConfig c = small_config(150);
    c.refinement.iterations = 0;
    const BodyParams gt = random_ground_truth(model(), wall().sdf, c.point, 0.3, 0.3, 0.01, 2);
    SyntheticProvider p1(model(), gt, c.provider, 1);
    const PipelineRun a = run_pipeline(c, model(), wall(), p1);
    REQUIRE(a.stages.size() == 1);

    SyntheticProvider p2(model(), gt, c.provider, 1);
    const PipelineRun b = run_initial(c, model(), wall(), p2);
    CHECK(to_vector(a.final().params) == to_vector(b.final().params));

    const fs::path d = fresh_dir("norefine");
    write_outputs(c, a, d.string());
    CHECK(slurp(d / "params.final") == slurp(d / "params.initial"));
    CHECK_FALSE(fs::exists(d / "masks"));
}

TEST_CASE("outputs are complete, loadable and deterministic") {
    PipelineConfig c = small_config(200);
    const BodyParams gt = random_ground_truth(model(), wall().sdf, c.point, 0.3, 0.3, 0.01, 4);
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
        SyntheticProvider provider(model(), gt, c.provider, 9);
        const PipelineRun run = run_pipeline(c, model(), wall(), provider);
        const fs::path d = fresh_dir("det" + std::to_string(rep));
        write_outputs(c, run, d.string());
        auto t = tree(d);
        if (rep == 0) {
            first = t;
            for (const char* f : {"config.json", "cameras/cameras.json", "hypotheses/initial.json",
                                  "hypotheses/refine_1.json", "params.initial", "params.refine_1", "params.final",
                                  "trace.log"})
                CHECK_MESSAGE(t.count(f), f);
            int pngs = 0;
            for (const auto& e : fs::directory_iterator(d / "masks" / "refine_1")) {
                const Mask m = load_mask_png(e.path().string());
                CHECK(m.width == 512);
                ++pngs;
            }
            CHECK(pngs == static_cast<int>(run.cameras.size()));
            CHECK(load_cameras((d / "cameras/cameras.json").string()) == run.cameras);
            CHECK(load_hypotheses((d / "hypotheses/refine_1.json").string()) == run.stages[1].hypotheses);
            const ParamsDocument pd = load_params((d / "params.final").string());
            CHECK(to_vector(pd.params) == to_vector(run.final().params));
            CHECK(pd.view_ids.size() == run.cameras.size());
            CHECK(to_json(load_config((d / "config.json").string())).dump() == to_json(c).dump());
        } else {
            CHECK(t == first);
        }
    }
}

TEST_CASE("files provider reads per-view documents and names missing views") {
    PipelineConfig c = small_config(100);
    const BodyParams gt = random_ground_truth(model(), wall().sdf, c.point, 0.3, 0.3, 0.01, 6);
    const auto cams = sample_cameras(wall().mesh, c.point, c.cameras, c.seed).cameras;
    REQUIRE(cams.size() == 6);
    const auto hyps = synth_hypotheses(model(), gt, cams, 1.0, {}, 8);
    const fs::path d = fresh_dir("files");
    for (const auto& h : hyps) save_hypotheses({h}, (d / ("view_" + std::to_string(h.view_id) + ".json")).string());

    FilesProvider fp(d.string());
    CHECK(fp.acquire(cams, nullptr, 0) == hyps);

    fs::remove(d / "view_3.json");
    try {
        fp.acquire(cams, nullptr, 0);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("view 3") != std::string::npos);
    }
    // Refinement rounds look under round_<r>/.
    CHECK_THROWS_AS(fp.acquire(cams, nullptr, 1), ValidationError);
}

TEST_CASE("adapter provider runs an external command") {
    PipelineConfig c = small_config(100);
    const BodyParams gt = random_ground_truth(model(), wall().sdf, c.point, 0.3, 0.3, 0.01, 6);
    const auto cams = sample_cameras(wall().mesh, c.point, c.cameras, c.seed).cameras;
    REQUIRE(cams.size() == 6);
    const auto hyps = synth_hypotheses(model(), gt, cams, 1.0, {}, 8);
    const fs::path src = fresh_dir("adapter_src");
    for (const auto& h : hyps) save_hypotheses({h}, (src / ("view_" + std::to_string(h.view_id) + ".json")).string());
    const fs::path work = fresh_dir("adapter_work");

    // Copies prepared files to --out and records its arguments.
    const std::string script =
        "log=\"$0\"; : > \"$log\"; while [ $# -gt 0 ]; do printf '%s\\n' \"$1\" >> \"$log\"; "
        "[ \"$1\" = --out ] && out=\"$2\"; shift; done; cp " + src.string() + "/*.json \"$out\"/";
    const std::string log = (work / "args.txt").string();
    AdapterProvider ap({"sh", "-c", script, log}, work.string(), "sit on the bench");
    CHECK(ap.acquire(cams, nullptr, 0) == hyps);
    const std::string args = slurp(log);
    CHECK(args.find("--prompt\nsit on the bench\n") != std::string::npos);
    CHECK(args.find("--round\n0\n") != std::string::npos);
    CHECK(args.find("--masks") == std::string::npos);
    CHECK(load_cameras((work / "round_0" / "cameras.json").string()) == cams);

    std::vector<Mask> masks(cams.size(), Mask(512, 512, 1));
    CHECK(ap.acquire(cams, &masks, 1) == hyps);
    CHECK(slurp(log).find("--masks") != std::string::npos);
    CHECK(fs::exists(work / "round_1" / "masks" / "view_0.png"));

    AdapterProvider failing({"sh", "-c", "exit 4"}, work.string(), "x");
    CHECK_THROWS_WITH_AS(failing.acquire(cams, nullptr, 0), doctest::Contains("status 4"), IoError);
    AdapterProvider missing({"/nonexistent/adapter"}, work.string(), "x");
    CHECK_THROWS_AS(missing.acquire(cams, nullptr, 0), IoError);
}

TEST_CASE("synthetic refinement rounds drop joints outside the mask") {
    PipelineConfig c = small_config(100);
    const BodyParams gt = random_ground_truth(model(), wall().sdf, c.point, 0.3, 0.3, 0.01, 6);
    const auto cams = sample_cameras(wall().mesh, c.point, c.cameras, c.seed).cameras;
    REQUIRE(cams.size() == 6);
    c.provider.outlier_views = {0};
    c.provider.noise_px = 3.0;
    SyntheticProvider p(model(), gt, c.provider, 2);

    std::vector<Mask> masks(cams.size(), Mask(512, 512, 0));
    masks[1] = Mask(512, 512, 1);
    const auto hyps = p.acquire(cams, &masks, 1);
    const auto exact = synth_hypotheses(model(), gt, cams, 0.0, {}, 0);
    for (size_t v = 0; v < cams.size(); ++v) {
        double conf = 0;
        for (double w : hyps[v].confidence) conf += w;
        if (v == 1) {
            CHECK(conf > 0);
            // No outliers and no noise in refinement rounds by default.
            CHECK(hyps[v].joints2d == exact[v].joints2d);
        } else {
            CHECK(conf == 0);
        }
    }
    CHECK_THROWS_AS(p.acquire(cams, nullptr, 1), ValidationError);
}
