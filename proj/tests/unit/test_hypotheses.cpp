#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "hsi/common/error.hpp"
#include "hsi/hypotheses/hypothesis.hpp"

using namespace hsi;
namespace fs = std::filesystem;

namespace {

const BodyModel& body() {
    static const BodyModel m = capsule_person();
    return m;
}

fs::path tmp_path(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "hsi_test_hyp";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<Camera> ring_cameras(int k, const Vec3& target, double d = 2.0) {
    std::vector<Camera> cams;
    for (int i = 0; i < k; ++i) {
        const double az = 2 * M_PI * i / k;
        cams.push_back(look_at(target + Vec3(d * std::cos(az), d * std::sin(az), 0.5), target, Intrinsics{}, i));
    }
    return cams;
}

}  // namespace

TEST_CASE("layouts and joint maps") {
    CHECK(joint_layout("coco17").names.size() == 17);
    CHECK(joint_layout("body22").names.size() == 22);
    CHECK_NOTHROW(joint_layout("coco17").map.validate(17));
    CHECK_THROWS_AS(joint_layout("openpose25"), ValidationError);
    JointMap bad{{{0, 3}, {1, 3}}};
    CHECK_THROWS_AS(bad.validate(2), ValidationError);
    JointMap out_of_range{{{5, 3}}};
    CHECK_THROWS_AS(out_of_range.validate(2), ValidationError);
}

TEST_CASE("hypothesis file round-trip is bitwise") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 512), c(0, 1);
    std::vector<PoseHypothesis> hyps;
    for (int v = 0; v < 16; ++v) {
        PoseHypothesis h;
        h.view_id = v;
        h.layout_id = v % 2 ? "coco17" : "body22";
        const size_t m = joint_layout(h.layout_id).names.size();
        for (size_t j = 0; j < m; ++j) {
            h.joints2d.emplace_back(u(rng), u(rng));
            h.confidence.push_back(c(rng));
        }
        hyps.push_back(h);
    }
    const auto a = tmp_path("a.json"), b = tmp_path("b.json");
    save_hypotheses(hyps, a.string());
    const auto r = load_hypotheses(a.string());
    CHECK(r == hyps);
    save_hypotheses(r, b.string());
    CHECK(slurp(a) == slurp(b));

    save_hypotheses({}, a.string());
    CHECK(load_hypotheses(a.string()).empty());
}

TEST_CASE("hypothesis validation errors") {
    const std::string head = R"({"format":"hsi.hypotheses","version":1,"views":[{"view_id":0,"layout_id":"body22","joints2d":[)";
    std::string joints, conf;
    for (int j = 0; j < 22; ++j) {
        joints += std::string(j ? "," : "") + "[1,2]";
        conf += std::string(j ? "," : "") + (j == 4 ? "1.5" : "1");
    }
    std::ofstream(tmp_path("conf.json")) << head << joints << R"(],"confidence":[)" << conf << "]}]}";
    CHECK_THROWS_AS(load_hypotheses(tmp_path("conf.json").string()), ValidationError);

    std::ofstream(tmp_path("layout.json")) << R"({"format":"hsi.hypotheses","version":1,"views":[{"view_id":0,"layout_id":"mystery","joints2d":[],"confidence":[]}]})";
    CHECK_THROWS_AS(load_hypotheses(tmp_path("layout.json").string()), ValidationError);
    std::ofstream(tmp_path("trunc.json")) << R"({"format":"hsi.hyp)";
    CHECK_THROWS_AS(load_hypotheses(tmp_path("trunc.json").string()), IoError);
    CHECK_THROWS_AS(load_hypotheses(tmp_path("nope.json").string()), IoError);
}

TEST_CASE("synthetic hypotheses: noiseless equals projection") {
    const BodyModel& m = body();
    BodyParams gt;
    gt.trans = Vec3(0.2, -0.1, 1.0);
    gt.theta[4] = 0.3;
    const auto cams = ring_cameras(6, gt.trans);
    const auto hyps = synth_hypotheses(m, gt, cams, 0.0, {}, 7);
    const auto joints = forward<double>(m, gt).joints;
    REQUIRE(hyps.size() == cams.size());
    for (size_t v = 0; v < cams.size(); ++v) {
        CHECK(hyps[v].view_id == cams[v].view_id);
        for (int j = 0; j < kNumJoints; ++j) {
            Vec2 px;
            REQUIRE(cams[v].project(joints[j], &px));
            CHECK(hyps[v].joints2d[j] == px);
            CHECK(hyps[v].confidence[j] == 1.0);
        }
    }
    CHECK(synth_hypotheses(m, gt, cams, 2.0, {1}, 7) == synth_hypotheses(m, gt, cams, 2.0, {1}, 7));
    CHECK_FALSE(synth_hypotheses(m, gt, cams, 2.0, {1}, 7) == synth_hypotheses(m, gt, cams, 2.0, {1}, 8));
    CHECK_THROWS_AS(synth_hypotheses(m, gt, {}, 0.0, {}, 7), ValidationError);

    const auto coco = synth_hypotheses(m, gt, cams, 0.0, {}, 7, "coco17");
    const auto obs = map_to_body(coco[0]);
    CHECK(obs.body_joint.size() == 13);
    CHECK(coco[0].confidence[1] == 0.0);  // left eye unmapped
}

TEST_CASE("synthetic hypotheses: behind-camera joints get zero confidence") {
    const BodyModel& m = body();
    BodyParams gt;
    // Camera sitting between the head and the pelvis, looking down.
    const Camera cam = look_at(Vec3(0, 0, 0.3), Vec3(0, 0, -1), Intrinsics{}, 0);
    const auto h = synth_hypotheses(m, gt, {cam}, 0.0, {}, 1)[0];
    CHECK(h.confidence[15] == 0.0);  // head above the camera
    CHECK(h.confidence[7] == 1.0);   // ankle below
}

TEST_CASE("synthetic noise statistics") {
    const BodyModel& m = body();
    BodyParams gt;
    gt.trans = Vec3(0, 0, 1);
    const auto cams = ring_cameras(1, gt.trans);
    const auto clean = synth_hypotheses(m, gt, cams, 0.0, {}, 0)[0];
    std::vector<double> sum(kNumJoints, 0.0), sq(kNumJoints, 0.0);
    const int n = 1000;
    for (int s = 0; s < n; ++s) {
        const auto h = synth_hypotheses(m, gt, cams, 2.0, {}, 1000 + s)[0];
        for (int j = 0; j < kNumJoints; ++j) {
            const Vec2 d = h.joints2d[j] - clean.joints2d[j];
            sum[j] += d.x();
            sq[j] += d.x() * d.x();
        }
    }
    for (int j = 0; j < kNumJoints; ++j) {
        const double mean = sum[j] / n;
        const double sd = std::sqrt(sq[j] / n - mean * mean);
        CHECK(std::abs(sd - 2.0) < 0.2);
    }
}
