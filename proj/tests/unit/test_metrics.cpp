#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "hsi/common/error.hpp"
#include "hsi/metrics/metrics.hpp"
#include "hsi/scene/mesh.hpp"

using namespace hsi;

namespace {

const SdfGrid& slab() {
    static const SdfGrid g = build_sdf(make_box({-1, -1, -0.5}, {1, 1, 0}), {48, 48, 48}, 0.2);
    return g;
}

VertexSet grid_points(int n, double z0, double z1) {
    VertexSet v;
    for (int i = 0; i < n; ++i) v.push_back(Vec3(-0.5 + (i % 25) * 0.04, -0.3 + (i / 25) * 0.02, z0 + (z1 - z0) * (i % 7) / 6.0));
    return v;
}

double entropy_of(const std::vector<int>& labels) {
    std::map<int, int> h;
    for (int l : labels) ++h[l];
    double e = 0;
    for (auto [k, c] : h) {
        const double p = double(c) / labels.size();
        e -= p * std::log2(p);
    }
    return e;
}

}  // namespace

TEST_CASE("non_collision and contact") {
    const SdfGrid& g = slab();
    const VertexSet above = grid_points(600, 0.05, 0.8);
    const VertexSet inside = grid_points(600, -0.35, -0.1);
    CHECK(non_collision({above}, g) == 1.0);
    CHECK(non_collision({inside}, g) == 0.0);
    CHECK(contact({above}, g) == 0.0);

    VertexSet ten = above;
    for (int i = 0; i < 10; ++i) ten[i * 37].z() = -0.05;
    CHECK(non_collision({ten}, g) == 590.0 / 600.0);
    CHECK(contact({ten}, g) == 1.0);

    VertexSet resting = above;
    resting[3].z() = 0.0;  // exactly on the surface counts as contact
    CHECK(slab().sample(resting[3]) <= 0.0);
    CHECK(contact({resting, ten, resting, above}, g) == 0.75);
    CHECK(contact({resting, ten}, g) == 1.0);
    CHECK_THROWS_AS(non_collision({}, g), ValidationError);
    CHECK_THROWS_AS(contact({}, g), ValidationError);
}

TEST_CASE("metrics equal an exhaustive scan") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    std::vector<VertexSet> bodies;
    for (int b = 0; b < 12; ++b) {
        VertexSet v;
        const double off = 0.3 * u(rng);
        for (int i = 0; i < 300; ++i) v.push_back(Vec3(u(rng), u(rng), off + 0.2 * u(rng)));
        bodies.push_back(v);
    }
    double nc = 0;
    int touching = 0;
    for (const auto& v : bodies) {
        int out = 0;
        bool t = false;
        for (const auto& p : v) {
            const double d = slab().sample(p);
            out += d > 0;
            t |= d <= 0;
        }
        nc += double(out) / v.size();
        touching += t;
    }
    CHECK(non_collision(bodies, slab()) == nc / bodies.size());
    CHECK(contact(bodies, slab()) == double(touching) / bodies.size());
}

TEST_CASE("diversity") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0, 1);

    SUBCASE("twenty tight equal blobs") {
        std::vector<BodyParams> ps;
        for (int c = 0; c < 20; ++c) {
            BodyParams center;
            for (auto& x : center.theta) x = 3 * n(rng);
            for (auto& x : center.phi) x = 3 * n(rng);
            for (int i = 0; i < 10; ++i) {
                BodyParams p = center;
                for (auto& x : p.theta) x += 0.01 * n(rng);
                for (auto& x : p.phi) x += 0.01 * n(rng);
                ps.push_back(p);
            }
        }
        const Diversity d = diversity(ps, 20, 7);
        CHECK(std::abs(d.entropy - std::log2(20.0)) < 0.01);
        CHECK(d.cluster_size < 0.05);
        CHECK(d.entropy == doctest::Approx(entropy_of(d.labels)).epsilon(1e-12));
        // relabeling leaves the entropy alone
        std::vector<int> perm(20);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> relabeled;
        for (int l : d.labels) relabeled.push_back(perm[l]);
        CHECK(entropy_of(relabeled) == doctest::Approx(d.entropy).epsilon(1e-12));
    }

    SUBCASE("identical samples") {
        BodyParams p;
        p.theta[3] = 0.7;
        const Diversity d = diversity(std::vector<BodyParams>(25, p), 20, 1);
        CHECK(d.entropy == 0.0);
        CHECK(d.cluster_size == 0.0);
    }

    SUBCASE("deterministic and bounded") {
        std::vector<BodyParams> ps(60);
        for (auto& p : ps) {
            for (auto& x : p.theta) x = n(rng);
            for (auto& x : p.phi) x = n(rng);
        }
        const Diversity a = diversity(ps, 20, 3), b = diversity(ps, 20, 3);
        CHECK(a.labels == b.labels);
        CHECK(a.entropy == b.entropy);
        CHECK(a.cluster_size == b.cluster_size);
        CHECK(a.entropy >= 0.0);
        CHECK(a.entropy <= std::log2(20.0) + 1e-12);
    }

    SUBCASE("too few samples") { CHECK_THROWS_AS(diversity(std::vector<BodyParams>(19), 20, 0), ValidationError); }
}

TEST_CASE("report files") {
    const BodyModel m = capsule_person();
    std::vector<BodyParams> ps(3);
    ps[0].trans.z() = 0.96;   // roughly standing on the slab
    ps[1].trans.z() = 2.0;    // floating
    ps[2].trans.z() = 0.5;    // sunk
    EvalReport r = evaluate(m, ps, slab(), 20, 0);
    CHECK(!r.entropy);
    CHECK(r.bodies.size() == 3);
    CHECK(r.bodies[1].contact == false);
    CHECK(r.bodies[2].contact == true);
    CHECK(r.bodies[2].non_collision < 1.0);
    r.clip_score = 0.27;

    const auto dir = std::filesystem::temp_directory_path() / "hsi_test_metrics";
    std::filesystem::create_directories(dir);
    save_report_json(r, (dir / "r.json").string());
    const EvalReport back = load_report_json((dir / "r.json").string());
    CHECK(back.non_collision == r.non_collision);
    CHECK(back.contact == r.contact);
    CHECK(back.clip_score == r.clip_score);
    CHECK(!back.entropy);
    REQUIRE(back.bodies.size() == 3);
    CHECK(back.bodies[2].min_sdf == r.bodies[2].min_sdf);

    save_report_csv(r, (dir / "r.csv").string());
    std::ifstream f(dir / "r.csv");
    std::string header, line, last;
    std::getline(f, header);
    CHECK(header == "body,non_collision,contact,min_sdf,entropy,cluster_size,clip_score");
    int rows = 0;
    while (std::getline(f, line)) ++rows, last = line;
    CHECK(rows == 4);
    CHECK(last.rfind("mean,", 0) == 0);

    std::ofstream(dir / "bad.json") << R"({"format":"hsi.eval_report","version":1,"non_collision":1.5,"contact":0,"bodies":[]})";
    CHECK_THROWS_AS(load_report_json((dir / "bad.json").string()), ValidationError);
    std::filesystem::remove_all(dir);
}
