#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "hsi/common/error.hpp"
#include "hsi/geometry/triangle.hpp"
#include "hsi/scene/camera.hpp"
#include "hsi/scene/camera_sampling.hpp"
#include "hsi/scene/raster.hpp"
#include "hsi/scene/sdf.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

using namespace hsi;
namespace fs = std::filesystem;

namespace {

fs::path tmp_path(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "hsi_test_scene";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

TriMesh random_soup(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5), s(-0.15, 0.15);
    TriMesh m;
    while (static_cast<int>(m.faces.size()) < n) {
        const Vec3 c(u(rng), u(rng), u(rng));
        const Vec3 a = c + Vec3(s(rng), s(rng), s(rng));
        const Vec3 b = c + Vec3(s(rng), s(rng), s(rng));
        const Vec3 d = c + Vec3(s(rng), s(rng), s(rng));
        if (triangle_area(a, b, d) < 1e-4) continue;
        const auto base = static_cast<std::uint32_t>(m.vertices.size());
        m.vertices.insert(m.vertices.end(), {a, b, d});
        m.faces.push_back({base, base + 1, base + 2});
    }
    return m;
}

// Scalar-by-scalar trilinear interpolation written independently of the grid code.
double naive_trilinear(const SdfGrid& g, const Vec3& p) {
    double u[3];
    int c[3];
    for (int a = 0; a < 3; ++a) {
        const double x = (p[a] - g.origin[a]) / g.spacing;
        c[a] = std::min(static_cast<int>(std::floor(x)), static_cast<int>(g.dims[a]) - 2);
        u[a] = x - c[a];
    }
    double acc = 0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const double w = (di ? u[0] : 1 - u[0]) * (dj ? u[1] : 1 - u[1]) * (dk ? u[2] : 1 - u[2]);
                acc += w * g.at(c[0] + di, c[1] + dj, c[2] + dk);
            }
    return acc;
}

Eigen::Matrix<double, 3, 4> projection_matrix(const Camera& c) {
    Eigen::Matrix3d K;
    K << c.fx, 0, c.cx, 0, c.fy, c.cy, 0, 0, 1;
    Eigen::Matrix<double, 3, 4> Rt;
    Rt.leftCols<3>() = c.rotation;
    Rt.col(3) = c.translation;
    return K * Rt;
}

}  // namespace

TEST_SUITE("mesh") {
    TEST_CASE("clean_mesh drops degenerate faces and rejects bad indices") {
        TriMesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
        m.faces = {{0, 1, 2}, {0, 1, 3}, {1, 1, 2}};
        CHECK(clean_mesh(m) == 2);
        CHECK(m.faces.size() == 1);
        m.faces.push_back({0, 1, 9});
        CHECK_THROWS_AS(clean_mesh(m), ValidationError);
    }

    TEST_CASE("box is closed with outward normals") {
        const TriMesh b = make_box({-1, -1, -1}, {1, 2, 3});
        CHECK(is_closed(b));
        const Vec3 c = b.bounds().center();
        for (size_t f = 0; f < b.faces.size(); ++f) {
            const Vec3 fc = (b.vertices[b.faces[f][0]] + b.vertices[b.faces[f][1]] + b.vertices[b.faces[f][2]]) / 3;
            CHECK(b.face_normal(f).dot(fc - c) > 0);
        }
    }

    TEST_CASE("OBJ and PLY round-trip") {
        const TriMesh m = random_soup(20, 5);
        for (const char* ext : {".obj", ".ply"}) {
            const auto p = tmp_path(std::string("soup") + ext);
            if (std::string(ext) == ".obj") save_obj(m, p.string()); else save_ply(m, p.string());
            const TriMesh r = load_mesh(p.string());
            CHECK(r.vertices == m.vertices);
            CHECK(r.faces == m.faces);
        }
    }

    TEST_CASE("OBJ polygons and negative indices") {
        const auto p = tmp_path("quad.obj");
        std::ofstream(p) << "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -4 -3 -1\n";
        const TriMesh m = load_mesh(p.string());
        CHECK(m.vertices.size() == 4);
        REQUIRE(m.faces.size() == 3);
        CHECK(m.faces[2] == Face{0, 1, 3});
        CHECK_THROWS(load_mesh(tmp_path("missing.obj").string()));
    }
}

TEST_SUITE("sdf") {
    TEST_CASE("unit cube values") {
        const TriMesh cube = make_box({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5});
        const SdfGrid g = build_sdf(cube, {5, 5, 5}, 0.5);
        CHECK(g.spacing == doctest::Approx(0.5));
        CHECK(g.at(2, 2, 2) == doctest::Approx(-0.5).epsilon(1e-7));
        CHECK(g.at(4, 2, 2) == doctest::Approx(0.5).epsilon(1e-7));
        CHECK(g.sample(Vec3(0, 0, 0)) == doctest::Approx(-0.5));
        CHECK(g.sample(Vec3(1, 0, 0)) == doctest::Approx(0.5));
    }

    TEST_CASE("random soup matches brute-force distance") {
        const TriMesh m = random_soup(200, 21);
        Warnings w;
        const SdfGrid g = build_sdf(m, {16, 16, 16}, 0.1, &w);
        CHECK_FALSE(w.empty());  // open surface
        double max_err = 0;
        for (std::uint32_t k = 0; k < 16; ++k)
            for (std::uint32_t j = 0; j < 16; ++j)
                for (std::uint32_t i = 0; i < 16; ++i) {
                    const Vec3 x = g.node_position(i, j, k);
                    double bf = 1e300;
                    for (const Face& f : m.faces)
                        bf = std::min(bf, oracle::point_triangle_distance(x, m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]));
                    max_err = std::max(max_err, std::abs(std::abs(static_cast<double>(g.at(i, j, k))) - bf));
                }
        CHECK(max_err < 1e-6);
    }

    TEST_CASE("watertight sign and near-surface band") {
        const TriMesh m = merge_meshes({make_box({-1, -0.5, 0}, {0, 0.5, 0.7}), make_box({0.3, -0.2, 0.1}, {0.9, 0.4, 0.5})});
        Warnings w;
        const SdfGrid g = build_sdf(m, {24, 24, 24}, 0.2, &w);
        CHECK(w.empty());
        for (const Vec3& v : m.vertices) CHECK(std::abs(g.sample(v)) < g.spacing);
        CHECK(g.sample(Vec3(-0.5, 0, 0.35)) < 0);
        CHECK(g.sample(Vec3(0.6, 0.1, 0.3)) < 0);
        CHECK(g.sample(Vec3(0.15, 0, 0.3)) > 0);
    }

    TEST_CASE("errors and warnings") {
        CHECK_THROWS_AS(build_sdf(TriMesh{}, {8, 8, 8}, 0.1), ValidationError);
        const TriMesh cube = make_box({0, 0, 0}, {1, 1, 1});
        CHECK_THROWS_AS(build_sdf(cube, {1, 8, 8}, 0.1), ValidationError);
        Warnings w;
        build_sdf(cube, {4, 4, 4}, 0.0, &w);
        CHECK_FALSE(w.empty());
    }

    TEST_CASE("sampling: nodes, midpoints, oracle, gradient, outside") {
        const TriMesh m = merge_meshes({make_box({-0.4, -0.3, -0.2}, {0.3, 0.4, 0.1})});
        const SdfGrid g = build_sdf(m, {12, 10, 9}, 0.15);
        for (std::uint32_t k = 0; k < g.dims[2]; ++k)
            for (std::uint32_t j = 0; j < g.dims[1]; ++j)
                for (std::uint32_t i = 0; i < g.dims[0]; ++i)
                    CHECK(g.sample(g.node_position(i, j, k)) == static_cast<double>(g.at(i, j, k)));
        const Vec3 mid = 0.5 * (g.node_position(3, 4, 5) + g.node_position(4, 4, 5));
        CHECK(g.sample(mid) == doctest::Approx(0.5 * (g.at(3, 4, 5) + g.at(4, 4, 5))).epsilon(1e-12));

        std::mt19937_64 rng(9);
        const Aabb box = g.box();
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int it = 0; it < 100; ++it) {
            const Vec3 p = box.lo + (box.hi - box.lo).cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
            CHECK(std::abs(g.sample(p) - naive_trilinear(g, p)) < 1e-7);
        }

        int checked = 0;
        for (int it = 0; it < 200 && checked < 50; ++it) {
            const Vec3 p = box.lo + (box.hi - box.lo).cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
            bool near_boundary = false;
            for (int a = 0; a < 3; ++a) {
                const double x = (p[a] - g.origin[a]) / g.spacing;
                near_boundary |= std::abs(x - std::round(x)) < 0.05;
            }
            if (near_boundary) continue;
            Vec3 grad;
            g.sample(p, &grad);
            const double h = 1e-6 * g.spacing;
            for (int a = 0; a < 3; ++a) {
                Vec3 e = Vec3::Zero();
                e[a] = h;
                const double fd = (g.sample(Vec3(p + e)) - g.sample(Vec3(p - e))) / (2 * h);
                CHECK(std::abs(fd - grad[a]) <= 1e-5 * std::max(1.0, std::abs(grad[a])));
            }
            ++checked;
        }
        CHECK(checked == 50);

        const Vec3 out = box.hi + Vec3(0.3, 0, 0);
        const Vec3 clamped(box.hi.x(), box.hi.y(), box.hi.z());
        CHECK(g.sample(out) == doctest::Approx(g.sample(clamped) + 0.3));
    }

    TEST_CASE("GSDF round-trip is bit-exact") {
        const SdfGrid g = build_sdf(make_box({0, 0, 0}, {1, 0.5, 0.25}), {7, 5, 4}, 0.1);
        const auto a = tmp_path("a.gsdf"), b = tmp_path("b.gsdf");
        save_sdf(g, a.string());
        const SdfGrid r = load_sdf(a.string());
        CHECK(r == g);
        save_sdf(r, b.string());
        CHECK(slurp(a) == slurp(b));
        const std::string bytes = slurp(a);
        CHECK(bytes.substr(0, 4) == "GSDF");
        CHECK(bytes.size() == 4 + 4 + 12 + 12 + 4 + 4 * g.values.size());

        std::ofstream(tmp_path("bad.gsdf"), std::ios::binary) << "NOPE1234";
        CHECK_THROWS_AS(load_sdf(tmp_path("bad.gsdf").string()), IoError);
        std::ofstream(tmp_path("short.gsdf"), std::ios::binary) << bytes.substr(0, bytes.size() - 3);
        CHECK_THROWS_AS(load_sdf(tmp_path("short.gsdf").string()), IoError);
    }
}

TEST_SUITE("camera") {
    TEST_CASE("principal point and behind-camera") {
        Camera c;
        c.fx = c.fy = 400;
        c.cx = 250;
        c.cy = 260;
        const Projection pr = project(c, {Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(0, 0, 0)});
        CHECK(pr.valid[0]);
        CHECK(pr.pixels[0].x() == 250);
        CHECK(pr.pixels[0].y() == 260);
        CHECK_FALSE(pr.valid[1]);
        CHECK_FALSE(pr.valid[2]);
    }

    TEST_CASE("projection matches homogeneous-matrix oracle and round-trips") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-1, 1);
        const Camera c = look_at({2.0, -1.0, 1.5}, {0, 0, 0.5}, Intrinsics{640, 480, 55.0}, 3);
        c.validate();
        const Eigen::Matrix<double, 3, 4> P = projection_matrix(c);
        int valid = 0;
        for (int it = 0; it < 50; ++it) {
            const Vec3 x(u(rng), u(rng), 0.5 + u(rng));
            Vec2 px;
            const bool ok = c.project(x, &px);
            const Eigen::Vector3d h = P * x.homogeneous();
            CHECK(ok == (h.z() > kMinDepth));
            if (!ok) continue;
            ++valid;
            CHECK((px - h.hnormalized()).norm() < 1e-6);
            const Vec3 back = c.unproject(px, c.to_camera(x).z());
            CHECK((back - x).norm() < 1e-6);
        }
        CHECK(valid == 50);
    }

    TEST_CASE("look_at geometry") {
        const Camera c = look_at({0, -2, 0}, {0, 0, 0}, Intrinsics{}, 0);
        CHECK((c.center() - Vec3(0, -2, 0)).norm() < 1e-12);
        CHECK(c.to_camera(Vec3(0, 0, 0)).isApprox(Vec3(0, 0, 2)));
        Vec2 up;
        REQUIRE(c.project(Vec3(0, 0, 0.5), &up));
        CHECK(up.y() < c.cy);  // world +z is image up
        const Camera top = look_at({0, 0, 2}, {0, 0, 0}, Intrinsics{}, 0);
        CHECK_NOTHROW(top.validate());
        CHECK(c.fx == doctest::Approx(256.0 / std::tan(M_PI / 6)));
    }

    TEST_CASE("validation") {
        Camera c;
        c.fx = 0;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c.fx = 1;
        c.rotation(0, 0) = 2;
        CHECK_THROWS_AS(c.validate(), ValidationError);
    }

    TEST_CASE("camera file round-trip") {
        std::vector<Camera> cams;
        for (int i = 0; i < 4; ++i) cams.push_back(look_at({std::cos(i * 0.7) * 2, std::sin(i * 0.7) * 2, 0.3 * i + 0.1}, {0.1, 0.2, 0.3}, Intrinsics{}, i));
        const auto p = tmp_path("cams.json");
        save_cameras(cams, p.string());
        CHECK(load_cameras(p.string()) == cams);
        std::ofstream(tmp_path("bad.json")) << "{\"format\": \"hsi.cameras\", \"version\": 99, \"views\": []}";
        CHECK_THROWS(load_cameras(tmp_path("bad.json").string()));
    }
}

TEST_SUITE("raster") {
    TEST_CASE("square silhouette area") {
        Camera c;
        c.fx = c.fy = 100;
        c.cx = c.cy = 256;
        c.translation = Vec3(0, 0, 1);  // square at Z = 1 projects to 100 x 100 px
        TriMesh sq;
        sq.vertices = {{-0.5, -0.5, 0}, {0.5, -0.5, 0}, {0.5, 0.5, 0}, {-0.5, 0.5, 0}};
        sq.faces = {{0, 1, 2}, {0, 2, 3}};
        const RasterResult r = rasterize(sq, c);
        CHECK(std::abs(static_cast<double>(count_set(r.silhouette)) - 10000.0) <= 200.0);
        CHECK(r.depth(256, 256) == doctest::Approx(1.0f));
        // Off-centre, non-integer placement.
        c.cx = 200.3;
        c.cy = 301.7;
        CHECK(std::abs(static_cast<double>(count_set(rasterize(sq, c).silhouette)) - 10000.0) <= 200.0);
    }

    TEST_CASE("empty mesh") {
        const RasterResult r = rasterize(TriMesh{}, look_at({0, -2, 0}, {0, 0, 0}, Intrinsics{}));
        CHECK(count_set(r.silhouette) == 0);
        for (float d : r.depth.data) CHECK(d == kEmptyDepth);
    }

    TEST_CASE("z-test and silhouette equals finite depth") {
        Camera c;
        c.fx = c.fy = 200;
        c.cx = c.cy = 256;
        TriMesh m;
        m.vertices = {{-1, -1, 2}, {1, -1, 2}, {0, 1, 2}, {-0.3, -0.3, 1}, {0.3, -0.3, 1}, {0, 0.3, 1},
                      {-5, -5, -1}, {5, -5, -1}, {0, 5, -1}};  // last triangle behind the camera
        m.faces = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}};
        const RasterResult r = rasterize(m, c);
        CHECK(r.depth(256, 256) == doctest::Approx(1.0f));
        CHECK(r.face_id(256, 256) == 1);
        CHECK(r.depth(256, 256 - 80) == doctest::Approx(2.0f));
        for (int y = 0; y < r.depth.height; ++y)
            for (int x = 0; x < r.depth.width; ++x)
                CHECK_EQ(r.silhouette(x, y) == 1, std::isfinite(r.depth(x, y)));
    }

    TEST_CASE("triangle crossing the near plane is clipped") {
        Camera c;
        c.fx = c.fy = 200;
        c.cx = c.cy = 256;
        TriMesh m;
        m.vertices = {{-0.5, 0.2, -1}, {0.5, 0.2, -1}, {0, 0.2, 3}};
        m.faces = {{0, 1, 2}};
        const RasterResult r = rasterize(m, c);
        CHECK(count_set(r.silhouette) > 0);
        for (float d : r.depth.data)
            if (std::isfinite(d)) CHECK(d > 0);
    }

    TEST_CASE("dilation") {
        Mask m(9, 9, 0);
        m(4, 4) = 1;
        const Mask d = dilate_mask(m, 3);
        CHECK(count_set(d) == 9);
        for (int y = 3; y <= 5; ++y)
            for (int x = 3; x <= 5; ++x) CHECK(d(x, y) == 1);
        CHECK(dilate_mask(m, 1) == m);
        CHECK_THROWS_AS(dilate_mask(m, 4), ValidationError);
        CHECK_THROWS_AS(dilate_mask(m, 0), ValidationError);

        std::mt19937_64 rng(2);
        Mask rm(64, 48, 0);
        for (auto& v : rm.data) v = (rng() % 50) == 0;
        const Mask got = dilate_mask(rm, 11);
        Mask want(64, 48, 0);
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 64; ++x) {
                std::uint8_t v = 0;
                for (int dy = -5; dy <= 5; ++dy)
                    for (int dx = -5; dx <= 5; ++dx)
                        if (rm.contains(x + dx, y + dy)) v |= rm(x + dx, y + dy);
                want(x, y) = v;
            }
        CHECK(got == want);
    }
}

TEST_SUITE("camera sampling") {
    TEST_CASE("visible patch ratio cases") {
        CameraSamplingConfig cfg;
        const TriMesh floor = fixture::ground();
        const Vec3 p(1.0, 0.3, 0.0);
        const Camera above = look_at(p + Vec3(0, 0, 2), p, cfg.intrinsics);
        CHECK(visible_patch_ratio(floor, p, cfg.r, above, cfg) == 1.0);

        const TriMesh walled = merge_meshes({floor, make_box({0.5, -0.5, 1.0}, {1.5, 1.1, 1.05})});
        CHECK(visible_patch_ratio(walled, p, cfg.r, above, cfg) == 0.0);

        // Plate covering the half-space x < p.x above the patch.
        const TriMesh half = merge_meshes({floor, make_box({0.0, -0.5, 1.0}, {1.0, 1.1, 1.05})});
        CHECK(visible_patch_ratio(half, p, cfg.r, above, cfg) == doctest::Approx(0.5).epsilon(0.2));

        Warnings w;
        CHECK(visible_patch_ratio(floor, Vec3(0, 0, 3), cfg.r, above, cfg, &w) == 0.0);
        CHECK_FALSE(w.empty());
    }

    TEST_CASE("ground plane: every candidate fully visible") {
        CameraSamplingConfig cfg;
        const Vec3 p(1.0, 0.3, 0.0);
        const CameraSampling s = sample_cameras(fixture::ground(), p, cfg, 42);
        CHECK(s.cameras.size() == static_cast<size_t>(cfg.k));
        for (double sc : s.scores) CHECK(sc == 1.0);
        for (size_t i = 0; i < s.cameras.size(); ++i) {
            const Camera& c = s.cameras[i];
            CHECK(c.view_id == static_cast<int>(i));
            CHECK((c.center() - p).norm() == doctest::Approx(cfg.d));
            CHECK(c.center().z() - p.z() >= cfg.d * std::sin(cfg.min_elevation_deg * M_PI / 180) - 1e-9);
            Vec2 px;
            REQUIRE(c.project(p, &px));
            CHECK(std::abs(px.x() - c.cx) < 1e-6);
        }
        CHECK(s.warnings.empty());
    }

    TEST_CASE("deterministic for a seed") {
        CameraSamplingConfig cfg;
        cfg.k = 6;
        cfg.candidates = 24;
        const TriMesh room = fixture::room_open_px();
        const Vec3 p(0, 0, 0);
        const auto a = sample_cameras(room, p, cfg, 5);
        const auto b = sample_cameras(room, p, cfg, 5);
        CHECK(a.cameras == b.cameras);
        CHECK(a.scores == b.scores);
        const auto c = sample_cameras(room, p, cfg, 6);
        CHECK_FALSE(c.cameras == a.cameras);
    }

    TEST_CASE("room open on +x: cameras look in through the opening") {
        CameraSamplingConfig cfg;
        cfg.k = 4;
        const Vec3 p(0, 0, 0);
        const auto s = sample_cameras(fixture::room_open_px(), p, cfg, 1);
        REQUIRE_FALSE(s.cameras.empty());
        for (const Camera& c : s.cameras) CHECK(c.center().x() > p.x());
    }

    TEST_CASE("sealed room: warning and no cameras") {
        CameraSamplingConfig cfg;
        cfg.candidates = 16;
        const auto s = sample_cameras(fixture::room_sealed(), Vec3(0, 0, 0), cfg, 1);
        CHECK(s.cameras.empty());
        CHECK_FALSE(s.warnings.empty());
    }

    TEST_CASE("config validation") {
        CameraSamplingConfig cfg;
        cfg.r = 3.0;
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
        cfg = {};
        cfg.k = 0;
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
}
