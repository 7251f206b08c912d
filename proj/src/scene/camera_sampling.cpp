#include "hsi/scene/camera_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "hsi/common/error.hpp"
#include "hsi/common/parallel.hpp"
#include "hsi/geometry/aabb_tree.hpp"
#include "hsi/geometry/triangle.hpp"
#include "hsi/scene/raster.hpp"

namespace hsi {

namespace {

constexpr std::uint64_t kPatchSeed = 0x9e3779b97f4a7c15ULL;

double patch_visibility(const TriMesh& scene, const SurfacePatch& patch, const Camera& camera, double tol) {
    if (patch.points.empty()) return 0.0;
    const RasterResult raster = rasterize(scene, camera);
    size_t visible = 0;
    for (size_t i = 0; i < patch.points.size(); ++i) {
        Vec2 px;
        if (!camera.project<double>(patch.points[i], &px)) continue;
        const int x = static_cast<int>(std::floor(px.x()));
        const int y = static_cast<int>(std::floor(px.y()));
        if (!raster.depth.contains(x, y)) continue;
        // Depth of the sample's own surface plane along the pixel-centre ray, so
        // grazing views compare like with like.
        const Vec3 qc = camera.to_camera(patch.points[i]);
        const Vec3 nc = camera.rotation * scene.face_normal(patch.faces[i]);
        const Vec3 ray((x + 0.5 - camera.cx) / camera.fx, (y + 0.5 - camera.cy) / camera.fy, 1.0);
        const double denom = nc.dot(ray);
        const double z = std::abs(denom) > 1e-9 ? nc.dot(qc) / denom : qc.z();
        if (raster.face_id(x, y) == static_cast<std::int32_t>(patch.faces[i]) ||
            static_cast<double>(raster.depth(x, y)) >= z - tol)
            ++visible;
    }
    return static_cast<double>(visible) / static_cast<double>(patch.points.size());
}

}  // namespace

void CameraSamplingConfig::validate() const {
    if (k < 1) throw ValidationError("camera sampling: k must be >= 1");
    if (!(r > 0.0) || !(d > r)) throw ValidationError("camera sampling: need d > r > 0");
    if (patch_samples < 1) throw ValidationError("camera sampling: patch_samples must be >= 1");
    if (candidates < 1) throw ValidationError("camera sampling: candidates must be >= 1");
    if (min_elevation_deg < 0.0 || min_elevation_deg >= 90.0)
        throw ValidationError("camera sampling: min_elevation must lie in [0, 90)");
}

SurfacePatch sample_surface_patch(const TriMesh& scene, const Vec3& p, double r, int max_samples,
                                  std::uint64_t seed) {
    SurfacePatch patch;
    std::vector<std::uint32_t> near;
    for (size_t f = 0; f < scene.faces.size(); ++f) {
        const auto& t = scene.faces[f];
        const auto cp = closest_point_on_triangle(p, scene.vertices[t[0]], scene.vertices[t[1]], scene.vertices[t[2]]);
        if ((cp.point - p).norm() <= r && scene.face_area(f) > 0.0) near.push_back(static_cast<std::uint32_t>(f));
    }
    if (near.empty()) return patch;

    // Each face is sampled over a 2r x 2r square in its own plane centred on the
    // projection of p; equal square areas keep the union uniform by area.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, near.size() - 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const long max_attempts = static_cast<long>(max_samples) * 256;
    for (long attempt = 0; attempt < max_attempts && static_cast<int>(patch.points.size()) < max_samples; ++attempt) {
        const auto f = near[pick(rng)];
        const auto& t = scene.faces[f];
        const Vec3& a = scene.vertices[t[0]];
        const Vec3& b = scene.vertices[t[1]];
        const Vec3& c = scene.vertices[t[2]];
        const Vec3 n = scene.face_normal(f);
        const Vec3 u = (b - a).normalized();
        const Vec3 v = n.cross(u);
        const Vec3 centre = p - n * n.dot(p - a);
        const Vec3 q = centre + r * unit(rng) * u + r * unit(rng) * v;
        if ((q - p).norm() > r) continue;
        // Barycentric inside test in the face plane.
        const Vec3 v0 = b - a, v1 = c - a, v2 = q - a;
        const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
        const double d20 = v2.dot(v0), d21 = v2.dot(v1);
        const double den = d00 * d11 - d01 * d01;
        const double bv = (d11 * d20 - d01 * d21) / den;
        const double bw = (d00 * d21 - d01 * d20) / den;
        if (bv < 0.0 || bw < 0.0 || bv + bw > 1.0) continue;
        patch.points.push_back(q);
        patch.faces.push_back(f);
    }
    return patch;
}

double visible_patch_ratio(const TriMesh& scene, const Vec3& p, double r, const Camera& camera,
                           const CameraSamplingConfig& cfg, Warnings* warnings) {
    const SurfacePatch patch = sample_surface_patch(scene, p, r, cfg.patch_samples, kPatchSeed);
    if (patch.points.empty()) {
        if (warnings) warnings->add("visible_patch_ratio: no scene surface within r of p");
        return 0.0;
    }
    return patch_visibility(scene, patch, camera, cfg.depth_tolerance);
}

CameraSampling sample_cameras(const TriMesh& scene, const Vec3& p, const CameraSamplingConfig& cfg,
                              std::uint64_t seed) {
    cfg.validate();
    CameraSampling result;
    const SurfacePatch patch = sample_surface_patch(scene, p, cfg.r, cfg.patch_samples, kPatchSeed);
    if (patch.points.empty()) {
        result.warnings.add("sample_cameras: no scene surface within r of p; no view can see the patch");
        return result;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double pi = std::numbers::pi;
    const double smin = std::sin(cfg.min_elevation_deg * pi / 180.0);
    std::vector<Camera> candidates(cfg.candidates);
    for (int i = 0; i < cfg.candidates; ++i) {
        const double azimuth = 2.0 * pi * uni(rng);
        const double elevation = std::asin(smin + (1.0 - smin) * uni(rng));
        const Vec3 eye = p + cfg.d * Vec3(std::cos(elevation) * std::cos(azimuth),
                                          std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
        candidates[i] = look_at(eye, p, cfg.intrinsics, i);
    }

    std::vector<double> scores(candidates.size());
    parallel_for(candidates.size(), [&](size_t i) {
        scores[i] = patch_visibility(scene, patch, candidates[i], cfg.depth_tolerance);
    });

    std::vector<size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    for (size_t idx : order) {
        if (static_cast<int>(result.cameras.size()) == cfg.k) break;
        if (scores[idx] <= 0.0) break;
        Camera c = candidates[idx];
        c.view_id = static_cast<int>(result.cameras.size());
        result.cameras.push_back(c);
        result.scores.push_back(scores[idx]);
    }
    if (static_cast<int>(result.cameras.size()) < cfg.k)
        result.warnings.add("sample_cameras: only " + std::to_string(result.cameras.size()) + " of " +
                            std::to_string(cfg.k) + " requested views see the patch");
    return result;
}

}  // namespace hsi
