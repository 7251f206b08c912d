#pragma once

#include <cstdint>
#include <vector>

#include "hsi/common/log.hpp"
#include "hsi/scene/camera.hpp"
#include "hsi/scene/mesh.hpp"

namespace hsi {

struct CameraSamplingConfig {
    int k = 16;                      // views returned
    double d = 2.0;                  // hemisphere radius (m)
    double r = 0.15;                 // visibility patch radius (m)
    double min_elevation_deg = 10.0;
    int patch_samples = 256;
    double depth_tolerance = 0.01;   // m
    int candidates = 64;             // hemisphere points scored before top-k selection
    Intrinsics intrinsics{};

    void validate() const;
};

// Surface points within r of p, uniform by area, with the face they lie on.
struct SurfacePatch {
    std::vector<Vec3> points;
    std::vector<std::uint32_t> faces;
};

SurfacePatch sample_surface_patch(const TriMesh& scene, const Vec3& p, double r, int max_samples,
                                  std::uint64_t seed);

// Fraction of patch points whose depth agrees with the rasterized scene depth
// buffer. Returns 0 (and warns) when no surface lies within r of p.
double visible_patch_ratio(const TriMesh& scene, const Vec3& p, double r, const Camera& camera,
                           const CameraSamplingConfig& cfg, Warnings* warnings = nullptr);

struct CameraSampling {
    std::vector<Camera> cameras;  // best first, view_id = rank
    std::vector<double> scores;
    Warnings warnings;
};

// Candidates on the +z hemisphere of radius cfg.d around p (uniform azimuth,
// elevation density proportional to cos(elevation) above the minimum), each
// looking at p. Ranked by visible patch ratio; the top k with a nonzero score
// are returned. Deterministic for a given seed.
CameraSampling sample_cameras(const TriMesh& scene, const Vec3& p, const CameraSamplingConfig& cfg,
                              std::uint64_t seed);

}  // namespace hsi
