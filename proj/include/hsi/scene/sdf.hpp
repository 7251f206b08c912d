#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsi/common/log.hpp"
#include "hsi/common/scalar.hpp"
#include "hsi/geometry/aabb.hpp"
#include "hsi/scene/mesh.hpp"

namespace hsi {

// Regular grid of signed distances (meters), negative inside closed surfaces.
// Values are z-major: index = (k * ny + j) * nx + i for node (i, j, k).
// Stored in single precision so the binary file round-trips bit-exactly.
struct SdfGrid {
    Eigen::Vector3f origin = Eigen::Vector3f::Zero();
    float spacing = 1.0f;
    std::array<std::uint32_t, 3> dims{2, 2, 2};
    std::vector<float> values;

    size_t index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return (static_cast<size_t>(k) * dims[1] + j) * dims[0] + i;
    }
    float at(std::uint32_t i, std::uint32_t j, std::uint32_t k) const { return values[index(i, j, k)]; }
    Vec3 node_position(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return origin.cast<double>() + static_cast<double>(spacing) * Vec3(i, j, k);
    }
    Aabb box() const {
        Aabb b;
        b.lo = origin.cast<double>();
        b.hi = node_position(dims[0] - 1, dims[1] - 1, dims[2] - 1);
        return b;
    }

    // Trilinear interpolation; outside the grid, the value at the clamped point
    // plus the Euclidean distance to the grid box.
    template <class T>
    T sample(const Eigen::Matrix<T, 3, 1>& p) const;

    double sample(const Vec3& p) const { return sample<double>(p); }

    // Value and analytic gradient of the piecewise-trilinear field.
    double sample(const Vec3& p, Vec3* gradient) const;

    bool operator==(const SdfGrid& o) const {
        return origin == o.origin && spacing == o.spacing && dims == o.dims && values == o.values;
    }
};

// Throws ValidationError for an empty mesh or any dim < 2. Non-positive
// padding and open meshes are reported through warnings (the sign of the
// field may be unreliable there).
SdfGrid build_sdf(const TriMesh& mesh, std::array<std::uint32_t, 3> dims, double padding,
                  Warnings* warnings = nullptr);

// "GSDF" little-endian binary: magic, u32 version (1), u32 dims[3],
// f32 origin[3], f32 spacing, f32 values (z-major).
void save_sdf(const SdfGrid& grid, const std::string& path);
SdfGrid load_sdf(const std::string& path);

template <class T>
T SdfGrid::sample(const Eigen::Matrix<T, 3, 1>& p) const {
    using std::floor;
    using std::sqrt;
    const Aabb b = box();
    Eigen::Matrix<T, 3, 1> q;
    T outside_sq = T(0.0);
    bool outside = false;
    for (int a = 0; a < 3; ++a) {
        const double pv = value_of(p[a]);
        if (pv < b.lo[a]) {
            q[a] = T(b.lo[a]);
            outside_sq += (T(b.lo[a]) - p[a]) * (T(b.lo[a]) - p[a]);
            outside = true;
        } else if (pv > b.hi[a]) {
            q[a] = T(b.hi[a]);
            outside_sq += (p[a] - T(b.hi[a])) * (p[a] - T(b.hi[a]));
            outside = true;
        } else {
            q[a] = p[a];
        }
    }

    std::array<std::uint32_t, 3> cell{};
    Eigen::Matrix<T, 3, 1> f;
    const double inv = 1.0 / static_cast<double>(spacing);
    for (int a = 0; a < 3; ++a) {
        T u = (q[a] - T(static_cast<double>(origin[a]))) * inv;
        double uv = value_of(u);
        const double r = std::round(uv);
        if (std::abs(uv - r) < 1e-9) {
            uv = r;
            set_value(u, r);
        }
        long c = static_cast<long>(std::floor(uv));
        c = std::clamp<long>(c, 0, static_cast<long>(dims[a]) - 2);
        cell[a] = static_cast<std::uint32_t>(c);
        f[a] = u - T(static_cast<double>(c));
    }

    const auto [i, j, k] = cell;
    const T c000 = T(static_cast<double>(at(i, j, k)));
    const T c100 = T(static_cast<double>(at(i + 1, j, k)));
    const T c010 = T(static_cast<double>(at(i, j + 1, k)));
    const T c110 = T(static_cast<double>(at(i + 1, j + 1, k)));
    const T c001 = T(static_cast<double>(at(i, j, k + 1)));
    const T c101 = T(static_cast<double>(at(i + 1, j, k + 1)));
    const T c011 = T(static_cast<double>(at(i, j + 1, k + 1)));
    const T c111 = T(static_cast<double>(at(i + 1, j + 1, k + 1)));
    const T one(1.0);
    const T c00 = c000 * (one - f[0]) + c100 * f[0];
    const T c10 = c010 * (one - f[0]) + c110 * f[0];
    const T c01 = c001 * (one - f[0]) + c101 * f[0];
    const T c11 = c011 * (one - f[0]) + c111 * f[0];
    const T c0 = c00 * (one - f[1]) + c10 * f[1];
    const T c1 = c01 * (one - f[1]) + c11 * f[1];
    T value = c0 * (one - f[2]) + c1 * f[2];
    if (outside && value_of(outside_sq) > 0.0) value += sqrt(outside_sq);
    return value;
}

}  // namespace hsi
