#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hsi/body/rotation.hpp"
#include "hsi/geometry/types.hpp"

namespace hsi {

using TrianglePair = std::pair<std::uint32_t, std::uint32_t>;  // first < second

// Intersecting triangle pairs that share no vertex, found with a median-split
// AABB tree. Sorted, so the result is deterministic.
std::vector<TrianglePair> bvh_collisions(const std::vector<Vec3>& vertices, const std::vector<Face>& faces);

// Symmetric penetration depth over the given pairs: for each vertex of one
// triangle, how far it lies behind the other triangle's (outward) plane,
// clamped at zero.
template <class T>
T penetration_energy(const std::vector<Vec3T<T>>& vertices, const std::vector<Face>& faces,
                     const std::vector<TrianglePair>& pairs) {
    using std::sqrt;
    T e(0.0);
    auto one_side = [&](const Face& a, const Face& b) {
        const Vec3T<T>& b0 = vertices[b[0]];
        Vec3T<T> n = (vertices[b[1]] - b0).cross(vertices[b[2]] - b0);
        const T len2 = n.squaredNorm();
        if (!(value_of(len2) > 0)) return;
        n /= sqrt(len2);
        for (auto i : a) {
            const T d = n.dot(vertices[i] - b0);
            if (value_of(d) < 0) e -= d;
        }
    };
    for (auto [fa, fb] : pairs) {
        one_side(faces[fa], faces[fb]);
        one_side(faces[fb], faces[fa]);
    }
    return e;
}

double energy_sp(const std::vector<Vec3>& vertices, const std::vector<Face>& faces);

}  // namespace hsi
