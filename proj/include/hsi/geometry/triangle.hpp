#pragma once

#include "hsi/geometry/types.hpp"

namespace hsi {

// Which feature of a triangle (a, b, c) a closest point lies on.
enum class TriFeature { Face, EdgeAB, EdgeBC, EdgeCA, VertexA, VertexB, VertexC };

struct ClosestPoint {
    Vec3 point;
    TriFeature feature = TriFeature::Face;
};

// Region-classified closest point on a triangle (Voronoi-region walk).
ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

// Closed triangle/triangle intersection test. Touching counts as intersecting.
// Interval-overlap method with a separate coplanar branch.
bool triangles_intersect(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                         const Vec3& u0, const Vec3& u1, const Vec3& u2);

}  // namespace hsi
