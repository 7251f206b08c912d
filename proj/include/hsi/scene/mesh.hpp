#pragma once

#include <string>
#include <vector>

#include "hsi/geometry/aabb.hpp"
#include "hsi/geometry/types.hpp"

namespace hsi {

// Triangle mesh in meters.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;

    bool empty() const { return faces.empty(); }
    Aabb bounds() const;
    Aabb face_bounds(size_t f) const;
    Vec3 face_normal(size_t f) const;  // unit normal, right-handed winding
    double face_area(size_t f) const;
};

inline constexpr double kDegenerateArea = 1e-12;

// Throws ValidationError on out-of-range indices, then drops faces with area
// below kDegenerateArea or repeated indices. Returns the number removed.
size_t clean_mesh(TriMesh& mesh);

// Merges vertices closer than tol (grid-hashed, first occurrence wins) and
// remaps faces. Faces that collapse are dropped.
TriMesh weld_vertices(const TriMesh& mesh, double tol);

// True when every undirected edge is shared by exactly two faces.
bool is_closed(const TriMesh& mesh);

TriMesh merge_meshes(const std::vector<TriMesh>& parts);

TriMesh transformed(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation);

// Mesh file I/O. OBJ (v/f records, polygons fan-triangulated, negative indices
// allowed) and binary little-endian PLY (positions and faces only).
TriMesh load_mesh(const std::string& path);
TriMesh load_obj(const std::string& path);
TriMesh load_ply(const std::string& path);
void save_obj(const TriMesh& mesh, const std::string& path);
void save_ply(const TriMesh& mesh, const std::string& path);

// Axis-aligned closed box with outward-facing triangles.
TriMesh make_box(const Vec3& lo, const Vec3& hi);

}  // namespace hsi
