#include "hsi/scene/mesh.hpp"

#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

#include "hsi/common/error.hpp"

namespace hsi {

Aabb TriMesh::bounds() const {
    Aabb b;
    for (const auto& v : vertices) b.extend(v);
    return b;
}

Aabb TriMesh::face_bounds(size_t f) const {
    Aabb b;
    for (auto i : faces[f]) b.extend(vertices[i]);
    return b;
}

Vec3 TriMesh::face_normal(size_t f) const {
    const auto& t = faces[f];
    Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    const double len = n.norm();
    return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

double TriMesh::face_area(size_t f) const {
    const auto& t = faces[f];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

size_t clean_mesh(TriMesh& mesh) {
    const auto n = mesh.vertices.size();
    for (size_t f = 0; f < mesh.faces.size(); ++f)
        for (auto i : mesh.faces[f])
            if (i >= n)
                throw ValidationError("face " + std::to_string(f) + " references vertex " + std::to_string(i) +
                                      " but the mesh has " + std::to_string(n) + " vertices");
    std::vector<Face> kept;
    kept.reserve(mesh.faces.size());
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& t = mesh.faces[f];
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
        if (mesh.face_area(f) < kDegenerateArea) continue;
        kept.push_back(t);
    }
    const size_t removed = mesh.faces.size() - kept.size();
    mesh.faces = std::move(kept);
    return removed;
}

TriMesh weld_vertices(const TriMesh& mesh, double tol) {
    TriMesh out;
    std::vector<std::uint32_t> remap(mesh.vertices.size());
    if (tol <= 0) {
        std::map<std::tuple<double, double, double>, std::uint32_t> seen;
        for (size_t i = 0; i < mesh.vertices.size(); ++i) {
            const auto& v = mesh.vertices[i];
            auto [it, inserted] = seen.emplace(std::make_tuple(v.x(), v.y(), v.z()),
                                               static_cast<std::uint32_t>(out.vertices.size()));
            if (inserted) out.vertices.push_back(v);
            remap[i] = it->second;
        }
    } else {
        struct CellHash {
            size_t operator()(const std::tuple<long long, long long, long long>& c) const {
                auto [a, b, d] = c;
                return std::hash<long long>()(a * 73856093LL ^ b * 19349663LL ^ d * 83492791LL);
            }
        };
        std::unordered_map<std::tuple<long long, long long, long long>, std::vector<std::uint32_t>, CellHash> grid;
        auto cell = [&](const Vec3& v) {
            return std::make_tuple(static_cast<long long>(std::floor(v.x() / tol)),
                                   static_cast<long long>(std::floor(v.y() / tol)),
                                   static_cast<long long>(std::floor(v.z() / tol)));
        };
        for (size_t i = 0; i < mesh.vertices.size(); ++i) {
            const auto& v = mesh.vertices[i];
            auto [cx, cy, cz] = cell(v);
            std::int64_t found = -1;
            for (long long dx = -1; dx <= 1 && found < 0; ++dx)
                for (long long dy = -1; dy <= 1 && found < 0; ++dy)
                    for (long long dz = -1; dz <= 1 && found < 0; ++dz) {
                        auto it = grid.find({cx + dx, cy + dy, cz + dz});
                        if (it == grid.end()) continue;
                        for (auto j : it->second)
                            if ((out.vertices[j] - v).norm() <= tol) {
                                found = j;
                                break;
                            }
                    }
            if (found < 0) {
                found = static_cast<std::int64_t>(out.vertices.size());
                out.vertices.push_back(v);
                grid[{cx, cy, cz}].push_back(static_cast<std::uint32_t>(found));
            }
            remap[i] = static_cast<std::uint32_t>(found);
        }
    }
    for (const auto& f : mesh.faces) {
        Face g{remap[f[0]], remap[f[1]], remap[f[2]]};
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;
        out.faces.push_back(g);
    }
    return out;
}

bool is_closed(const TriMesh& mesh) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> count;
    for (const auto& f : mesh.faces)
        for (int e = 0; e < 3; ++e) {
            auto a = f[e], b = f[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++count[{a, b}];
        }
    for (const auto& [edge, c] : count)
        if (c != 2) return false;
    return !mesh.faces.empty();
}

TriMesh merge_meshes(const std::vector<TriMesh>& parts) {
    TriMesh out;
    for (const auto& p : parts) {
        const auto base = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.insert(out.vertices.end(), p.vertices.begin(), p.vertices.end());
        for (const auto& f : p.faces) out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    }
    return out;
}

TriMesh transformed(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation) {
    TriMesh out = mesh;
    for (auto& v : out.vertices) v = rotation * v + translation;
    return out;
}

TriMesh make_box(const Vec3& lo, const Vec3& hi) {
    TriMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
    // Two triangles per side, wound counter-clockwise seen from outside.
    const std::uint32_t quads[6][4] = {
        {0, 2, 3, 1},  // -z
        {4, 5, 7, 6},  // +z
        {0, 1, 5, 4},  // -y
        {2, 6, 7, 3},  // +y
        {0, 4, 6, 2},  // -x
        {1, 3, 7, 5},  // +x
    };
    for (const auto& q : quads) {
        m.faces.push_back({q[0], q[1], q[2]});
        m.faces.push_back({q[0], q[2], q[3]});
    }
    return m;
}

}  // namespace hsi
