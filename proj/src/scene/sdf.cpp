#include "hsi/scene/sdf.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "hsi/common/error.hpp"
#include "hsi/common/parallel.hpp"
#include "hsi/geometry/aabb_tree.hpp"
#include "hsi/geometry/triangle.hpp"

namespace hsi {

double SdfGrid::sample(const Vec3& p, Vec3* gradient) const {
    using Jet3 = ceres::Jet<double, 3>;
    Eigen::Matrix<Jet3, 3, 1> pj;
    for (int a = 0; a < 3; ++a) pj[a] = Jet3(p[a], a);
    const Jet3 v = sample<Jet3>(pj);
    if (gradient) *gradient = v.v;
    return v.a;
}

namespace {

// Angle-weighted pseudonormals for faces, edges and vertices of a welded mesh.
struct Pseudonormals {
    std::vector<Vec3> face;
    std::vector<Vec3> vertex;
    std::map<std::pair<std::uint32_t, std::uint32_t>, Vec3> edge;

    explicit Pseudonormals(const TriMesh& m) {
        face.resize(m.faces.size());
        vertex.assign(m.vertices.size(), Vec3::Zero());
        for (size_t f = 0; f < m.faces.size(); ++f) {
            const auto& t = m.faces[f];
            const Vec3 n = m.face_normal(f);
            face[f] = n;
            for (int c = 0; c < 3; ++c) {
                const Vec3& p = m.vertices[t[c]];
                const Vec3 e1 = (m.vertices[t[(c + 1) % 3]] - p).normalized();
                const Vec3 e2 = (m.vertices[t[(c + 2) % 3]] - p).normalized();
                const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
                vertex[t[c]] += angle * n;
                auto a = t[c], b = t[(c + 1) % 3];
                if (a > b) std::swap(a, b);
                auto [it, inserted] = edge.emplace(std::make_pair(a, b), n);
                if (!inserted) it->second += n;
            }
        }
    }

    Vec3 edge_normal(std::uint32_t a, std::uint32_t b) const {
        if (a > b) std::swap(a, b);
        return edge.at({a, b});
    }
};

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_f32(std::ostream& out, float v) { out.write(reinterpret_cast<const char*>(&v), 4); }
std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
float read_f32(std::istream& in) {
    float v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

SdfGrid build_sdf(const TriMesh& input, std::array<std::uint32_t, 3> dims, double padding, Warnings* warnings) {
    if (input.empty()) throw ValidationError("build_sdf: mesh has no faces");
    for (auto d : dims)
        if (d < 2) throw ValidationError("build_sdf: every grid dimension must be >= 2");

    const TriMesh mesh = weld_vertices(input, 1e-9);
    if (mesh.empty()) throw ValidationError("build_sdf: mesh has no non-degenerate faces");
    const bool closed = is_closed(mesh);
    Warnings local;
    Warnings& warn = warnings ? *warnings : local;
    if (!closed) warn.add("build_sdf: mesh is not closed; SDF sign may be unreliable away from the surface");
    if (padding <= 0.0) warn.add("build_sdf: non-positive padding; the grid does not enclose the surface with margin");

    Aabb box = mesh.bounds();
    if (padding > 0) {
        box.lo.array() -= padding;
        box.hi.array() += padding;
    }
    double spacing = 0.0;
    for (int a = 0; a < 3; ++a) spacing = std::max(spacing, box.extent()[a] / (dims[a] - 1));
    if (spacing <= 0.0) throw ValidationError("build_sdf: degenerate bounding box");

    SdfGrid grid;
    grid.dims = dims;
    grid.spacing = static_cast<float>(spacing);
    const Vec3 half = 0.5 * static_cast<double>(grid.spacing) * Vec3(dims[0] - 1, dims[1] - 1, dims[2] - 1);
    grid.origin = (box.center() - half).cast<float>();
    grid.values.resize(static_cast<size_t>(dims[0]) * dims[1] * dims[2]);

    std::vector<Aabb> boxes(mesh.faces.size());
    for (size_t f = 0; f < mesh.faces.size(); ++f) boxes[f] = mesh.face_bounds(f);
    const AabbTree tree(std::move(boxes));
    const Pseudonormals normals(mesh);

    const size_t plane = static_cast<size_t>(dims[0]) * dims[1];
    parallel_for(dims[2], [&](size_t k) {
        for (std::uint32_t j = 0; j < dims[1]; ++j)
            for (std::uint32_t i = 0; i < dims[0]; ++i) {
                const Vec3 p = grid.node_position(i, j, static_cast<std::uint32_t>(k));
                auto sqdist = [&](std::uint32_t f) {
                    const auto& t = mesh.faces[f];
                    return (closest_point_on_triangle(p, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                      mesh.vertices[t[2]]).point - p).squaredNorm();
                };
                const auto f = static_cast<std::uint32_t>(tree.nearest(p, sqdist));
                const auto& t = mesh.faces[f];
                const ClosestPoint cp =
                    closest_point_on_triangle(p, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
                const Vec3 d = p - cp.point;
                const double dist = d.norm();
                Vec3 n;
                switch (cp.feature) {
                    case TriFeature::Face: n = normals.face[f]; break;
                    case TriFeature::EdgeAB: n = normals.edge_normal(t[0], t[1]); break;
                    case TriFeature::EdgeBC: n = normals.edge_normal(t[1], t[2]); break;
                    case TriFeature::EdgeCA: n = normals.edge_normal(t[2], t[0]); break;
                    case TriFeature::VertexA: n = normals.vertex[t[0]]; break;
                    case TriFeature::VertexB: n = normals.vertex[t[1]]; break;
                    case TriFeature::VertexC: n = normals.vertex[t[2]]; break;
                }
                const double sign = d.dot(n) < 0.0 ? -1.0 : 1.0;
                grid.values[k * plane + static_cast<size_t>(j) * dims[0] + i] = static_cast<float>(sign * dist);
            }
    });
    return grid;
}

void save_sdf(const SdfGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write("GSDF", 4);
    write_u32(out, 1);
    for (auto d : grid.dims) write_u32(out, d);
    for (int a = 0; a < 3; ++a) write_f32(out, grid.origin[a]);
    write_f32(out, grid.spacing);
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(float)));
    if (!out) throw IoError("failed writing " + path);
}

SdfGrid load_sdf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "GSDF", 4) != 0) throw IoError(path + ": not a GSDF file");
    const auto version = read_u32(in);
    if (version != 1) throw IoError(path + ": unsupported GSDF version " + std::to_string(version));
    SdfGrid g;
    for (auto& d : g.dims) d = read_u32(in);
    for (int a = 0; a < 3; ++a) g.origin[a] = read_f32(in);
    g.spacing = read_f32(in);
    if (!in) throw IoError(path + ": truncated header");
    for (auto d : g.dims)
        if (d < 2) throw ValidationError(path + ": grid dimension < 2");
    if (!(g.spacing > 0.0f)) throw ValidationError(path + ": non-positive spacing");
    g.values.resize(static_cast<size_t>(g.dims[0]) * g.dims[1] * g.dims[2]);
    in.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(float)));
    if (!in) throw IoError(path + ": truncated value block");
    return g;
}

}  // namespace hsi
