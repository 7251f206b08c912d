#include <algorithm>

#include "hsi/geometry/aabb_tree.hpp"
#include "hsi/geometry/triangle.hpp"
#include "hsi/lifting/collisions.hpp"

namespace hsi {

std::vector<TrianglePair> bvh_collisions(const std::vector<Vec3>& vertices, const std::vector<Face>& faces) {
    std::vector<Aabb> boxes(faces.size());
    for (size_t f = 0; f < faces.size(); ++f)
        for (auto i : faces[f]) boxes[f].extend(vertices[i]);
    const AabbTree tree(std::move(boxes));

    std::vector<TrianglePair> out;
    tree.self_pairs([&](std::uint32_t a, std::uint32_t b) {
        const Face& A = faces[a];
        const Face& B = faces[b];
        for (auto i : A)
            for (auto j : B)
                if (i == j) return;
        if (triangles_intersect(vertices[A[0]], vertices[A[1]], vertices[A[2]], vertices[B[0]], vertices[B[1]],
                                vertices[B[2]]))
            out.emplace_back(std::min(a, b), std::max(a, b));
    });
    std::sort(out.begin(), out.end());
    return out;
}

double energy_sp(const std::vector<Vec3>& vertices, const std::vector<Face>& faces) {
    return penetration_energy<double>(vertices, faces, bvh_collisions(vertices, faces));
}

}  // namespace hsi
