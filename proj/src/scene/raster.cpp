#include "hsi/scene/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hsi/common/error.hpp"

namespace hsi {

namespace {

constexpr double kNearPlane = 1e-4;

// Sutherland-Hodgman against z >= kNearPlane.
std::vector<Vec3> clip_near(const std::array<Vec3, 3>& tri) {
    std::vector<Vec3> out;
    for (int i = 0; i < 3; ++i) {
        const Vec3& a = tri[i];
        const Vec3& b = tri[(i + 1) % 3];
        const bool ina = a.z() >= kNearPlane;
        const bool inb = b.z() >= kNearPlane;
        if (ina) out.push_back(a);
        if (ina != inb) {
            const double t = (kNearPlane - a.z()) / (b.z() - a.z());
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

void raster_triangle(const Camera& cam, const Vec3& p0, const Vec3& p1, const Vec3& p2, std::int32_t face,
                     RasterResult& r) {
    const Vec3 P[3] = {p0, p1, p2};
    double sx[3], sy[3], iz[3];
    for (int i = 0; i < 3; ++i) {
        sx[i] = cam.fx * P[i].x() / P[i].z() + cam.cx;
        sy[i] = cam.fy * P[i].y() / P[i].z() + cam.cy;
        iz[i] = 1.0 / P[i].z();
    }
    const double area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
    if (area == 0.0 || !std::isfinite(area)) return;

    const double minx = std::min({sx[0], sx[1], sx[2]});
    const double maxx = std::max({sx[0], sx[1], sx[2]});
    const double miny = std::min({sy[0], sy[1], sy[2]});
    const double maxy = std::max({sy[0], sy[1], sy[2]});
    const int x0 = std::max(0, static_cast<int>(std::floor(minx - 0.5)));
    const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(maxx - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(miny - 0.5)));
    const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(maxy - 0.5)));
    if (x0 > x1 || y0 > y1) return;

    const double inv_area = 1.0 / area;
    for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5;
            double w0 = ((sx[2] - sx[1]) * (py - sy[1]) - (sy[2] - sy[1]) * (px - sx[1])) * inv_area;
            double w1 = ((sx[0] - sx[2]) * (py - sy[2]) - (sy[0] - sy[2]) * (px - sx[2])) * inv_area;
            double w2 = 1.0 - w0 - w1;
            if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
            const double z = 1.0 / (w0 * iz[0] + w1 * iz[1] + w2 * iz[2]);
            float& d = r.depth(x, y);
            if (z < d) {
                d = static_cast<float>(z);
                r.face_id(x, y) = face;
                r.silhouette(x, y) = 1;
            }
        }
    }
}

}  // namespace

RasterResult rasterize(const TriMesh& mesh, const Camera& camera) {
    RasterResult r;
    r.depth = Image<float>(camera.width, camera.height, kEmptyDepth);
    r.silhouette = Mask(camera.width, camera.height, 0);
    r.face_id = Image<std::int32_t>(camera.width, camera.height, -1);
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& t = mesh.faces[f];
        const std::array<Vec3, 3> pc = {camera.to_camera(mesh.vertices[t[0]]), camera.to_camera(mesh.vertices[t[1]]),
                                        camera.to_camera(mesh.vertices[t[2]])};
        if (pc[0].z() < kNearPlane && pc[1].z() < kNearPlane && pc[2].z() < kNearPlane) continue;
        const auto poly = clip_near(pc);
        for (size_t k = 1; k + 1 < poly.size(); ++k)
            raster_triangle(camera, poly[0], poly[k], poly[k + 1], static_cast<std::int32_t>(f), r);
    }
    return r;
}

Mask dilate_mask(const Mask& mask, int kernel) {
    if (kernel < 1 || kernel % 2 == 0)
        throw ValidationError("dilate_mask: kernel must be odd and >= 1, got " + std::to_string(kernel));
    const int h = kernel / 2;
    if (h == 0) return mask;
    // Separable max filter: rows, then columns.
    Mask rows(mask.width, mask.height, 0);
    for (int y = 0; y < mask.height; ++y) {
        int last = -1000000;
        for (int x = 0; x < mask.width + h; ++x) {
            if (x < mask.width && mask(x, y)) last = x;
            const int xo = x - h;
            if (xo >= 0 && xo < mask.width) rows(xo, y) = (x - last <= 2 * h) ? 1 : 0;
        }
    }
    Mask out(mask.width, mask.height, 0);
    for (int x = 0; x < mask.width; ++x) {
        int last = -1000000;
        for (int y = 0; y < mask.height + h; ++y) {
            if (y < mask.height && rows(x, y)) last = y;
            const int yo = y - h;
            if (yo >= 0 && yo < mask.height) out(x, yo) = (y - last <= 2 * h) ? 1 : 0;
        }
    }
    return out;
}

}  // namespace hsi
