#pragma once

#include <string>
#include <vector>

#include "hsi/geometry/types.hpp"

namespace hsi {

inline constexpr double kMinDepth = 1e-6;

// Pinhole camera. rotation/translation map world to camera coordinates
// (x right, y down, z forward); pixels follow x = fx * X / Z + cx.
struct Camera {
    int view_id = 0;
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    int width = 512, height = 512;

    Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
    Vec3 center() const { return -rotation.transpose() * translation; }

    // Returns false (point behind the camera) when Z_c <= kMinDepth.
    template <class T>
    bool project(const Eigen::Matrix<T, 3, 1>& world, Eigen::Matrix<T, 2, 1>* pixel) const {
        const Eigen::Matrix<T, 3, 1> pc = rotation.cast<T>() * world + translation.cast<T>();
        if (!(pc[2] > T(kMinDepth))) return false;
        (*pixel)[0] = T(fx) * pc[0] / pc[2] + T(cx);
        (*pixel)[1] = T(fy) * pc[1] / pc[2] + T(cy);
        return true;
    }

    Vec3 unproject(const Vec2& pixel, double depth) const;

    // Throws ValidationError when intrinsics or the rotation are invalid.
    void validate() const;

    bool operator==(const Camera& o) const {
        return view_id == o.view_id && fx == o.fx && fy == o.fy && cx == o.cx && cy == o.cy &&
               rotation == o.rotation && translation == o.translation && width == o.width && height == o.height;
    }
};

struct Projection {
    std::vector<Vec2> pixels;
    std::vector<bool> valid;
};

Projection project(const Camera& camera, const std::vector<Vec3>& points);

// Square-pixel intrinsics from a horizontal field of view.
struct Intrinsics {
    int width = 512;
    int height = 512;
    double fov_deg = 60.0;
};

// Camera at eye looking at target with +z as world up.
Camera look_at(const Vec3& eye, const Vec3& target, const Intrinsics& intr, int view_id = 0);

// JSON document {"format": "hsi.cameras", "version": 1, "views": [...]}, each
// view holding view_id, fx, fy, cx, cy, rotation (3x3 row-major), translation,
// width, height. Doubles are written in shortest round-trip form.
void save_cameras(const std::vector<Camera>& cameras, const std::string& path);
std::vector<Camera> load_cameras(const std::string& path);

}  // namespace hsi
