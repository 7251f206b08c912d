#include "hsi/scene/camera.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "hsi/common/error.hpp"

namespace hsi {

Vec3 Camera::unproject(const Vec2& pixel, double depth) const {
    const Vec3 pc((pixel.x() - cx) / fx * depth, (pixel.y() - cy) / fy * depth, depth);
    return rotation.transpose() * (pc - translation);
}

void Camera::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("camera " + std::to_string(view_id) + ": fx, fy must be > 0");
    if (width <= 0 || height <= 0) throw ValidationError("camera " + std::to_string(view_id) + ": bad image size");
    if (!((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-6))
        throw ValidationError("camera " + std::to_string(view_id) + ": rotation is not orthonormal");
}

Projection project(const Camera& camera, const std::vector<Vec3>& points) {
    Projection out;
    out.pixels.resize(points.size(), Vec2::Zero());
    out.valid.resize(points.size(), false);
    for (size_t i = 0; i < points.size(); ++i) out.valid[i] = camera.project<double>(points[i], &out.pixels[i]);
    return out;
}

Camera look_at(const Vec3& eye, const Vec3& target, const Intrinsics& intr, int view_id) {
    Vec3 forward = (target - eye).normalized();
    Vec3 up(0, 0, 1);
    if (forward.cross(up).norm() < 1e-6) up = Vec3(0, 1, 0);
    const Vec3 right = forward.cross(up).normalized();
    const Vec3 down = forward.cross(right);
    Camera c;
    c.view_id = view_id;
    c.rotation.row(0) = right.transpose();
    c.rotation.row(1) = down.transpose();
    c.rotation.row(2) = forward.transpose();
    c.translation = -c.rotation * eye;
    c.width = intr.width;
    c.height = intr.height;
    c.fx = c.fy = 0.5 * intr.width / std::tan(0.5 * intr.fov_deg * std::numbers::pi / 180.0);
    c.cx = 0.5 * intr.width;
    c.cy = 0.5 * intr.height;
    return c;
}

void save_cameras(const std::vector<Camera>& cameras, const std::string& path) {
    nlohmann::json doc;
    doc["format"] = "hsi.cameras";
    doc["version"] = 1;
    doc["views"] = nlohmann::json::array();
    for (const auto& c : cameras) {
        nlohmann::json v;
        v["view_id"] = c.view_id;
        v["fx"] = c.fx;
        v["fy"] = c.fy;
        v["cx"] = c.cx;
        v["cy"] = c.cy;
        std::vector<double> r(9), t(3);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) r[3 * i + j] = c.rotation(i, j);
            t[i] = c.translation[i];
        }
        v["rotation"] = r;
        v["translation"] = t;
        v["width"] = c.width;
        v["height"] = c.height;
        doc["views"].push_back(v);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << '\n';
}

std::vector<Camera> load_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    if (doc.value("format", "") != "hsi.cameras") throw ValidationError(path + ": not an hsi.cameras document");
    if (doc.value("version", 0) != 1) throw ValidationError(path + ": unsupported camera file version");
    std::vector<Camera> cams;
    try {
        for (const auto& v : doc.at("views")) {
            Camera c;
            c.view_id = v.at("view_id").get<int>();
            c.fx = v.at("fx").get<double>();
            c.fy = v.at("fy").get<double>();
            c.cx = v.at("cx").get<double>();
            c.cy = v.at("cy").get<double>();
            const auto r = v.at("rotation").get<std::vector<double>>();
            const auto t = v.at("translation").get<std::vector<double>>();
            if (r.size() != 9 || t.size() != 3) throw ValidationError(path + ": rotation needs 9 and translation 3 values");
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) c.rotation(i, j) = r[3 * i + j];
                c.translation[i] = t[i];
            }
            c.width = v.at("width").get<int>();
            c.height = v.at("height").get<int>();
            c.validate();
            cams.push_back(c);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return cams;
}

}  // namespace hsi
