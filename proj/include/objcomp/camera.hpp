#pragma once

#include "objcomp/errors.hpp"
#include "objcomp/math.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

namespace objcomp {

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();
    double tmin = 0.0;
    double tmax = std::numeric_limits<double>::infinity();
};

/// Pinhole camera. Camera space follows the computer-vision convention:
/// +x right, +y down, +z forward; pixel (x, y) has its centre at (x+0.5, y+0.5).
struct Camera {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;
    Mat4 world_to_camera = Mat4::Identity();
    double near = 0.01;
    double far = 100.0;

    void validate() const {
        if (!(fx > 0.0 && fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
            throw DataError("camera focal lengths must be positive");
        }
        if (!std::isfinite(cx) || !std::isfinite(cy)) {
            throw DataError("camera principal point must be finite");
        }
        if (width < 1 || height < 1) {
            throw DataError("camera image size must be positive");
        }
        if (!(near > 0.0 && near < far) || !std::isfinite(far)) {
            throw DataError("camera clip range must satisfy 0 < near < far");
        }
        if (!is_rigid(world_to_camera, 1e-5)) {
            throw DataError("camera world_to_camera is not a rigid transform");
        }
    }

    Mat3 rotation() const { return world_to_camera.topLeftCorner<3, 3>(); }

    /// Camera centre in world space.
    Vec3 center() const { return -rotation().transpose() * world_to_camera.topRightCorner<3, 1>(); }

    Vec3 to_camera(const Vec3& world) const { return transform_point(world_to_camera, world); }

    /// Projects a camera-space point (z > 0) to continuous pixel coordinates.
    Vec2 project(const Vec3& cam) const { return {fx * cam.x() / cam.z() + cx, fy * cam.y() / cam.z() + cy}; }

    Vec2 project_world(const Vec3& world) const { return project(to_camera(world)); }

    /// World-space ray through continuous pixel coordinates (px, py).
    Ray pixel_ray(double px, double py) const {
        const Vec3 d_cam((px - cx) / fx, (py - cy) / fy, 1.0);
        Ray r;
        r.origin = center();
        r.direction = (rotation().transpose() * d_cam).normalized();
        return r;
    }
};

/// Camera at `eye` looking at `target`; `fov_y` is the vertical field of view in radians.
inline Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y, int width, int height,
                      double near = 0.05, double far = 100.0) {
    const Vec3 forward = (target - eye).normalized();
    const Vec3 right = forward.cross(up).normalized();
    const Vec3 down = forward.cross(right);
    Camera cam;
    Mat3 r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();
    cam.world_to_camera.setIdentity();
    cam.world_to_camera.topLeftCorner<3, 3>() = r;
    cam.world_to_camera.topRightCorner<3, 1>() = -r * eye;
    cam.fy = 0.5 * height / std::tan(0.5 * fov_y);
    cam.fx = cam.fy;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.width = width;
    cam.height = height;
    cam.near = near;
    cam.far = far;
    return cam;
}

inline nlohmann::json camera_to_json(const Camera& cam) {
    nlohmann::json j;
    j["fx"] = cam.fx;
    j["fy"] = cam.fy;
    j["cx"] = cam.cx;
    j["cy"] = cam.cy;
    j["width"] = cam.width;
    j["height"] = cam.height;
    j["near"] = cam.near;
    j["far"] = cam.far;
    j["world_to_camera"] = to_row_major(cam.world_to_camera);
    return j;
}

inline Camera camera_from_json(const nlohmann::json& j, const std::string& source = "<camera>") {
    Camera cam;
    try {
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        cam.near = j.at("near").get<double>();
        cam.far = j.at("far").get<double>();
        const auto m = j.at("world_to_camera").get<std::vector<double>>();
        if (m.size() != 16) {
            throw DataError(source + ": world_to_camera needs 16 numbers", source);
        }
        cam.world_to_camera = mat4_from_row_major(std::span<const double, 16>(m.data(), 16));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(source + ": invalid camera: " + e.what(), source);
    }
    try {
        cam.validate();
    } catch (const DataError& e) {
        throw DataError(source + ": " + e.what(), source);
    }
    return cam;
}

inline Camera load_camera(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open camera '" + path.string() + "'", path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what(), path.string());
    }
    return camera_from_json(j, path.string());
}

inline void save_camera(const Camera& cam, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write camera '" + path.string() + "'", path.string());
    }
    out << camera_to_json(cam).dump(2) << '\n';
}

} // namespace objcomp
