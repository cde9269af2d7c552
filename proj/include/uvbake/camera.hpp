// camera.hpp — projection models and the JSON "fit file" that carries them.
//
// Two variants cover what human-mesh-recovery tooling emits in practice:
// full perspective (intrinsics + rigid pose) and weak perspective (uniform
// scale + image-plane translation, parallel projection along +z). Image
// coordinates follow the top-left / +y-down convention.
#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "uvbake/vec.hpp"

namespace uvbake {

constexpr double kBehindCameraEps = 1e-9;

struct PerspectiveCamera {
    double fx = 0.0, fy = 0.0;  // focal lengths, pixels
    double cx = 0.0, cy = 0.0;  // principal point, pixels
    Mat3 rotation;              // world -> camera
    Vec3 translation;           // world -> camera, scene units
};

struct WeakPerspectiveCamera {
    double scale = 0.0;        // pixels per scene unit
    double tx = 0.0, ty = 0.0; // image-plane translation, pixels
};

struct Camera {
    std::variant<PerspectiveCamera, WeakPerspectiveCamera> model;
    int image_width = 0, image_height = 0;

    bool is_perspective() const { return std::holds_alternative<PerspectiveCamera>(model); }
    const PerspectiveCamera& perspective() const { return std::get<PerspectiveCamera>(model); }
    const WeakPerspectiveCamera& weak() const { return std::get<WeakPerspectiveCamera>(model); }
};

// Checks RᵀR = I and det(R) = +1 within 1e-6, positive focal/scale, and a
// nonempty image size. Throws on violation.
inline void validate_camera(const Camera& camera) {
    if (camera.image_width < 1 || camera.image_height < 1)
        throw ValidationError("camera: image size must be at least 1x1");
    if (camera.is_perspective()) {
        const PerspectiveCamera& p = camera.perspective();
        if (p.fx <= 0.0 || p.fy <= 0.0)
            throw ValidationError("camera: focal lengths must be positive");
        const Mat3 gram = transpose(p.rotation) * p.rotation;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double expected = i == j ? 1.0 : 0.0;
                if (std::abs(gram(i, j) - expected) > 1e-6)
                    throw ValidationError("camera: rotation is not orthonormal");
            }
        if (std::abs(determinant(p.rotation) - 1.0) > 1e-6)
            throw ValidationError("camera: rotation determinant must be +1");
    } else {
        if (camera.weak().scale <= 0.0)
            throw ValidationError("camera: scale must be positive");
    }
}

struct Projection {
    Vec2 pixel;
    double depth = 0.0;  // camera-space z (orthographic z for weak perspective)
};

// Non-throwing projection for hot loops; false means the point is at or
// behind a perspective camera plane.
inline bool try_project(const Camera& camera, Vec3 point, Projection& out) {
    if (camera.is_perspective()) {
        const PerspectiveCamera& p = camera.perspective();
        const Vec3 cam = p.rotation * point + p.translation;
        if (cam.z <= kBehindCameraEps) return false;
        out.pixel = {p.fx * cam.x / cam.z + p.cx, p.fy * cam.y / cam.z + p.cy};
        out.depth = cam.z;
    } else {
        const WeakPerspectiveCamera& w = camera.weak();
        out.pixel = {w.scale * point.x + w.tx, w.scale * point.y + w.ty};
        out.depth = point.z;
    }
    return true;
}

inline Projection project(const Camera& camera, Vec3 point) {
    Projection out;
    if (!try_project(camera, point, out))
        throw Error("project: point is behind the camera");
    return out;
}

inline Vec3 camera_center(const PerspectiveCamera& p) {
    return -(transpose(p.rotation) * p.translation);
}

// Unit vector from the camera toward the surface point. Weak perspective is
// a parallel projection, so the direction is the constant +z view axis.
// Callers negate this before dotting with an outward surface normal, making
// a camera-facing texel score cos θ = 1.
inline Vec3 view_vector(const Camera& camera, Vec3 point) {
    if (!camera.is_perspective()) return {0.0, 0.0, 1.0};
    const Vec3 center = camera_center(camera.perspective());
    const Vec3 d = point - center;
    if (norm(d) <= 0.0) throw Error("view_vector: point coincides with the camera center");
    return normalize(d);
}

// --- fit file ---------------------------------------------------------------
//
// JSON document binding one photograph to its camera:
//   {"view": "front"|"back",
//    "camera": {"type": "perspective", "fx":..,"fy":..,"cx":..,"cy":..,
//               "rotation": [9 numbers, row-major], "translation": [3],
//               "width":.., "height":..}
//            | {"type": "weak_perspective", "scale":..,"tx":..,"ty":..,
//               "width":.., "height":..},
//    "image": "path.png"}          (image is optional when the caller
//                                   supplies one explicitly)

struct FitFile {
    std::string view;   // "front" or "back"
    Camera camera;
    std::string image;  // path relative to the fit file's directory
};

inline FitFile parse_fit_json(const nlohmann::json& j, const std::string& context) {
    FitFile fit;
    try {
        fit.view = j.at("view").get<std::string>();
        if (fit.view != "front" && fit.view != "back")
            throw ValidationError(context + ": view must be \"front\" or \"back\"");
        const auto& c = j.at("camera");
        const std::string type = c.at("type").get<std::string>();
        if (type == "perspective") {
            PerspectiveCamera p;
            p.fx = c.at("fx").get<double>();
            p.fy = c.at("fy").get<double>();
            p.cx = c.at("cx").get<double>();
            p.cy = c.at("cy").get<double>();
            const auto rot = c.at("rotation");
            if (!rot.is_array() || rot.size() != 9)
                throw ValidationError(context + ": rotation must hold 9 numbers, row-major");
            for (int i = 0; i < 9; ++i) p.rotation.m[i] = rot[i].get<double>();
            const auto tr = c.at("translation");
            if (!tr.is_array() || tr.size() != 3)
                throw ValidationError(context + ": translation must hold 3 numbers");
            p.translation = {tr[0].get<double>(), tr[1].get<double>(), tr[2].get<double>()};
            fit.camera.model = p;
        } else if (type == "weak_perspective") {
            WeakPerspectiveCamera w;
            w.scale = c.at("scale").get<double>();
            w.tx = c.at("tx").get<double>();
            w.ty = c.at("ty").get<double>();
            fit.camera.model = w;
        } else {
            throw ValidationError(context + ": unknown camera type '" + type + "'");
        }
        fit.camera.image_width = c.at("width").get<int>();
        fit.camera.image_height = c.at("height").get<int>();
        if (j.contains("image")) fit.image = j.at("image").get<std::string>();
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(context + ": " + e.what());
    }
    validate_camera(fit.camera);
    return fit;
}

inline FitFile load_fit_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw Error("fit file not found: " + path);
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("fit file " + path + ": " + e.what());
    }
    return parse_fit_json(j, "fit file " + path);
}

}  // namespace uvbake
