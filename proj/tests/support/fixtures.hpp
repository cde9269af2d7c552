// fixtures.hpp — synthetic meshes, cameras and textures shared by the tests.
#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "uvbake/camera.hpp"
#include "uvbake/mesh.hpp"
#include "uvbake/obj_io.hpp"

namespace fixtures {

using uvbake::Camera;
using uvbake::Face;
using uvbake::FaceCorner;
using uvbake::Mat3;
using uvbake::Mesh;
using uvbake::PerspectiveCamera;
using uvbake::Rgb;
using uvbake::Vec2;
using uvbake::Vec3;
using uvbake::WeakPerspectiveCamera;

// Unique scratch directory under the system temp dir; removed lazily by the
// OS, never reused across processes.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static int counter = 0;
    const auto base = std::filesystem::temp_directory_path() /
                      ("uvbake_" + tag + "_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter++));
    std::filesystem::create_directories(base);
    return base;
}

inline void finalize(Mesh& mesh) {
    mesh.vertex_normals = uvbake::compute_vertex_normals(mesh).normals;
}

// Quad made of two triangles. `corner` is the (x,y,z) of the UV-origin
// corner; `edge_u` and `edge_v` span the quad; UVs fill [uv_min, uv_max].
// Winding is chosen so the geometric normal is cross(edge_u, edge_v).
inline Mesh make_quad(Vec3 corner, Vec3 edge_u, Vec3 edge_v, Vec2 uv_min, Vec2 uv_max) {
    Mesh mesh;
    mesh.positions = {corner, corner + edge_u, corner + edge_u + edge_v, corner + edge_v};
    mesh.uvs = {{uv_min.x, uv_min.y}, {uv_max.x, uv_min.y}, {uv_max.x, uv_max.y}, {uv_min.x, uv_max.y}};
    mesh.faces = {Face{FaceCorner{0, 0}, FaceCorner{1, 1}, FaceCorner{2, 2}},
                  Face{FaceCorner{0, 0}, FaceCorner{2, 2}, FaceCorner{3, 3}}};
    finalize(mesh);
    return mesh;
}

inline Mesh merge(const Mesh& a, const Mesh& b) {
    Mesh out = a;
    const auto pbase = static_cast<std::int32_t>(a.positions.size());
    const auto ubase = static_cast<std::int32_t>(a.uvs.size());
    out.positions.insert(out.positions.end(), b.positions.begin(), b.positions.end());
    out.uvs.insert(out.uvs.end(), b.uvs.begin(), b.uvs.end());
    for (Face f : b.faces) {
        for (auto& c : f) {
            c.position += pbase;
            c.uv += ubase;
        }
        out.faces.push_back(f);
    }
    finalize(out);
    return out;
}

inline Mesh transformed(const Mesh& mesh, const Mat3& rotation, Vec3 translation = {}) {
    Mesh out = mesh;
    for (Vec3& p : out.positions) p = rotation * p + translation;
    finalize(out);
    return out;
}

// Ellipsoid with the standard spherical unwrap (u = azimuth with a duplicated
// seam column, v = polar angle). `segments` longitude divisions, `rings`
// latitude bands. Mid-band faces are emitted as two triangles here; the OBJ
// writer below can emit them as quads instead.
inline Mesh make_uv_sphere(int segments, int rings, Vec3 radii) {
    Mesh mesh;
    // positions: top pole, interior rings, bottom pole
    mesh.positions.push_back({0.0, radii.y, 0.0});
    for (int r = 1; r < rings; ++r) {
        const double theta = M_PI * r / rings;
        for (int s = 0; s < segments; ++s) {
            const double phi = 2.0 * M_PI * s / segments;
            mesh.positions.push_back({radii.x * std::sin(theta) * std::cos(phi),
                                      radii.y * std::cos(theta),
                                      radii.z * std::sin(theta) * std::sin(phi)});
        }
    }
    mesh.positions.push_back({0.0, -radii.y, 0.0});
    const std::int32_t bottom_pole = static_cast<std::int32_t>(mesh.positions.size()) - 1;

    // uvs: per-segment pole coords plus (segments+1)-wide interior rows
    std::vector<std::int32_t> top_uv(segments), bottom_uv(segments);
    std::vector<std::vector<std::int32_t>> ring_uv(rings - 1, std::vector<std::int32_t>(segments + 1));
    for (int s = 0; s < segments; ++s) {
        top_uv[s] = static_cast<std::int32_t>(mesh.uvs.size());
        mesh.uvs.push_back({(s + 0.5) / segments, 1.0});
    }
    for (int r = 1; r < rings; ++r)
        for (int s = 0; s <= segments; ++s) {
            ring_uv[r - 1][s] = static_cast<std::int32_t>(mesh.uvs.size());
            mesh.uvs.push_back({static_cast<double>(s) / segments, 1.0 - static_cast<double>(r) / rings});
        }
    for (int s = 0; s < segments; ++s) {
        bottom_uv[s] = static_cast<std::int32_t>(mesh.uvs.size());
        mesh.uvs.push_back({(s + 0.5) / segments, 0.0});
    }

    const auto ring_pos = [&](int r, int s) {
        return static_cast<std::int32_t>(1 + (r - 1) * segments + (s % segments));
    };
    // top fan (outward winding: as seen from outside, counter-clockwise)
    for (int s = 0; s < segments; ++s)
        mesh.faces.push_back({FaceCorner{0, top_uv[s]},
                              FaceCorner{ring_pos(1, s), ring_uv[0][s]},
                              FaceCorner{ring_pos(1, s + 1), ring_uv[0][s + 1]}});
    // mid bands
    for (int r = 1; r < rings - 1; ++r)
        for (int s = 0; s < segments; ++s) {
            const FaceCorner a{ring_pos(r, s), ring_uv[r - 1][s]};
            const FaceCorner b{ring_pos(r + 1, s), ring_uv[r][s]};
            const FaceCorner c{ring_pos(r + 1, s + 1), ring_uv[r][s + 1]};
            const FaceCorner d{ring_pos(r, s + 1), ring_uv[r - 1][s + 1]};
            mesh.faces.push_back({a, b, c});
            mesh.faces.push_back({a, c, d});
        }
    // bottom fan
    for (int s = 0; s < segments; ++s)
        mesh.faces.push_back({FaceCorner{bottom_pole, bottom_uv[s]},
                              FaceCorner{ring_pos(rings - 1, s + 1), ring_uv[rings - 2][s + 1]},
                              FaceCorner{ring_pos(rings - 1, s), ring_uv[rings - 2][s]}});
    finalize(mesh);
    return mesh;
}

// Writes a mesh as OBJ. With `quads_in_bands`, pairs of consecutive faces
// that form a quad (as produced by make_uv_sphere's mid bands) are merged
// back into 4-corner records to exercise fan triangulation on load.
inline void write_obj(const std::filesystem::path& path, const Mesh& mesh,
                      bool quads_in_bands = false) {
    std::ofstream out(path);
    out.precision(12);
    for (const Vec3& p : mesh.positions) out << "v " << p.x << " " << p.y << " " << p.z << "\n";
    for (const Vec2& t : mesh.uvs) out << "vt " << t.x << " " << t.y << "\n";
    const auto corner = [](const FaceCorner& c) {
        return std::to_string(c.position + 1) + "/" + std::to_string(c.uv + 1);
    };
    for (size_t i = 0; i < mesh.faces.size(); ++i) {
        const Face& f = mesh.faces[i];
        if (quads_in_bands && i + 1 < mesh.faces.size()) {
            const Face& g = mesh.faces[i + 1];
            // (a,b,c) + (a,c,d) -> quad a b c d; corners must agree in UV too
            if (f[0].position == g[0].position && f[0].uv == g[0].uv &&
                f[2].position == g[1].position && f[2].uv == g[1].uv) {
                out << "f " << corner(f[0]) << " " << corner(f[1]) << " " << corner(f[2]) << " "
                    << corner(g[2]) << "\n";
                ++i;
                continue;
            }
        }
        out << "f " << corner(f[0]) << " " << corner(f[1]) << " " << corner(f[2]) << "\n";
    }
}

inline Camera make_weak_camera(double scale, double tx, double ty, int width, int height) {
    Camera cam;
    cam.model = WeakPerspectiveCamera{scale, tx, ty};
    cam.image_width = width;
    cam.image_height = height;
    return cam;
}

inline Camera make_persp_camera(double fx, double fy, double cx, double cy, const Mat3& rotation,
                                Vec3 translation, int width, int height) {
    Camera cam;
    cam.model = PerspectiveCamera{fx, fy, cx, cy, rotation, translation};
    cam.image_width = width;
    cam.image_height = height;
    return cam;
}

// sRGB-exact linear value for an 8-bit code, so PNG round trips are lossless.
inline float exact_u8(int code) { return static_cast<float>(uvbake::srgb_decode(code / 255.0)); }

// Axis-aligned UV checker with `cells` cells per side.
inline Rgb checker_color(double u, double v, int cells, Rgb a, Rgb b) {
    const int cu = std::min(static_cast<int>(u * cells), cells - 1);
    const int cv = std::min(static_cast<int>(v * cells), cells - 1);
    return ((cu + cv) % 2 == 0) ? a : b;
}

// Random small mesh for oracle sweeps: triangles scattered in a unit-ish box
// with arbitrary depth ordering, UVs tiled so faces do not overlap in the
// atlas.
inline Mesh make_random_mesh(std::mt19937& rng, int face_count, bool for_perspective) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Mesh mesh;
    const int tiles = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(face_count))));
    for (int f = 0; f < face_count; ++f) {
        const double cx = unit(rng) * 2.0 - 1.0;
        const double cy = unit(rng) * 2.0 - 1.0;
        const double cz = for_perspective ? 2.0 + unit(rng) * 2.0 : unit(rng) * 2.0 - 1.0;
        const auto vertex = [&](double r) {
            return Vec3{cx + (unit(rng) - 0.5) * r, cy + (unit(rng) - 0.5) * r,
                        cz + (unit(rng) - 0.5) * r * 0.5};
        };
        const Vec3 a = vertex(0.8), b = vertex(0.8), c = vertex(0.8);
        const std::int32_t pbase = static_cast<std::int32_t>(mesh.positions.size());
        mesh.positions.insert(mesh.positions.end(), {a, b, c});
        const double u0 = (f % tiles) / static_cast<double>(tiles);
        const double v0 = (f / tiles) / static_cast<double>(tiles);
        const double pad = 0.1 / tiles;
        const std::int32_t ubase = static_cast<std::int32_t>(mesh.uvs.size());
        mesh.uvs.insert(mesh.uvs.end(), {{u0 + pad, v0 + pad},
                                         {u0 + 1.0 / tiles - pad, v0 + pad},
                                         {u0 + pad, v0 + 1.0 / tiles - pad}});
        mesh.faces.push_back({FaceCorner{pbase, ubase}, FaceCorner{pbase + 1, ubase + 1},
                              FaceCorner{pbase + 2, ubase + 2}});
    }
    finalize(mesh);
    return mesh;
}

inline void write_fit_file(const std::filesystem::path& path, const Camera& cam,
                           const std::string& view, const std::string& image = "") {
    std::ofstream out(path);
    out << "{\n  \"view\": \"" << view << "\",\n  \"camera\": {";
    out.precision(17);
    if (cam.is_perspective()) {
        const PerspectiveCamera& p = cam.perspective();
        out << "\"type\": \"perspective\", \"fx\": " << p.fx << ", \"fy\": " << p.fy
            << ", \"cx\": " << p.cx << ", \"cy\": " << p.cy << ", \"rotation\": [";
        for (int i = 0; i < 9; ++i) out << (i ? ", " : "") << p.rotation.m[i];
        out << "], \"translation\": [" << p.translation.x << ", " << p.translation.y << ", "
            << p.translation.z << "]";
    } else {
        const WeakPerspectiveCamera& w = cam.weak();
        out << "\"type\": \"weak_perspective\", \"scale\": " << w.scale << ", \"tx\": " << w.tx
            << ", \"ty\": " << w.ty;
    }
    out << ", \"width\": " << cam.image_width << ", \"height\": " << cam.image_height << "}";
    if (!image.empty()) out << ",\n  \"image\": \"" << image << "\"";
    out << "\n}\n";
}

}  // namespace fixtures
