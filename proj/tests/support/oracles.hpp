// oracles.hpp — independent reference implementations used to validate the
// library. Everything here derives results straight from first principles
// (ray casting, per-texel point location, exhaustive search) and shares no
// code path with the kernels under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "uvbake/baker.hpp"
#include "uvbake/camera.hpp"
#include "uvbake/image.hpp"
#include "uvbake/mesh.hpp"

namespace oracles {

using uvbake::Barycentric;
using uvbake::Camera;
using uvbake::ImageRgba;
using uvbake::Mesh;
using uvbake::Rgb;
using uvbake::Rgba;
using uvbake::Vec2;
using uvbake::Vec3;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SceneHit {
    int face = -1;
    double depth = kInf;     // camera-space depth of the hit
    Barycentric bc;
};

// Camera depth of a world-space point, written out from the camera
// parameters rather than calling the library.
inline double camera_depth(const Camera& cam, Vec3 p) {
    if (!cam.is_perspective()) return p.z;
    const auto& c = cam.perspective();
    return c.rotation(2, 0) * p.x + c.rotation(2, 1) * p.y + c.rotation(2, 2) * p.z +
           c.translation.z;
}

// Pixel position of a world-space point (no behind-camera handling; callers
// check depth themselves).
inline Vec2 project_point(const Camera& cam, Vec3 p) {
    if (cam.is_perspective()) {
        const auto& c = cam.perspective();
        const Vec3 q = c.rotation * p + c.translation;
        return {c.fx * q.x / q.z + c.cx, c.fy * q.y / q.z + c.cy};
    }
    const auto& w = cam.weak();
    return {w.scale * p.x + w.tx, w.scale * p.y + w.ty};
}

// Nearest surface along the viewing ray through an arbitrary continuous
// pixel position. Perspective uses Möller–Trumbore from the camera center
// with an unnormalized direction whose parameter equals the camera depth;
// weak perspective reduces to 2D point-in-triangle plus affine depth.
inline SceneHit raycast_pixel(const Mesh& mesh, const Camera& cam, double px, double py) {
    SceneHit best;
    if (cam.is_perspective()) {
        const auto& c = cam.perspective();
        const uvbake::Mat3 rt = uvbake::transpose(c.rotation);
        const Vec3 origin = -(rt * c.translation);
        const Vec3 dir = rt * Vec3{(px - c.cx) / c.fx, (py - c.cy) / c.fy, 1.0};
        for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
            const Vec3 a = mesh.positions[mesh.faces[fi][0].position];
            const Vec3 b = mesh.positions[mesh.faces[fi][1].position];
            const Vec3 d = mesh.positions[mesh.faces[fi][2].position];
            const Vec3 e1 = b - a, e2 = d - a;
            const Vec3 pv = cross(dir, e2);
            const double det = dot(e1, pv);
            if (std::abs(det) < 1e-14) continue;
            const Vec3 tv = origin - a;
            const double u = dot(tv, pv) / det;
            if (u < 0.0 || u > 1.0) continue;
            const Vec3 qv = cross(tv, e1);
            const double v = dot(dir, qv) / det;
            if (v < 0.0 || u + v > 1.0) continue;
            const double t = dot(e2, qv) / det;  // equals camera depth here
            if (t <= 1e-9) continue;
            if (t < best.depth) {
                best.depth = t;
                best.face = static_cast<int>(fi);
                best.bc = {1.0 - u - v, u, v};
            }
        }
    } else {
        const auto& w = cam.weak();
        const Vec2 p{px, py};
        for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
            const Vec3 A = mesh.positions[mesh.faces[fi][0].position];
            const Vec3 B = mesh.positions[mesh.faces[fi][1].position];
            const Vec3 C = mesh.positions[mesh.faces[fi][2].position];
            const Vec2 a{w.scale * A.x + w.tx, w.scale * A.y + w.ty};
            const Vec2 b{w.scale * B.x + w.tx, w.scale * B.y + w.ty};
            const Vec2 c{w.scale * C.x + w.tx, w.scale * C.y + w.ty};
            const double area = uvbake::cross(b - a, c - a);
            if (std::abs(area) < 1e-14) continue;
            const double l0 = uvbake::cross(b - p, c - p) / area;
            const double l1 = uvbake::cross(c - p, a - p) / area;
            const double l2 = 1.0 - l0 - l1;
            if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
            const double z = l0 * A.z + l1 * B.z + l2 * C.z;
            if (z < best.depth) {
                best.depth = z;
                best.face = static_cast<int>(fi);
                best.bc = {l0, l1, l2};
            }
        }
    }
    return best;
}

// Whether a specific surface point is unoccluded: no face intersects the
// viewing ray strictly in front of it (within eps).
inline bool visible_by_raycast(const Mesh& mesh, const Camera& cam, Vec3 point, double eps) {
    const Vec2 pix = project_point(cam, point);
    const SceneHit hit = raycast_pixel(mesh, cam, pix.x, pix.y);
    const double depth = camera_depth(cam, point);
    return !(hit.face >= 0 && hit.depth < depth - eps);
}

// --- reference renderer -----------------------------------------------------
//
// Shades the nearest hit per pixel center. `shade(face, bary)` returns the
// linear surface colour; misses get `background` with alpha 0 so the image
// doubles as its own foreground mask.
inline ImageRgba render_raycast(const Mesh& mesh, const Camera& cam, int width, int height,
                                const std::function<Rgb(int, const Barycentric&)>& shade,
                                Rgb background) {
    ImageRgba image(width, height, Rgba{background.r, background.g, background.b, 0.f});

    // Per-row face candidate lists keep big renders tractable.
    std::vector<std::vector<int>> rows(height);
    for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        double ymin = kInf, ymax = -kInf;
        bool ok = true;
        for (int k = 0; k < 3 && ok; ++k) {
            const Vec3 p = mesh.positions[mesh.faces[fi][k].position];
            if (cam.is_perspective() && camera_depth(cam, p) <= 1e-9) {
                ok = false;
                break;
            }
            const Vec2 q = project_point(cam, p);
            ymin = std::min(ymin, q.y);
            ymax = std::max(ymax, q.y);
        }
        if (!ok) continue;
        const int y0 = std::max(0, static_cast<int>(std::floor(ymin - 1.0)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(ymax + 1.0)));
        for (int y = y0; y <= y1; ++y) rows[y].push_back(static_cast<int>(fi));
    }

    for (int y = 0; y < height; ++y) {
        if (rows[y].empty()) continue;
        for (int x = 0; x < width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            SceneHit best;
            for (int fi : rows[y]) {
                // Repeat the per-face test from raycast_pixel on candidates.
                if (cam.is_perspective()) {
                    const auto& c = cam.perspective();
                    const uvbake::Mat3 rt = uvbake::transpose(c.rotation);
                    const Vec3 origin = -(rt * c.translation);
                    const Vec3 dir = rt * Vec3{(px - c.cx) / c.fx, (py - c.cy) / c.fy, 1.0};
                    const Vec3 a = mesh.positions[mesh.faces[fi][0].position];
                    const Vec3 b = mesh.positions[mesh.faces[fi][1].position];
                    const Vec3 d = mesh.positions[mesh.faces[fi][2].position];
                    const Vec3 e1 = b - a, e2 = d - a;
                    const Vec3 pv = cross(dir, e2);
                    const double det = dot(e1, pv);
                    if (std::abs(det) < 1e-14) continue;
                    const Vec3 tv = origin - a;
                    const double u = dot(tv, pv) / det;
                    if (u < 0.0 || u > 1.0) continue;
                    const Vec3 qv = cross(tv, e1);
                    const double v = dot(dir, qv) / det;
                    if (v < 0.0 || u + v > 1.0) continue;
                    const double t = dot(e2, qv) / det;
                    if (t <= 1e-9 || t >= best.depth) continue;
                    best = {fi, t, {1.0 - u - v, u, v}};
                } else {
                    const auto& w = cam.weak();
                    const Vec3 A = mesh.positions[mesh.faces[fi][0].position];
                    const Vec3 B = mesh.positions[mesh.faces[fi][1].position];
                    const Vec3 C = mesh.positions[mesh.faces[fi][2].position];
                    const Vec2 a{w.scale * A.x + w.tx, w.scale * A.y + w.ty};
                    const Vec2 b{w.scale * B.x + w.tx, w.scale * B.y + w.ty};
                    const Vec2 c{w.scale * C.x + w.tx, w.scale * C.y + w.ty};
                    const double area = uvbake::cross(b - a, c - a);
                    if (std::abs(area) < 1e-14) continue;
                    const Vec2 p{px, py};
                    const double l0 = uvbake::cross(b - p, c - p) / area;
                    const double l1 = uvbake::cross(c - p, a - p) / area;
                    const double l2 = 1.0 - l0 - l1;
                    if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
                    const double z = l0 * A.z + l1 * B.z + l2 * C.z;
                    if (z >= best.depth) continue;
                    best = {fi, z, {l0, l1, l2}};
                }
            }
            if (best.face >= 0) {
                const Rgb c = shade(best.face, best.bc);
                image.at(x, y) = {c.r, c.g, c.b, 1.f};
            }
        }
    }
    return image;
}

// UV of a hit, for texture-lookup shaders.
inline Vec2 hit_uv(const Mesh& mesh, int face, const Barycentric& bc) {
    const auto& f = mesh.faces[face];
    return bc.l0 * mesh.uvs[f[0].uv] + bc.l1 * mesh.uvs[f[1].uv] + bc.l2 * mesh.uvs[f[2].uv];
}

// --- brute-force bake -----------------------------------------------------------
//
// Re-derives a per-texel bake with independent machinery: linear scan point
// location in UV space, ray-cast visibility, nearest-neighbour sampling.
struct OracleTexel {
    bool valid = false;
    Rgb rgb;
};

inline std::vector<OracleTexel> bake_oracle(const Mesh& mesh, const Camera& cam,
                                            const ImageRgba& image, const ImageRgba* mask,
                                            int resolution, const uvbake::BakeParams& params) {
    std::vector<OracleTexel> out(static_cast<size_t>(resolution) * resolution);
    for (int iy = 0; iy < resolution; ++iy) {
        for (int ix = 0; ix < resolution; ++ix) {
            const Vec2 uv{(ix + 0.5) / resolution, (iy + 0.5) / resolution};
            // point location: most interior face containing the UV center
            int face = -1;
            Barycentric bc;
            double best_min = -kInf;
            for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
                const auto& f = mesh.faces[fi];
                const Vec2 a = mesh.uvs[f[0].uv], b = mesh.uvs[f[1].uv], c = mesh.uvs[f[2].uv];
                const double area = uvbake::cross(b - a, c - a);
                if (std::abs(area) <= 2e-12) continue;
                const double l0 = uvbake::cross(b - uv, c - uv) / area;
                const double l1 = uvbake::cross(c - uv, a - uv) / area;
                const double l2 = 1.0 - l0 - l1;
                const double lmin = std::min({l0, l1, l2});
                if (lmin < -1e-9) continue;
                if (lmin > best_min) {
                    best_min = lmin;
                    face = static_cast<int>(fi);
                    bc = {l0, l1, l2};
                }
            }
            OracleTexel& texel = out[static_cast<size_t>(iy) * resolution + ix];
            if (face < 0) continue;
            const auto& f = mesh.faces[face];
            const Vec3 pos = bc.l0 * mesh.positions[f[0].position] +
                             bc.l1 * mesh.positions[f[1].position] +
                             bc.l2 * mesh.positions[f[2].position];
            const Vec3 nrm_raw = bc.l0 * mesh.vertex_normals[f[0].position] +
                                 bc.l1 * mesh.vertex_normals[f[1].position] +
                                 bc.l2 * mesh.vertex_normals[f[2].position];
            const double nlen = uvbake::norm(nrm_raw);
            if (nlen <= 0.0) continue;
            const Vec3 nrm = {nrm_raw.x / nlen, nrm_raw.y / nlen, nrm_raw.z / nlen};

            const double depth = camera_depth(cam, pos);
            if (cam.is_perspective() && depth <= 1e-9) continue;
            const Vec2 pix = project_point(cam, pos);
            if (pix.x < 0.0 || pix.x >= image.width || pix.y < 0.0 || pix.y >= image.height)
                continue;
            if (!visible_by_raycast(mesh, cam, pos, params.depth_eps)) continue;
            const int nx = std::clamp(static_cast<int>(std::floor(pix.x)), 0, image.width - 1);
            const int ny = std::clamp(static_cast<int>(std::floor(pix.y)), 0, image.height - 1);
            if (mask && params.use_mask && mask->at(nx, ny).a < 0.5f) continue;

            Vec3 view;
            if (cam.is_perspective()) {
                const auto& c = cam.perspective();
                const Vec3 center = -(uvbake::transpose(c.rotation) * c.translation);
                view = uvbake::normalize(pos - center);
            } else {
                view = {0.0, 0.0, 1.0};
            }
            const double cos_theta = uvbake::dot(nrm, -view);
            if (cos_theta < params.tau || cos_theta <= 0.0) continue;

            texel.valid = true;
            texel.rgb = uvbake::rgb(image.at(nx, ny));  // nearest-neighbour
        }
    }
    return out;
}

// --- rotation grid search ----------------------------------------------------
//
// Coarse-to-fine search over SO(3) for the similarity alignment that
// minimizes the sum of squared residuals; returns the mean distance at the
// best rotation found. Closed-form scale/translation per candidate rotation.
inline double pa_mpjpe_grid_oracle(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt) {
    const size_t n = pred.size();
    Vec3 mu_p{}, mu_g{};
    for (size_t i = 0; i < n; ++i) {
        mu_p += pred[i];
        mu_g += gt[i];
    }
    mu_p = (1.0 / n) * mu_p;
    mu_g = (1.0 / n) * mu_g;
    std::vector<Vec3> x(n), y(n);
    double xss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        x[i] = pred[i] - mu_p;
        y[i] = gt[i] - mu_g;
        xss += uvbake::dot(x[i], x[i]);
    }

    const auto evaluate = [&](const uvbake::Mat3& rot, double& mean_dist) {
        double cross_term = 0.0;
        for (size_t i = 0; i < n; ++i) cross_term += uvbake::dot(y[i], rot * x[i]);
        const double s = cross_term / xss;
        double sse = 0.0, dist = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const Vec3 r = s * (rot * x[i]) - y[i];
            sse += uvbake::dot(r, r);
            dist += uvbake::norm(r);
        }
        mean_dist = dist / static_cast<double>(n);
        return sse;
    };

    // Fibonacci-sphere axes x angle sweep, then three shrinking local passes.
    std::vector<Vec3> axes;
    const int axis_count = 96;
    for (int i = 0; i < axis_count; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / axis_count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = i * 2.399963229728653;  // golden angle
        axes.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }

    double best_sse = kInf, best_dist = 0.0;
    Vec3 best_axis{0, 0, 1};
    double best_angle = 0.0;
    for (const Vec3& axis : axes) {
        for (int k = 0; k <= 24; ++k) {
            const double angle = M_PI * k / 24.0;
            double dist;
            const double sse = evaluate(uvbake::rotation_about_axis(axis, angle), dist);
            if (sse < best_sse) {
                best_sse = sse;
                best_dist = dist;
                best_axis = axis;
                best_angle = angle;
            }
        }
    }
    std::mt19937 rng(7);
    std::normal_distribution<double> jitter(0.0, 1.0);
    double window = 0.25;
    for (int round = 0; round < 4; ++round) {
        for (int trial = 0; trial < 240; ++trial) {
            Vec3 axis = best_axis +
                        window * Vec3{jitter(rng), jitter(rng), jitter(rng)};
            if (uvbake::norm(axis) < 1e-9) continue;
            axis = uvbake::normalize(axis);
            std::uniform_real_distribution<double> da(-window, window);
            const double angle = best_angle + da(rng);
            double dist;
            const double sse = evaluate(uvbake::rotation_about_axis(axis, angle), dist);
            if (sse < best_sse) {
                best_sse = sse;
                best_dist = dist;
                best_axis = axis;
                best_angle = angle;
            }
        }
        window *= 0.15;
    }
    return best_dist;
}

}  // namespace oracles
