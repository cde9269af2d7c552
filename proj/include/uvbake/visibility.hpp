// visibility.hpp — forward z-buffer rasterization for occlusion queries.
//
// Pixel-center sampling with a top-left fill rule; depth is interpolated
// perspective-correctly (linearly in 1/z) for perspective cameras and
// linearly for weak perspective. The per-pixel result is the lexicographic
// minimum of (depth, face index), a commutative reduction, so any face or
// tile partitioning yields bit-identical buffers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <vector>

#include "uvbake/camera.hpp"
#include "uvbake/mesh.hpp"
#include "uvbake/parallel.hpp"
#include "uvbake/png_io.hpp"

namespace uvbake {

struct DepthBuffer {
    int width = 0, height = 0;
    std::vector<float> depth;          // +inf where empty, scene units
    std::vector<std::int32_t> face_id; // -1 where empty
    int skipped_faces = 0;             // faces with a vertex behind a perspective camera

    float depth_at(int x, int y) const { return depth[static_cast<size_t>(y) * width + x]; }
    std::int32_t face_at(int x, int y) const { return face_id[static_cast<size_t>(y) * width + x]; }
};

namespace detail {

struct ScreenFace {
    Vec2 p[3];
    double z[3];
    bool drawable = false;
    int row_min = 0, row_max = -1;  // inclusive pixel-row range
};

// Top-left ownership for an edge of a positively oriented triangle in
// y-down pixel coordinates: top edges run in +x, left edges run in -y.
inline bool edge_is_top_left(Vec2 dir) {
    return (dir.y == 0.0 && dir.x > 0.0) || dir.y < 0.0;
}

// First and last pixel index whose center (i + 0.5) lies in [lo, hi].
inline int first_center(double lo) { return static_cast<int>(std::ceil(lo - 0.5)); }
inline int last_center(double hi) { return static_cast<int>(std::floor(hi - 0.5)); }

}  // namespace detail

// Rasterizes every front-projectable triangle at pixel centers. Faces with
// any vertex at or behind a perspective camera plane are skipped whole (no
// clipping) and counted. Ties at exactly equal depth go to the lower face
// index.
inline DepthBuffer rasterize_depth(const Mesh& mesh, const Camera& camera, int width, int height) {
    if (width < 1 || height < 1) throw ValidationError("rasterize_depth: zero-area output");
    if (mesh.faces.empty()) throw ValidationError("rasterize_depth: empty mesh");
    validate_camera(camera);

    DepthBuffer buffer;
    buffer.width = width;
    buffer.height = height;
    buffer.depth.assign(static_cast<size_t>(width) * height, std::numeric_limits<float>::infinity());
    buffer.face_id.assign(static_cast<size_t>(width) * height, -1);

    // Project all faces up front; orientation is normalized so edge tests can
    // assume a positive signed area.
    std::vector<detail::ScreenFace> faces(mesh.faces.size());
    int skipped = 0;
    for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        detail::ScreenFace& sf = faces[fi];
        Projection proj[3];
        bool ok = true;
        for (int k = 0; k < 3 && ok; ++k)
            ok = try_project(camera, mesh.positions[mesh.faces[fi][k].position], proj[k]);
        if (!ok) {
            ++skipped;
            continue;
        }
        for (int k = 0; k < 3; ++k) {
            sf.p[k] = proj[k].pixel;
            sf.z[k] = proj[k].depth;
        }
        double area2 = cross(sf.p[1] - sf.p[0], sf.p[2] - sf.p[0]);
        if (area2 < 0.0) {
            std::swap(sf.p[1], sf.p[2]);
            std::swap(sf.z[1], sf.z[2]);
            area2 = -area2;
        }
        if (area2 <= kDegenerateArea) continue;  // edge-on or zero-area on screen
        const double ymin = std::min({sf.p[0].y, sf.p[1].y, sf.p[2].y});
        const double ymax = std::max({sf.p[0].y, sf.p[1].y, sf.p[2].y});
        sf.row_min = std::max(0, detail::first_center(ymin));
        sf.row_max = std::min(height - 1, detail::last_center(ymax));
        sf.drawable = sf.row_min <= sf.row_max;
    }
    buffer.skipped_faces = skipped;

    const bool perspective = camera.is_perspective();
    parallel_ranges(height, [&](int row_begin, int row_end) {
        for (size_t fi = 0; fi < faces.size(); ++fi) {
            const detail::ScreenFace& sf = faces[fi];
            if (!sf.drawable || sf.row_max < row_begin || sf.row_min >= row_end) continue;
            const Vec2 e0 = sf.p[2] - sf.p[1];
            const Vec2 e1 = sf.p[0] - sf.p[2];
            const Vec2 e2 = sf.p[1] - sf.p[0];
            const bool tl0 = detail::edge_is_top_left(e0);
            const bool tl1 = detail::edge_is_top_left(e1);
            const bool tl2 = detail::edge_is_top_left(e2);
            const double area2 = cross(e2, sf.p[2] - sf.p[0]);
            const double xmin = std::min({sf.p[0].x, sf.p[1].x, sf.p[2].x});
            const double xmax = std::max({sf.p[0].x, sf.p[1].x, sf.p[2].x});
            const int x0 = std::max(0, detail::first_center(xmin));
            const int x1 = std::min(width - 1, detail::last_center(xmax));
            const int y0 = std::max(sf.row_min, row_begin);
            const int y1 = std::min(sf.row_max, row_end - 1);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const Vec2 c{x + 0.5, y + 0.5};
                    const double w0 = cross(e0, c - sf.p[1]);
                    const double w1 = cross(e1, c - sf.p[2]);
                    const double w2 = cross(e2, c - sf.p[0]);
                    const bool inside = (w0 > 0.0 || (w0 == 0.0 && tl0)) &&
                                        (w1 > 0.0 || (w1 == 0.0 && tl1)) &&
                                        (w2 > 0.0 || (w2 == 0.0 && tl2));
                    if (!inside) continue;
                    const double l0 = w0 / area2, l1 = w1 / area2, l2 = w2 / area2;
                    double z;
                    if (perspective) {
                        const double inv = l0 / sf.z[0] + l1 / sf.z[1] + l2 / sf.z[2];
                        z = 1.0 / inv;
                    } else {
                        z = l0 * sf.z[0] + l1 * sf.z[1] + l2 * sf.z[2];
                    }
                    const float zf = static_cast<float>(z);
                    const size_t idx = static_cast<size_t>(y) * width + x;
                    const float cur = buffer.depth[idx];
                    if (zf < cur || (zf == cur && static_cast<std::int32_t>(fi) < buffer.face_id[idx])) {
                        buffer.depth[idx] = zf;
                        buffer.face_id[idx] = static_cast<std::int32_t>(fi);
                    }
                }
            }
        }
    });
    return buffer;
}

// True iff `pixel` falls on a buffer cell and `depth` is within `eps` of (or
// in front of) the stored depth. Out-of-bounds pixels are never visible;
// empty cells (depth +inf) always are.
inline bool is_visible(const DepthBuffer& buffer, Vec2 pixel, double depth, double eps) {
    const int x = static_cast<int>(std::floor(pixel.x));
    const int y = static_cast<int>(std::floor(pixel.y));
    if (x < 0 || x >= buffer.width || y < 0 || y >= buffer.height) return false;
    return depth <= static_cast<double>(buffer.depth_at(x, y)) + eps;
}

// Debug dump: depth normalized into [1, 65535] over the covered range (empty
// pixels are 0) as 16-bit grayscale PNG.
inline void save_depth_debug_png(const std::string& path, const DepthBuffer& buffer) {
    float dmin = std::numeric_limits<float>::infinity();
    float dmax = -std::numeric_limits<float>::infinity();
    for (float d : buffer.depth)
        if (std::isfinite(d)) {
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
    const float range = dmax > dmin ? dmax - dmin : 1.f;
    Grid<std::uint16_t> img(buffer.width, buffer.height, 0);
    for (size_t i = 0; i < buffer.depth.size(); ++i)
        if (std::isfinite(buffer.depth[i]))
            img.data[i] = static_cast<std::uint16_t>(
                1 + std::lround((buffer.depth[i] - dmin) / range * 65534.f));
    save_png_gray16(path, img);
}

// Debug dump: face ids as a raw little-endian int32 grid, header {width,
// height} followed by row-major ids (-1 where empty).
inline void save_face_id_grid(const std::string& path, const DepthBuffer& buffer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    const std::int32_t header[2] = {buffer.width, buffer.height};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(buffer.face_id.data()),
              static_cast<std::streamsize>(buffer.face_id.size() * sizeof(std::int32_t)));
}

}  // namespace uvbake
