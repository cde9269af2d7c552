// baker.hpp — inverse rasterization: pull photograph colour into the UV atlas.
//
// The bake walks texels of the atlas instead of pixels of the image. Each
// covered texel knows its surface point via stored barycentrics; the point is
// projected into the photograph, tested against the z-buffer, the optional
// foreground mask and an incidence-angle threshold, and finally sampled
// bilinearly. One PartialTexture per view comes out; fusion happens later.
//
// Texel (ix, iy) has UV center ((ix+0.5)/res, (iy+0.5)/res); row iy follows
// +v in memory (PNG serialization flips rows so v=1 is the top of the file,
// the usual texture orientation).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvbake/camera.hpp"
#include "uvbake/image.hpp"
#include "uvbake/mesh.hpp"
#include "uvbake/parallel.hpp"
#include "uvbake/png_io.hpp"
#include "uvbake/visibility.hpp"

namespace uvbake {

// --- UV coverage -------------------------------------------------------------

// Which face parameterizes each texel, and where inside it. Seam texels
// covered by several faces keep the one whose minimum barycentric coordinate
// is largest (the most interior), ties to the lower face index.
struct UvCoverageMap {
    int resolution = 0;
    std::vector<std::int32_t> face_id;  // -1 where uncovered
    std::vector<double> bary;           // 2 per texel: l0, l1 (l2 = 1 - l0 - l1)
    int degenerate_uv_faces = 0;

    size_t texel_count() const { return static_cast<size_t>(resolution) * resolution; }
    bool covered(size_t t) const { return face_id[t] >= 0; }
    Barycentric bary_at(size_t t) const {
        const double l0 = bary[2 * t], l1 = bary[2 * t + 1];
        return {l0, l1, 1.0 - l0 - l1};
    }
};

constexpr double kInsideEps = 1e-9;  // boundary texels count as covered

inline UvCoverageMap uv_rasterize(const Mesh& mesh, int resolution) {
    if (resolution < 1) throw ValidationError("uv_rasterize: resolution must be >= 1");
    UvCoverageMap map;
    map.resolution = resolution;
    map.face_id.assign(map.texel_count(), -1);
    map.bary.assign(2 * map.texel_count(), 0.0);
    std::vector<double> score(map.texel_count(), -kInf);  // min barycentric of the kept face

    // Degenerate-in-UV faces cannot be rasterized; count them once up front.
    std::vector<std::uint8_t> degenerate(mesh.faces.size(), 0);
    for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const Vec2 a = mesh.uvs[f[0].uv], b = mesh.uvs[f[1].uv], c = mesh.uvs[f[2].uv];
        if (std::abs(cross(b - a, c - a)) <= 2.0 * kDegenerateArea) {
            degenerate[fi] = 1;
            ++map.degenerate_uv_faces;
        }
    }

    const double res = resolution;
    parallel_ranges(resolution, [&](int row_begin, int row_end) {
        for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
            if (degenerate[fi]) continue;
            const Face& f = mesh.faces[fi];
            const Vec2 a = mesh.uvs[f[0].uv], b = mesh.uvs[f[1].uv], c = mesh.uvs[f[2].uv];
            const double vmin = std::min({a.y, b.y, c.y}) * res;
            const double vmax = std::max({a.y, b.y, c.y}) * res;
            const double umin = std::min({a.x, b.x, c.x}) * res;
            const double umax = std::max({a.x, b.x, c.x}) * res;
            const int y0 = std::max(row_begin, detail::first_center(vmin));
            const int y1 = std::min(row_end - 1, detail::last_center(vmax));
            const int x0 = std::max(0, detail::first_center(umin));
            const int x1 = std::min(resolution - 1, detail::last_center(umax));
            for (int iy = y0; iy <= y1; ++iy) {
                for (int ix = x0; ix <= x1; ++ix) {
                    const Vec2 center{(ix + 0.5) / res, (iy + 0.5) / res};
                    const Barycentric bc = barycentric(a, b, c, center);
                    const double lmin = std::min({bc.l0, bc.l1, bc.l2});
                    if (lmin < -kInsideEps) continue;
                    const size_t t = static_cast<size_t>(iy) * resolution + ix;
                    if (lmin > score[t] ||
                        (lmin == score[t] && static_cast<std::int32_t>(fi) < map.face_id[t])) {
                        score[t] = lmin;
                        map.face_id[t] = static_cast<std::int32_t>(fi);
                        map.bary[2 * t] = bc.l0;
                        map.bary[2 * t + 1] = bc.l1;
                    }
                }
            }
        }
    });
    return map;
}

struct SurfaceSample {
    Vec3 position;
    Vec3 normal;  // unit
};

// Surface point and interpolated (re-normalized) normal for a covered texel.
inline SurfaceSample texel_geometry(const Mesh& mesh, const UvCoverageMap& coverage, size_t texel) {
    if (texel >= coverage.texel_count() || !coverage.covered(texel))
        throw Error("texel_geometry: no surface under texel");
    const Face& f = mesh.faces[coverage.face_id[texel]];
    const Barycentric bc = coverage.bary_at(texel);
    const Vec3 position = from_barycentric(mesh.positions[f[0].position],
                                           mesh.positions[f[1].position],
                                           mesh.positions[f[2].position], bc);
    const Vec3 blended = from_barycentric(mesh.vertex_normals[f[0].position],
                                          mesh.vertex_normals[f[1].position],
                                          mesh.vertex_normals[f[2].position], bc);
    return {position, normalize(blended)};
}

// --- baking ------------------------------------------------------------------

struct BakeParams {
    double tau = 0.1;             // minimum cos(theta) for a valid projection
    double weight_exponent = 2.0; // weight = cos(theta)^p
    double depth_eps = 1e-2;      // visibility tolerance, scene units
    bool use_mask = true;         // honor the foreground mask when present
};

inline void validate_bake_params(const BakeParams& params) {
    if (params.tau < 0.0 || params.tau >= 1.0)
        throw ValidationError("bake: tau must be in [0,1)");
    if (params.weight_exponent < 0.0)
        throw ValidationError("bake: weight exponent must be >= 0");
    if (params.depth_eps <= 0.0)
        throw ValidationError("bake: depth epsilon must be positive");
}

// One view's contribution: colours plus per-texel confidence. The valid mask
// is the set of texels that received a projection from this view.
struct PartialTexture {
    int resolution = 0;
    std::vector<Rgb> rgb;          // linear, meaningful only where valid
    std::vector<float> weight;     // cos^p, 0 where invalid
    std::vector<float> cos_angle;  // incidence cosine, 0 where invalid
    std::vector<std::uint8_t> valid;

    size_t texel_count() const { return static_cast<size_t>(resolution) * resolution; }
    size_t valid_count() const {
        size_t n = 0;
        for (std::uint8_t v : valid) n += v ? 1 : 0;
        return n;
    }
};

struct BakeStats {
    std::int64_t valid = 0;
    std::int64_t behind_camera = 0;
    std::int64_t outside_image = 0;
    std::int64_t occluded = 0;
    std::int64_t masked = 0;
    std::int64_t below_angle_threshold = 0;
};

inline PartialTexture bake_view(const Mesh& mesh, const Camera& camera, const ImageRgba& image,
                                const ImageRgba* mask, const UvCoverageMap& coverage,
                                const DepthBuffer& depth, const BakeParams& params,
                                BakeStats* stats_out = nullptr) {
    validate_bake_params(params);
    if (depth.width != image.width || depth.height != image.height)
        throw ValidationError("bake: depth buffer size does not match the image");
    if (mask && (mask->width != image.width || mask->height != image.height))
        throw ValidationError("bake: mask size does not match the image");

    PartialTexture tex;
    tex.resolution = coverage.resolution;
    tex.rgb.assign(tex.texel_count(), Rgb{});
    tex.weight.assign(tex.texel_count(), 0.f);
    tex.cos_angle.assign(tex.texel_count(), 0.f);
    tex.valid.assign(tex.texel_count(), 0);

    const int res = coverage.resolution;
    std::vector<BakeStats> band_stats(static_cast<size_t>(res));
    parallel_ranges(res, [&](int row_begin, int row_end) {
        for (int iy = row_begin; iy < row_end; ++iy) {
            BakeStats& st = band_stats[iy];
            for (int ix = 0; ix < res; ++ix) {
                const size_t t = static_cast<size_t>(iy) * res + ix;
                if (!coverage.covered(t)) continue;
                const SurfaceSample surf = texel_geometry(mesh, coverage, t);
                Projection proj;
                if (!try_project(camera, surf.position, proj)) {
                    ++st.behind_camera;
                    continue;
                }
                if (proj.pixel.x < 0.0 || proj.pixel.x >= image.width ||
                    proj.pixel.y < 0.0 || proj.pixel.y >= image.height) {
                    ++st.outside_image;
                    continue;
                }
                if (!is_visible(depth, proj.pixel, proj.depth, params.depth_eps)) {
                    ++st.occluded;
                    continue;
                }
                if (mask && params.use_mask) {
                    const int mx = static_cast<int>(std::floor(proj.pixel.x));
                    const int my = static_cast<int>(std::floor(proj.pixel.y));
                    if (mask->at(mx, my).a < 0.5f) {
                        ++st.masked;
                        continue;
                    }
                }
                const Vec3 view = view_vector(camera, surf.position);
                const double cos_theta = dot(surf.normal, -view);
                if (cos_theta < params.tau || cos_theta <= 0.0) {
                    ++st.below_angle_threshold;
                    continue;
                }
                tex.rgb[t] = sample_bilinear(image, proj.pixel);
                tex.cos_angle[t] = static_cast<float>(cos_theta);
                tex.weight[t] = static_cast<float>(std::pow(cos_theta, params.weight_exponent));
                tex.valid[t] = 1;
                ++st.valid;
            }
        }
    });
    if (stats_out) {
        BakeStats total;
        for (const BakeStats& st : band_stats) {
            total.valid += st.valid;
            total.behind_camera += st.behind_camera;
            total.outside_image += st.outside_image;
            total.occluded += st.occluded;
            total.masked += st.masked;
            total.below_angle_threshold += st.below_angle_threshold;
        }
        *stats_out = total;
    }
    return tex;
}

// --- persistence (.ptx artifact set) ------------------------------------------
//
// A PartialTexture on disk is a JSON manifest plus four PNGs (colour 8-bit
// sRGB, weight and cos angle 16-bit linear, valid mask 1-bit) and the shared
// atlas-footprint mask. PNG rows are flipped so v=1 is the top of the file.

namespace detail {

template <typename T, typename Fn>
Grid<T> flip_rows_to_grid(int res, Fn&& value_at) {
    Grid<T> g(res, res);
    for (int iy = 0; iy < res; ++iy)
        for (int ix = 0; ix < res; ++ix)
            g.at(ix, res - 1 - iy) = value_at(static_cast<size_t>(iy) * res + ix);
    return g;
}

inline std::uint16_t quantize16(double v) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

}  // namespace detail

struct PartialTextureFiles {
    std::string color, weight, cos_angle, valid, footprint;
};

inline PartialTextureFiles ptx_file_names(const std::string& stem) {
    return {stem + ".color.png", stem + ".weight.png", stem + ".cos.png",
            stem + ".valid.png", stem + ".footprint.png"};
}

// Writes the manifest at `manifest_path` and the PNG set next to it. Valid
// texels never round their stored weight to zero or their cosine below tau,
// so a reload satisfies the same invariants as the in-memory texture.
inline void save_partial_texture(const std::string& manifest_path, const PartialTexture& tex,
                                 const std::vector<std::uint8_t>& footprint,
                                 const BakeParams& params, const BakeStats& stats,
                                 const std::string& view) {
    namespace fs = std::filesystem;
    const fs::path manifest(manifest_path);
    const std::string stem = manifest.stem().string();
    const PartialTextureFiles files = ptx_file_names(stem);
    const fs::path dir = manifest.parent_path();
    const int res = tex.resolution;

    save_png_rgb8((dir / files.color).string(),
                  detail::flip_rows_to_grid<Rgb>(res, [&](size_t t) { return tex.rgb[t]; }));
    const std::uint16_t min_weight = 1;
    const std::uint16_t min_cos = static_cast<std::uint16_t>(
        std::ceil(std::clamp(params.tau, 0.0, 1.0) * 65535.0 - 1e-9));
    save_png_gray16((dir / files.weight).string(),
                    detail::flip_rows_to_grid<std::uint16_t>(res, [&](size_t t) {
                        if (!tex.valid[t]) return std::uint16_t{0};
                        return std::max(min_weight, detail::quantize16(tex.weight[t]));
                    }));
    save_png_gray16((dir / files.cos_angle).string(),
                    detail::flip_rows_to_grid<std::uint16_t>(res, [&](size_t t) {
                        if (!tex.valid[t]) return std::uint16_t{0};
                        return std::max(min_cos, detail::quantize16(tex.cos_angle[t]));
                    }));
    save_png_mask1((dir / files.valid).string(),
                   detail::flip_rows_to_grid<std::uint8_t>(res, [&](size_t t) { return tex.valid[t]; }));
    save_png_mask1((dir / files.footprint).string(),
                   detail::flip_rows_to_grid<std::uint8_t>(res, [&](size_t t) { return footprint[t]; }));

    nlohmann::json j;
    j["format"] = "uvbake-partial-texture";
    j["version"] = 1;
    j["resolution"] = res;
    j["view"] = view;
    j["params"] = {{"tau", params.tau},
                   {"weight_exponent", params.weight_exponent},
                   {"depth_eps", params.depth_eps},
                   {"use_mask", params.use_mask}};
    j["stats"] = {{"valid", stats.valid},
                  {"behind_camera", stats.behind_camera},
                  {"outside_image", stats.outside_image},
                  {"occluded", stats.occluded},
                  {"masked", stats.masked},
                  {"below_angle_threshold", stats.below_angle_threshold}};
    j["files"] = {{"color", files.color},
                  {"weight", files.weight},
                  {"cos_angle", files.cos_angle},
                  {"valid", files.valid},
                  {"footprint", files.footprint}};
    std::ofstream out(manifest_path);
    if (!out) throw Error("cannot open for writing: " + manifest_path);
    out << j.dump(2) << "\n";
}

struct LoadedPartialTexture {
    PartialTexture texture;
    std::vector<std::uint8_t> footprint;
    BakeParams params;
    BakeStats stats;
    std::string view;
};

inline LoadedPartialTexture load_partial_texture(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    if (!in) throw Error("partial texture not found: " + manifest_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("partial texture " + manifest_path + ": " + e.what());
    }
    LoadedPartialTexture result;
    try {
        if (j.at("format").get<std::string>() != "uvbake-partial-texture")
            throw Error("partial texture " + manifest_path + ": unrecognized format tag");
        const int res = j.at("resolution").get<int>();
        result.view = j.value("view", "");
        const auto& p = j.at("params");
        result.params.tau = p.at("tau").get<double>();
        result.params.weight_exponent = p.at("weight_exponent").get<double>();
        result.params.depth_eps = p.at("depth_eps").get<double>();
        result.params.use_mask = p.at("use_mask").get<bool>();
        if (j.contains("stats")) {
            const auto& s = j.at("stats");
            result.stats.valid = s.value("valid", std::int64_t{0});
            result.stats.behind_camera = s.value("behind_camera", std::int64_t{0});
            result.stats.outside_image = s.value("outside_image", std::int64_t{0});
            result.stats.occluded = s.value("occluded", std::int64_t{0});
            result.stats.masked = s.value("masked", std::int64_t{0});
            result.stats.below_angle_threshold = s.value("below_angle_threshold", std::int64_t{0});
        }
        const auto& files = j.at("files");
        const fs::path dir = fs::path(manifest_path).parent_path();
        const auto resolve = [&](const char* key) {
            return (dir / files.at(key).get<std::string>()).string();
        };

        const ImageRgba color = load_png_rgba(resolve("color"));
        const Grid<std::uint16_t> weight = load_png_gray16(resolve("weight"));
        const Grid<std::uint16_t> cosang = load_png_gray16(resolve("cos_angle"));
        const MaskGrid valid = load_png_mask(resolve("valid"));
        const MaskGrid footprint = load_png_mask(resolve("footprint"));
        if (color.width != res || color.height != res || weight.width != res ||
            cosang.width != res || valid.width != res || footprint.width != res)
            throw Error("partial texture " + manifest_path + ": component resolution mismatch");

        PartialTexture& tex = result.texture;
        tex.resolution = res;
        tex.rgb.assign(tex.texel_count(), Rgb{});
        tex.weight.assign(tex.texel_count(), 0.f);
        tex.cos_angle.assign(tex.texel_count(), 0.f);
        tex.valid.assign(tex.texel_count(), 0);
        result.footprint.assign(tex.texel_count(), 0);
        for (int iy = 0; iy < res; ++iy) {
            const int py = res - 1 - iy;  // undo the row flip
            for (int ix = 0; ix < res; ++ix) {
                const size_t t = static_cast<size_t>(iy) * res + ix;
                result.footprint[t] = footprint.at(ix, py);
                if (valid.at(ix, py)) {
                    tex.valid[t] = 1;
                    tex.rgb[t] = rgb(color.at(ix, py));
                    tex.weight[t] = weight.at(ix, py) / 65535.f;
                    tex.cos_angle[t] = cosang.at(ix, py) / 65535.f;
                }
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw Error("partial texture " + manifest_path + ": " + e.what());
    }
    return result;
}

}  // namespace uvbake
