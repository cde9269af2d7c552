// compose.hpp — dual-view fusion and hole filling.
//
// Fusion merges the front and back partial textures with a weighted mean
// (optionally a best-view selection for ablations) and records per-texel
// provenance. Remaining gaps are filled either by the deterministic
// pull-push pyramid or by an external inpainting executable speaking the
// `<cmd> <color.png> <mask.png> <out.png>` contract.
#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvbake/baker.hpp"
#include "uvbake/image.hpp"
#include "uvbake/parallel.hpp"
#include "uvbake/png_io.hpp"

namespace uvbake {

enum class Provenance : std::uint8_t { Empty = 0, Front = 1, Back = 2, Both = 3, Inpainted = 4 };

// Palette for the exported provenance PNG, indexed by the enum value.
inline const std::vector<std::array<std::uint8_t, 3>>& provenance_palette() {
    static const std::vector<std::array<std::uint8_t, 3>> palette = {
        {0x00, 0x00, 0x00},  // empty
        {0xD9, 0x53, 0x4F},  // front
        {0x4F, 0x7B, 0xD9},  // back
        {0x4F, 0xD9, 0x7B},  // both
        {0xD9, 0xC2, 0x4F},  // inpainted
    };
    return palette;
}

struct FusedTexture {
    int resolution = 0;
    std::vector<Rgb> rgb;
    std::vector<Provenance> provenance;

    size_t texel_count() const { return static_cast<size_t>(resolution) * resolution; }
};

// mask[i] = a.valid[i] AND b.valid[i] — the overlap set of the two views.
inline std::vector<std::uint8_t> overlap_mask(const PartialTexture& a, const PartialTexture& b) {
    if (a.resolution != b.resolution)
        throw ValidationError("overlap_mask: resolution mismatch");
    std::vector<std::uint8_t> mask(a.texel_count(), 0);
    for (size_t i = 0; i < mask.size(); ++i) mask[i] = (a.valid[i] && b.valid[i]) ? 1 : 0;
    return mask;
}

enum class FuseMode { WeightedBlend, BestView };

// Merges front and back. Overlap texels blend by weight (or take the heavier
// view in BestView mode, ties to front); single-view texels copy through;
// the rest stay empty/black. Blending runs in double, which keeps the result
// exactly symmetric in (front, back) up to the provenance labels.
inline FusedTexture fuse(const PartialTexture& front, const PartialTexture& back,
                         FuseMode mode = FuseMode::WeightedBlend) {
    if (front.resolution != back.resolution)
        throw ValidationError("fuse: resolution mismatch");
    FusedTexture out;
    out.resolution = front.resolution;
    out.rgb.assign(out.texel_count(), Rgb{});
    out.provenance.assign(out.texel_count(), Provenance::Empty);
    for (size_t i = 0; i < out.texel_count(); ++i) {
        const bool fa = front.valid[i] != 0, fb = back.valid[i] != 0;
        if (fa && fb) {
            out.provenance[i] = Provenance::Both;
            if (mode == FuseMode::BestView) {
                out.rgb[i] = back.weight[i] > front.weight[i] ? back.rgb[i] : front.rgb[i];
            } else {
                const double wa = front.weight[i], wb = back.weight[i];
                const double ws = wa + wb;
                out.rgb[i] = {static_cast<float>((wa * front.rgb[i].r + wb * back.rgb[i].r) / ws),
                              static_cast<float>((wa * front.rgb[i].g + wb * back.rgb[i].g) / ws),
                              static_cast<float>((wa * front.rgb[i].b + wb * back.rgb[i].b) / ws)};
            }
        } else if (fa) {
            out.provenance[i] = Provenance::Front;
            out.rgb[i] = front.rgb[i];
        } else if (fb) {
            out.provenance[i] = Provenance::Back;
            out.rgb[i] = back.rgb[i];
        }
    }
    return out;
}

// --- pull-push hole filling ----------------------------------------------------

namespace detail {

struct PyramidLevel {
    int w = 0, h = 0;
    std::vector<Rgb> color;
    std::vector<float> weight;  // 0 = hole, 1 = fully defined
};

inline Rgb level_bilinear(const PyramidLevel& level, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double tx = x - x0, ty = y - y0;
    const auto cx = [&](int v) { return std::clamp(v, 0, level.w - 1); };
    const auto cy = [&](int v) { return std::clamp(v, 0, level.h - 1); };
    const Rgb& c00 = level.color[static_cast<size_t>(cy(y0)) * level.w + cx(x0)];
    const Rgb& c10 = level.color[static_cast<size_t>(cy(y0)) * level.w + cx(x0 + 1)];
    const Rgb& c01 = level.color[static_cast<size_t>(cy(y0 + 1)) * level.w + cx(x0)];
    const Rgb& c11 = level.color[static_cast<size_t>(cy(y0 + 1)) * level.w + cx(x0 + 1)];
    const auto lerp2 = [&](double a, double b, double c, double d) {
        const double top = a + tx * (b - a);
        const double bot = c + tx * (d - c);
        return static_cast<float>(top + ty * (bot - top));
    };
    return {lerp2(c00.r, c10.r, c01.r, c11.r), lerp2(c00.g, c10.g, c01.g, c11.g),
            lerp2(c00.b, c10.b, c01.b, c11.b)};
}

}  // namespace detail

// Pull phase: weighted 2x downsampling with weights saturated at 1. Push
// phase: coarse-to-fine, blending upsampled colour into under-weighted
// texels. Every eligible empty texel ends up filled; texels that already
// carry colour are never written, so they stay bit-exact.
inline FusedTexture inpaint_pullpush(const FusedTexture& tex,
                                     const std::vector<std::uint8_t>& fill_domain) {
    if (fill_domain.size() != tex.texel_count())
        throw ValidationError("inpaint: fill domain size mismatch");

    bool any_hole = false;
    for (size_t i = 0; i < tex.texel_count(); ++i)
        if (fill_domain[i] && tex.provenance[i] == Provenance::Empty) {
            any_hole = true;
            break;
        }
    if (!any_hole) return tex;

    std::vector<detail::PyramidLevel> levels;
    levels.emplace_back();
    levels[0].w = levels[0].h = tex.resolution;
    levels[0].color = tex.rgb;
    levels[0].weight.assign(tex.texel_count(), 0.f);
    for (size_t i = 0; i < tex.texel_count(); ++i)
        levels[0].weight[i] = tex.provenance[i] != Provenance::Empty ? 1.f : 0.f;

    while (levels.back().w > 1 || levels.back().h > 1) {
        const detail::PyramidLevel& fine = levels.back();
        detail::PyramidLevel coarse;
        coarse.w = (fine.w + 1) / 2;
        coarse.h = (fine.h + 1) / 2;
        coarse.color.assign(static_cast<size_t>(coarse.w) * coarse.h, Rgb{});
        coarse.weight.assign(static_cast<size_t>(coarse.w) * coarse.h, 0.f);
        parallel_ranges(coarse.h, [&](int row_begin, int row_end) {
            for (int y = row_begin; y < row_end; ++y) {
                for (int x = 0; x < coarse.w; ++x) {
                    double wsum = 0.0, r = 0.0, g = 0.0, b = 0.0;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const int fx = 2 * x + dx, fy = 2 * y + dy;
                            if (fx >= fine.w || fy >= fine.h) continue;
                            const size_t fi = static_cast<size_t>(fy) * fine.w + fx;
                            const double w = fine.weight[fi];
                            wsum += w;
                            r += w * fine.color[fi].r;
                            g += w * fine.color[fi].g;
                            b += w * fine.color[fi].b;
                        }
                    const size_t ci = static_cast<size_t>(y) * coarse.w + x;
                    if (wsum > 0.0) {
                        coarse.color[ci] = {static_cast<float>(r / wsum), static_cast<float>(g / wsum),
                                            static_cast<float>(b / wsum)};
                        coarse.weight[ci] = static_cast<float>(std::min(wsum, 1.0));
                    }
                }
            }
        });
        levels.push_back(std::move(coarse));
    }

    for (int li = static_cast<int>(levels.size()) - 2; li >= 0; --li) {
        detail::PyramidLevel& fine = levels[li];
        const detail::PyramidLevel& coarse = levels[li + 1];
        parallel_ranges(fine.h, [&](int row_begin, int row_end) {
            for (int y = row_begin; y < row_end; ++y) {
                for (int x = 0; x < fine.w; ++x) {
                    const size_t fi = static_cast<size_t>(y) * fine.w + x;
                    const float w = fine.weight[fi];
                    if (w >= 1.f) continue;
                    const Rgb up = detail::level_bilinear(coarse, (x + 0.5) / 2.0 - 0.5,
                                                          (y + 0.5) / 2.0 - 0.5);
                    fine.color[fi] = {w * fine.color[fi].r + (1.f - w) * up.r,
                                      w * fine.color[fi].g + (1.f - w) * up.g,
                                      w * fine.color[fi].b + (1.f - w) * up.b};
                }
            }
        });
    }

    FusedTexture out = tex;
    const auto clamp01 = [](float v) { return std::clamp(v, 0.f, 1.f); };
    for (size_t i = 0; i < out.texel_count(); ++i) {
        if (fill_domain[i] && out.provenance[i] == Provenance::Empty) {
            const Rgb& c = levels[0].color[i];
            out.rgb[i] = {clamp01(c.r), clamp01(c.g), clamp01(c.b)};
            out.provenance[i] = Provenance::Inpainted;
        }
    }
    return out;
}

// --- external inpainting hook ----------------------------------------------------

namespace detail {

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

// Runs through /bin/sh with stderr folded into the captured stream.
inline CommandResult run_command(const std::string& command_line) {
    CommandResult result;
    std::FILE* pipe = ::popen((command_line + " 2>&1").c_str(), "r");
    if (!pipe) throw Error("inpaint: failed to launch: " + command_line);
    char buf[512];
    while (std::fgets(buf, sizeof(buf), pipe)) result.output += buf;
    const int status = ::pclose(pipe);
    result.exit_code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return result;
}

inline std::string shell_quote(const std::string& s) { return "'" + s + "'"; }

}  // namespace detail

// Delegates hole filling to an external program: writes the current colour
// map and the fill mask as PNGs, invokes `<command> <color> <mask> <out>`,
// and re-ingests the output. Only previously empty in-domain texels take
// colours from the result, so valid texels stay bit-exact regardless of what
// the program wrote.
inline FusedTexture inpaint_external(const FusedTexture& tex,
                                     const std::vector<std::uint8_t>& fill_domain,
                                     const std::string& command,
                                     const std::string& scratch_dir) {
    if (fill_domain.size() != tex.texel_count())
        throw ValidationError("inpaint: fill domain size mismatch");
    if (command.empty()) throw ValidationError("inpaint: empty external command");

    namespace fs = std::filesystem;
    fs::create_directories(scratch_dir);
    const fs::path color_path = fs::path(scratch_dir) / "inpaint_in.png";
    const fs::path mask_path = fs::path(scratch_dir) / "inpaint_mask.png";
    const fs::path out_path = fs::path(scratch_dir) / "inpaint_out.png";

    const int res = tex.resolution;
    save_png_rgb8(color_path.string(),
                  detail::flip_rows_to_grid<Rgb>(res, [&](size_t t) { return tex.rgb[t]; }));
    save_png_mask1(mask_path.string(), detail::flip_rows_to_grid<std::uint8_t>(res, [&](size_t t) {
                       return static_cast<std::uint8_t>(
                           fill_domain[t] && tex.provenance[t] == Provenance::Empty ? 1 : 0);
                   }));

    const std::string line = command + " " + detail::shell_quote(color_path.string()) + " " +
                             detail::shell_quote(mask_path.string()) + " " +
                             detail::shell_quote(out_path.string());
    const detail::CommandResult run = detail::run_command(line);
    if (run.exit_code != 0)
        throw Error("inpaint: external command failed (status " + std::to_string(run.exit_code) +
                    "): " + line + "\n" + run.output);

    const ImageRgba filled = load_png_rgba(out_path.string());
    if (filled.width != res || filled.height != res)
        throw Error("inpaint: external output is " + std::to_string(filled.width) + "x" +
                    std::to_string(filled.height) + ", expected " + std::to_string(res) + "x" +
                    std::to_string(res));

    FusedTexture out = tex;
    for (int iy = 0; iy < res; ++iy) {
        const int py = res - 1 - iy;
        for (int ix = 0; ix < res; ++ix) {
            const size_t t = static_cast<size_t>(iy) * res + ix;
            if (fill_domain[t] && out.provenance[t] == Provenance::Empty) {
                out.rgb[t] = rgb(filled.at(ix, py));
                out.provenance[t] = Provenance::Inpainted;
            }
        }
    }
    return out;
}

// --- persistence -----------------------------------------------------------------

struct FusedTextureFiles {
    std::string color, provenance, footprint;
};

inline FusedTextureFiles fused_file_names(const std::string& stem) {
    return {stem + ".color.png", stem + ".provenance.png", stem + ".footprint.png"};
}

inline void save_fused_texture(const std::string& manifest_path, const FusedTexture& tex,
                               const std::vector<std::uint8_t>& footprint) {
    namespace fs = std::filesystem;
    const fs::path manifest(manifest_path);
    const std::string stem = manifest.stem().string();
    const FusedTextureFiles files = fused_file_names(stem);
    const fs::path dir = manifest.parent_path();
    const int res = tex.resolution;

    save_png_rgb8((dir / files.color).string(),
                  detail::flip_rows_to_grid<Rgb>(res, [&](size_t t) { return tex.rgb[t]; }));
    save_png_indexed((dir / files.provenance).string(),
                     detail::flip_rows_to_grid<std::uint8_t>(
                         res, [&](size_t t) { return static_cast<std::uint8_t>(tex.provenance[t]); }),
                     provenance_palette());
    save_png_mask1((dir / files.footprint).string(),
                   detail::flip_rows_to_grid<std::uint8_t>(res, [&](size_t t) { return footprint[t]; }));

    nlohmann::json j;
    j["format"] = "uvbake-fused-texture";
    j["version"] = 1;
    j["resolution"] = res;
    j["files"] = {{"color", files.color},
                  {"provenance", files.provenance},
                  {"footprint", files.footprint}};
    std::ofstream out(manifest_path);
    if (!out) throw Error("cannot open for writing: " + manifest_path);
    out << j.dump(2) << "\n";
}

struct LoadedFusedTexture {
    FusedTexture texture;
    std::vector<std::uint8_t> footprint;
};

inline LoadedFusedTexture load_fused_texture(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    if (!in) throw Error("fused texture not found: " + manifest_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("fused texture " + manifest_path + ": " + e.what());
    }
    LoadedFusedTexture result;
    try {
        if (j.at("format").get<std::string>() != "uvbake-fused-texture")
            throw Error("fused texture " + manifest_path + ": unrecognized format tag");
        const int res = j.at("resolution").get<int>();
        const auto& files = j.at("files");
        const fs::path dir = fs::path(manifest_path).parent_path();
        const ImageRgba color = load_png_rgba((dir / files.at("color").get<std::string>()).string());
        const MaskGrid prov = load_png_indexed((dir / files.at("provenance").get<std::string>()).string());
        const MaskGrid footprint = load_png_mask((dir / files.at("footprint").get<std::string>()).string());
        if (color.width != res || prov.width != res || footprint.width != res)
            throw Error("fused texture " + manifest_path + ": component resolution mismatch");
        FusedTexture& tex = result.texture;
        tex.resolution = res;
        tex.rgb.assign(tex.texel_count(), Rgb{});
        tex.provenance.assign(tex.texel_count(), Provenance::Empty);
        result.footprint.assign(tex.texel_count(), 0);
        for (int iy = 0; iy < res; ++iy) {
            const int py = res - 1 - iy;
            for (int ix = 0; ix < res; ++ix) {
                const size_t t = static_cast<size_t>(iy) * res + ix;
                tex.rgb[t] = rgb(color.at(ix, py));
                if (prov.at(ix, py) > 4)
                    throw Error("fused texture " + manifest_path + ": bad provenance index");
                tex.provenance[t] = static_cast<Provenance>(prov.at(ix, py));
                result.footprint[t] = footprint.at(ix, py);
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw Error("fused texture " + manifest_path + ": " + e.what());
    }
    return result;
}

}  // namespace uvbake
