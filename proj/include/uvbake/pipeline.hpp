// pipeline.hpp — end-to-end orchestration: load, bake per view, fuse,
// inpaint, score, persist.
//
// Stages hand data to each other through the persisted artifact formats (a
// stage reloads what the previous stage wrote), so running the pipeline in
// one process and chaining the CLI subcommands over the same files produce
// byte-identical outputs. On a stage failure everything written so far is
// renamed to a `.partial` suffix and the error names the failing stage.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvbake/baker.hpp"
#include "uvbake/camera.hpp"
#include "uvbake/compose.hpp"
#include "uvbake/metrics.hpp"
#include "uvbake/obj_io.hpp"
#include "uvbake/visibility.hpp"

namespace uvbake {

enum class InpaintMode { PullPush, External, None };

enum class FillDomain { Atlas, All };

struct PipelineConfig {
    // Either `mesh` (shared) or both `mesh_front` and `mesh_back`; per-view
    // meshes must share topology and atlas so partial textures fuse texel
    // by texel.
    std::string mesh, mesh_front, mesh_back;
    std::string fit_front, fit_back;
    std::string image_front, image_back;  // optional; default from fit files
    std::string mask_front, mask_back;    // optional
    int resolution = 1024;
    BakeParams bake;
    FuseMode fuse_mode = FuseMode::WeightedBlend;
    InpaintMode inpaint_mode = InpaintMode::PullPush;
    std::string inpaint_command;  // external mode only
    FillDomain inpaint_fill = FillDomain::Atlas;
    TextureAttribute oce_attribute = TextureAttribute::Luma;
    std::string joints_pred, joints_gt;  // optional joint files for MPJPE
    std::string label = "run";
    std::string output_dir;
};

inline bool is_power_of_two(int v) { return v >= 1 && (v & (v - 1)) == 0; }

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? path.string() : (base / path).string();
}

inline void require_file(const std::string& path, const std::string& what) {
    if (!std::filesystem::exists(path))
        throw ValidationError("config: " + what + " does not exist: " + path);
}

}  // namespace detail

// Parses the JSON config; relative paths resolve against the config file's
// directory.
inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    PipelineConfig cfg;
    try {
        cfg.mesh = detail::resolve_path(base, j.value("mesh", ""));
        cfg.mesh_front = detail::resolve_path(base, j.value("mesh_front", ""));
        cfg.mesh_back = detail::resolve_path(base, j.value("mesh_back", ""));
        cfg.fit_front = detail::resolve_path(base, j.value("fit_front", ""));
        cfg.fit_back = detail::resolve_path(base, j.value("fit_back", ""));
        cfg.image_front = detail::resolve_path(base, j.value("image_front", ""));
        cfg.image_back = detail::resolve_path(base, j.value("image_back", ""));
        cfg.mask_front = detail::resolve_path(base, j.value("mask_front", ""));
        cfg.mask_back = detail::resolve_path(base, j.value("mask_back", ""));
        cfg.resolution = j.value("resolution", 1024);
        if (j.contains("bake")) {
            const auto& b = j.at("bake");
            cfg.bake.tau = b.value("tau", cfg.bake.tau);
            cfg.bake.weight_exponent = b.value("weight_exponent", cfg.bake.weight_exponent);
            cfg.bake.depth_eps = b.value("depth_eps", cfg.bake.depth_eps);
            cfg.bake.use_mask = b.value("use_mask", cfg.bake.use_mask);
        }
        const std::string fuse_mode = j.value("fuse_mode", "blend");
        if (fuse_mode == "blend") cfg.fuse_mode = FuseMode::WeightedBlend;
        else if (fuse_mode == "select") cfg.fuse_mode = FuseMode::BestView;
        else throw ValidationError("config: fuse_mode must be \"blend\" or \"select\"");
        if (j.contains("inpaint")) {
            const auto& ip = j.at("inpaint");
            const std::string mode = ip.value("mode", "pullpush");
            if (mode == "pullpush") cfg.inpaint_mode = InpaintMode::PullPush;
            else if (mode == "external") cfg.inpaint_mode = InpaintMode::External;
            else if (mode == "none") cfg.inpaint_mode = InpaintMode::None;
            else throw ValidationError("config: inpaint.mode must be pullpush|external|none");
            cfg.inpaint_command = ip.value("command", "");
        }
        const std::string fill = j.value("inpaint_fill", "atlas");
        if (fill == "atlas") cfg.inpaint_fill = FillDomain::Atlas;
        else if (fill == "all") cfg.inpaint_fill = FillDomain::All;
        else throw ValidationError("config: inpaint_fill must be \"atlas\" or \"all\"");
        cfg.oce_attribute = parse_texture_attribute(j.value("oce_attribute", "luma"));
        cfg.joints_pred = detail::resolve_path(base, j.value("joints_pred", ""));
        cfg.joints_gt = detail::resolve_path(base, j.value("joints_gt", ""));
        cfg.label = j.value("label", "run");
        cfg.output_dir = detail::resolve_path(base, j.value("output_dir", "out"));
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return cfg;
}

inline void validate_config(const PipelineConfig& cfg) {
    if (!is_power_of_two(cfg.resolution) || cfg.resolution > 4096)
        throw ValidationError("config: resolution must be a power of two in [1, 4096]");
    validate_bake_params(cfg.bake);
    const bool shared = !cfg.mesh.empty();
    const bool per_view = !cfg.mesh_front.empty() || !cfg.mesh_back.empty();
    if (shared == per_view)
        throw ValidationError("config: give either \"mesh\" or both \"mesh_front\" and \"mesh_back\"");
    if (per_view && (cfg.mesh_front.empty() || cfg.mesh_back.empty()))
        throw ValidationError("config: per-view meshes need both \"mesh_front\" and \"mesh_back\"");
    if (cfg.fit_front.empty() || cfg.fit_back.empty())
        throw ValidationError("config: both fit files are required");
    if (shared) detail::require_file(cfg.mesh, "mesh");
    if (per_view) {
        detail::require_file(cfg.mesh_front, "mesh_front");
        detail::require_file(cfg.mesh_back, "mesh_back");
    }
    detail::require_file(cfg.fit_front, "fit_front");
    detail::require_file(cfg.fit_back, "fit_back");
    if (cfg.inpaint_mode == InpaintMode::External && cfg.inpaint_command.empty())
        throw ValidationError("config: inpaint.mode \"external\" needs inpaint.command");
    if (cfg.output_dir.empty()) throw ValidationError("config: output_dir must be set");
    if (!cfg.joints_pred.empty() != !cfg.joints_gt.empty())
        throw ValidationError("config: joints_pred and joints_gt go together");
}

// Joint files: a bare JSON array of [x,y,z] triples, or {"joints": [...]}.
inline std::vector<Vec3> load_joints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("joints file not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("joints file " + path + ": " + e.what());
    }
    const nlohmann::json* arr = &j;
    if (j.is_object() && j.contains("joints")) arr = &j.at("joints");
    if (!arr->is_array()) throw Error("joints file " + path + ": expected an array");
    std::vector<Vec3> joints;
    for (const auto& e : *arr) {
        if (!e.is_array() || e.size() != 3)
            throw Error("joints file " + path + ": each joint must be [x, y, z]");
        joints.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
    }
    return joints;
}

// Fixed artifact names inside the output directory.
struct PipelineArtifacts {
    std::string front_ptx = "front.ptx";
    std::string back_ptx = "back.ptx";
    std::string fused = "fused.json";
    std::string texture = "texture.png";
    std::string provenance = "provenance.png";
    std::string report_json = "report.json";
    std::string report_txt = "report.txt";
};

namespace detail {

// Runs one pipeline stage, prefixing any failure with the stage name.
template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw Error("stage=" + name + ": " + e.what());
    }
}

inline void check_same_atlas(const Mesh& front, const Mesh& back) {
    if (front.faces.size() != back.faces.size() || front.uvs.size() != back.uvs.size())
        throw Error("per-view meshes do not share topology");
    for (size_t fi = 0; fi < front.faces.size(); ++fi)
        for (int k = 0; k < 3; ++k)
            if (front.faces[fi][k].uv != back.faces[fi][k].uv)
                throw Error("per-view meshes do not share the UV atlas");
    for (size_t i = 0; i < front.uvs.size(); ++i) {
        const Vec2 d = front.uvs[i] - back.uvs[i];
        if (std::abs(d.x) > 1e-9 || std::abs(d.y) > 1e-9)
            throw Error("per-view meshes do not share the UV atlas");
    }
}

}  // namespace detail

// Executes the full flow and returns the metrics report. All artifacts land
// in cfg.output_dir under the PipelineArtifacts names.
inline MetricsReport run_pipeline(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    validate_config(cfg);
    fs::create_directories(cfg.output_dir);
    const PipelineArtifacts names;
    const auto out_path = [&](const std::string& name) {
        return (fs::path(cfg.output_dir) / name).string();
    };

    std::vector<std::string> written;
    const auto record = [&](const std::string& path) { written.push_back(path); };

    try {
        // load
        Mesh mesh_front_storage, mesh_back_storage;
        const bool per_view = !cfg.mesh_front.empty();
        detail::run_stage(per_view ? "load_mesh(front)" : "load_mesh", [&] {
            mesh_front_storage = load_mesh(per_view ? cfg.mesh_front : cfg.mesh);
            return 0;
        });
        if (per_view) {
            detail::run_stage("load_mesh(back)", [&] {
                mesh_back_storage = load_mesh(cfg.mesh_back);
                detail::check_same_atlas(mesh_front_storage, mesh_back_storage);
                return 0;
            });
        }
        const Mesh& mesh_front = mesh_front_storage;
        const Mesh& mesh_back = per_view ? mesh_back_storage : mesh_front_storage;

        FitFile fit_front, fit_back;
        detail::run_stage("load_fit(front)", [&] { fit_front = load_fit_file(cfg.fit_front); return 0; });
        detail::run_stage("load_fit(back)", [&] { fit_back = load_fit_file(cfg.fit_back); return 0; });

        // uv_rasterize (once; per-view meshes share the atlas)
        UvCoverageMap coverage;
        std::vector<std::uint8_t> footprint;
        detail::run_stage("uv_rasterize", [&] {
            coverage = uv_rasterize(mesh_front, cfg.resolution);
            footprint.assign(coverage.texel_count(), 0);
            for (size_t t = 0; t < coverage.texel_count(); ++t)
                footprint[t] = coverage.covered(t) ? 1 : 0;
            return 0;
        });

        // per-view rasterize_depth + bake_view
        const auto bake_one = [&](const char* view, const Mesh& mesh, const FitFile& fit,
                                  const std::string& image_override, const std::string& mask_path,
                                  const std::string& ptx_name) {
            const Camera& camera = fit.camera;
            DepthBuffer depth = detail::run_stage(std::string("rasterize_depth(") + view + ")", [&] {
                return rasterize_depth(mesh, camera, camera.image_width, camera.image_height);
            });
            detail::run_stage(std::string("bake_view(") + view + ")", [&] {
                std::string image_path = image_override;
                if (image_path.empty()) {
                    if (fit.image.empty())
                        throw Error("no image given in config or fit file");
                    const std::string fit_path =
                        view == std::string("front") ? cfg.fit_front : cfg.fit_back;
                    image_path =
                        detail::resolve_path(fs::path(fit_path).parent_path(), fit.image);
                }
                const ImageRgba image = load_png_rgba(image_path);
                if (image.width != camera.image_width || image.height != camera.image_height)
                    throw Error("image " + image_path + " is " + std::to_string(image.width) + "x" +
                                std::to_string(image.height) + " but the camera expects " +
                                std::to_string(camera.image_width) + "x" +
                                std::to_string(camera.image_height));
                std::optional<ImageRgba> mask;
                if (!mask_path.empty()) mask = load_png_rgba(mask_path);
                BakeStats stats;
                const PartialTexture tex = bake_view(mesh, camera, image, mask ? &*mask : nullptr,
                                                     coverage, depth, cfg.bake, &stats);
                record(out_path(ptx_name));
                const PartialTextureFiles f = ptx_file_names(fs::path(ptx_name).stem().string());
                for (const std::string* name :
                     {&f.color, &f.weight, &f.cos_angle, &f.valid, &f.footprint})
                    record(out_path(*name));
                save_partial_texture(out_path(ptx_name), tex, footprint, cfg.bake, stats, view);
                return 0;
            });
        };
        bake_one("front", mesh_front, fit_front, cfg.image_front, cfg.mask_front, names.front_ptx);
        bake_one("back", mesh_back, fit_back, cfg.image_back, cfg.mask_back, names.back_ptx);

        // fuse (from the persisted partial textures, like the CLI chain)
        detail::run_stage("fuse", [&] {
            const LoadedPartialTexture front = load_partial_texture(out_path(names.front_ptx));
            const LoadedPartialTexture back = load_partial_texture(out_path(names.back_ptx));
            const FusedTexture fused = fuse(front.texture, back.texture, cfg.fuse_mode);
            record(out_path(names.fused));
            const auto f = fused_file_names(fs::path(names.fused).stem().string());
            record(out_path(f.color));
            record(out_path(f.provenance));
            record(out_path(f.footprint));
            save_fused_texture(out_path(names.fused), fused, front.footprint);
            return 0;
        });

        // inpaint
        detail::run_stage("inpaint", [&] {
            const LoadedFusedTexture loaded = load_fused_texture(out_path(names.fused));
            std::vector<std::uint8_t> domain = loaded.footprint;
            if (cfg.inpaint_fill == FillDomain::All)
                domain.assign(loaded.texture.texel_count(), 1);
            FusedTexture result = loaded.texture;
            if (cfg.inpaint_mode == InpaintMode::PullPush) {
                result = inpaint_pullpush(loaded.texture, domain);
            } else if (cfg.inpaint_mode == InpaintMode::External) {
                result = inpaint_external(loaded.texture, domain, cfg.inpaint_command,
                                          (fs::path(cfg.output_dir) / "scratch").string());
            }
            record(out_path(names.texture));
            record(out_path(names.provenance));
            save_png_rgb8(out_path(names.texture), detail::flip_rows_to_grid<Rgb>(
                                                       result.resolution,
                                                       [&](size_t t) { return result.rgb[t]; }));
            save_png_indexed(out_path(names.provenance),
                             detail::flip_rows_to_grid<std::uint8_t>(
                                 result.resolution,
                                 [&](size_t t) { return static_cast<std::uint8_t>(result.provenance[t]); }),
                             provenance_palette());
            return 0;
        });

        // metrics (from the persisted partial textures)
        const MetricsReport report = detail::run_stage("metrics", [&] {
            const LoadedPartialTexture front = load_partial_texture(out_path(names.front_ptx));
            const LoadedPartialTexture back = load_partial_texture(out_path(names.back_ptx));
            MetricsReport rep = compute_report(front.texture, back.texture, front.footprint,
                                               cfg.oce_attribute, /*allow_empty_overlap=*/true);
            if (!cfg.joints_pred.empty()) {
                rep.mpjpe = mpjpe(load_joints(cfg.joints_pred), load_joints(cfg.joints_gt));
                rep.pa_mpjpe = pa_mpjpe(load_joints(cfg.joints_pred), load_joints(cfg.joints_gt));
            }
            record(out_path(names.report_json));
            record(out_path(names.report_txt));
            {
                std::ofstream out(out_path(names.report_json));
                if (!out) throw Error("cannot open for writing: " + out_path(names.report_json));
                out << report_to_json(rep).dump(2) << "\n";
            }
            {
                std::ofstream out(out_path(names.report_txt));
                if (!out) throw Error("cannot open for writing: " + out_path(names.report_txt));
                out << report_to_table(rep, cfg.label);
            }
            return rep;
        });
        return report;
    } catch (...) {
        // Mark everything this run managed to write as incomplete.
        for (const std::string& path : written) {
            std::error_code ec;
            if (fs::exists(path, ec)) fs::rename(path, path + ".partial", ec);
        }
        throw;
    }
}

}  // namespace uvbake
