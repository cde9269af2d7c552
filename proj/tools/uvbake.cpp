// uvbake.cpp — command-line surface for the texture-baking pipeline.
//
// Subcommands map 1:1 onto the library operations:
//   prompt   build the dual-view text prompts from subject attributes
//   bake     back-project one photograph into the UV atlas (-> .ptx set)
//   fuse     merge front and back partial textures
//   inpaint  fill holes (also callable as `inpaint <color> <mask> <out>`,
//            the external-inpainter contract)
//   metrics  score a partial-texture pair (MPAE, OCE, coverage, MPJPE)
//   run      full pipeline from a JSON config
//
// Exit codes: 0 success, 1 validation/usage error, 2 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "uvbake/uvbake.hpp"

namespace fs = std::filesystem;

namespace {

struct PromptArgs {
    uvbake::SubjectAttributes attrs;
};

struct BakeArgs {
    std::string mesh, fit, image, mask, out;
    std::string debug_depth;
    int resolution = 1024;
    uvbake::BakeParams params;
    bool no_mask = false;
};

struct FuseArgs {
    std::string front, back, out;
    std::string mode = "blend";
};

struct InpaintArgs {
    std::string fused, out, out_provenance;
    std::string mode = "pullpush";
    std::string command;
    std::string fill = "atlas";
    std::vector<std::string> positional;  // <color> <mask> <out> contract form
};

struct MetricsArgs {
    std::string front, back, out;
    std::string attribute = "luma";
    std::string joints_pred, joints_gt;
    std::string label = "run";
    bool degrees = false;
};

struct RunArgs {
    std::string config;
    std::string out_override;
    int resolution_override = 0;
    double tau = -1.0, weight_exp = -1.0, depth_eps = -1.0;
    std::string inpaint_override;
    bool degrees = false;
};

int run_prompt(const PromptArgs& args) {
    const uvbake::PromptPair prompts = uvbake::build_prompts(args.attrs);
    std::cout << "front: " << prompts.front << "\n";
    std::cout << "back:  " << prompts.back << "\n";
    return 0;
}

int run_bake(const BakeArgs& args) {
    if (!uvbake::is_power_of_two(args.resolution) || args.resolution > 4096)
        throw uvbake::ValidationError("bake: resolution must be a power of two in [1, 4096]");
    uvbake::BakeParams params = args.params;
    if (args.no_mask) params.use_mask = false;
    uvbake::validate_bake_params(params);

    const uvbake::Mesh mesh = uvbake::load_mesh(args.mesh);
    const uvbake::FitFile fit = uvbake::load_fit_file(args.fit);
    std::string image_path = args.image;
    if (image_path.empty()) {
        if (fit.image.empty())
            throw uvbake::ValidationError("bake: no --image and the fit file names none");
        image_path = uvbake::detail::resolve_path(fs::path(args.fit).parent_path(), fit.image);
    }
    const uvbake::ImageRgba image = uvbake::load_png_rgba(image_path);
    if (image.width != fit.camera.image_width || image.height != fit.camera.image_height)
        throw uvbake::Error("bake: image is " + std::to_string(image.width) + "x" +
                            std::to_string(image.height) + " but the camera expects " +
                            std::to_string(fit.camera.image_width) + "x" +
                            std::to_string(fit.camera.image_height));
    std::optional<uvbake::ImageRgba> mask;
    if (!args.mask.empty()) mask = uvbake::load_png_rgba(args.mask);

    const uvbake::UvCoverageMap coverage = uvbake::uv_rasterize(mesh, args.resolution);
    std::vector<std::uint8_t> footprint(coverage.texel_count(), 0);
    for (size_t t = 0; t < coverage.texel_count(); ++t)
        footprint[t] = coverage.covered(t) ? 1 : 0;
    const uvbake::DepthBuffer depth =
        uvbake::rasterize_depth(mesh, fit.camera, fit.camera.image_width, fit.camera.image_height);
    if (!args.debug_depth.empty()) {
        uvbake::save_depth_debug_png(args.debug_depth + ".depth.png", depth);
        uvbake::save_face_id_grid(args.debug_depth + ".faceid.i32", depth);
    }
    uvbake::BakeStats stats;
    const uvbake::PartialTexture tex = uvbake::bake_view(
        mesh, fit.camera, image, mask ? &*mask : nullptr, coverage, depth, params, &stats);
    if (const fs::path parent = fs::path(args.out).parent_path(); !parent.empty())
        fs::create_directories(parent);
    uvbake::save_partial_texture(args.out, tex, footprint, params, stats, fit.view);
    std::cout << "baked " << stats.valid << " texels (occluded " << stats.occluded << ", masked "
              << stats.masked << ", grazing " << stats.below_angle_threshold << ", outside "
              << stats.outside_image << ", behind " << stats.behind_camera << ") -> " << args.out
              << "\n";
    return 0;
}

int run_fuse(const FuseArgs& args) {
    uvbake::FuseMode mode;
    if (args.mode == "blend") mode = uvbake::FuseMode::WeightedBlend;
    else if (args.mode == "select") mode = uvbake::FuseMode::BestView;
    else throw uvbake::ValidationError("fuse: --mode must be blend or select");
    const uvbake::LoadedPartialTexture front = uvbake::load_partial_texture(args.front);
    const uvbake::LoadedPartialTexture back = uvbake::load_partial_texture(args.back);
    const uvbake::FusedTexture fused = uvbake::fuse(front.texture, back.texture, mode);
    if (const fs::path parent = fs::path(args.out).parent_path(); !parent.empty())
        fs::create_directories(parent);
    uvbake::save_fused_texture(args.out, fused, front.footprint);
    std::cout << "fused -> " << args.out << "\n";
    return 0;
}

int run_inpaint(const InpaintArgs& args) {
    // Contract form: <color.png> <mask.png> <out.png> — fill masked texels of
    // a bare colour image with the pull-push filler. This is what an
    // `inpaint.mode = external` pipeline invokes.
    if (!args.positional.empty()) {
        if (args.positional.size() != 3)
            throw uvbake::ValidationError("inpaint: contract form needs <color> <mask> <out>");
        const uvbake::ImageRgba color = uvbake::load_png_rgba(args.positional[0]);
        const uvbake::MaskGrid mask = uvbake::load_png_mask(args.positional[1]);
        if (mask.width != color.width || mask.height != color.height)
            throw uvbake::Error("inpaint: mask size does not match the colour image");
        if (color.width != color.height)
            throw uvbake::Error("inpaint: contract form expects a square texture");
        const int res = color.width;
        // PNG rows store v=1 first; mirror into texel order, fill, mirror back.
        uvbake::FusedTexture tex;
        tex.resolution = res;
        tex.rgb.assign(tex.texel_count(), uvbake::Rgb{});
        tex.provenance.assign(tex.texel_count(), uvbake::Provenance::Empty);
        std::vector<std::uint8_t> domain(tex.texel_count(), 0);
        for (int iy = 0; iy < res; ++iy) {
            const int py = res - 1 - iy;
            for (int ix = 0; ix < res; ++ix) {
                const size_t t = static_cast<size_t>(iy) * res + ix;
                tex.rgb[t] = uvbake::rgb(color.at(ix, py));
                const bool hole = mask.at(ix, py) != 0;
                domain[t] = hole ? 1 : 0;
                tex.provenance[t] = hole ? uvbake::Provenance::Empty : uvbake::Provenance::Both;
            }
        }
        const uvbake::FusedTexture filled = uvbake::inpaint_pullpush(tex, domain);
        uvbake::save_png_rgb8(args.positional[2],
                              uvbake::detail::flip_rows_to_grid<uvbake::Rgb>(
                                  res, [&](size_t t) { return filled.rgb[t]; }));
        return 0;
    }

    if (args.fused.empty())
        throw uvbake::ValidationError("inpaint: give --fused or the <color> <mask> <out> form");
    if (args.out.empty()) throw uvbake::ValidationError("inpaint: --out is required");
    const uvbake::LoadedFusedTexture loaded = uvbake::load_fused_texture(args.fused);
    std::vector<std::uint8_t> domain = loaded.footprint;
    if (args.fill == "all") domain.assign(loaded.texture.texel_count(), 1);
    else if (args.fill != "atlas")
        throw uvbake::ValidationError("inpaint: --fill must be atlas or all");

    uvbake::FusedTexture result = loaded.texture;
    if (args.mode == "pullpush") {
        result = uvbake::inpaint_pullpush(loaded.texture, domain);
    } else if (args.mode == "external") {
        if (args.command.empty())
            throw uvbake::ValidationError("inpaint: --mode external needs --command");
        const std::string scratch =
            (fs::path(args.out).parent_path() / "scratch").string();
        result = uvbake::inpaint_external(loaded.texture, domain, args.command, scratch);
    } else if (args.mode != "none") {
        throw uvbake::ValidationError("inpaint: --mode must be pullpush, external or none");
    }
    if (const fs::path parent = fs::path(args.out).parent_path(); !parent.empty())
        fs::create_directories(parent);
    uvbake::save_png_rgb8(args.out, uvbake::detail::flip_rows_to_grid<uvbake::Rgb>(
                                        result.resolution, [&](size_t t) { return result.rgb[t]; }));
    if (!args.out_provenance.empty())
        uvbake::save_png_indexed(args.out_provenance,
                                 uvbake::detail::flip_rows_to_grid<std::uint8_t>(
                                     result.resolution,
                                     [&](size_t t) {
                                         return static_cast<std::uint8_t>(result.provenance[t]);
                                     }),
                                 uvbake::provenance_palette());
    return 0;
}

int run_metrics(const MetricsArgs& args) {
    const uvbake::LoadedPartialTexture front = uvbake::load_partial_texture(args.front);
    const uvbake::LoadedPartialTexture back = uvbake::load_partial_texture(args.back);
    uvbake::MetricsReport report =
        uvbake::compute_report(front.texture, back.texture, front.footprint,
                               uvbake::parse_texture_attribute(args.attribute),
                               /*allow_empty_overlap=*/false);
    if (!args.joints_pred.empty() || !args.joints_gt.empty()) {
        if (args.joints_pred.empty() || args.joints_gt.empty())
            throw uvbake::ValidationError("metrics: --joints-pred and --joints-gt go together");
        const auto pred = uvbake::load_joints(args.joints_pred);
        const auto gt = uvbake::load_joints(args.joints_gt);
        report.mpjpe = uvbake::mpjpe(pred, gt);
        report.pa_mpjpe = uvbake::pa_mpjpe(pred, gt);
    }
    std::cout << uvbake::report_to_table(report, args.label, args.degrees);
    if (!args.out.empty()) {
        if (const fs::path parent = fs::path(args.out).parent_path(); !parent.empty())
            fs::create_directories(parent);
        std::ofstream json_out(args.out + ".json");
        if (!json_out) throw uvbake::Error("cannot open for writing: " + args.out + ".json");
        json_out << uvbake::report_to_json(report).dump(2) << "\n";
        std::ofstream txt_out(args.out + ".txt");
        txt_out << uvbake::report_to_table(report, args.label, args.degrees);
    }
    return 0;
}

int run_run(const RunArgs& args) {
    uvbake::PipelineConfig cfg = uvbake::load_config(args.config);
    if (!args.out_override.empty()) cfg.output_dir = args.out_override;
    if (args.resolution_override > 0) cfg.resolution = args.resolution_override;
    if (args.tau >= 0.0) cfg.bake.tau = args.tau;
    if (args.weight_exp >= 0.0) cfg.bake.weight_exponent = args.weight_exp;
    if (args.depth_eps >= 0.0) cfg.bake.depth_eps = args.depth_eps;
    if (!args.inpaint_override.empty()) {
        if (args.inpaint_override == "pullpush") cfg.inpaint_mode = uvbake::InpaintMode::PullPush;
        else if (args.inpaint_override == "none") cfg.inpaint_mode = uvbake::InpaintMode::None;
        else if (args.inpaint_override == "external") cfg.inpaint_mode = uvbake::InpaintMode::External;
        else throw uvbake::ValidationError("run: --inpaint must be pullpush, external or none");
    }
    const uvbake::MetricsReport report = uvbake::run_pipeline(cfg);
    std::cout << uvbake::report_to_table(report, cfg.label, args.degrees);
    std::cout << "artifacts in " << cfg.output_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uvbake — bake dual-view photographs into a UV texture atlas"};
    app.require_subcommand(1);

    PromptArgs prompt_args;
    auto* prompt = app.add_subcommand("prompt", "Build the front/back text prompt pair");
    prompt->add_option("--gender", prompt_args.attrs.gender, "Subject gender token")->required();
    prompt->add_option("--shape", prompt_args.attrs.body_shape, "Body shape token")->required();
    prompt->add_option("--age", prompt_args.attrs.age, "Age token")->required();
    prompt->add_option("--area", prompt_args.attrs.area, "Geographic/cultural area token")->required();
    prompt->add_option("--profession", prompt_args.attrs.profession, "Profession token")->required();
    prompt->add_option("--clothing", prompt_args.attrs.clothing, "Clothing token")->required();

    BakeArgs bake_args;
    auto* bake = app.add_subcommand("bake", "Back-project one photograph into the UV atlas");
    bake->add_option("--mesh", bake_args.mesh, "Posed mesh (OBJ with UVs)")->required();
    bake->add_option("--fit", bake_args.fit, "Camera fit file (JSON)")->required();
    bake->add_option("--image", bake_args.image, "Photograph (PNG); default from the fit file");
    bake->add_option("--mask", bake_args.mask, "Foreground mask (PNG alpha)");
    bake->add_option("--resolution", bake_args.resolution, "Texture resolution (power of two)");
    bake->add_option("--tau", bake_args.params.tau, "Minimum cos(theta) for a valid texel");
    bake->add_option("--weight-exp", bake_args.params.weight_exponent, "Weight exponent p");
    bake->add_option("--depth-eps", bake_args.params.depth_eps, "Visibility depth tolerance");
    bake->add_flag("--no-mask", bake_args.no_mask, "Ignore the mask even when given");
    bake->add_option("--debug-depth", bake_args.debug_depth,
                     "Dump the depth buffer (PNG) and face ids (raw int32) under this basename");
    bake->add_option("--out", bake_args.out, "Output .ptx manifest path")->required();

    FuseArgs fuse_args;
    auto* fuse = app.add_subcommand("fuse", "Fuse front and back partial textures");
    fuse->add_option("--front", fuse_args.front, "Front .ptx manifest")->required();
    fuse->add_option("--back", fuse_args.back, "Back .ptx manifest")->required();
    fuse->add_option("--mode", fuse_args.mode, "blend (weighted mean) or select (best view)");
    fuse->add_option("--out", fuse_args.out, "Output fused manifest path")->required();

    InpaintArgs inpaint_args;
    auto* inpaint = app.add_subcommand("inpaint", "Fill texture holes");
    inpaint->add_option("files", inpaint_args.positional,
                        "Contract form: <color.png> <mask.png> <out.png>")
        ->expected(0, 3);
    inpaint->add_option("--fused", inpaint_args.fused, "Fused texture manifest");
    inpaint->add_option("--mode", inpaint_args.mode, "pullpush, external or none");
    inpaint->add_option("--command", inpaint_args.command, "External inpainter command");
    inpaint->add_option("--fill", inpaint_args.fill, "Fill domain: atlas or all");
    inpaint->add_option("--out", inpaint_args.out, "Output colour PNG");
    inpaint->add_option("--out-provenance", inpaint_args.out_provenance, "Output provenance PNG");

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "Score a partial-texture pair");
    metrics->add_option("--front", metrics_args.front, "Front .ptx manifest")->required();
    metrics->add_option("--back", metrics_args.back, "Back .ptx manifest")->required();
    metrics->add_option("--attribute", metrics_args.attribute, "OCE attribute: luma, r, g or b");
    metrics->add_option("--joints-pred", metrics_args.joints_pred, "Predicted joints (JSON)");
    metrics->add_option("--joints-gt", metrics_args.joints_gt, "Ground-truth joints (JSON)");
    metrics->add_option("--label", metrics_args.label, "Row label for the report table");
    metrics->add_flag("--degrees", metrics_args.degrees, "Print MPAE in degrees");
    metrics->add_option("--out", metrics_args.out, "Report basename (.json and .txt)");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run the full pipeline from a config");
    run->add_option("--config", run_args.config, "Pipeline config (JSON)")->required();
    run->add_option("--out", run_args.out_override, "Override the output directory");
    run->add_option("--resolution", run_args.resolution_override, "Override the texture resolution");
    run->add_option("--tau", run_args.tau, "Override the incidence threshold");
    run->add_option("--weight-exp", run_args.weight_exp, "Override the weight exponent");
    run->add_option("--depth-eps", run_args.depth_eps, "Override the depth tolerance");
    run->add_option("--inpaint", run_args.inpaint_override, "Override the inpaint mode");
    run->add_flag("--degrees", run_args.degrees, "Print MPAE in degrees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (prompt->parsed()) return run_prompt(prompt_args);
        if (bake->parsed()) return run_bake(bake_args);
        if (fuse->parsed()) return run_fuse(fuse_args);
        if (inpaint->parsed()) return run_inpaint(inpaint_args);
        if (metrics->parsed()) return run_metrics(metrics_args);
        if (run->parsed()) return run_run(run_args);
    } catch (const uvbake::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
