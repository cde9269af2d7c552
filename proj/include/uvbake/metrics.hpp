// metrics.hpp — self-consistency and pose-alignment metrics.
//
// MPAE: mean over validly projected texels of the angle between the surface
// normal and the (negated) viewing direction, in radians; a camera-facing
// texel contributes 0. OCE: mean absolute difference of a texture attribute
// over the texels both views cover, by default the Rec.709 luma of the
// sRGB-encoded colour on a [0,255] scale. MPJPE / PA-MPJPE evaluate joint
// sets without / with an optimal similarity alignment.
//
// Empty reduction sets are errors, never zeros — a silent zero would read as
// a perfect score.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvbake/baker.hpp"
#include "uvbake/compose.hpp"
#include "uvbake/parallel.hpp"
#include "uvbake/vec.hpp"

namespace uvbake {

// Angle between two unit vectors, arccos of the clamped dot product.
inline double projection_angle(Vec3 normal, Vec3 view) {
    if (!is_unit(normal) || !is_unit(view))
        throw ValidationError("projection_angle: inputs must be unit vectors");
    return std::acos(std::clamp(dot(normal, view), -1.0, 1.0));
}

// Mean projection angle error over one view's valid set.
inline double mpae(const PartialTexture& tex) {
    std::vector<double> angles;
    angles.reserve(tex.texel_count());
    for (size_t i = 0; i < tex.texel_count(); ++i)
        if (tex.valid[i])
            angles.push_back(std::acos(std::clamp(static_cast<double>(tex.cos_angle[i]), -1.0, 1.0)));
    if (angles.empty()) throw Error("mpae: no valid projections");
    return pairwise_sum(angles) / static_cast<double>(angles.size());
}

// MPAE over the union of both views' projections: every valid (texel, view)
// pair contributes one angle.
inline double mpae_combined(const PartialTexture& front, const PartialTexture& back) {
    if (front.resolution != back.resolution)
        throw ValidationError("mpae: resolution mismatch");
    std::vector<double> angles;
    angles.reserve(front.texel_count());
    for (const PartialTexture* tex : {&front, &back})
        for (size_t i = 0; i < tex->texel_count(); ++i)
            if (tex->valid[i])
                angles.push_back(
                    std::acos(std::clamp(static_cast<double>(tex->cos_angle[i]), -1.0, 1.0)));
    if (angles.empty()) throw Error("mpae: no valid projections");
    return pairwise_sum(angles) / static_cast<double>(angles.size());
}

enum class TextureAttribute { Luma, R, G, B };

inline TextureAttribute parse_texture_attribute(const std::string& name) {
    if (name == "luma") return TextureAttribute::Luma;
    if (name == "r") return TextureAttribute::R;
    if (name == "g") return TextureAttribute::G;
    if (name == "b") return TextureAttribute::B;
    throw ValidationError("unknown texture attribute '" + name + "' (luma|r|g|b)");
}

namespace detail {

inline double attribute_value(const Rgb& linear, TextureAttribute attr) {
    switch (attr) {
        case TextureAttribute::Luma: return luma255(linear);
        case TextureAttribute::R: return 255.0 * srgb_encode(linear.r);
        case TextureAttribute::G: return 255.0 * srgb_encode(linear.g);
        case TextureAttribute::B: return 255.0 * srgb_encode(linear.b);
    }
    return 0.0;
}

}  // namespace detail

// Overlap consistency error: mean |t_a - t_b| over the texels both views
// cover. Attribute values live on a [0,255] scale.
inline double oce(const PartialTexture& a, const PartialTexture& b,
                  TextureAttribute attr = TextureAttribute::Luma) {
    if (a.resolution != b.resolution) throw ValidationError("oce: resolution mismatch");
    std::vector<double> diffs;
    for (size_t i = 0; i < a.texel_count(); ++i)
        if (a.valid[i] && b.valid[i])
            diffs.push_back(std::abs(detail::attribute_value(a.rgb[i], attr) -
                                     detail::attribute_value(b.rgb[i], attr)));
    if (diffs.empty()) throw Error("oce: no overlap");
    return pairwise_sum(diffs) / static_cast<double>(diffs.size());
}

// --- pose metrics ---------------------------------------------------------------

inline double mpjpe(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt) {
    if (pred.size() != gt.size()) throw ValidationError("mpjpe: joint count mismatch");
    if (pred.empty()) throw ValidationError("mpjpe: empty joint sets");
    std::vector<double> dists(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) dists[i] = norm(pred[i] - gt[i]);
    return pairwise_sum(dists) / static_cast<double>(dists.size());
}

struct SimilarityTransform {
    double scale = 1.0;
    Mat3 rotation;
    Vec3 translation;

    Vec3 apply(Vec3 p) const { return scale * (rotation * p) + translation; }
};

// Least-squares similarity alignment (Umeyama): center both sets, SVD the
// cross-covariance, correct the determinant sign so the rotation is proper,
// scale from the trace ratio, translation closes the centroids.
inline SimilarityTransform procrustes_align(const std::vector<Vec3>& pred,
                                            const std::vector<Vec3>& gt) {
    if (pred.size() != gt.size()) throw ValidationError("procrustes: joint count mismatch");
    if (pred.size() < 3) throw ValidationError("procrustes: need at least 3 points");

    const auto centroid = [](const std::vector<Vec3>& pts) {
        Vec3 c{};
        for (const Vec3& p : pts) c += p;
        return (1.0 / static_cast<double>(pts.size())) * c;
    };
    const Vec3 mu_p = centroid(pred);
    const Vec3 mu_g = centroid(gt);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    double pred_ss = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const Vec3 x = pred[i] - mu_p;
        const Vec3 y = gt[i] - mu_g;
        const Eigen::Vector3d xe(x.x, x.y, x.z);
        const Eigen::Vector3d ye(y.x, y.y, y.z);
        cov += ye * xe.transpose();
        pred_ss += dot(x, x);
    }
    if (pred_ss <= 1e-24) throw Error("procrustes: degenerate (coincident) point set");

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300))
        throw Error("procrustes: degenerate (collinear) point set");
    const double det_sign =
        (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = det_sign;
    const Eigen::Matrix3d rot = svd.matrixU() * d * svd.matrixV().transpose();

    SimilarityTransform result;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) result.rotation(r, c) = rot(r, c);
    result.scale = (sv(0) + sv(1) + det_sign * sv(2)) / pred_ss;
    result.translation = mu_g - result.scale * (result.rotation * mu_p);
    return result;
}

inline double pa_mpjpe(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt) {
    const SimilarityTransform t = procrustes_align(pred, gt);
    std::vector<Vec3> aligned(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) aligned[i] = t.apply(pred[i]);
    return mpjpe(aligned, gt);
}

// --- report ---------------------------------------------------------------------

struct MetricsReport {
    double mpae = 0.0;  // radians, both views combined
    std::optional<double> oce;  // empty overlap reports "n/a"
    double coverage_front = 0.0, coverage_back = 0.0, coverage_overlap = 0.0;
    std::optional<double> mpjpe, pa_mpjpe;
    // raw counts backing the fractions
    std::int64_t atlas_texels = 0, valid_front = 0, valid_back = 0, overlap_texels = 0;
};

inline void check_report_invariants(const MetricsReport& r) {
    const double pi = std::acos(-1.0);
    if (r.mpae < 0.0 || r.mpae > pi) throw Error("report: MPAE out of [0, pi]");
    if (r.oce && *r.oce < 0.0) throw Error("report: OCE must be nonnegative");
    if (r.coverage_overlap > std::min(r.coverage_front, r.coverage_back) + 1e-12)
        throw Error("report: overlap coverage exceeds a per-view coverage");
}

// Computes the report for a view pair. Coverage fractions are relative to
// the atlas footprint. An empty overlap is reported as a missing OCE when
// `allow_empty_overlap` is set (the pipeline's behaviour) and is an error
// otherwise (the standalone metrics command).
inline MetricsReport compute_report(const PartialTexture& front, const PartialTexture& back,
                                    const std::vector<std::uint8_t>& footprint,
                                    TextureAttribute attr = TextureAttribute::Luma,
                                    bool allow_empty_overlap = true) {
    if (front.resolution != back.resolution)
        throw ValidationError("metrics: resolution mismatch");
    if (footprint.size() != front.texel_count())
        throw ValidationError("metrics: footprint size mismatch");
    MetricsReport report;
    for (std::uint8_t f : footprint) report.atlas_texels += f ? 1 : 0;
    report.valid_front = static_cast<std::int64_t>(front.valid_count());
    report.valid_back = static_cast<std::int64_t>(back.valid_count());
    const auto overlap = overlap_mask(front, back);
    for (std::uint8_t o : overlap) report.overlap_texels += o ? 1 : 0;
    const double denom = report.atlas_texels > 0 ? static_cast<double>(report.atlas_texels) : 1.0;
    report.coverage_front = report.valid_front / denom;
    report.coverage_back = report.valid_back / denom;
    report.coverage_overlap = report.overlap_texels / denom;
    report.mpae = mpae_combined(front, back);
    if (report.overlap_texels > 0) {
        report.oce = oce(front, back, attr);
    } else if (!allow_empty_overlap) {
        throw Error("oce: no overlap");
    }
    check_report_invariants(report);
    return report;
}

inline nlohmann::json report_to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["mpae"] = r.mpae;
    j["mpae_degrees"] = r.mpae * 180.0 / std::acos(-1.0);
    if (r.oce) j["oce"] = *r.oce; else j["oce"] = nullptr;
    j["coverage_front"] = r.coverage_front;
    j["coverage_back"] = r.coverage_back;
    j["coverage_overlap"] = r.coverage_overlap;
    if (r.mpjpe) j["mpjpe"] = *r.mpjpe;
    if (r.pa_mpjpe) j["pa_mpjpe"] = *r.pa_mpjpe;
    j["counts"] = {{"atlas_texels", r.atlas_texels},
                   {"valid_front", r.valid_front},
                   {"valid_back", r.valid_back},
                   {"overlap_texels", r.overlap_texels}};
    return j;
}

// Aligned plain-text table with one labelled row and the MPAE / OCE columns.
inline std::string report_to_table(const MetricsReport& r, const std::string& label,
                                   bool degrees = false) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    const double mpae_value = degrees ? r.mpae * 180.0 / std::acos(-1.0) : r.mpae;
    os << "Model            MPAE" << (degrees ? " (deg)" : " (rad)") << "   OCE\n";
    os << std::left << std::setw(16) << label << " " << std::setw(11) << mpae_value << " ";
    if (r.oce) os << *r.oce; else os << "n/a";
    os << "\n";
    if (r.mpjpe && r.pa_mpjpe) {
        os.precision(6);
        os << "MPJPE " << *r.mpjpe << "  PA-MPJPE " << *r.pa_mpjpe << "\n";
        os.precision(4);
    }
    os << "coverage  front " << r.coverage_front << "  back " << r.coverage_back << "  overlap "
       << r.coverage_overlap << "  (atlas " << r.atlas_texels << " texels)\n";
    return os.str();
}

}  // namespace uvbake
