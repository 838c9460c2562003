#include "clasp/pipeline.hpp"

#include "clasp/error.hpp"
#include "clasp/image_io.hpp"
#include "file_util.hpp"

#include <nlohmann/json.hpp>

#include <chrono>

namespace clasp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) {
        fail(ErrorCode::BadBeta, "beta must lie in (0, 1), got " + std::to_string(beta));
    }
    if (fixed_k && *fixed_k < 2) {
        fail(ErrorCode::BadK, "fixed k must be at least 2");
    }
    if (crf) {
        crf_config.validate();
    }
}

std::string variant_name(const PipelineConfig& cfg) {
    return cfg.crf ? "pixel" : "patch";
}

SegmentationResult segment(const PatchFeatureGrid& features, const RgbImage* image,
                           const PipelineConfig& cfg) {
    cfg.validate();
    const auto& geometry = features.geometry();
    if (cfg.crf) {
        if (image == nullptr) {
            fail(ErrorCode::MissingImageForCrf,
                 "CRF refinement needs the source image; pass one or use the patch variant");
        }
        if (image->h != geometry.orig_h || image->w != geometry.orig_w) {
            fail(ErrorCode::DimensionMismatch,
                 "image is " + std::to_string(image->h) + "x" + std::to_string(image->w) +
                     " but the features describe " + std::to_string(geometry.orig_h) + "x" +
                     std::to_string(geometry.orig_w));
        }
    }

    SegmentationResult result;
    auto t = Clock::now();
    const auto affinity = compute_affinity(features);
    result.timings.affinity_ms = elapsed_ms(t);

    t = Clock::now();
    const auto eig = eigendecompose(affinity);
    result.timings.eigen_ms = elapsed_ms(t);

    t = Clock::now();
    result.eigenvalues = eig.eigenvalues;
    result.spectrum = eigengap_elbow(eig.eigenvalues);
    SelectionOptions sel;
    sel.beta = cfg.beta;
    sel.seed = cfg.seed;
    sel.fixed_k = cfg.fixed_k;
    sel.normalize_rows = cfg.normalize_rows;
    sel.kmeans = cfg.kmeans;
    result.search = select_clusters(eig, result.spectrum, sel);
    result.k = result.search.best_k;
    result.silhouette = result.search.best_score;
    result.timings.search_ms = elapsed_ms(t);

    t = Clock::now();
    result.patch_mask = LabelMask(features.rows(), features.cols(), result.search.best_labels);
    result.mask = upsample_labels(result.patch_mask, geometry);
    result.timings.upsample_ms = elapsed_ms(t);

    if (cfg.crf) {
        t = Clock::now();
        result.mask = refine_labels(result.mask, *image, result.k, cfg.crf_config);
        result.timings.crf_ms = elapsed_ms(t);
    }
    return result;
}

std::string sidecar_json(const SegmentationResult& result, const PipelineConfig& cfg) {
    nlohmann::json j;
    j["k"] = result.k;
    j["silhouette"] = result.silhouette;
    j["beta"] = cfg.beta;
    j["seed"] = cfg.seed;
    j["variant"] = variant_name(cfg);
    j["k_opt"] = result.spectrum.k_opt;
    j["fixed_k"] = cfg.fixed_k ? nlohmann::json(*cfg.fixed_k) : nlohmann::json(nullptr);
    return j.dump(2) + "\n";
}

std::filesystem::path sidecar_path(const std::filesystem::path& mask_path) {
    auto p = mask_path;
    p.replace_extension(".json");
    return p;
}

void render_mask(const SegmentationResult& result, const PipelineConfig& cfg,
                 const std::filesystem::path& path) {
    if (result.k > 256) {
        fail(ErrorCode::TooManyLabels, std::to_string(result.k) + " labels exceed the 256-entry palette");
    }
    const auto png = encode_label_png(result.mask);
    const auto sidecar = sidecar_json(result, cfg);
    detail::write_file_atomic(path, png);
    detail::write_file_atomic(sidecar_path(path), sidecar);
}

}  // namespace clasp
