#pragma once

#include "clasp/cluster.hpp"
#include "clasp/crf.hpp"
#include "clasp/feature_io.hpp"
#include "clasp/image.hpp"
#include "clasp/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace clasp {

struct PipelineConfig {
    double beta = 0.5;
    std::uint64_t seed = 0;
    bool crf = true;                ///< true: pixel variant, false: patch variant
    std::optional<int> fixed_k;     ///< bypasses the eigengap and bandwidth search
    bool normalize_rows = false;
    KMeansOptions kmeans;
    CrfConfig crf_config;

    void validate() const;
};

struct StageTimings {
    double affinity_ms = 0.0;
    double eigen_ms = 0.0;
    double search_ms = 0.0;
    double upsample_ms = 0.0;
    double crf_ms = 0.0;
};

struct SegmentationResult {
    LabelMask mask;        ///< original image resolution
    LabelMask patch_mask;  ///< rows x cols
    int k = 0;
    double silhouette = 0.0;
    Eigen::VectorXd eigenvalues;
    EigengapAnalysis spectrum;
    ClusterSelection search;
    StageTimings timings;
};

/// Affinity, eigendecomposition, elbow, bandwidth search (or the fixed-k
/// bypass), patch-to-pixel upsampling and, for the pixel variant, dense CRF
/// refinement against `image` (which must match the original geometry).
SegmentationResult segment(const PatchFeatureGrid& features, const RgbImage* image,
                           const PipelineConfig& cfg);

std::string variant_name(const PipelineConfig& cfg);

/// Sidecar document: k, silhouette, beta, seed, variant (and k_opt).
std::string sidecar_json(const SegmentationResult& result, const PipelineConfig& cfg);

/// `path` with its extension replaced by ".json".
std::filesystem::path sidecar_path(const std::filesystem::path& mask_path);

/// Palettized mask PNG plus its JSON sidecar. Throws TooManyLabels if k > 256.
void render_mask(const SegmentationResult& result, const PipelineConfig& cfg,
                 const std::filesystem::path& path);

}  // namespace clasp
