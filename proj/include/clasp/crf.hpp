#pragma once

#include "clasp/feature_io.hpp"
#include "clasp/image.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace clasp {

/// Dense CRF parameters. Defaults are the reference refinement settings;
/// spatial deviations are in pixels of the image the CRF runs on.
struct CrfConfig {
    int iterations = 20;
    double gt_prob = 0.8;
    double gauss_sxy = 4.0;
    double gauss_compat = 4.0;
    double bilat_sxy = 80.0;
    double bilat_srgb = 13.0;
    double bilat_compat = 10.0;
    std::size_t max_pixels = 65536;

    /// Throws InvalidArgument on any out-of-range field.
    void validate() const;
};

/// Per-pixel, per-label values, pixel-major (k values per pixel). Holds
/// either unary potentials or mean-field marginals.
struct LabelField {
    int h = 0;
    int w = 0;
    int k = 0;
    std::vector<double> values;

    LabelField() = default;
    LabelField(int height, int width, int labels)
        : h(height), w(width), k(labels),
          values(static_cast<std::size_t>(height) * width * labels, 0.0) {}

    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(h) * w; }
    double at(std::size_t pixel, int label) const { return values[pixel * k + label]; }
    double& at(std::size_t pixel, int label) { return values[pixel * k + label]; }
};

using UnaryPotentials = LabelField;
using MarginalField = LabelField;

/// Hard-label unaries with no "unsure" label: -ln(gt_prob) on the given label
/// and -ln((1 - gt_prob)/(k - 1)) elsewhere.
UnaryPotentials unary_from_labels(const LabelMask& mask, int k, double gt_prob);

/// Called after every mean-field update with the 1-based iteration number.
using MeanFieldObserver = std::function<void(int, const MarginalField&)>;

/// Fully connected mean-field inference with a Gaussian spatial kernel and a
/// bilateral kernel, both with Potts compatibility, self-message excluded.
/// Returns per-pixel argmax labels (smallest label on ties).
LabelMask mean_field_refine(const UnaryPotentials& unary, const RgbImage& image, const CrfConfig& cfg,
                            const MeanFieldObserver& observer = {});

/// Runs the refinement under cfg.max_pixels: larger inputs are downsampled
/// (nearest for labels, box average for colours, spatial deviations scaled by
/// the same factor), refined, and the result is nearest-upsampled back.
LabelMask refine_labels(const LabelMask& mask, const RgbImage& image, int k, const CrfConfig& cfg);

/// Replicates each patch label over its 14x14 block of the resized image, then
/// nearest-resizes to the original image size.
LabelMask upsample_labels(const LabelMask& patch_mask, const ImageGeometry& geometry);

}  // namespace clasp
