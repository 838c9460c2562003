#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace clasp {

inline constexpr int kPatchSize = 14;

/// Original and patch-aligned image dimensions. The resized sides are the
/// original sides rounded down to a multiple of the patch size.
struct ImageGeometry {
    int orig_h = 0;
    int orig_w = 0;
    int resized_h = 0;
    int resized_w = 0;
    int patch = kPatchSize;

    int rows() const noexcept { return resized_h / patch; }
    int cols() const noexcept { return resized_w / patch; }

    bool operator==(const ImageGeometry&) const = default;
};

/// Throws DimensionTooSmall if either side is below one patch.
ImageGeometry compute_geometry(int orig_h, int orig_w);

/// Immutable rows x cols grid of raw (unnormalized) patch embeddings,
/// patch-row-major with the feature dimension innermost.
class PatchFeatureGrid {
public:
    /// Validates every invariant: geometry consistency, at least four patches,
    /// finite values and strictly positive norm for every feature vector.
    PatchFeatureGrid(ImageGeometry geometry, int dim, std::vector<float> data);

    const ImageGeometry& geometry() const noexcept { return geometry_; }
    int rows() const noexcept { return geometry_.rows(); }
    int cols() const noexcept { return geometry_.cols(); }
    int dim() const noexcept { return dim_; }
    std::size_t patch_count() const noexcept {
        return static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols());
    }

    std::span<const float> feature(std::size_t patch_index) const noexcept {
        return {data_.data() + patch_index * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }
    std::span<const float> data() const noexcept { return data_; }

    bool operator==(const PatchFeatureGrid&) const = default;

private:
    ImageGeometry geometry_;
    int dim_;
    std::vector<float> data_;
};

// CLSPF v1 container.
inline constexpr char kFeatureMagic[8] = {'C', 'L', 'S', 'P', 'F', '\0', '\0', '\0'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 36;

struct FeatureHeader {
    std::uint32_t version = kFeatureVersion;
    std::uint32_t orig_h = 0;
    std::uint32_t orig_w = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t dim = 0;
};

std::vector<std::uint8_t> encode_features(const PatchFeatureGrid& grid);
PatchFeatureGrid decode_features(std::span<const std::uint8_t> bytes);

/// Parses and validates only the header (no payload checks).
FeatureHeader read_feature_header(const std::filesystem::path& path);

PatchFeatureGrid read_features(const std::filesystem::path& path);

/// Writes via a temporary file and rename, so a failed write leaves no file.
void write_features(const PatchFeatureGrid& grid, const std::filesystem::path& path);

}  // namespace clasp
