#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace clasp {

/// h x w grid of region labels, row-major.
struct LabelMask {
    int h = 0;
    int w = 0;
    std::vector<int> labels;

    LabelMask() = default;
    LabelMask(int height, int width, int fill = 0)
        : h(height), w(width), labels(static_cast<std::size_t>(height) * width, fill) {}
    LabelMask(int height, int width, std::vector<int> values)
        : h(height), w(width), labels(std::move(values)) {}

    int at(int y, int x) const { return labels[static_cast<std::size_t>(y) * w + x]; }
    int& at(int y, int x) { return labels[static_cast<std::size_t>(y) * w + x]; }
    std::size_t pixel_count() const noexcept { return labels.size(); }

    /// One past the largest label (0 for an empty mask).
    int label_bound() const noexcept;

    bool operator==(const LabelMask&) const = default;
};

/// 8-bit RGB, row-major, channels interleaved.
struct RgbImage {
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> rgb;

    RgbImage() = default;
    RgbImage(int height, int width)
        : h(height), w(width), rgb(static_cast<std::size_t>(height) * width * 3, 0) {}

    const std::uint8_t* pixel(int y, int x) const {
        return rgb.data() + (static_cast<std::size_t>(y) * w + x) * 3;
    }
    std::uint8_t* pixel(int y, int x) { return rgb.data() + (static_cast<std::size_t>(y) * w + x) * 3; }

    bool operator==(const RgbImage&) const = default;
};

/// Nearest-neighbour resize with pixel-centre alignment:
/// src = floor((dst + 0.5) * src_size / dst_size).
LabelMask resize_nearest(const LabelMask& mask, int out_h, int out_w);

/// Box-filter downsample; each output pixel averages the source block it
/// covers, rounded to the nearest integer.
RgbImage downsample_area(const RgbImage& image, int out_h, int out_w);

}  // namespace clasp
