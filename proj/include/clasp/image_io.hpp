#pragma once

#include "clasp/image.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace clasp {

using PaletteEntry = std::array<std::uint8_t, 3>;

/// Fixed 256-entry mask palette: the bit-interleaved scheme where bit b of
/// the label contributes to bit (7 - b/3) of channel b % 3. Label 0 is black.
const std::array<PaletteEntry, 256>& mask_palette();

/// 8-bit palettized PNG, pixel value = label. Throws TooManyLabels for labels
/// outside [0, 255].
std::vector<std::uint8_t> encode_label_png(const LabelMask& mask);
void write_label_png(const LabelMask& mask, const std::filesystem::path& path);

/// Accepts palettized PNGs (raw indices) and 8- or 16-bit greyscale PNGs.
LabelMask read_label_png(const std::filesystem::path& path);

/// Any PNG, converted to 8-bit RGB.
RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace clasp
