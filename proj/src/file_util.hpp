#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace clasp::detail {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Temp file in the destination directory, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

std::filesystem::path temp_sibling(const std::filesystem::path& path);

}  // namespace clasp::detail
