#include "clasp/feature_io.hpp"

#include "clasp/error.hpp"
#include "file_util.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace clasp {

namespace {

void put_u32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v & 0xFFu);
    p[1] = static_cast<std::uint8_t>((v >> 8) & 0xFFu);
    p[2] = static_cast<std::uint8_t>((v >> 16) & 0xFFu);
    p[3] = static_cast<std::uint8_t>((v >> 24) & 0xFFu);
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

FeatureHeader parse_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < sizeof(kFeatureMagic) ||
        std::memcmp(bytes.data(), kFeatureMagic, sizeof(kFeatureMagic)) != 0) {
        fail(ErrorCode::BadMagic, "not a CLSPF feature file");
    }
    if (bytes.size() < kFeatureHeaderBytes) {
        fail(ErrorCode::CorruptHeader, "header shorter than 36 bytes");
    }
    const std::uint8_t* p = bytes.data() + 8;
    FeatureHeader h;
    h.version = get_u32(p);
    if (h.version != kFeatureVersion) {
        fail(ErrorCode::VersionMismatch,
             "unsupported CLSPF version " + std::to_string(h.version));
    }
    h.orig_h = get_u32(p + 4);
    h.orig_w = get_u32(p + 8);
    h.rows = get_u32(p + 12);
    h.cols = get_u32(p + 16);
    h.dim = get_u32(p + 20);
    if (get_u32(p + 24) != 0) {
        fail(ErrorCode::CorruptHeader, "reserved header bytes are not zero");
    }
    constexpr std::uint32_t kMaxSide = 1u << 20;
    if (h.orig_h > kMaxSide || h.orig_w > kMaxSide || h.dim == 0 || h.dim > (1u << 16)) {
        fail(ErrorCode::CorruptHeader, "header values out of range");
    }
    if (h.orig_h < kPatchSize || h.orig_w < kPatchSize) {
        fail(ErrorCode::CorruptHeader, "original dimensions smaller than one patch");
    }
    const auto geometry = compute_geometry(static_cast<int>(h.orig_h), static_cast<int>(h.orig_w));
    if (static_cast<int>(h.rows) != geometry.rows() || static_cast<int>(h.cols) != geometry.cols()) {
        fail(ErrorCode::CorruptHeader, "patch grid " + std::to_string(h.rows) + "x" +
                                           std::to_string(h.cols) +
                                           " does not match the image geometry");
    }
    return h;
}

}  // namespace

ImageGeometry compute_geometry(int orig_h, int orig_w) {
    if (orig_h < kPatchSize || orig_w < kPatchSize) {
        fail(ErrorCode::DimensionTooSmall, "image " + std::to_string(orig_h) + "x" +
                                               std::to_string(orig_w) +
                                               " is smaller than one 14x14 patch");
    }
    ImageGeometry g;
    g.orig_h = orig_h;
    g.orig_w = orig_w;
    g.resized_h = orig_h / kPatchSize * kPatchSize;
    g.resized_w = orig_w / kPatchSize * kPatchSize;
    g.patch = kPatchSize;
    return g;
}

PatchFeatureGrid::PatchFeatureGrid(ImageGeometry geometry, int dim, std::vector<float> data)
    : geometry_(geometry), dim_(dim), data_(std::move(data)) {
    if (geometry_.patch != kPatchSize || geometry_ != compute_geometry(geometry_.orig_h, geometry_.orig_w)) {
        fail(ErrorCode::InvalidArgument, "inconsistent image geometry");
    }
    if (dim_ <= 0) {
        fail(ErrorCode::InvalidArgument, "feature dimension must be positive");
    }
    const std::size_t n = patch_count();
    if (n < 4) {
        fail(ErrorCode::TooFewPatches,
             "need at least 4 patches, grid has " + std::to_string(n));
    }
    if (data_.size() != n * static_cast<std::size_t>(dim_)) {
        fail(ErrorCode::InvalidArgument, "feature buffer holds " + std::to_string(data_.size()) +
                                             " values, expected " +
                                             std::to_string(n * static_cast<std::size_t>(dim_)));
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (float v : feature(i)) {
            if (!std::isfinite(v)) {
                fail(ErrorCode::NonFiniteFeature,
                     "patch " + std::to_string(i) + " has a non-finite component");
            }
            sq += static_cast<double>(v) * static_cast<double>(v);
        }
        if (!(sq > 0.0)) {
            fail(ErrorCode::ZeroNormFeature, "patch " + std::to_string(i) + " has zero norm");
        }
    }
}

std::vector<std::uint8_t> encode_features(const PatchFeatureGrid& grid) {
    const auto& g = grid.geometry();
    std::vector<std::uint8_t> out(kFeatureHeaderBytes + grid.data().size() * 4);
    std::memcpy(out.data(), kFeatureMagic, sizeof(kFeatureMagic));
    std::uint8_t* p = out.data() + sizeof(kFeatureMagic);
    for (std::uint32_t v : {kFeatureVersion, static_cast<std::uint32_t>(g.orig_h),
                            static_cast<std::uint32_t>(g.orig_w), static_cast<std::uint32_t>(grid.rows()),
                            static_cast<std::uint32_t>(grid.cols()), static_cast<std::uint32_t>(grid.dim()),
                            std::uint32_t{0}}) {
        put_u32(p, v);
        p += 4;
    }
    for (float v : grid.data()) {
        put_u32(p, std::bit_cast<std::uint32_t>(v));
        p += 4;
    }
    return out;
}

PatchFeatureGrid decode_features(std::span<const std::uint8_t> bytes) {
    const FeatureHeader h = parse_header(bytes);
    const std::uint64_t count = static_cast<std::uint64_t>(h.rows) * h.cols * h.dim;
    const std::uint64_t payload = bytes.size() - kFeatureHeaderBytes;
    if (payload != count * 4) {
        fail(ErrorCode::TruncatedPayload, "payload is " + std::to_string(payload) +
                                              " bytes, expected " + std::to_string(count * 4));
    }
    std::vector<float> data(static_cast<std::size_t>(count));
    const std::uint8_t* p = bytes.data() + kFeatureHeaderBytes;
    for (std::size_t i = 0; i < data.size(); ++i, p += 4) {
        data[i] = std::bit_cast<float>(get_u32(p));
    }
    return PatchFeatureGrid(compute_geometry(static_cast<int>(h.orig_h), static_cast<int>(h.orig_w)),
                            static_cast<int>(h.dim), std::move(data));
}

FeatureHeader read_feature_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    std::uint8_t buf[kFeatureHeaderBytes] = {};
    in.read(reinterpret_cast<char*>(buf), sizeof(buf));
    return parse_header(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(in.gcount())));
}

PatchFeatureGrid read_features(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    return decode_features(bytes);
}

void write_features(const PatchFeatureGrid& grid, const std::filesystem::path& path) {
    const auto bytes = encode_features(grid);
    detail::write_file_atomic(path, bytes);
}

}  // namespace clasp
