#include "clasp/image_io.hpp"

#include "clasp/error.hpp"
#include "file_util.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

namespace clasp {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void append_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void no_flush(png_structp) {}

// libpng prints to stderr by default; keep the message for the exception.
void capture_error(png_structp png, png_const_charp msg) {
    if (auto* text = static_cast<std::string*>(png_get_error_ptr(png))) {
        *text = msg;
    }
    png_longjmp(png, 1);
}

void ignore_warning(png_structp, png_const_charp) {}

// Rows must outlive the setjmp frame, so the caller owns them.
bool encode_png(std::vector<std::uint8_t>& out, int h, int w, int color_type,
                const std::vector<png_bytep>& rows, const png_color* palette, int palette_size) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, capture_error, ignore_warning);
    if (png == nullptr) {
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &out, append_to_vector, no_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (palette != nullptr) {
        png_set_PLTE(png, info, palette, palette_size);
    }
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

struct DecodedPng {
    png_uint_32 w = 0;
    png_uint_32 h = 0;
    int bit_depth = 0;
    int color_type = 0;
    std::vector<std::uint8_t> pixels;  // tightly packed rows
    std::size_t row_bytes = 0;
};

bool decode_raw_png(std::FILE* fp, DecodedPng& out, std::string& error) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, capture_error, ignore_warning);
    if (png == nullptr) {
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_read_png(png, info, PNG_TRANSFORM_PACKING, nullptr);
    out.w = png_get_image_width(png, info);
    out.h = png_get_image_height(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    out.color_type = png_get_color_type(png, info);
    out.row_bytes = png_get_rowbytes(png, info);
    png_bytepp rows = png_get_rows(png, info);
    out.pixels.resize(out.row_bytes * out.h);
    for (png_uint_32 y = 0; y < out.h; ++y) {
        std::memcpy(out.pixels.data() + y * out.row_bytes, rows[y], out.row_bytes);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

FilePtr open_for_read(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) {
        fail(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    return fp;
}

}  // namespace

const std::array<PaletteEntry, 256>& mask_palette() {
    static const auto palette = [] {
        std::array<PaletteEntry, 256> p{};
        for (int i = 0; i < 256; ++i) {
            int c = i;
            int rgb[3] = {0, 0, 0};
            for (int j = 0; j < 8; ++j) {
                for (int ch = 0; ch < 3; ++ch) {
                    rgb[ch] |= ((c >> ch) & 1) << (7 - j);
                }
                c >>= 3;
            }
            p[static_cast<std::size_t>(i)] = {static_cast<std::uint8_t>(rgb[0]),
                                              static_cast<std::uint8_t>(rgb[1]),
                                              static_cast<std::uint8_t>(rgb[2])};
        }
        return p;
    }();
    return palette;
}

std::vector<std::uint8_t> encode_label_png(const LabelMask& mask) {
    if (mask.h <= 0 || mask.w <= 0 || mask.labels.size() != static_cast<std::size_t>(mask.h) * mask.w) {
        fail(ErrorCode::InvalidArgument, "mask has invalid dimensions");
    }
    std::vector<std::uint8_t> indices(mask.labels.size());
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        const int l = mask.labels[i];
        if (l < 0 || l > 255) {
            fail(ErrorCode::TooManyLabels,
                 "label " + std::to_string(l) + " does not fit an 8-bit palette");
        }
        indices[i] = static_cast<std::uint8_t>(l);
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(mask.h));
    for (int y = 0; y < mask.h; ++y) {
        rows[static_cast<std::size_t>(y)] = indices.data() + static_cast<std::size_t>(y) * mask.w;
    }
    png_color palette[256];
    const auto& p = mask_palette();
    for (int i = 0; i < 256; ++i) {
        palette[i] = {p[static_cast<std::size_t>(i)][0], p[static_cast<std::size_t>(i)][1],
                      p[static_cast<std::size_t>(i)][2]};
    }
    std::vector<std::uint8_t> out;
    if (!encode_png(out, mask.h, mask.w, PNG_COLOR_TYPE_PALETTE, rows, palette, 256)) {
        fail(ErrorCode::Internal, "PNG encoder failed");
    }
    return out;
}

void write_label_png(const LabelMask& mask, const std::filesystem::path& path) {
    detail::write_file_atomic(path, encode_label_png(mask));
}

LabelMask read_label_png(const std::filesystem::path& path) {
    auto fp = open_for_read(path);
    DecodedPng png;
    std::string error;
    if (!decode_raw_png(fp.get(), png, error)) {
        fail(ErrorCode::DecodeFailure, "cannot decode PNG " + path.string() + ": " + error);
    }
    const int h = static_cast<int>(png.h);
    const int w = static_cast<int>(png.w);
    LabelMask mask(h, w);
    if (png.color_type == PNG_COLOR_TYPE_PALETTE ||
        (png.color_type == PNG_COLOR_TYPE_GRAY && png.bit_depth <= 8)) {
        for (int y = 0; y < h; ++y) {
            const std::uint8_t* row = png.pixels.data() + static_cast<std::size_t>(y) * png.row_bytes;
            for (int x = 0; x < w; ++x) {
                mask.at(y, x) = row[x];
            }
        }
    } else if (png.color_type == PNG_COLOR_TYPE_GRAY && png.bit_depth == 16) {
        for (int y = 0; y < h; ++y) {
            const std::uint8_t* row = png.pixels.data() + static_cast<std::size_t>(y) * png.row_bytes;
            for (int x = 0; x < w; ++x) {
                mask.at(y, x) = (row[2 * x] << 8) | row[2 * x + 1];
            }
        }
    } else {
        fail(ErrorCode::DecodeFailure,
             path.string() + " is not a palettized or greyscale label image");
    }
    return mask;
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        const std::string msg = image.message;
        if (!std::filesystem::exists(path)) {
            fail(ErrorCode::IoFailure, "cannot open " + path.string());
        }
        fail(ErrorCode::DecodeFailure, "cannot decode PNG " + path.string() + ": " + msg);
    }
    image.format = PNG_FORMAT_RGB;
    RgbImage out(static_cast<int>(image.height), static_cast<int>(image.width));
    if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        fail(ErrorCode::DecodeFailure, "cannot decode PNG " + path.string() + ": " + msg);
    }
    return out;
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
    if (image.h <= 0 || image.w <= 0 || image.rgb.size() != static_cast<std::size_t>(image.h) * image.w * 3) {
        fail(ErrorCode::InvalidArgument, "image has invalid dimensions");
    }
    std::vector<std::uint8_t> copy = image.rgb;
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.h));
    for (int y = 0; y < image.h; ++y) {
        rows[static_cast<std::size_t>(y)] = copy.data() + static_cast<std::size_t>(y) * image.w * 3;
    }
    std::vector<std::uint8_t> out;
    if (!encode_png(out, image.h, image.w, PNG_COLOR_TYPE_RGB, rows, nullptr, 0)) {
        fail(ErrorCode::Internal, "PNG encoder failed");
    }
    detail::write_file_atomic(path, out);
}

}  // namespace clasp
