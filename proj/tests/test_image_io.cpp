#include "clasp/image_io.hpp"

#include "test_util.hpp"

#include <doctest.h>
#include <png.h>

#include <fstream>
#include <random>
#include <set>

using namespace clasp;

TEST_CASE("palette: label 0 is black, entries follow the bit-interleaved scheme") {
    const auto& p = mask_palette();
    CHECK(p[0] == PaletteEntry{0, 0, 0});
    CHECK(p[1] == PaletteEntry{128, 0, 0});
    CHECK(p[2] == PaletteEntry{0, 128, 0});
    CHECK(p[3] == PaletteEntry{128, 128, 0});
    CHECK(p[4] == PaletteEntry{0, 0, 128});
    CHECK(p[8] == PaletteEntry{64, 0, 0});
    CHECK(p[15] == PaletteEntry{192, 128, 128});
    CHECK(p[255] == PaletteEntry{224, 224, 192});
    std::set<PaletteEntry> distinct(p.begin(), p.end());
    CHECK(distinct.size() == 256);
}

TEST_CASE("label PNG round trip") {
    testutil::TempDir dir("png");
    const LabelMask small(2, 2, std::vector<int>{0, 0, 1, 1});
    write_label_png(small, dir / "s.png");
    CHECK(read_label_png(dir / "s.png") == small);

    std::mt19937 rng(4);
    LabelMask big(37, 53);
    for (auto& v : big.labels) {
        v = static_cast<int>(rng() % 256);
    }
    write_label_png(big, dir / "b.png");
    CHECK(read_label_png(dir / "b.png") == big);
    CHECK(encode_label_png(big) == encode_label_png(big));
}

TEST_CASE("label PNG errors") {
    testutil::TempDir dir("png-err");
    LabelMask m(1, 2, std::vector<int>{0, 256});
    CHECK_CLASP_ERROR(encode_label_png(m), ErrorCode::TooManyLabels);
    CHECK_CLASP_ERROR(write_label_png(m, dir / "x.png"), ErrorCode::TooManyLabels);
    CHECK_FALSE(std::filesystem::exists(dir / "x.png"));
    m.labels[1] = -1;
    CHECK_CLASP_ERROR(encode_label_png(m), ErrorCode::TooManyLabels);

    CHECK_CLASP_ERROR(read_label_png(dir / "missing.png"), ErrorCode::IoFailure);
    {
        std::ofstream(dir / "junk.png") << "definitely not a png";
    }
    CHECK_CLASP_ERROR(read_label_png(dir / "junk.png"), ErrorCode::DecodeFailure);
    CHECK_CLASP_ERROR(read_rgb_png(dir / "junk.png"), ErrorCode::DecodeFailure);
    CHECK_CLASP_ERROR(read_rgb_png(dir / "missing.png"), ErrorCode::IoFailure);

    RgbImage img(2, 2);
    write_rgb_png(img, dir / "rgb.png");
    CHECK_CLASP_ERROR(read_label_png(dir / "rgb.png"), ErrorCode::DecodeFailure);
}

TEST_CASE("greyscale label images, 8 and 16 bit") {
    testutil::TempDir dir("png-grey");
    std::vector<std::uint8_t> g8 = {0, 5, 255, 7, 8, 9};
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = 3;
    img.height = 2;
    img.format = PNG_FORMAT_GRAY;
    REQUIRE(png_image_write_to_file(&img, (dir / "g8.png").c_str(), 0, g8.data(), 0, nullptr));
    CHECK(read_label_png(dir / "g8.png").labels == std::vector<int>{0, 5, 255, 7, 8, 9});

    std::vector<std::uint16_t> g16 = {0, 300, 65535, 1, 2, 1000};
    png_image img16{};
    img16.version = PNG_IMAGE_VERSION;
    img16.width = 3;
    img16.height = 2;
    img16.format = PNG_FORMAT_LINEAR_Y;
    REQUIRE(png_image_write_to_file(&img16, (dir / "g16.png").c_str(), 0, g16.data(), 0, nullptr));
    CHECK(read_label_png(dir / "g16.png").labels == std::vector<int>{0, 300, 65535, 1, 2, 1000});
}

TEST_CASE("RGB PNG round trip, including a palettized source") {
    testutil::TempDir dir("png-rgb");
    RgbImage img(5, 6);
    std::mt19937 rng(8);
    for (auto& v : img.rgb) {
        v = static_cast<std::uint8_t>(rng());
    }
    write_rgb_png(img, dir / "c.png");
    CHECK(read_rgb_png(dir / "c.png") == img);

    const LabelMask m(1, 3, std::vector<int>{0, 1, 2});
    write_label_png(m, dir / "p.png");
    const auto rgb = read_rgb_png(dir / "p.png");
    REQUIRE(rgb.w == 3);
    for (int x = 0; x < 3; ++x) {
        const auto& e = mask_palette()[static_cast<std::size_t>(x)];
        CHECK(rgb.pixel(0, x)[0] == e[0]);
        CHECK(rgb.pixel(0, x)[1] == e[1]);
        CHECK(rgb.pixel(0, x)[2] == e[2]);
    }
}
