#include "clasp/image_io.hpp"
#include "clasp/pipeline.hpp"
#include "clasp/synth.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <iterator>

using namespace clasp;

namespace {

std::vector<int> patch_labels_at_pixels(const LabelMask& patch, const ImageGeometry& g) {
    return upsample_labels(patch, g).labels;
}

// Colour image whose regions follow the planted layout.
RgbImage planted_image(const PlantedInstance& inst) {
    const auto& g = inst.grid.geometry();
    const auto pix = upsample_labels(inst.labels, g);
    RgbImage img(g.orig_h, g.orig_w);
    for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < img.w; ++x) {
            const auto& c = mask_palette()[static_cast<std::size_t>(pix.at(y, x) + 1)];
            std::copy(c.begin(), c.end(), img.pixel(y, x));
        }
    }
    return img;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("patch variant recovers a two-region instance") {
    const auto inst = generate_planted({.rows = 8, .cols = 8, .k_true = 2, .seed = 3});
    PipelineConfig cfg;
    cfg.crf = false;
    const auto r = segment(inst.grid, nullptr, cfg);
    CHECK(r.k == 2);
    CHECK(oracle::adjusted_rand_index(r.patch_mask.labels, inst.labels.labels) >= 0.99);
    CHECK(r.mask == upsample_labels(r.patch_mask, inst.grid.geometry()));
    CHECK(r.mask.h == 112);
    CHECK(r.mask.w == 112);
    for (int l : r.mask.labels) {
        CHECK(l >= 0);
        CHECK(l < r.k);
    }

    PipelineConfig fixed = cfg;
    fixed.fixed_k = 2;
    const auto f = segment(inst.grid, nullptr, fixed);
    CHECK(f.mask == r.mask);
    CHECK(f.search.candidates.size() == 1);
}

TEST_CASE("segmentation is deterministic") {
    const auto inst = generate_planted({.rows = 10, .cols = 9, .k_true = 3, .seed = 12});
    PipelineConfig cfg;
    cfg.crf = false;
    cfg.seed = 77;
    const auto a = segment(inst.grid, nullptr, cfg);
    const auto b = segment(inst.grid, nullptr, cfg);
    CHECK(a.mask == b.mask);
    CHECK(a.silhouette == b.silhouette);
    CHECK(encode_label_png(a.mask) == encode_label_png(b.mask));
}

TEST_CASE("pixel variant: zero-weight CRF equals the upsampled patch mask") {
    const auto inst = generate_planted({.rows = 4, .cols = 5, .k_true = 2, .seed = 1});
    const auto img = planted_image(inst);
    PipelineConfig cfg;
    cfg.crf_config.gauss_compat = 0.0;
    cfg.crf_config.bilat_compat = 0.0;
    const auto r = segment(inst.grid, &img, cfg);
    CHECK(r.mask == upsample_labels(r.patch_mask, inst.grid.geometry()));
}

TEST_CASE("pixel variant keeps clean region boundaries") {
    const auto inst = generate_planted({.rows = 4, .cols = 4, .k_true = 2, .seed = 5});
    const auto img = planted_image(inst);
    PipelineConfig cfg;
    cfg.crf_config.max_pixels = 1024;  // 56x56 -> 32x32
    const auto r = segment(inst.grid, &img, cfg);
    REQUIRE(r.k == 2);
    const auto truth = patch_labels_at_pixels(inst.labels, inst.grid.geometry());
    CHECK(oracle::adjusted_rand_index(r.mask.labels, truth) >= 0.95);
}

TEST_CASE("input validation") {
    const auto inst = generate_planted({.rows = 4, .cols = 4, .k_true = 2, .seed = 1});
    PipelineConfig cfg;
    CHECK_CLASP_ERROR(segment(inst.grid, nullptr, cfg), ErrorCode::MissingImageForCrf);
    RgbImage wrong(10, 10);
    CHECK_CLASP_ERROR(segment(inst.grid, &wrong, cfg), ErrorCode::DimensionMismatch);
    cfg.crf = false;
    cfg.beta = 1.0;
    CHECK_CLASP_ERROR(segment(inst.grid, nullptr, cfg), ErrorCode::BadBeta);
    cfg.beta = 0.5;
    cfg.fixed_k = 1;
    CHECK_CLASP_ERROR(segment(inst.grid, nullptr, cfg), ErrorCode::BadK);
    cfg.fixed_k = 16;  // n - 1 = 15 is the largest usable k
    CHECK_CLASP_ERROR(segment(inst.grid, nullptr, cfg), ErrorCode::BadK);
}

TEST_CASE("rendered mask and sidecar") {
    testutil::TempDir dir("render");
    const auto inst = generate_planted({.rows = 6, .cols = 6, .k_true = 3, .seed = 2});
    PipelineConfig cfg;
    cfg.crf = false;
    cfg.seed = 4;
    const auto r = segment(inst.grid, nullptr, cfg);
    render_mask(r, cfg, dir / "m.png");
    render_mask(r, cfg, dir / "again.png");
    CHECK(read_label_png(dir / "m.png") == r.mask);
    CHECK(slurp(dir / "m.png") == slurp(dir / "again.png"));

    CHECK(sidecar_path("out/x.png") == std::filesystem::path("out/x.json"));
    const auto j = nlohmann::json::parse(slurp(dir / "m.json"));
    CHECK(j.at("k").get<int>() == r.k);
    CHECK(j.at("silhouette").get<double>() == doctest::Approx(r.silhouette));
    CHECK(j.at("beta").get<double>() == 0.5);
    CHECK(j.at("seed").get<int>() == 4);
    CHECK(j.at("variant").get<std::string>() == "patch");

    // A 2x2 mask survives the trip through the file.
    SegmentationResult tiny;
    tiny.k = 2;
    tiny.mask = LabelMask(2, 2, std::vector<int>{0, 0, 1, 1});
    render_mask(tiny, cfg, dir / "tiny.png");
    CHECK(read_label_png(dir / "tiny.png").labels == std::vector<int>{0, 0, 1, 1});

    tiny.k = 257;
    CHECK_CLASP_ERROR(render_mask(tiny, cfg, dir / "big.png"), ErrorCode::TooManyLabels);
    CHECK_FALSE(std::filesystem::exists(dir / "big.png"));
    CHECK_FALSE(std::filesystem::exists(dir / "big.json"));
}

TEST_CASE("variant names") {
    PipelineConfig cfg;
    CHECK(variant_name(cfg) == "pixel");
    cfg.crf = false;
    CHECK(variant_name(cfg) == "patch");
}
