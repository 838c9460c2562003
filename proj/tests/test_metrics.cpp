#include "clasp/image_io.hpp"
#include "clasp/metrics.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <random>

using namespace clasp;

namespace {

LabelMask random_mask(int h, int w, int k, std::mt19937_64& rng) {
    LabelMask m(h, w);
    for (auto& v : m.labels) {
        v = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    }
    return m;
}

std::vector<std::vector<std::int64_t>> random_counts(int r, int c, std::mt19937_64& rng) {
    std::vector<std::vector<std::int64_t>> t(static_cast<std::size_t>(r), std::vector<std::int64_t>(static_cast<std::size_t>(c)));
    for (auto& row : t) {
        for (auto& v : row) {
            v = static_cast<std::int64_t>(rng() % 50);
        }
    }
    return t;
}

}  // namespace

TEST_CASE("hand-counted 2x2 example") {
    const LabelMask pred(2, 2, std::vector<int>{0, 0, 1, 1});
    const LabelMask gt(2, 2, std::vector<int>{0, 0, 0, 1});
    const auto r = evaluate(pred, gt, kNoIgnoreLabel);
    CHECK(r.miou == 7.0 / 12.0);
    CHECK(r.pixel_acc == 0.75);
    REQUIRE(r.per_class_iou.size() == 2);
    CHECK(r.per_class_iou[0] == doctest::Approx(2.0 / 3.0));
    CHECK(r.per_class_iou[1] == doctest::Approx(0.5));
    CHECK(r.correct == 3);
    CHECK(r.valid == 4);
}

TEST_CASE("perfect and relabelled predictions") {
    std::mt19937_64 rng(1);
    const auto gt = random_mask(10, 12, 4, rng);
    auto r = evaluate(gt, gt, kNoIgnoreLabel);
    CHECK(r.miou == 1.0);
    CHECK(r.pixel_acc == 1.0);

    LabelMask pred = gt;
    for (auto& v : pred.labels) {
        v = (v * 3 + 7) % 4 + 10;
    }
    r = evaluate(pred, gt, kNoIgnoreLabel);
    CHECK(r.miou == 1.0);
    CHECK(r.pixel_acc == 1.0);
}

TEST_CASE("matching on small tables") {
    auto m = match_labels(ConfusionTable::from_counts({{10, 0}, {0, 8}}));
    CHECK(m == std::vector<int>{0, 1});
    m = match_labels(ConfusionTable::from_counts({{0, 10}, {8, 0}}));
    CHECK(m == std::vector<int>{1, 0});
    m = match_labels(ConfusionTable::from_counts({{5, 0}, {0, 5}, {3, 0}}));
    CHECK(m == std::vector<int>{0, 1, kVoid});
    // More ground-truth classes than predictions.
    m = match_labels(ConfusionTable::from_counts({{1, 9, 2}}));
    CHECK(m == std::vector<int>{1});
}

TEST_CASE("many-to-one maps each prediction to its majority class") {
    const auto t = ConfusionTable::from_counts({{5, 0}, {0, 5}, {3, 1}});
    CHECK(match_labels(t, MatchMode::ManyToOne) == std::vector<int>{0, 1, 0});

    const LabelMask pred(1, 4, std::vector<int>{0, 1, 2, 2});
    const LabelMask gt(1, 4, std::vector<int>{0, 0, 1, 1});
    const auto one = evaluate(pred, gt, kNoIgnoreLabel);
    const auto many = evaluate(pred, gt, kNoIgnoreLabel, MatchMode::ManyToOne);
    CHECK(one.pixel_acc == 0.75);
    CHECK(many.pixel_acc == 1.0);
    CHECK(many.miou == 1.0);
}

TEST_CASE("Hungarian matching equals exhaustive enumeration") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 400; ++trial) {
        const int r = 1 + static_cast<int>(rng() % 5);
        const int c = 1 + static_cast<int>(rng() % 5);
        const auto counts = random_counts(r, c, rng);
        const auto t = ConfusionTable::from_counts(counts);
        const auto m = match_labels(t);
        CHECK(matched_total(t, m) == oracle::best_matching_total(counts));
        // Injective on the matched side.
        std::vector<int> used;
        for (int v : m) {
            if (v != kVoid) {
                used.push_back(v);
            }
        }
        std::sort(used.begin(), used.end());
        CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
        CHECK(static_cast<int>(used.size()) == std::min(r, c));
    }
}

TEST_CASE("evaluation is invariant to relabelling the prediction") {
    std::mt19937_64 rng(17);
    const auto gt = random_mask(12, 9, 4, rng);
    auto pred = gt;
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        if (rng() % 3 == 0) {
            pred.labels[i] = static_cast<int>(rng() % 6);
        }
    }
    const auto base = evaluate(pred, gt, kNoIgnoreLabel);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto p = pred;
        for (auto& v : p.labels) {
            v = perm[static_cast<std::size_t>(v)];
        }
        const auto r = evaluate(p, gt, kNoIgnoreLabel);
        CHECK(r.miou == doctest::Approx(base.miou).epsilon(1e-15));
        CHECK(r.pixel_acc == base.pixel_acc);
    }
}

TEST_CASE("ignored pixels and table totals") {
    const LabelMask pred(2, 3, std::vector<int>{0, 0, 1, 1, 1, 0});
    const LabelMask gt(2, 3, std::vector<int>{0, 255, 1, 1, 255, 0});
    const auto t = confusion_table(pred, gt, 255);
    CHECK(t.ignore_count == 2);
    CHECK(t.total() + t.ignore_count == 6);
    const auto r = evaluate(pred, gt, 255);
    CHECK(r.valid == 4);
    CHECK(r.pixel_acc == 1.0);
    CHECK(r.miou == 1.0);

    CHECK_CLASP_ERROR(evaluate(pred, LabelMask(3, 2), 255), ErrorCode::DimensionMismatch);
}

TEST_CASE("scores are bounded") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto gt = random_mask(6, 7, 1 + static_cast<int>(rng() % 4), rng);
        const auto pred = random_mask(6, 7, 1 + static_cast<int>(rng() % 6), rng);
        const auto r = evaluate(pred, gt, kNoIgnoreLabel);
        CHECK(r.miou >= 0.0);
        CHECK(r.miou <= 1.0);
        CHECK(r.pixel_acc >= 0.0);
        CHECK(r.pixel_acc <= 1.0);
    }
}

TEST_CASE("directory evaluation and dataset aggregation") {
    testutil::TempDir dir("metrics");
    const auto pd = dir / "pred";
    const auto gd = dir / "gt";
    std::filesystem::create_directories(pd);
    std::filesystem::create_directories(gd);

    const LabelMask gt_a(2, 2, std::vector<int>{0, 0, 0, 1});
    const LabelMask pred_a(2, 2, std::vector<int>{0, 0, 1, 1});
    const LabelMask gt_b(2, 4, std::vector<int>{3, 3, 3, 3, 5, 5, 5, 5});
    write_label_png(pred_a, pd / "a.png");
    write_label_png(gt_a, gd / "a.png");
    write_label_png(gt_b, pd / "b.png");
    write_label_png(gt_b, gd / "b.png");

    for (int jobs : {1, 3}) {
        const auto recs = evaluate_directories(pd, gd, 255, MatchMode::OneToOne, jobs);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].name == "a.png");
        CHECK(recs[1].name == "b.png");
        const auto j = nlohmann::json::parse(evaluation_json(recs));
        CHECK(j.at("n_images").get<int>() == 2);
        CHECK(j.at("miou").get<double>() == doctest::Approx((7.0 / 12.0 + 1.0) / 2.0));
        CHECK(j.at("pixel_acc").get<double>() == doctest::Approx(11.0 / 12.0));
        CHECK(j.at("images").size() == 2);
    }

    write_label_png(gt_a, pd / "c.png");
    CHECK_CLASP_ERROR(evaluate_directories(pd, gd, 255), ErrorCode::IoFailure);
    CHECK_CLASP_ERROR(evaluate_directories(dir / "none", gd, 255), ErrorCode::IoFailure);
}

TEST_CASE("identical directories score one") {
    testutil::TempDir dir("metrics-eq");
    std::mt19937_64 rng(2);
    for (int i = 0; i < 4; ++i) {
        write_label_png(random_mask(9, 7, 5, rng), dir / ("m" + std::to_string(i) + ".png"));
    }
    const auto j = nlohmann::json::parse(evaluation_json(evaluate_directories(dir.path(), dir.path(), 255)));
    CHECK(j.at("miou").get<double>() == 1.0);
    CHECK(j.at("pixel_acc").get<double>() == 1.0);
}
