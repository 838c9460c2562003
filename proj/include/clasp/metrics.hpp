#pragma once

#include "clasp/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace clasp {

/// Pixel co-occurrence of predicted and ground-truth labels over the
/// non-ignored pixels. Only labels that occur are given rows/columns;
/// pred_ids / gt_ids hold the original label values.
struct ConfusionTable {
    std::vector<int> pred_ids;
    std::vector<int> gt_ids;
    std::vector<std::int64_t> counts;  ///< pred-major, pred_k x gt_k
    std::int64_t ignore_count = 0;

    int pred_k() const noexcept { return static_cast<int>(pred_ids.size()); }
    int gt_k() const noexcept { return static_cast<int>(gt_ids.size()); }
    std::int64_t at(int p, int g) const { return counts[static_cast<std::size_t>(p) * gt_ids.size() + g]; }
    std::int64_t total() const noexcept;

    /// Dense table from explicit counts; ids are 0..rows-1 and 0..cols-1.
    static ConfusionTable from_counts(const std::vector<std::vector<std::int64_t>>& counts);
};

inline constexpr int kNoIgnoreLabel = -1;

ConfusionTable confusion_table(const LabelMask& pred, const LabelMask& gt, int ignore_label);

enum class MatchMode {
    OneToOne,   ///< Hungarian assignment; surplus predictions are void
    ManyToOne,  ///< each prediction maps to its majority ground-truth class
};

inline constexpr int kVoid = -1;

/// For each predicted row, the matched ground-truth column or kVoid.
/// OneToOne maximizes the total matched intersection.
std::vector<int> match_labels(const ConfusionTable& table, MatchMode mode = MatchMode::OneToOne);

/// Total intersection of a matching (sum of matched cells).
std::int64_t matched_total(const ConfusionTable& table, const std::vector<int>& matching);

struct EvalResult {
    double miou = 0.0;
    double pixel_acc = 0.0;
    std::vector<int> pred_ids;
    std::vector<int> matching;  ///< per pred_ids entry: gt label value or kVoid
    std::vector<int> gt_ids;
    std::vector<double> per_class_iou;  ///< aligned with gt_ids
    std::int64_t correct = 0;
    std::int64_t valid = 0;
};

/// mIoU over the ground-truth classes present and pixel accuracy, after
/// per-image matching of predicted clusters to classes.
EvalResult evaluate(const LabelMask& pred, const LabelMask& gt, int ignore_label,
                    MatchMode mode = MatchMode::OneToOne);

struct DatasetRecord {
    std::string name;
    EvalResult result;
};

/// {"miou", "pixel_acc", "n_images", "images": [...]}; the dataset mIoU is
/// the mean of per-image mIoU, pixel accuracy is pooled over all pixels.
std::string evaluation_json(const std::vector<DatasetRecord>& records);

/// Evaluates every *.png in pred_dir against the same file name in gt_dir,
/// sorted by name, using up to `jobs` worker threads. A missing ground-truth
/// file is an IoFailure.
std::vector<DatasetRecord> evaluate_directories(const std::filesystem::path& pred_dir,
                                                const std::filesystem::path& gt_dir, int ignore_label,
                                                MatchMode mode = MatchMode::OneToOne, int jobs = 1);

}  // namespace clasp
