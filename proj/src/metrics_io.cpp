#include "clasp/error.hpp"
#include "clasp/image_io.hpp"
#include "clasp/metrics.hpp"
#include "parallel.hpp"

#include <algorithm>

namespace clasp {

std::vector<DatasetRecord> evaluate_directories(const std::filesystem::path& pred_dir,
                                                const std::filesystem::path& gt_dir, int ignore_label,
                                                MatchMode mode, int jobs) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(pred_dir)) {
        fail(ErrorCode::IoFailure, pred_dir.string() + " is not a directory");
    }
    if (!fs::is_directory(gt_dir)) {
        fail(ErrorCode::IoFailure, gt_dir.string() + " is not a directory");
    }
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(pred_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") {
            names.push_back(entry.path().filename().string());
        }
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        if (!fs::exists(gt_dir / name)) {
            fail(ErrorCode::IoFailure, "no ground truth for " + name + " in " + gt_dir.string());
        }
    }

    std::vector<DatasetRecord> records(names.size());
    detail::parallel_for(names.size(), jobs, [&](std::size_t i) {
        const auto pred = read_label_png(pred_dir / names[i]);
        const auto gt = read_label_png(gt_dir / names[i]);
        records[i].name = names[i];
        records[i].result = evaluate(pred, gt, ignore_label, mode);
    });
    return records;
}

}  // namespace clasp
