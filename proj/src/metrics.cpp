#include "clasp/metrics.hpp"

#include "clasp/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace clasp {

std::int64_t ConfusionTable::total() const noexcept {
    std::int64_t t = 0;
    for (auto c : counts) {
        t += c;
    }
    return t;
}

ConfusionTable ConfusionTable::from_counts(const std::vector<std::vector<std::int64_t>>& counts) {
    ConfusionTable t;
    const std::size_t rows = counts.size();
    const std::size_t cols = rows ? counts[0].size() : 0;
    for (std::size_t p = 0; p < rows; ++p) {
        if (counts[p].size() != cols) {
            fail(ErrorCode::InvalidArgument, "ragged confusion counts");
        }
        t.pred_ids.push_back(static_cast<int>(p));
        t.counts.insert(t.counts.end(), counts[p].begin(), counts[p].end());
    }
    for (std::size_t g = 0; g < cols; ++g) {
        t.gt_ids.push_back(static_cast<int>(g));
    }
    return t;
}

ConfusionTable confusion_table(const LabelMask& pred, const LabelMask& gt, int ignore_label) {
    if (pred.h != gt.h || pred.w != gt.w || pred.labels.size() != gt.labels.size()) {
        fail(ErrorCode::DimensionMismatch, "prediction is " + std::to_string(pred.h) + "x" +
                                               std::to_string(pred.w) + ", ground truth is " +
                                               std::to_string(gt.h) + "x" + std::to_string(gt.w));
    }
    std::map<int, int> pred_index;
    std::map<int, int> gt_index;
    std::int64_t ignored = 0;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
        if (gt.labels[i] == ignore_label) {
            ++ignored;
            continue;
        }
        pred_index.emplace(pred.labels[i], 0);
        gt_index.emplace(gt.labels[i], 0);
    }
    ConfusionTable t;
    for (auto& [id, idx] : pred_index) {
        idx = static_cast<int>(t.pred_ids.size());
        t.pred_ids.push_back(id);
    }
    for (auto& [id, idx] : gt_index) {
        idx = static_cast<int>(t.gt_ids.size());
        t.gt_ids.push_back(id);
    }
    t.counts.assign(t.pred_ids.size() * t.gt_ids.size(), 0);
    t.ignore_count = ignored;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
        if (gt.labels[i] == ignore_label) {
            continue;
        }
        const auto p = static_cast<std::size_t>(pred_index[pred.labels[i]]);
        const auto g = static_cast<std::size_t>(gt_index[gt.labels[i]]);
        ++t.counts[p * t.gt_ids.size() + g];
    }
    return t;
}

namespace {

// Rectangular assignment (rows <= cols) minimizing total cost; returns the
// column of every row. Shortest augmenting path with potentials, O(r^2 c).
std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
    const int r = static_cast<int>(cost.size());
    const int c = r ? static_cast<int>(cost[0].size()) : 0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(r) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(c) + 1, 0.0);
    std::vector<int> owner(static_cast<std::size_t>(c) + 1, 0);  // column -> row (1-based)
    std::vector<int> way(static_cast<std::size_t>(c) + 1, 0);
    for (int i = 1; i <= r; ++i) {
        owner[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(c) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(c) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = owner[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= c; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    continue;
                }
                const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= c; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(owner[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (owner[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            owner[static_cast<std::size_t>(j0)] = owner[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(r), -1);
    for (int j = 1; j <= c; ++j) {
        if (owner[static_cast<std::size_t>(j)] != 0) {
            row_to_col[static_cast<std::size_t>(owner[static_cast<std::size_t>(j)] - 1)] = j - 1;
        }
    }
    return row_to_col;
}

}  // namespace

std::vector<int> match_labels(const ConfusionTable& table, MatchMode mode) {
    const int p = table.pred_k();
    const int g = table.gt_k();
    std::vector<int> matching(static_cast<std::size_t>(p), kVoid);
    if (p == 0 || g == 0) {
        return matching;
    }
    if (mode == MatchMode::ManyToOne) {
        for (int i = 0; i < p; ++i) {
            int best = 0;
            for (int j = 1; j < g; ++j) {
                if (table.at(i, j) > table.at(i, best)) {
                    best = j;
                }
            }
            matching[static_cast<std::size_t>(i)] = best;
        }
        return matching;
    }

    // Integer counts are exact in double up to 2^53 pixels.
    if (p <= g) {
        std::vector<std::vector<double>> cost(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(g)));
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < g; ++j) {
                cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = -static_cast<double>(table.at(i, j));
            }
        }
        return hungarian_min(cost);
    }
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(g), std::vector<double>(static_cast<std::size_t>(p)));
    for (int j = 0; j < g; ++j) {
        for (int i = 0; i < p; ++i) {
            cost[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = -static_cast<double>(table.at(i, j));
        }
    }
    const auto gt_to_pred = hungarian_min(cost);
    for (int j = 0; j < g; ++j) {
        matching[static_cast<std::size_t>(gt_to_pred[static_cast<std::size_t>(j)])] = j;
    }
    return matching;
}

std::int64_t matched_total(const ConfusionTable& table, const std::vector<int>& matching) {
    std::int64_t total = 0;
    for (int i = 0; i < table.pred_k(); ++i) {
        const int j = matching[static_cast<std::size_t>(i)];
        if (j != kVoid) {
            total += table.at(i, j);
        }
    }
    return total;
}

namespace {

// Mean of num[i] / den[i], summed as an exact fraction and rounded once, so
// that e.g. (2/3 + 1/2) / 2 yields the double nearest 7/12. Falls back to
// extended-precision summation when the fraction outgrows 53-bit operands.
double mean_of_ratios(const std::vector<std::int64_t>& num, const std::vector<std::int64_t>& den) {
    using I = __int128;
    auto gcd = [](I x, I y) {
        while (y != 0) {
            const I t = x % y;
            x = y;
            y = t;
        }
        return x;
    };
    constexpr I kLimit = I(1) << 53;
    I n = 0;
    I d = 1;
    bool exact = true;
    for (std::size_t i = 0; i < num.size() && exact; ++i) {
        const I l = d / gcd(d, den[i]) * den[i];
        if (l > kLimit) {
            exact = false;
            break;
        }
        n = n * (l / d) + I(num[i]) * (l / den[i]);
        d = l;
        const I r = gcd(n, d);
        if (r > 1) {
            n /= r;
            d /= r;
        }
    }
    const I q = d * static_cast<I>(num.size());
    if (exact && n <= kLimit && q <= kLimit) {
        // Both operands are exact doubles, so the division rounds once.
        return static_cast<double>(static_cast<std::int64_t>(n)) / static_cast<double>(static_cast<std::int64_t>(q));
    }
    long double sum = 0.0L;
    for (std::size_t i = 0; i < num.size(); ++i) {
        sum += static_cast<long double>(num[i]) / static_cast<long double>(den[i]);
    }
    return static_cast<double>(sum / static_cast<long double>(num.size()));
}

}  // namespace

EvalResult evaluate(const LabelMask& pred, const LabelMask& gt, int ignore_label, MatchMode mode) {
    const auto table = confusion_table(pred, gt, ignore_label);
    const auto matching = match_labels(table, mode);
    const int p = table.pred_k();
    const int g = table.gt_k();

    std::vector<std::int64_t> pred_size(static_cast<std::size_t>(p), 0);
    std::vector<std::int64_t> gt_size(static_cast<std::size_t>(g), 0);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < g; ++j) {
            pred_size[static_cast<std::size_t>(i)] += table.at(i, j);
            gt_size[static_cast<std::size_t>(j)] += table.at(i, j);
        }
    }
    std::vector<std::int64_t> inter(static_cast<std::size_t>(g), 0);
    std::vector<std::int64_t> matched_pred(static_cast<std::size_t>(g), 0);
    for (int i = 0; i < p; ++i) {
        const int j = matching[static_cast<std::size_t>(i)];
        if (j != kVoid) {
            inter[static_cast<std::size_t>(j)] += table.at(i, j);
            matched_pred[static_cast<std::size_t>(j)] += pred_size[static_cast<std::size_t>(i)];
        }
    }

    EvalResult r;
    r.pred_ids = table.pred_ids;
    r.gt_ids = table.gt_ids;
    r.matching.resize(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
        const int j = matching[static_cast<std::size_t>(i)];
        r.matching[static_cast<std::size_t>(i)] = j == kVoid ? kVoid : table.gt_ids[static_cast<std::size_t>(j)];
    }
    r.valid = table.total();
    std::vector<std::int64_t> unions(static_cast<std::size_t>(g));
    for (int j = 0; j < g; ++j) {
        const auto uni = gt_size[static_cast<std::size_t>(j)] + matched_pred[static_cast<std::size_t>(j)] -
                         inter[static_cast<std::size_t>(j)];
        unions[static_cast<std::size_t>(j)] = uni;
        r.per_class_iou.push_back(static_cast<double>(inter[static_cast<std::size_t>(j)]) /
                                  static_cast<double>(uni));
        r.correct += inter[static_cast<std::size_t>(j)];
    }
    r.miou = g > 0 ? mean_of_ratios(inter, unions) : 0.0;
    r.pixel_acc = r.valid > 0 ? static_cast<double>(r.correct) / static_cast<double>(r.valid) : 0.0;
    return r;
}

std::string evaluation_json(const std::vector<DatasetRecord>& records) {
    nlohmann::json images = nlohmann::json::array();
    double miou_sum = 0.0;
    std::int64_t correct = 0;
    std::int64_t valid = 0;
    for (const auto& rec : records) {
        const auto& r = rec.result;
        nlohmann::json matching = nlohmann::json::object();
        for (std::size_t i = 0; i < r.pred_ids.size(); ++i) {
            matching[std::to_string(r.pred_ids[i])] =
                r.matching[i] == kVoid ? nlohmann::json(nullptr) : nlohmann::json(r.matching[i]);
        }
        nlohmann::json per_class = nlohmann::json::object();
        for (std::size_t j = 0; j < r.gt_ids.size(); ++j) {
            per_class[std::to_string(r.gt_ids[j])] = r.per_class_iou[j];
        }
        images.push_back({{"name", rec.name},
                          {"miou", r.miou},
                          {"pixel_acc", r.pixel_acc},
                          {"matching", std::move(matching)},
                          {"per_class_iou", std::move(per_class)}});
        miou_sum += r.miou;
        correct += r.correct;
        valid += r.valid;
    }
    nlohmann::json j;
    j["miou"] = records.empty() ? 0.0 : miou_sum / static_cast<double>(records.size());
    j["pixel_acc"] = valid > 0 ? static_cast<double>(correct) / static_cast<double>(valid) : 0.0;
    j["n_images"] = records.size();
    j["images"] = std::move(images);
    return j.dump(2) + "\n";
}

}  // namespace clasp
