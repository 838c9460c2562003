#pragma once

// Independent reference implementations. They share no code with the library
// and favour the most direct formulation over speed.

#include "ari.hpp"
#include "clasp/crf.hpp"
#include "clasp/image.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

// Perpendicular distance of every point (i, gap_i) to the line through the
// first and last points, by the cross-product formula.
inline std::vector<double> elbow_distances(const std::vector<double>& gaps) {
    const auto m = gaps.size();
    const double x1 = 1.0, y1 = gaps.front();
    const double x2 = static_cast<double>(m), y2 = gaps.back();
    const double len = std::hypot(x2 - x1, y2 - y1);
    std::vector<double> d(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x0 = static_cast<double>(i + 1), y0 = gaps[i];
        d[i] = std::abs((x2 - x1) * (y1 - y0) - (x1 - x0) * (y2 - y1)) / len;
    }
    return d;
}

// One-based index of the first maximum.
inline int argmax_first(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()) + 1;
}

inline double silhouette(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
    const int n = static_cast<int>(x.rows());
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> sum(k, 0.0);
        std::vector<int> cnt(k, 0);
        for (int j = 0; j < n; ++j) {
            ++cnt[labels[j]];
            if (j != i) {
                sum[labels[j]] += std::sqrt((x.row(i) - x.row(j)).squaredNorm());
            }
        }
        const int own = labels[i];
        if (cnt[own] == 1) {
            continue;
        }
        const double a = sum[own] / (cnt[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c != own && cnt[c] > 0) {
                b = std::min(b, sum[c] / cnt[c]);
            }
        }
        total += (b - a) / std::max(a, b);
    }
    return total / n;
}

// Global k-means optimum by enumerating every assignment with k non-empty
// clusters.
inline double kmeans_optimum(const Eigen::MatrixXd& x, int k) {
    const int n = static_cast<int>(x.rows());
    std::vector<int> a(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<int> cnt(k, 0);
        for (int v : a) {
            ++cnt[v];
        }
        if (std::all_of(cnt.begin(), cnt.end(), [](int c) { return c > 0; })) {
            Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, x.cols());
            for (int i = 0; i < n; ++i) {
                c.row(a[i]) += x.row(i);
            }
            for (int j = 0; j < k; ++j) {
                c.row(j) /= cnt[j];
            }
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                s += (x.row(i) - c.row(a[i])).squaredNorm();
            }
            best = std::min(best, s);
        }
        int pos = 0;
        while (pos < n && ++a[pos] == k) {
            a[pos++] = 0;
        }
        if (pos == n) {
            break;
        }
    }
    return best;
}

// Best total over all injective maps between rows and columns.
inline std::int64_t best_matching_total(const std::vector<std::vector<std::int64_t>>& t) {
    const int rows = static_cast<int>(t.size());
    const int cols = rows ? static_cast<int>(t[0].size()) : 0;
    const bool flip = rows > cols;
    const int small = flip ? cols : rows;
    const int big = flip ? rows : cols;
    std::vector<int> perm(big);
    std::iota(perm.begin(), perm.end(), 0);
    std::int64_t best = 0;
    do {
        std::int64_t s = 0;
        for (int i = 0; i < small; ++i) {
            s += flip ? t[perm[i]][i] : t[i][perm[i]];
        }
        best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Mean-field marginals after every iteration, computed with the full Potts
// sum over l' != l and the kernels evaluated directly with exp().
inline std::vector<clasp::MarginalField> mean_field_trace(const clasp::UnaryPotentials& u,
                                                          const clasp::RgbImage& img,
                                                          const clasp::CrfConfig& cfg) {
    const int h = u.h, w = u.w, k = u.k;
    const int n = h * w;
    auto normalize = [&](const std::vector<double>& energy) {
        clasp::MarginalField q(h, w, k);
        for (int i = 0; i < n; ++i) {
            double z = 0;
            for (int l = 0; l < k; ++l) {
                z += std::exp(-energy[i * k + l]);
            }
            for (int l = 0; l < k; ++l) {
                q.values[i * k + l] = std::exp(-energy[i * k + l]) / z;
            }
        }
        return q;
    };
    clasp::MarginalField q = normalize(u.values);
    std::vector<clasp::MarginalField> trace;
    for (int it = 0; it < cfg.iterations; ++it) {
        std::vector<double> energy(static_cast<std::size_t>(n) * k);
        for (int i = 0; i < n; ++i) {
            const int yi = i / w, xi = i % w;
            std::vector<double> mg(k, 0.0), mb(k, 0.0);
            for (int j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                const int yj = j / w, xj = j % w;
                const double d2 = double(yi - yj) * (yi - yj) + double(xi - xj) * (xi - xj);
                double c2 = 0;
                for (int ch = 0; ch < 3; ++ch) {
                    const double dc = double(img.rgb[i * 3 + ch]) - double(img.rgb[j * 3 + ch]);
                    c2 += dc * dc;
                }
                const double kg = std::exp(-d2 / (2 * cfg.gauss_sxy * cfg.gauss_sxy));
                const double kb = std::exp(-d2 / (2 * cfg.bilat_sxy * cfg.bilat_sxy) -
                                           c2 / (2 * cfg.bilat_srgb * cfg.bilat_srgb));
                for (int l = 0; l < k; ++l) {
                    mg[l] += kg * q.values[j * k + l];
                    mb[l] += kb * q.values[j * k + l];
                }
            }
            for (int l = 0; l < k; ++l) {
                double pair = 0;
                for (int l2 = 0; l2 < k; ++l2) {
                    if (l2 != l) {
                        pair += cfg.gauss_compat * mg[l2] + cfg.bilat_compat * mb[l2];
                    }
                }
                energy[i * k + l] = u.values[i * k + l] + pair;
            }
        }
        q = normalize(energy);
        trace.push_back(q);
    }
    return trace;
}

}  // namespace oracle
