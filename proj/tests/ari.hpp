#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> nij;
    std::map<int, double> ai, bj;
    for (std::size_t i = 0; i < a.size(); ++i) {
        nij[{a[i], b[i]}] += 1;
        ai[a[i]] += 1;
        bj[b[i]] += 1;
    }
    auto c2 = [](double v) { return v * (v - 1) / 2; };
    double sij = 0, sa = 0, sb = 0;
    for (auto& [key, v] : nij) {
        sij += c2(v);
    }
    for (auto& [key, v] : ai) {
        sa += c2(v);
    }
    for (auto& [key, v] : bj) {
        sb += c2(v);
    }
    const double expected = sa * sb / c2(static_cast<double>(a.size()));
    const double maxi = (sa + sb) / 2;
    if (maxi == expected) {
        return 1.0;
    }
    return (sij - expected) / (maxi - expected);
}

}  // namespace oracle
