#include "clasp/synth.hpp"

#include "clasp/error.hpp"

#include <cmath>
#include <random>

namespace clasp {

PlantedLayout parse_layout(std::string_view name) {
    if (name == "vertical-bands") {
        return PlantedLayout::VerticalBands;
    }
    if (name == "grid-blocks") {
        return PlantedLayout::GridBlocks;
    }
    fail(ErrorCode::InvalidArgument, "unknown layout '" + std::string(name) + "'");
}

std::string_view layout_name(PlantedLayout layout) {
    return layout == PlantedLayout::GridBlocks ? "grid-blocks" : "vertical-bands";
}

LabelMask planted_layout(int rows, int cols, int k, PlantedLayout layout) {
    if (rows < 1 || cols < 1 || k < 1 || static_cast<long long>(k) > static_cast<long long>(rows) * cols) {
        fail(ErrorCode::BadShape, "cannot lay out " + std::to_string(k) + " regions on a " +
                                      std::to_string(rows) + "x" + std::to_string(cols) + " grid");
    }
    LabelMask mask(rows, cols);
    const long long n = static_cast<long long>(rows) * cols;
    if (layout == PlantedLayout::VerticalBands) {
        for (int c = 0; c < cols; ++c) {
            for (int r = 0; r < rows; ++r) {
                const long long idx = static_cast<long long>(c) * rows + r;
                mask.at(r, c) = static_cast<int>(idx * k / n);
            }
        }
        return mask;
    }
    const int grid_r = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
    const int grid_c = (k + grid_r - 1) / grid_r;
    if (grid_r > rows || grid_c > cols) {
        fail(ErrorCode::BadShape, "grid-blocks layout needs at least " + std::to_string(grid_r) + "x" +
                                      std::to_string(grid_c) + " patches");
    }
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int br = r * grid_r / rows;
            const int bc = c * grid_c / cols;
            mask.at(r, c) = std::min(br * grid_c + bc, k - 1);
        }
    }
    return mask;
}

PlantedInstance generate_planted(const PlantedSpec& spec) {
    if (spec.dim < 1) {
        fail(ErrorCode::InvalidArgument, "feature dimension must be positive");
    }
    if (!(spec.min_center_angle > 0.0)) {
        fail(ErrorCode::InvalidArgument, "min_center_angle must be positive");
    }
    if (!(spec.noise_sigma >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "noise_sigma must be non-negative");
    }
    auto labels = planted_layout(spec.rows, spec.cols, spec.k_true, spec.layout);
    const auto geometry = compute_geometry(spec.rows * kPatchSize, spec.cols * kPatchSize);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double max_cos = std::cos(spec.min_center_angle);
    Eigen::MatrixXd centers(spec.k_true, spec.dim);
    constexpr int kMaxDraws = 100000;
    int placed = 0;
    for (int draw = 0; draw < kMaxDraws && placed < spec.k_true; ++draw) {
        Eigen::RowVectorXd v(spec.dim);
        for (int j = 0; j < spec.dim; ++j) {
            v(j) = normal(rng);
        }
        const double norm = v.norm();
        if (!(norm > 0.0)) {
            continue;
        }
        v /= norm;
        bool ok = true;
        for (int c = 0; c < placed && ok; ++c) {
            ok = centers.row(c).dot(v) <= max_cos;
        }
        if (ok) {
            centers.row(placed++) = v;
        }
    }
    if (placed < spec.k_true) {
        fail(ErrorCode::CannotPlaceCenters,
             "could not place " + std::to_string(spec.k_true) + " centres in dimension " +
                 std::to_string(spec.dim) + " with pairwise angle >= " +
                 std::to_string(spec.min_center_angle) + " rad");
    }

    const std::size_t n = labels.pixel_count();
    std::vector<float> data(n * static_cast<std::size_t>(spec.dim));
    for (std::size_t p = 0; p < n; ++p) {
        const int l = labels.labels[p];
        for (int j = 0; j < spec.dim; ++j) {
            const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * normal(rng) : 0.0;
            data[p * static_cast<std::size_t>(spec.dim) + static_cast<std::size_t>(j)] =
                static_cast<float>(centers(l, j) + noise);
        }
    }
    return PlantedInstance{PatchFeatureGrid(geometry, spec.dim, std::move(data)), std::move(labels),
                           std::move(centers)};
}

Eigen::MatrixXd block_model_matrix(int k, int n, double cross_sim) {
    if (k < 1 || n < 1 || n % k != 0 || !(cross_sim >= 0.0 && cross_sim < 1.0)) {
        fail(ErrorCode::BadShape, "block model needs k | n and 0 <= cross_sim < 1");
    }
    const int m = n / k;
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, cross_sim);
    for (int b = 0; b < k; ++b) {
        a.block(b * m, b * m, m, m).setOnes();
    }
    return a;
}

std::vector<double> block_model_eigenvalues(int k, int n, double cross_sim) {
    if (k < 1 || n < 1 || n % k != 0 || !(cross_sim >= 0.0 && cross_sim < 1.0)) {
        fail(ErrorCode::BadShape, "block model needs k | n and 0 <= cross_sim < 1");
    }
    // A = (1 - c) blockdiag(J_m) + c J_n; the all-ones vector lies in the
    // span of the block indicators, which J_n otherwise annihilates.
    const double m = static_cast<double>(n / k);
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    out[0] = m * (1.0 - cross_sim) + cross_sim * n;
    for (int i = 1; i < k; ++i) {
        out[static_cast<std::size_t>(i)] = m * (1.0 - cross_sim);
    }
    return out;
}

}  // namespace clasp
