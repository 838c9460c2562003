#pragma once

#include "clasp/feature_io.hpp"
#include "clasp/image.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace clasp {

enum class PlantedLayout {
    VerticalBands,  ///< near-equal contiguous runs in column-major patch order
    GridBlocks,     ///< a ceil(sqrt k) x ceil(k / rows) grid of rectangles
};

PlantedLayout parse_layout(std::string_view name);
std::string_view layout_name(PlantedLayout layout);

struct PlantedSpec {
    int rows = 16;
    int cols = 16;
    int k_true = 3;
    int dim = 64;
    double noise_sigma = 0.02;
    double min_center_angle = std::numbers::pi / 3.0;
    std::uint64_t seed = 0;
    PlantedLayout layout = PlantedLayout::VerticalBands;
};

struct PlantedInstance {
    PatchFeatureGrid grid;
    LabelMask labels;  ///< patch resolution
    Eigen::MatrixXd centers;  ///< k_true x dim, unit rows
};

/// Unit centres with pairwise angle >= min_center_angle (rejection sampled;
/// CannotPlaceCenters when no placement is found), one region per centre laid
/// out per `layout`, and per-patch isotropic Gaussian noise. Geometry is
/// rows*14 x cols*14. Deterministic per seed.
PlantedInstance generate_planted(const PlantedSpec& spec);

/// Patch labels for the layout alone.
LabelMask planted_layout(int rows, int cols, int k, PlantedLayout layout);

/// Equal-block matrix: 1 within each of the k blocks of size n/k, cross_sim
/// across blocks.
Eigen::MatrixXd block_model_matrix(int k, int n, double cross_sim);

/// Closed-form descending spectrum of block_model_matrix:
/// m(1-c) + c n once, m(1-c) with multiplicity k-1, and 0 with multiplicity
/// n-k, where m = n/k.
std::vector<double> block_model_eigenvalues(int k, int n, double cross_sim);

}  // namespace clasp
