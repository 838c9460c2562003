#pragma once

#include "clasp/feature_io.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace clasp {

/// n x n cosine-similarity matrix over patch features. Each unordered pair is
/// computed once and mirrored, so the matrix is exactly symmetric, and the
/// diagonal is exactly 1.
struct AffinityMatrix {
    Eigen::MatrixXd values;

    Eigen::Index size() const noexcept { return values.rows(); }
};

/// Eigenvalues in descending order; column j of `eigenvectors` pairs with
/// eigenvalue j, has unit norm, and its first component with magnitude above
/// 1e-12 is positive.
struct EigenSystem {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

struct EigengapAnalysis {
    std::vector<double> gaps;       ///< gaps[i-1] = lambda_i - lambda_{i+1}, i = 1..n-1
    std::vector<double> distances;  ///< distances[i-1] = d(i)
    int elbow_index = 1;            ///< i*, one-based like the gap index
    int k_opt = 2;
    bool degenerate = false;        ///< every d(i) <= 1e-12; elbow forced to 1
};

AffinityMatrix compute_affinity(const PatchFeatureGrid& grid);

// Cosine affinity over the rows of an arbitrary feature matrix; rows must
// have positive norm.
AffinityMatrix compute_affinity(const Eigen::MatrixXd& features);

/// Dense symmetric eigendecomposition of the full spectrum. Throws
/// ConvergenceFailure if the solver does not converge.
EigenSystem eigendecompose(const Eigen::MatrixXd& symmetric);
inline EigenSystem eigendecompose(const AffinityMatrix& a) { return eigendecompose(a.values); }

/// Perpendicular-distance elbow on the points (i, gap_i): the line runs from
/// the first to the last gap point, the farthest point is the elbow (smallest
/// index on ties) and k_opt = elbow + 1, clamped to [2, n-1].
EigengapAnalysis eigengap_elbow(const std::vector<double>& eigenvalues_desc);
EigengapAnalysis eigengap_elbow(const Eigen::VectorXd& eigenvalues_desc);

/// The same elbow procedure starting from the gap sequence (n-1 entries).
EigengapAnalysis elbow_from_gaps(std::vector<double> gaps);

/// JSON document with eigenvalues, gaps, distances, elbow_index and k_opt.
std::string spectrum_json(const EigenSystem& eig, const EigengapAnalysis& analysis);

}  // namespace clasp
