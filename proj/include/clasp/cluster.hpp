#pragma once

#include "clasp/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace clasp {

/// Row i holds patch i's coordinates on the first k eigenvectors.
struct SpectralEmbedding {
    Eigen::MatrixXd coords;

    Eigen::Index size() const noexcept { return coords.rows(); }
    Eigen::Index k() const noexcept { return coords.cols(); }
};

/// First k eigenvector columns. Row normalization is off unless requested.
SpectralEmbedding make_embedding(const EigenSystem& eig, int k, bool normalize_rows = false);

struct ClusterAssignment {
    int k = 0;
    std::vector<int> labels;
    double inertia = 0.0;
};

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 300;
    double relative_tolerance = 1e-6;
};

struct CandidateRange {
    int lo = 2;
    int hi = 2;
    bool operator==(const CandidateRange&) const = default;
};

/// [max(2, floor(k_opt(1-beta))), min(n-1, ceil(k_opt(1+beta)))].
CandidateRange candidate_range(int k_opt, double beta, int n);

/// Relabels so that labels appear in first-occurrence order (patch 0 gets 0).
std::vector<int> canonicalize_labels(const std::vector<int>& labels);

/// One Lloyd run from the given initial centroids (k x dim), with empty
/// clusters repaired by moving in the point farthest from its centroid.
/// Labels are returned canonicalized.
ClusterAssignment lloyd(const Eigen::MatrixXd& points, const Eigen::MatrixXd& initial_centroids,
                        const KMeansOptions& options = {});

/// Seeded k-means++ with restarts; the lowest-inertia run wins (earliest on
/// ties). Deterministic for fixed (points, k, seed).
ClusterAssignment cluster_embedding(const SpectralEmbedding& embedding, int k, std::uint64_t seed,
                                    const KMeansOptions& options = {});

/// Per-point silhouette with Euclidean distance; singleton clusters score 0.
std::vector<double> silhouette_samples(const Eigen::MatrixXd& points, const std::vector<int>& labels);

/// Mean silhouette. Throws SingleCluster when fewer than two labels occur.
double silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels);
inline double silhouette(const SpectralEmbedding& u, const std::vector<int>& labels) {
    return silhouette(u.coords, labels);
}

struct ClusterCandidate {
    int k = 0;
    double silhouette = 0.0;
    ClusterAssignment assignment;
};

struct SelectionOptions {
    double beta = 0.5;
    std::uint64_t seed = 0;
    std::optional<int> fixed_k;
    bool normalize_rows = false;
    KMeansOptions kmeans;
};

struct ClusterSelection {
    int k_opt = 0;
    double beta = 0.0;
    std::vector<ClusterCandidate> candidates;  // ascending k
    int best_k = 0;
    std::vector<int> best_labels;
    double best_score = 0.0;
};

/// Bandwidth search: cluster and score every k in the candidate range around
/// analysis.k_opt, keep the highest silhouette (smaller k on ties). With
/// fixed_k set, only that k is evaluated. Candidate k is clustered with
/// derive_seed(seed, k).
ClusterSelection select_clusters(const EigenSystem& eig, const EigengapAnalysis& analysis,
                                 const SelectionOptions& options);

std::string search_json(const ClusterSelection& selection);

}  // namespace clasp
