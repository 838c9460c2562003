#include "clasp/spectral.hpp"

#include "clasp/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace clasp {

namespace {

constexpr double kDegenerateDistance = 1e-12;
constexpr double kSignEpsilon = 1e-12;

}  // namespace

AffinityMatrix compute_affinity(const Eigen::MatrixXd& features) {
    const Eigen::Index n = features.rows();
    Eigen::MatrixXd unit = features;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = unit.row(i).norm();
        if (!(norm > 0.0)) {
            fail(ErrorCode::ZeroNormFeature, "row " + std::to_string(i) + " has zero norm");
        }
        unit.row(i) /= norm;
    }

    // Lower triangle only (one evaluation per unordered pair), then mirror.
    AffinityMatrix a;
    a.values = Eigen::MatrixXd::Zero(n, n);
    a.values.selfadjointView<Eigen::Lower>().rankUpdate(unit);
    a.values.triangularView<Eigen::StrictlyUpper>() = a.values.transpose();
    a.values.diagonal().setOnes();
    return a;
}

AffinityMatrix compute_affinity(const PatchFeatureGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.patch_count());
    const auto d = static_cast<Eigen::Index>(grid.dim());
    Eigen::MatrixXd features(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto f = grid.feature(static_cast<std::size_t>(i));
        for (Eigen::Index c = 0; c < d; ++c) {
            features(i, c) = static_cast<double>(f[static_cast<std::size_t>(c)]);
        }
    }
    return compute_affinity(features);
}

EigenSystem eigendecompose(const Eigen::MatrixXd& symmetric) {
    if (symmetric.rows() != symmetric.cols() || symmetric.rows() == 0) {
        fail(ErrorCode::InvalidArgument, "eigendecomposition needs a non-empty square matrix");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        fail(ErrorCode::ConvergenceFailure, "symmetric eigensolver did not converge");
    }

    const Eigen::Index n = symmetric.rows();
    EigenSystem out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j) {
        auto col = out.eigenvectors.col(j);
        col.normalize();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(col(i)) > kSignEpsilon) {
                if (col(i) < 0.0) {
                    col = -col;
                }
                break;
            }
        }
    }
    return out;
}

EigengapAnalysis elbow_from_gaps(std::vector<double> gaps) {
    const std::size_t m = gaps.size();
    if (m < 3) {
        fail(ErrorCode::TooFewEigenvalues,
             "elbow needs at least 4 eigenvalues, got " + std::to_string(m + 1));
    }
    const std::size_t n = m + 1;

    EigengapAnalysis out;
    out.distances.resize(m);

    // Line through P(1) = (1, gap_1) and P(n-1) = (n-1, gap_{n-1}).
    const double x0 = 1.0;
    const double y0 = gaps.front();
    const double dx = static_cast<double>(m) - 1.0;
    const double dy = gaps.back() - y0;
    const double length = std::hypot(dx, dy);

    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double x = static_cast<double>(k + 1);
        const double cross = dx * (gaps[k] - y0) - dy * (x - x0);
        const double d = std::abs(cross) / length;
        out.distances[k] = d;
        if (d > best) {
            best = d;
            best_i = k;
        }
    }

    if (best <= kDegenerateDistance) {
        out.degenerate = true;
        out.elbow_index = 1;
    } else {
        out.elbow_index = static_cast<int>(best_i) + 1;
    }
    const int hi = static_cast<int>(n) - 1;
    out.k_opt = std::clamp(out.elbow_index + 1, 2, hi);
    out.gaps = std::move(gaps);
    return out;
}

EigengapAnalysis eigengap_elbow(const std::vector<double>& eigenvalues_desc) {
    if (eigenvalues_desc.size() < 4) {
        fail(ErrorCode::TooFewEigenvalues, "elbow needs at least 4 eigenvalues, got " +
                                               std::to_string(eigenvalues_desc.size()));
    }
    std::vector<double> gaps(eigenvalues_desc.size() - 1);
    for (std::size_t i = 0; i + 1 < eigenvalues_desc.size(); ++i) {
        gaps[i] = eigenvalues_desc[i] - eigenvalues_desc[i + 1];
    }
    return elbow_from_gaps(std::move(gaps));
}

EigengapAnalysis eigengap_elbow(const Eigen::VectorXd& eigenvalues_desc) {
    return eigengap_elbow(std::vector<double>(eigenvalues_desc.data(),
                                              eigenvalues_desc.data() + eigenvalues_desc.size()));
}

std::string spectrum_json(const EigenSystem& eig, const EigengapAnalysis& analysis) {
    nlohmann::json j;
    j["eigenvalues"] = std::vector<double>(eig.eigenvalues.data(),
                                           eig.eigenvalues.data() + eig.eigenvalues.size());
    j["gaps"] = analysis.gaps;
    j["distances"] = analysis.distances;
    j["elbow_index"] = analysis.elbow_index;
    j["k_opt"] = analysis.k_opt;
    j["degenerate"] = analysis.degenerate;
    return j.dump(2);
}

}  // namespace clasp
