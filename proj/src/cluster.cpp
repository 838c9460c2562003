#include "clasp/cluster.hpp"

#include "clasp/error.hpp"
#include "clasp/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace clasp {

namespace {

// Row-major copy; the embedding is tall and narrow, so row access dominates.
struct Rows {
    int n = 0;
    int d = 0;
    std::vector<double> v;

    explicit Rows(const Eigen::MatrixXd& m)
        : n(static_cast<int>(m.rows())), d(static_cast<int>(m.cols())), v(m.size()) {
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < d; ++c) {
                v[static_cast<std::size_t>(i) * d + c] = m(i, c);
            }
        }
    }
    const double* row(int i) const { return v.data() + static_cast<std::size_t>(i) * d; }
};

double squared_distance(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
        const double t = a[c] - b[c];
        s += t * t;
    }
    return s;
}

Eigen::MatrixXd kmeans_plus_plus(const Rows& pts, int k, std::mt19937_64& rng) {
    Eigen::MatrixXd centroids(k, pts.d);
    std::vector<char> chosen(static_cast<std::size_t>(pts.n), 0);
    auto take = [&](int c, int i) {
        chosen[static_cast<std::size_t>(i)] = 1;
        for (int j = 0; j < pts.d; ++j) {
            centroids(c, j) = pts.row(i)[j];
        }
    };

    int first = static_cast<int>(uniform01(rng) * pts.n);
    first = std::min(first, pts.n - 1);
    take(0, first);

    std::vector<double> d2(static_cast<std::size_t>(pts.n));
    for (int i = 0; i < pts.n; ++i) {
        d2[static_cast<std::size_t>(i)] = squared_distance(pts.row(i), pts.row(first), pts.d);
    }

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double x : d2) {
            total += x;
        }
        int pick = -1;
        if (total > 0.0) {
            const double r = uniform01(rng) * total;
            double acc = 0.0;
            for (int i = 0; i < pts.n; ++i) {
                acc += d2[static_cast<std::size_t>(i)];
                if (d2[static_cast<std::size_t>(i)] > 0.0 && r < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {
                // r landed on the rounding tail; take the last positive-weight point.
                for (int i = pts.n - 1; i >= 0; --i) {
                    if (d2[static_cast<std::size_t>(i)] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // All remaining mass is zero (duplicate points): uniform over unchosen.
            std::vector<int> pool;
            for (int i = 0; i < pts.n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pool.push_back(i);
                }
            }
            const auto j = std::min(pool.size() - 1,
                                    static_cast<std::size_t>(uniform01(rng) * pool.size()));
            pick = pool[j];
        }
        take(c, pick);
        for (int i = 0; i < pts.n; ++i) {
            const double nd = squared_distance(pts.row(i), pts.row(pick), pts.d);
            d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], nd);
        }
    }
    return centroids;
}

ClusterAssignment run_lloyd(const Rows& pts, Eigen::MatrixXd centroids, const KMeansOptions& opt) {
    const int n = pts.n;
    const int d = pts.d;
    const int k = static_cast<int>(centroids.rows());

    // Row-major centroids for the hot loop.
    std::vector<double> cen(static_cast<std::size_t>(k) * d);
    for (int c = 0; c < k; ++c) {
        for (int j = 0; j < d; ++j) {
            cen[static_cast<std::size_t>(c) * d + j] = centroids(c, j);
        }
    }
    auto crow = [&](int c) { return cen.data() + static_cast<std::size_t>(c) * d; };

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    double prev_inertia = std::numeric_limits<double>::infinity();
    double inertia = 0.0;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = squared_distance(pts.row(i), crow(0), d);
            for (int c = 1; c < k; ++c) {
                const double dc = squared_distance(pts.row(i), crow(c), d);
                if (dc < best_d) {
                    best_d = dc;
                    best = c;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best) {
                changed = true;
                labels[static_cast<std::size_t>(i)] = best;
            }
            dist[static_cast<std::size_t>(i)] = best_d;
            ++counts[static_cast<std::size_t>(best)];
        }

        for (int e = 0; e < k; ++e) {
            if (counts[static_cast<std::size_t>(e)] != 0) {
                continue;
            }
            int far = -1;
            for (int i = 0; i < n; ++i) {
                const auto li = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
                if (counts[li] > 1 && (far < 0 || dist[static_cast<std::size_t>(i)] >
                                                      dist[static_cast<std::size_t>(far)])) {
                    far = i;
                }
            }
            --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
            labels[static_cast<std::size_t>(far)] = e;
            counts[static_cast<std::size_t>(e)] = 1;
            dist[static_cast<std::size_t>(far)] = 0.0;
            changed = true;
        }

        std::fill(cen.begin(), cen.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            double* c = crow(labels[static_cast<std::size_t>(i)]);
            for (int j = 0; j < d; ++j) {
                c[j] += pts.row(i)[j];
            }
        }
        for (int c = 0; c < k; ++c) {
            const double inv = 1.0 / counts[static_cast<std::size_t>(c)];
            for (int j = 0; j < d; ++j) {
                crow(c)[j] *= inv;
            }
        }

        inertia = 0.0;
        for (int i = 0; i < n; ++i) {
            inertia += squared_distance(pts.row(i), crow(labels[static_cast<std::size_t>(i)]), d);
        }
        if (!changed) {
            break;
        }
        if (prev_inertia - inertia <= opt.relative_tolerance * prev_inertia) {
            break;
        }
        prev_inertia = inertia;
    }

    // Hartigan refinement: move single points whenever the transfer lowers
    // the total inertia. Its fixed points are a subset of Lloyd's.
    for (int pass = 0; pass < opt.max_iterations; ++pass) {
        bool moved = false;
        for (int i = 0; i < n; ++i) {
            const int from = labels[static_cast<std::size_t>(i)];
            const int n_from = counts[static_cast<std::size_t>(from)];
            if (n_from == 1) {
                continue;
            }
            const double* x = pts.row(i);
            const double remove_gain =
                n_from / (n_from - 1.0) * squared_distance(x, crow(from), d);
            int to = -1;
            double add_cost = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                if (c == from) {
                    continue;
                }
                const int n_c = counts[static_cast<std::size_t>(c)];
                const double cost = n_c / (n_c + 1.0) * squared_distance(x, crow(c), d);
                if (cost < add_cost) {
                    add_cost = cost;
                    to = c;
                }
            }
            if (add_cost < remove_gain * (1.0 - 1e-12)) {
                const int n_to = counts[static_cast<std::size_t>(to)];
                double* cf = crow(from);
                double* ct = crow(to);
                for (int j = 0; j < d; ++j) {
                    cf[j] = (cf[j] * n_from - x[j]) / (n_from - 1);
                    ct[j] = (ct[j] * n_to + x[j]) / (n_to + 1);
                }
                --counts[static_cast<std::size_t>(from)];
                ++counts[static_cast<std::size_t>(to)];
                labels[static_cast<std::size_t>(i)] = to;
                moved = true;
            }
        }
        if (!moved) {
            break;
        }
    }

    // Exact centroids and inertia for the final partition.
    std::fill(cen.begin(), cen.end(), 0.0);
    for (int i = 0; i < n; ++i) {
        double* c = crow(labels[static_cast<std::size_t>(i)]);
        for (int j = 0; j < d; ++j) {
            c[j] += pts.row(i)[j];
        }
    }
    for (int c = 0; c < k; ++c) {
        const double inv = 1.0 / counts[static_cast<std::size_t>(c)];
        for (int j = 0; j < d; ++j) {
            crow(c)[j] *= inv;
        }
    }
    inertia = 0.0;
    for (int i = 0; i < n; ++i) {
        inertia += squared_distance(pts.row(i), crow(labels[static_cast<std::size_t>(i)]), d);
    }

    ClusterAssignment out;
    out.k = k;
    out.labels = canonicalize_labels(labels);
    out.inertia = inertia;
    return out;
}

}  // namespace

SpectralEmbedding make_embedding(const EigenSystem& eig, int k, bool normalize_rows) {
    if (k < 1 || k > eig.eigenvectors.cols()) {
        fail(ErrorCode::BadK, "embedding width " + std::to_string(k) + " out of range");
    }
    SpectralEmbedding u;
    u.coords = eig.eigenvectors.leftCols(k);
    if (normalize_rows) {
        for (Eigen::Index i = 0; i < u.coords.rows(); ++i) {
            const double norm = u.coords.row(i).norm();
            if (norm > 0.0) {
                u.coords.row(i) /= norm;
            }
        }
    }
    return u;
}

CandidateRange candidate_range(int k_opt, double beta, int n) {
    if (!(beta > 0.0 && beta < 1.0)) {
        fail(ErrorCode::BadBeta, "beta must lie in (0, 1), got " + std::to_string(beta));
    }
    if (k_opt < 2 || k_opt > n - 1) {
        fail(ErrorCode::InvalidArgument, "k_opt " + std::to_string(k_opt) +
                                             " outside [2, " + std::to_string(n - 1) + "]");
    }
    // The 1e-9 guard keeps products like 10 * 0.7 from flooring to 6.
    constexpr double kGuard = 1e-9;
    CandidateRange r;
    r.lo = std::max(2, static_cast<int>(std::floor(k_opt * (1.0 - beta) + kGuard)));
    r.hi = std::min(n - 1, static_cast<int>(std::ceil(k_opt * (1.0 + beta) - kGuard)));
    return r;
}

std::vector<int> canonicalize_labels(const std::vector<int>& labels) {
    std::vector<int> map;
    std::vector<int> out(labels.size());
    int next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int l = labels[i];
        if (l < 0) {
            fail(ErrorCode::InvalidArgument, "negative label");
        }
        if (static_cast<std::size_t>(l) >= map.size()) {
            map.resize(static_cast<std::size_t>(l) + 1, -1);
        }
        int& m = map[static_cast<std::size_t>(l)];
        if (m < 0) {
            m = next++;
        }
        out[i] = m;
    }
    return out;
}

ClusterAssignment lloyd(const Eigen::MatrixXd& points, const Eigen::MatrixXd& initial_centroids,
                        const KMeansOptions& options) {
    const auto k = initial_centroids.rows();
    if (k < 1 || k > points.rows() || initial_centroids.cols() != points.cols()) {
        fail(ErrorCode::BadK, "initial centroids do not fit the point set");
    }
    return run_lloyd(Rows(points), initial_centroids, options);
}

ClusterAssignment cluster_embedding(const SpectralEmbedding& embedding, int k, std::uint64_t seed,
                                    const KMeansOptions& options) {
    const int n = static_cast<int>(embedding.size());
    if (k < 2 || k > n - 1) {
        fail(ErrorCode::BadK, "k = " + std::to_string(k) + " outside [2, " +
                                  std::to_string(n - 1) + "]");
    }
    if (options.restarts < 1 || options.max_iterations < 1) {
        fail(ErrorCode::InvalidArgument, "k-means needs at least one restart and iteration");
    }
    const Rows pts(embedding.coords);
    std::mt19937_64 rng(seed);
    ClusterAssignment best;
    bool have = false;
    for (int r = 0; r < options.restarts; ++r) {
        auto run = run_lloyd(pts, kmeans_plus_plus(pts, k, rng), options);
        if (!have || run.inertia < best.inertia) {
            best = std::move(run);
            have = true;
        }
    }
    return best;
}

std::vector<double> silhouette_samples(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    const int n = static_cast<int>(points.rows());
    if (static_cast<std::size_t>(n) != labels.size()) {
        fail(ErrorCode::DimensionMismatch, "label count does not match point count");
    }
    if (n < 3) {
        fail(ErrorCode::InvalidArgument, "silhouette needs at least 3 points");
    }
    int k = 0;
    for (int l : labels) {
        if (l < 0) {
            fail(ErrorCode::InvalidArgument, "negative label");
        }
        k = std::max(k, l + 1);
    }
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) {
        ++sizes[static_cast<std::size_t>(l)];
    }
    if (std::count_if(sizes.begin(), sizes.end(), [](int s) { return s > 0; }) < 2) {
        fail(ErrorCode::SingleCluster, "silhouette is undefined for a single cluster");
    }

    const Rows pts(points);
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    std::vector<double> sums(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
        const int own = labels[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(own)] == 1) {
            continue;
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int j = 0; j < n; ++j) {
            if (j != i) {
                sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
                    std::sqrt(squared_distance(pts.row(i), pts.row(j), pts.d));
            }
        }
        const double a = sums[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c != own && sizes[static_cast<std::size_t>(c)] > 0) {
                b = std::min(b, sums[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
            }
        }
        const double denom = std::max(a, b);
        out[static_cast<std::size_t>(i)] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return out;
}

double silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    const auto s = silhouette_samples(points, labels);
    double total = 0.0;
    for (double v : s) {
        total += v;
    }
    return total / static_cast<double>(s.size());
}

ClusterSelection select_clusters(const EigenSystem& eig, const EigengapAnalysis& analysis,
                                 const SelectionOptions& options) {
    const int n = static_cast<int>(eig.eigenvalues.size());
    if (!(options.beta > 0.0 && options.beta < 1.0)) {
        fail(ErrorCode::BadBeta, "beta must lie in (0, 1), got " + std::to_string(options.beta));
    }
    CandidateRange range;
    if (options.fixed_k) {
        const int k = *options.fixed_k;
        if (k < 2 || k > n - 1) {
            fail(ErrorCode::BadK, "fixed k = " + std::to_string(k) + " outside [2, " +
                                      std::to_string(n - 1) + "]");
        }
        range = {k, k};
    } else {
        range = candidate_range(analysis.k_opt, options.beta, n);
    }

    ClusterSelection sel;
    sel.k_opt = analysis.k_opt;
    sel.beta = options.beta;
    sel.best_score = -std::numeric_limits<double>::infinity();
    for (int k = range.lo; k <= range.hi; ++k) {
        const auto u = make_embedding(eig, k, options.normalize_rows);
        ClusterCandidate cand;
        cand.k = k;
        cand.assignment = cluster_embedding(u, k, derive_seed(options.seed, static_cast<std::uint64_t>(k)),
                                            options.kmeans);
        cand.silhouette = silhouette(u, cand.assignment.labels);
        if (cand.silhouette > sel.best_score) {
            sel.best_score = cand.silhouette;
            sel.best_k = k;
            sel.best_labels = cand.assignment.labels;
        }
        sel.candidates.push_back(std::move(cand));
    }
    return sel;
}

std::string search_json(const ClusterSelection& selection) {
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& c : selection.candidates) {
        candidates.push_back({{"k", c.k}, {"silhouette", c.silhouette}, {"inertia", c.assignment.inertia}});
    }
    nlohmann::json j;
    j["candidates"] = std::move(candidates);
    j["best_k"] = selection.best_k;
    j["best_score"] = selection.best_score;
    j["k_opt"] = selection.k_opt;
    j["beta"] = selection.beta;
    return j.dump(2);
}

}  // namespace clasp
