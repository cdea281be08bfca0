#pragma once

#include "prwdkc/common.hpp"
#include "prwdkc/graph.hpp"
#include "prwdkc/parallel.hpp"
#include "prwdkc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace prwdkc {

struct KMeansConfig {
    enum class Init { plus_plus, uniform_random };

    int k = 2;
    int restarts = 100;
    int max_iters = 300;
    Real tol = 1e-6;  // relative inertia change
    uint64_t seed = 0;
    Init init = Init::plus_plus;

    void validate() const {
        require(k >= 2, "k must be >= 2");
        require(restarts >= 1, "restarts must be >= 1");
        require(max_iters >= 1, "max_iters must be >= 1");
        require(tol >= 0.0, "tol must be >= 0");
    }
};

/// Provenance of a clustering result: which method produced it and with what
/// parameters. Unused fields keep their sentinel defaults.
struct PipelineParams {
    std::string method;
    Real alpha = std::numeric_limits<Real>::quiet_NaN();
    Real gamma = std::numeric_limits<Real>::quiet_NaN();
    long t = -1;
    long t_d = -1;
    uint64_t seed = 0;
};

struct ClusteringResult {
    Partition partition;
    Real inertia = 0.0;
    PipelineParams params;
    std::vector<Real> per_restart_inertias;
};

namespace detail {

// N x k matrix of squared Euclidean distances, via the expansion
// |x|^2 + |c|^2 - 2 x.c  (clamped: cancellation can leave small negatives)
inline Matrix squared_distances(const Matrix& rows, const Matrix& centroids) {
    Matrix d2 = -2.0 * (rows * centroids.transpose());
    d2.colwise() += rows.rowwise().squaredNorm();
    d2.rowwise() += centroids.rowwise().squaredNorm().transpose();
    return d2.cwiseMax(0.0);
}

inline Vector squared_distances_to(const Matrix& rows, const RowVector& point) {
    Vector d2 = rows.rowwise().squaredNorm();
    d2.array() += point.squaredNorm();
    d2.noalias() -= 2.0 * (rows * point.transpose());
    return d2.cwiseMax(0.0);
}

inline Matrix init_plus_plus(const Matrix& rows, int k, Rng& rng) {
    const Index n = rows.rows();
    Matrix centroids(k, rows.cols());
    centroids.row(0) = rows.row(static_cast<Index>(rng.uniform_index(static_cast<uint64_t>(n))));
    Vector d2 = squared_distances_to(rows, centroids.row(0));

    const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
    for (int c = 1; c < k; ++c) {
        const Real total = d2.sum();
        Index chosen = -1;
        if (total <= 0.0) {
            chosen = static_cast<Index>(rng.uniform_index(static_cast<uint64_t>(n)));
        } else {
            Real best_potential = std::numeric_limits<Real>::infinity();
            Vector best_d2;
            for (int trial = 0; trial < trials; ++trial) {
                const Real r = rng.uniform() * total;
                Real cum = 0.0;
                Index cand = n - 1;
                for (Index i = 0; i < n; ++i) {
                    cum += d2(i);
                    if (cum >= r) {
                        cand = i;
                        break;
                    }
                }
                Vector cand_d2 = d2.cwiseMin(squared_distances_to(rows, rows.row(cand)));
                const Real potential = cand_d2.sum();
                if (potential < best_potential) {
                    best_potential = potential;
                    best_d2 = std::move(cand_d2);
                    chosen = cand;
                }
            }
            d2 = std::move(best_d2);
        }
        centroids.row(c) = rows.row(chosen);
    }
    return centroids;
}

inline Matrix init_uniform(const Matrix& rows, int k, Rng& rng) {
    const Index n = rows.rows();
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (int c = 0; c < k; ++c) {
        const auto j = c + static_cast<Index>(rng.uniform_index(static_cast<uint64_t>(n - c)));
        std::swap(idx[static_cast<std::size_t>(c)], idx[static_cast<std::size_t>(j)]);
    }
    Matrix centroids(k, rows.cols());
    for (int c = 0; c < k; ++c) centroids.row(c) = rows.row(idx[static_cast<std::size_t>(c)]);
    return centroids;
}

struct LloydOutcome {
    std::vector<int> assignment;
    Real inertia = 0.0;
};

inline LloydOutcome lloyd(const Matrix& rows, const KMeansConfig& config, uint64_t seed) {
    const Index n = rows.rows();
    const int k = config.k;
    Rng rng(seed);
    Matrix centroids = config.init == KMeansConfig::Init::plus_plus
                           ? init_plus_plus(rows, k, rng)
                           : init_uniform(rows, k, rng);

    const Vector row_sq = rows.rowwise().squaredNorm();
    std::vector<int> assignment(static_cast<std::size_t>(n), 0);
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    Real prev_inertia = std::numeric_limits<Real>::infinity();

    for (int iter = 0; iter < config.max_iters; ++iter) {
        Matrix d2 = squared_distances(rows, centroids);

        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            Real best_d = d2(i, 0);
            for (int c = 1; c < k; ++c)
                if (d2(i, c) < best_d) {
                    best_d = d2(i, c);
                    best = c;
                }
            if (assignment[static_cast<std::size_t>(i)] != best) {
                assignment[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        std::fill(counts.begin(), counts.end(), Index{0});
        for (int a : assignment) ++counts[static_cast<std::size_t>(a)];

        // empty-cluster repair: reseed at the point farthest from its centroid
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Index farthest = 0;
            Real far_d = -1.0;
            for (Index i = 0; i < n; ++i) {
                const int a = assignment[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] <= 1) continue;  // keep donors non-empty
                if (d2(i, a) > far_d) {
                    far_d = d2(i, a);
                    farthest = i;
                }
            }
            --counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(farthest)])];
            assignment[static_cast<std::size_t>(farthest)] = c;
            ++counts[static_cast<std::size_t>(c)];
            changed = true;
        }

        centroids.setZero();
        for (Index i = 0; i < n; ++i)
            centroids.row(assignment[static_cast<std::size_t>(i)]) += rows.row(i);
        for (int c = 0; c < k; ++c)
            centroids.row(c) /= static_cast<Real>(counts[static_cast<std::size_t>(c)]);

        //   sum_i |x_i - mu_{a_i}|^2 = sum_i |x_i|^2 - sum_c n_c |mu_c|^2
        Real inertia = row_sq.sum();
        for (int c = 0; c < k; ++c)
            inertia -= static_cast<Real>(counts[static_cast<std::size_t>(c)]) *
                       centroids.row(c).squaredNorm();
        inertia = std::max(inertia, 0.0);

        const Real change = std::abs(prev_inertia - inertia);
        prev_inertia = inertia;
        if (!changed || change <= config.tol * std::max(inertia, Real(1e-300))) break;
    }

    return {std::move(assignment), prev_inertia};
}

}  // namespace detail

/// All restart outcomes, one per derived child seed. Restart r uses
/// derive_seed(config.seed, r), so the thread count never affects results.
inline std::vector<ClusteringResult> kmeans_all_restarts(const Matrix& rows,
                                                         const KMeansConfig& config,
                                                         int threads = 1) {
    config.validate();
    require(rows.allFinite(), "k-means input contains non-finite values");
    require(rows.rows() >= config.k,
            "k (" + std::to_string(config.k) + ") exceeds the number of points (" +
                std::to_string(rows.rows()) + ")");

    std::vector<ClusteringResult> outcomes(static_cast<std::size_t>(config.restarts));
    parallel_for(static_cast<std::size_t>(config.restarts), threads, [&](std::size_t r) {
        auto run = detail::lloyd(rows, config, derive_seed(config.seed, r));
        ClusteringResult& out = outcomes[r];
        out.partition = Partition{std::move(run.assignment), config.k, false};
        out.inertia = run.inertia;
        out.params.method = "kmeans";
        out.params.seed = derive_seed(config.seed, r);
    });
    return outcomes;
}

/// Best-inertia result over all restarts (ties go to the earlier restart).
inline ClusteringResult kmeans(const Matrix& rows, const KMeansConfig& config, int threads = 1) {
    auto outcomes = kmeans_all_restarts(rows, config, threads);
    std::size_t best = 0;
    for (std::size_t r = 1; r < outcomes.size(); ++r)
        if (outcomes[r].inertia < outcomes[best].inertia) best = r;

    ClusteringResult result = std::move(outcomes[best]);
    result.per_restart_inertias.reserve(outcomes.size());
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        result.per_restart_inertias.push_back(r == best ? result.inertia : outcomes[r].inertia);
    result.params.seed = config.seed;
    return result;
}

}  // namespace prwdkc
