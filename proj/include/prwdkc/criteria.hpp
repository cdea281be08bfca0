#pragma once

#include "prwdkc/common.hpp"
#include "prwdkc/graph.hpp"
#include "prwdkc/kernel.hpp"
#include "prwdkc/kmeans.hpp"
#include "prwdkc/walk.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace prwdkc {

/// Larger is better. A degenerate score (zero within-cluster spread) carries
/// a +infinity sentinel and loses to any finite score during selection.
struct ValidityScore {
    enum class Kind { ch_euclidean, dch_kl };

    Real value = 0.0;
    Kind kind = Kind::ch_euclidean;
    int k = 0;
    Index n = 0;
    bool degenerate = false;
};

namespace detail {

inline void check_partition_for_score(const Partition& partition, Index n) {
    require(partition.size() == n, "partition/data size mismatch");
    require(partition.k >= 2, "validity criteria need k >= 2");
    require(n > partition.k, "validity criteria need N > k");
    for (Index s : partition.cluster_sizes()) require(s > 0, "empty cluster");
}

}  // namespace detail

/// Calinski-Harabasz variance ratio with squared-Euclidean distances:
/// (N-k)/(k-1) * sum_j |V_j| d(mu_j, mu) / sum_j sum_{x in V_j} d(x, mu_j).
inline ValidityScore ch_criterion(const Matrix& points, const Partition& partition) {
    const Index n = points.rows();
    detail::check_partition_for_score(partition, n);
    const int k = partition.k;

    const RowVector global = points.colwise().mean();
    Matrix centroids = Matrix::Zero(k, points.cols());
    std::vector<Real> counts(static_cast<std::size_t>(k), 0.0);
    for (Index i = 0; i < n; ++i) {
        centroids.row(partition.assignment[static_cast<std::size_t>(i)]) += points.row(i);
        counts[static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(i)])] += 1.0;
    }
    Real between = 0.0;
    for (int c = 0; c < k; ++c) {
        centroids.row(c) /= counts[static_cast<std::size_t>(c)];
        between += counts[static_cast<std::size_t>(c)] * (centroids.row(c) - global).squaredNorm();
    }
    Real within = 0.0;
    for (Index i = 0; i < n; ++i)
        within +=
            (points.row(i) - centroids.row(partition.assignment[static_cast<std::size_t>(i)]))
                .squaredNorm();

    ValidityScore score;
    score.kind = ValidityScore::Kind::ch_euclidean;
    score.k = k;
    score.n = n;
    if (within <= 0.0) {
        score.value = std::numeric_limits<Real>::infinity();
        score.degenerate = true;
    } else {
        score.value = (static_cast<Real>(n - k) / static_cast<Real>(k - 1)) * between / within;
    }
    return score;
}

namespace detail {

// KL divergence of smoothed, renormalized discrete distributions. Both
// arguments get p~ = (p + eps) / (1 + N*eps); exact equality still gives 0.
inline Real kl_divergence_smoothed(const RowVector& p, const RowVector& q, Real eps) {
    const Real n = static_cast<Real>(p.size());
    const Real denom = 1.0 + n * eps;
    Real kl = 0.0;
    for (Index y = 0; y < p.size(); ++y) {
        const Real py = (p(y) + eps) / denom;
        const Real qy = (q(y) + eps) / denom;
        kl += py * std::log(py / qy);
    }
    return std::max(kl, 0.0);
}

}  // namespace detail

/// Density-based CH: the CH ratio with squared-Euclidean distance replaced by
/// the KL divergence between probability rows; vertex i is represented by the
/// i-th row of the supplied row-stochastic matrix.
inline ValidityScore dch_criterion(const Matrix& prob_rows, const Partition& partition,
                                   Real kl_eps = kKlEpsilon) {
    const Index n = prob_rows.rows();
    detail::check_partition_for_score(partition, n);
    require(((prob_rows * Vector::Ones(prob_rows.cols())).array() - 1.0).abs().maxCoeff() <= 1e-6,
            "dch_criterion needs row-stochastic input rows");
    const int k = partition.k;

    const RowVector global = prob_rows.colwise().mean();
    Matrix centroids = Matrix::Zero(k, prob_rows.cols());
    std::vector<Real> counts(static_cast<std::size_t>(k), 0.0);
    for (Index i = 0; i < n; ++i) {
        centroids.row(partition.assignment[static_cast<std::size_t>(i)]) += prob_rows.row(i);
        counts[static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(i)])] += 1.0;
    }
    Real between = 0.0;
    for (int c = 0; c < k; ++c) {
        centroids.row(c) /= counts[static_cast<std::size_t>(c)];
        between += counts[static_cast<std::size_t>(c)] *
                   detail::kl_divergence_smoothed(centroids.row(c), global, kl_eps);
    }
    Real within = 0.0;
    for (Index i = 0; i < n; ++i)
        within += detail::kl_divergence_smoothed(
            prob_rows.row(i),
            centroids.row(partition.assignment[static_cast<std::size_t>(i)]), kl_eps);

    ValidityScore score;
    score.kind = ValidityScore::Kind::dch_kl;
    score.k = k;
    score.n = n;
    // within-divergence at rounding scale means the rows have collapsed to
    // their centroids (the large-t duplicate-row regime); the ratio of two
    // noise-level quantities carries no information
    if (within <= static_cast<Real>(n) * 1e-12) {
        score.value = std::numeric_limits<Real>::infinity();
        score.degenerate = true;
    } else {
        score.value = (static_cast<Real>(n - k) / static_cast<Real>(k - 1)) * between / within;
    }
    return score;
}

// ---------------------------------------------------------------------------
// Diffusion-time estimation
// ---------------------------------------------------------------------------

struct TdTraceEntry {
    int j = 0;
    long t = 1;
    ValidityScore score;
    Partition partition;
};

struct DiffusionTimeEstimate {
    long t_star = 1;  // 2^{j_star}
    int j_star = 0;
    int max_exponent = 15;
    std::vector<TdTraceEntry> trace;
};

enum class WalkVariant { standard, modified };
enum class TdScoreMode { ch_on_features, dch_on_walk };

struct TdOptions {
    int max_exponent = 15;  // J: candidates t = 2^0 .. 2^J
    TdScoreMode mode = TdScoreMode::dch_on_walk;
    const Matrix* features = nullptr;  // required for ch_on_features
    WalkVariant walk = WalkVariant::standard;
    bool dch_fixed_rows = false;  // score DCH against P_(nu) rows instead of the candidate power
    int threads = 1;
    ZeroDegreePolicy zero_degree = ZeroDegreePolicy::self_loop;
};

/// Dyadic diffusion-time search: build P_(nu) with the uniform measure,
/// k-means the rows of P_(nu)^{2^j} for j = 0..J, score each partition (CH on
/// the original coordinates when available, DCH on the walk rows otherwise)
/// and return t* = 2^{argmax}. Ties and plateaus resolve toward smaller j.
inline DiffusionTimeEstimate estimate_diffusion_time(const Digraph& g, int k,
                                                     const TdOptions& options,
                                                     const KMeansConfig& kmeans_config) {
    require(k >= 2, "k must be >= 2");
    require(options.max_exponent >= 0, "max exponent must be >= 0");
    if (options.mode == TdScoreMode::ch_on_features) {
        require(options.features != nullptr, "ch_on_features scoring needs the original points");
        require(options.features->rows() == g.size(), "features/graph size mismatch");
    }

    const VertexMeasure uniform = VertexMeasure::uniform(g.size());
    auto [p_nu, mu] =
        options.walk == WalkVariant::standard
            ? parametrized_walk(natural_transition(g, Direction::out, options.zero_degree), uniform)
            : modified_parametrized_walk(g, uniform, options.zero_degree);
    (void)mu;

    const Matrix base_rows = p_nu.to_dense();
    DiffusionTimeEstimate estimate;
    estimate.max_exponent = options.max_exponent;

    TransitionMatrix current = p_nu;
    for (int j = 0; j <= options.max_exponent; ++j) {
        const Matrix rows = current.to_dense();

        KMeansConfig cfg = kmeans_config;
        cfg.k = k;
        cfg.seed = derive_seed(kmeans_config.seed, static_cast<uint64_t>(j));
        ClusteringResult clustered = kmeans(rows, cfg, options.threads);

        ValidityScore score;
        if (options.mode == TdScoreMode::ch_on_features)
            score = ch_criterion(*options.features, clustered.partition);
        else
            score = dch_criterion(options.dch_fixed_rows ? base_rows : rows, clustered.partition);

        estimate.trace.push_back(
            {j, 1L << j, score, std::move(clustered.partition)});
        if (j < options.max_exponent) current = detail::square_renormalized(current);
    }

    int best_j = -1;
    Real best_value = -std::numeric_limits<Real>::infinity();
    for (const auto& entry : estimate.trace) {
        if (entry.score.degenerate || !std::isfinite(entry.score.value)) continue;
        if (entry.score.value > best_value) {
            best_value = entry.score.value;
            best_j = entry.j;
        }
    }
    require(best_j >= 0, "no informative diffusion time: every candidate partition is degenerate");
    estimate.j_star = best_j;
    estimate.t_star = 1L << best_j;
    return estimate;
}

}  // namespace prwdkc
