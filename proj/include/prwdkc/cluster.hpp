#pragma once

#include "prwdkc/common.hpp"
#include "prwdkc/criteria.hpp"
#include "prwdkc/graph.hpp"
#include "prwdkc/kernel.hpp"
#include "prwdkc/kmeans.hpp"
#include "prwdkc/walk.hpp"

#include <cmath>
#include <utility>

namespace prwdkc {

struct PipelineOptions {
    WalkVariant walk = WalkVariant::standard;
    // L2-normalize kernel rows before k-means. Without this, the D_{nu+xi}^{-1}
    // column scaling lets a handful of low-measure transient vertices dominate
    // the embedding geometry on K-NN digraphs.
    bool normalize_rows = true;
    int threads = 1;
    Index kernel_cap = kDefaultKernelCap;
    ZeroDegreePolicy zero_degree = ZeroDegreePolicy::self_loop;
};

inline Matrix l2_normalize_rows(Matrix rows) {
    for (Index i = 0; i < rows.rows(); ++i) {
        const Real norm = rows.row(i).norm();
        if (norm > 0.0) rows.row(i) /= norm;
    }
    return rows;
}

/// Builds the parametrized walk for the requested variant. Exposed so callers
/// can stage the pipeline manually.
inline std::pair<TransitionMatrix, VertexMeasure> build_walk(const Digraph& g,
                                                             const VertexMeasure& measure,
                                                             WalkVariant variant,
                                                             ZeroDegreePolicy policy) {
    if (variant == WalkVariant::standard)
        return parametrized_walk(natural_transition(g, Direction::out, policy), measure);
    return modified_parametrized_walk(g, measure, policy);
}

/// The full clustering pipeline: parametrized walk -> diffusion kernel at
/// t_d -> k-means on the kernel rows.
inline ClusteringResult p_rwdkc(const Digraph& g, int k, const VertexMeasure& measure, long t_d,
                                const KMeansConfig& kmeans_config,
                                const PipelineOptions& options = {}) {
    require(t_d >= 0, "diffusion time must be >= 0");
    auto [p_nu, mu] = build_walk(g, measure, options.walk, options.zero_degree);
    const DiffusionKernel kernel = p_rwdk(p_nu, mu, t_d, options.kernel_cap);
    const Matrix rows =
        options.normalize_rows ? l2_normalize_rows(kernel.matrix) : kernel.matrix;

    KMeansConfig cfg = kmeans_config;
    cfg.k = k;
    ClusteringResult result = kmeans(rows, cfg, options.threads);
    result.params.method = "p-rwdkc";
    result.params.t_d = t_d;
    result.params.seed = cfg.seed;
    return result;
}

/// Power-iteration baseline: k-means straight on the rows of P^{t_d} with
/// P = D_out^{-1} W. t_d = 0 clusters identity rows, which is a documented
/// degenerate case (all pairwise distances equal) and is flagged as such.
inline ClusteringResult pic_baseline(const Digraph& g, int k, long t_d,
                                     const KMeansConfig& kmeans_config,
                                     const PipelineOptions& options = {}) {
    require(t_d >= 0, "diffusion time must be >= 0");
    const TransitionMatrix p = natural_transition(g, Direction::out, options.zero_degree);
    const Matrix rows = transition_power_dense(p, t_d);

    KMeansConfig cfg = kmeans_config;
    cfg.k = k;
    ClusteringResult result = kmeans(rows, cfg, options.threads);
    result.params.method = "pic";
    result.params.t_d = t_d;
    result.params.seed = cfg.seed;
    if (t_d == 0) result.partition.degenerate = true;
    return result;
}

}  // namespace prwdkc
