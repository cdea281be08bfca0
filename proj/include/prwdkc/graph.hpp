#pragma once

#include "prwdkc/common.hpp"
#include "prwdkc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace prwdkc {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Point cloud with optional ground-truth class ids. Labels are evaluation
/// data only; no clustering path reads them.
struct FeatureDataset {
    Matrix points;                      // N x d
    std::optional<std::vector<int>> labels;
    std::string name = "dataset";

    Index size() const { return points.rows(); }
    Index dim() const { return points.cols(); }

    void validate() const {
        require(points.rows() >= 2, "dataset needs at least 2 points");
        require(points.cols() >= 1, "dataset needs at least 1 feature");
        require(points.allFinite(), "dataset contains non-finite coordinates");
        if (labels) require(static_cast<Index>(labels->size()) == points.rows(),
                            "label count does not match point count");
    }
};

/// Weighted digraph as a row-major sparse adjacency with cached degrees.
/// Immutable after construction.
class Digraph {
  public:
    Digraph() = default;

    explicit Digraph(SpMatrix adjacency) : w_(std::move(adjacency)) {
        require(w_.rows() == w_.cols(), "adjacency must be square");
        w_.prune(0.0);
        w_.makeCompressed();
        for (Index i = 0; i < w_.rows(); ++i)
            for (SpMatrix::InnerIterator it(w_, i); it; ++it)
                require(it.value() >= 0.0, "negative edge weight at (" + std::to_string(i) +
                                               "," + std::to_string(it.col()) + ")");
        out_deg_ = w_ * Vector::Ones(w_.cols());
        in_deg_ = SpMatrix(w_.transpose()) * Vector::Ones(w_.rows());
    }

    static Digraph from_triplets(Index n, const std::vector<Eigen::Triplet<Real>>& triplets) {
        SpMatrix w(n, n);
        w.setFromTriplets(triplets.begin(), triplets.end());
        return Digraph(std::move(w));
    }

    Index size() const { return w_.rows(); }
    const SpMatrix& adjacency() const { return w_; }
    const Vector& out_degrees() const { return out_deg_; }
    const Vector& in_degrees() const { return in_deg_; }
    Real weight(Index i, Index j) const { return w_.coeff(i, j); }
    Index edge_count() const { return w_.nonZeros(); }

    bool is_symmetric(Real tol = 0.0) const {
        SpMatrix d = SpMatrix(w_.transpose()) - w_;
        for (Index i = 0; i < d.outerSize(); ++i)
            for (SpMatrix::InnerIterator it(d, i); it; ++it)
                if (std::abs(it.value()) > tol) return false;
        return true;
    }

  private:
    SpMatrix w_;
    Vector out_deg_;
    Vector in_deg_;
};

/// Assignment of each vertex to one of k clusters.
struct Partition {
    std::vector<int> assignment;
    int k = 0;
    bool degenerate = false;  // set when some cluster id is unused

    Index size() const { return static_cast<Index>(assignment.size()); }

    void validate() const {
        std::vector<char> seen(static_cast<std::size_t>(k), 0);
        for (int a : assignment) {
            require(a >= 0 && a < k, "cluster id out of range");
            seen[static_cast<std::size_t>(a)] = 1;
        }
        if (!degenerate)
            for (char s : seen) require(s, "empty cluster in non-degenerate partition");
    }

    std::vector<Index> cluster_sizes() const {
        std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
        for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
        return sizes;
    }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// K = floor(log N), the K-NN rule used throughout the experiments.
inline int default_knn_k(Index n) {
    return std::max<int>(1, static_cast<int>(std::floor(std::log(static_cast<double>(n)))));
}

/// Unweighted K-NN digraph: edge i->j iff j is among the K nearest neighbors
/// of i by Euclidean distance (self excluded, distance ties all kept).
inline Digraph build_knn_digraph(const FeatureDataset& data, int k_neighbors, int threads = 1) {
    data.validate();
    const Index n = data.size();
    require(k_neighbors >= 1 && k_neighbors <= n - 1,
            "K out of range: " + std::to_string(k_neighbors) + " for N=" + std::to_string(n));

    const Matrix& x = data.points;

    std::vector<std::vector<Eigen::Triplet<Real>>> rows(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ui) {
        const Index i = static_cast<Index>(ui);
        // per-pair difference form: equal true distances stay exactly tied,
        // which the <= indicator depends on (quantized features tie often)
        Vector d2 = (x.rowwise() - x.row(i)).rowwise().squaredNorm();
        d2(i) = std::numeric_limits<Real>::infinity();
        std::vector<Real> sorted(d2.data(), d2.data() + n);
        std::nth_element(sorted.begin(), sorted.begin() + (k_neighbors - 1), sorted.end());
        const Real kth = sorted[static_cast<std::size_t>(k_neighbors - 1)];
        auto& out = rows[ui];
        for (Index j = 0; j < n; ++j)
            if (j != i && d2(j) <= kth) out.emplace_back(i, j, 1.0);
    });

    std::vector<Eigen::Triplet<Real>> triplets;
    for (auto& r : rows) triplets.insert(triplets.end(), r.begin(), r.end());
    return Digraph::from_triplets(n, triplets);
}

enum class SymmetrizeMode { half_sum, or_max };

inline Digraph symmetrize(const Digraph& g, SymmetrizeMode mode) {
    const SpMatrix& w = g.adjacency();
    SpMatrix wt = w.transpose();
    if (mode == SymmetrizeMode::half_sum) return Digraph(SpMatrix(0.5 * (w + wt)));
    return Digraph(w.cwiseMax(wt));
}

/// W_gamma = gamma*W + (1-gamma)*W^T with degrees recomputed.
inline Digraph mix_adjacency(const Digraph& g, Real gamma) {
    require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0,1]");
    if (gamma == 1.0) return g;
    SpMatrix wt = g.adjacency().transpose();
    if (gamma == 0.0) return Digraph(std::move(wt));
    return Digraph(SpMatrix(gamma * g.adjacency() + (1.0 - gamma) * wt));
}

/// Induced subgraph on the largest weakly-connected vertex set, plus the map
/// from new vertex index to original index.
inline std::pair<Digraph, std::vector<Index>> largest_weak_component(const Digraph& g) {
    const Index n = g.size();
    require(n > 0, "empty graph");

    // union-find over the symmetrized edge set
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Index{0});
    std::function<Index(Index)> find = [&](Index v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    const SpMatrix& w = g.adjacency();
    for (Index i = 0; i < w.outerSize(); ++i)
        for (SpMatrix::InnerIterator it(w, i); it; ++it) {
            const Index a = find(i), b = find(it.col());
            if (a != b) parent[static_cast<std::size_t>(a)] = b;
        }

    std::vector<Index> comp_size(static_cast<std::size_t>(n), 0);
    for (Index v = 0; v < n; ++v) ++comp_size[static_cast<std::size_t>(find(v))];
    Index best_root = 0;
    for (Index v = 1; v < n; ++v)
        if (comp_size[static_cast<std::size_t>(v)] > comp_size[static_cast<std::size_t>(best_root)])
            best_root = v;

    std::vector<Index> new_to_old;
    std::vector<Index> old_to_new(static_cast<std::size_t>(n), -1);
    for (Index v = 0; v < n; ++v)
        if (find(v) == best_root) {
            old_to_new[static_cast<std::size_t>(v)] = static_cast<Index>(new_to_old.size());
            new_to_old.push_back(v);
        }

    std::vector<Eigen::Triplet<Real>> triplets;
    for (Index i = 0; i < w.outerSize(); ++i) {
        const Index ni = old_to_new[static_cast<std::size_t>(i)];
        if (ni < 0) continue;
        for (SpMatrix::InnerIterator it(w, i); it; ++it) {
            const Index nj = old_to_new[static_cast<std::size_t>(it.col())];
            if (nj >= 0) triplets.emplace_back(ni, nj, it.value());
        }
    }
    return {Digraph::from_triplets(static_cast<Index>(new_to_old.size()), triplets),
            std::move(new_to_old)};
}

}  // namespace prwdkc
