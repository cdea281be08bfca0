#pragma once

#include "prwdkc/common.hpp"
#include "prwdkc/graph.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace prwdkc {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Row-stochastic operator. Held sparse while it pays off, densified when the
/// predicted fill crosses kDenseFillThreshold (powers of stochastic matrices
/// densify quickly).
class TransitionMatrix {
  public:
    enum class Kind { natural_out, natural_in, mixed, parametrized, modified_parametrized };

    static constexpr Real kDenseFillThreshold = 0.25;

    TransitionMatrix() = default;
    TransitionMatrix(SpMatrix m, Kind kind) : sparse_(std::move(m)), kind_(kind) {
        sparse_.makeCompressed();
    }
    TransitionMatrix(Matrix m, Kind kind) : dense_(std::move(m)), is_dense_(true), kind_(kind) {}

    Index size() const { return is_dense_ ? dense_.rows() : sparse_.rows(); }
    Kind kind() const { return kind_; }
    bool is_dense() const { return is_dense_; }

    const Matrix& dense() const {
        require(is_dense_, "transition matrix is sparse");
        return dense_;
    }
    const SpMatrix& sparse() const {
        require(!is_dense_, "transition matrix is dense");
        return sparse_;
    }

    Matrix to_dense() const { return is_dense_ ? dense_ : Matrix(sparse_); }

    Real fill_ratio() const {
        if (is_dense_) return 1.0;
        const Real total = static_cast<Real>(sparse_.rows()) * static_cast<Real>(sparse_.cols());
        return total == 0.0 ? 0.0 : static_cast<Real>(sparse_.nonZeros()) / total;
    }

    Real coeff(Index i, Index j) const { return is_dense_ ? dense_(i, j) : sparse_.coeff(i, j); }

    Vector row_sums() const {
        if (is_dense_) return dense_.rowwise().sum();
        return sparse_ * Vector::Ones(sparse_.cols());
    }

    // v^T P as a column vector
    Vector left_apply(const Vector& v) const {
        require(v.size() == size(), "vector/operator dimension mismatch");
        if (is_dense_) return dense_.transpose() * v;
        return sparse_.transpose() * v;
    }

    Real max_row_sum_deviation() const {
        return (row_sums().array() - 1.0).abs().maxCoeff();
    }

  private:
    SpMatrix sparse_;
    Matrix dense_;
    bool is_dense_ = false;
    Kind kind_ = Kind::natural_out;
};

/// Strictly positive per-vertex weights.
struct VertexMeasure {
    enum class Tag { uniform, degree, power_measure, alt_power_measure, xi, nu_plus_xi, stationary };

    Vector values;
    Tag tag = Tag::uniform;

    Index size() const { return values.size(); }

    static VertexMeasure uniform(Index n) { return {Vector::Ones(n), Tag::uniform}; }
    static VertexMeasure degree(const Digraph& g) { return {g.out_degrees(), Tag::degree}; }

    void validate() const {
        require(values.allFinite(), "vertex measure has non-finite entries");
        require((values.array() > 0.0).all(), "vertex measure has non-positive entries");
    }
};

/// (t, gamma, alpha) knobs of the iterated-power vertex measure. The defaults
/// are the neutral setting.
struct MeasureParams {
    long t = 1;
    Real gamma = 0.5;
    Real alpha = 1.0;

    void validate() const {
        require(t >= 0, "measure parameter t must be >= 0");
        require(gamma >= 0.0 && gamma <= 1.0, "measure parameter gamma must lie in [0,1]");
        require(alpha >= 0.0 && std::isfinite(alpha), "measure parameter alpha must be >= 0");
    }
};

enum class Direction { out, in };

/// What to do with a vertex whose degree is zero in the requested direction.
/// The self-loop patch keeps the operator stochastic; K-NN digraphs routinely
/// have in-degree-0 outliers.
enum class ZeroDegreePolicy { error, self_loop };

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// P = D_out^{-1} W (or D_in^{-1} W^T).
inline TransitionMatrix natural_transition(const Digraph& g, Direction dir,
                                           ZeroDegreePolicy policy = ZeroDegreePolicy::error) {
    const Index n = g.size();
    const Vector& deg = dir == Direction::out ? g.out_degrees() : g.in_degrees();
    SpMatrix w = dir == Direction::out ? g.adjacency() : SpMatrix(g.adjacency().transpose());

    std::vector<Eigen::Triplet<Real>> triplets;
    triplets.reserve(static_cast<std::size_t>(w.nonZeros()) + static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        if (deg(i) > 0.0) {
            for (SpMatrix::InnerIterator it(w, i); it; ++it)
                triplets.emplace_back(i, it.col(), it.value() / deg(i));
        } else if (policy == ZeroDegreePolicy::self_loop) {
            triplets.emplace_back(i, i, 1.0);
        } else {
            throw Error("vertex " + std::to_string(i) + " has zero " +
                        (dir == Direction::out ? std::string("out") : std::string("in")) +
                        "-degree (enable the self-loop patch or fix the graph)");
        }
    }
    SpMatrix p(n, n);
    p.setFromTriplets(triplets.begin(), triplets.end());
    return TransitionMatrix(std::move(p), dir == Direction::out
                                              ? TransitionMatrix::Kind::natural_out
                                              : TransitionMatrix::Kind::natural_in);
}

/// P_gamma = gamma*P_out + (1-gamma)*P_in.
inline TransitionMatrix mix_transition(const TransitionMatrix& p_out,
                                       const TransitionMatrix& p_in, Real gamma) {
    require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0,1]");
    require(p_out.size() == p_in.size(), "operator dimension mismatch");
    if (p_out.is_dense() || p_in.is_dense()) {
        return TransitionMatrix(Matrix(gamma * p_out.to_dense() + (1.0 - gamma) * p_in.to_dense()),
                                TransitionMatrix::Kind::mixed);
    }
    return TransitionMatrix(SpMatrix(gamma * p_out.sparse() + (1.0 - gamma) * p_in.sparse()),
                            TransitionMatrix::Kind::mixed);
}

namespace detail {

// The P_gamma used by the iterated-power measure; P_out / P_in are only built
// when their weight is nonzero.
inline TransitionMatrix measure_mix(const Digraph& g, Real gamma, ZeroDegreePolicy policy) {
    if (gamma == 1.0) return natural_transition(g, Direction::out, policy);
    if (gamma == 0.0) return natural_transition(g, Direction::in, policy);
    return mix_transition(natural_transition(g, Direction::out, policy),
                          natural_transition(g, Direction::in, policy), gamma);
}

inline Vector floored_power(const Vector& base, Real alpha) {
    Vector nu(base.size());
    for (Index i = 0; i < base.size(); ++i) {
        const Real b = std::max(base(i), kMeasureFloor);
        nu(i) = std::max(std::pow(b, alpha), kMeasureFloor);  // 0^0 = 1 via the base floor
    }
    return nu;
}

}  // namespace detail

/// nu(i) = ((1/N) * column sum of P_gamma^t at i)^alpha, computed as the
/// vector recursion v <- v P_gamma so only O(t * nnz) work is done.
inline VertexMeasure power_vertex_measure(const Digraph& g, const MeasureParams& params,
                                          ZeroDegreePolicy policy = ZeroDegreePolicy::self_loop) {
    params.validate();
    const Index n = g.size();
    Vector v = Vector::Constant(n, 1.0 / static_cast<Real>(n));
    if (params.t > 0) {
        const TransitionMatrix pg = detail::measure_mix(g, params.gamma, policy);
        for (long step = 0; step < params.t; ++step) v = pg.left_apply(v);
    }
    return {detail::floored_power(v, params.alpha), VertexMeasure::Tag::power_measure};
}

/// Appendix variant: same column-sum-power formula but driven by the
/// single-normalization walk P_gamma = D_gamma^{-1} W_gamma. Large t is run
/// as an iteration capped at 10*N steps with an l1 convergence stop; if the
/// cap is hit unconverged (period-2 chains oscillate forever) the average of
/// the last two iterates is returned, which is the Cesaro limit.
inline VertexMeasure alt_power_vertex_measure(const Digraph& g, const MeasureParams& params) {
    params.validate();
    const Index n = g.size();
    const Digraph mixed = mix_adjacency(g, params.gamma);
    require((mixed.out_degrees().array() > 0.0).all(),
            "W_gamma has a zero row sum; every vertex needs an incident edge");
    const TransitionMatrix pg = natural_transition(mixed, Direction::out);

    Vector v = Vector::Constant(n, 1.0 / static_cast<Real>(n));
    const long cap = std::min<long>(params.t, 10 * static_cast<long>(n));
    bool converged = false;
    Vector prev = v;
    for (long step = 0; step < cap; ++step) {
        prev = v;
        v = pg.left_apply(v);
        if ((v - prev).lpNorm<1>() <= 1e-10) {
            converged = true;
            break;
        }
    }
    if (!converged && params.t > cap) v = 0.5 * (v + prev);
    return {detail::floored_power(v, params.alpha), VertexMeasure::Tag::alt_power_measure};
}

/// xi = nu^T P, floored for downstream division safety.
inline VertexMeasure xi_measure(const VertexMeasure& nu, const TransitionMatrix& p) {
    require(nu.size() == p.size(), "measure/operator dimension mismatch");
    Vector xi = p.left_apply(nu.values).cwiseMax(kMeasureFloor);
    return {std::move(xi), VertexMeasure::Tag::xi};
}

namespace detail {

// Shared tail of the two parametrized-walk constructions. M must satisfy
// row_sum(M)_i = nu_i + xi_true_i; flooring xi moves the missing mass onto
// the diagonal so the operator stays exactly stochastic and reversible.
template <typename MatrixLike>
std::pair<TransitionMatrix, VertexMeasure> reversible_from_balance(
    MatrixLike M, const Vector& xi_true, const Vector& base, TransitionMatrix::Kind kind);

template <>
inline std::pair<TransitionMatrix, VertexMeasure> reversible_from_balance<SpMatrix>(
    SpMatrix M, const Vector& xi_true, const Vector& base, TransitionMatrix::Kind kind) {
    const Index n = M.rows();
    const Vector xi = xi_true.cwiseMax(kMeasureFloor);
    SpMatrix diag_fix(n, n);
    std::vector<Eigen::Triplet<Real>> fixes;
    for (Index i = 0; i < n; ++i)
        if (xi(i) > xi_true(i)) fixes.emplace_back(i, i, xi(i) - xi_true(i));
    diag_fix.setFromTriplets(fixes.begin(), fixes.end());
    if (!fixes.empty()) M = SpMatrix(M + diag_fix);

    const Vector mu = base + xi;
    SpMatrix p = M;
    for (Index i = 0; i < p.outerSize(); ++i)
        for (SpMatrix::InnerIterator it(p, i); it; ++it) it.valueRef() /= mu(i);
    VertexMeasure out{mu, VertexMeasure::Tag::nu_plus_xi};
    return {TransitionMatrix(std::move(p), kind), std::move(out)};
}

template <>
inline std::pair<TransitionMatrix, VertexMeasure> reversible_from_balance<Matrix>(
    Matrix M, const Vector& xi_true, const Vector& base, TransitionMatrix::Kind kind) {
    const Vector xi = xi_true.cwiseMax(kMeasureFloor);
    M.diagonal() += (xi - xi_true);
    const Vector mu = base + xi;
    M.array().colwise() /= mu.array();
    VertexMeasure out{mu, VertexMeasure::Tag::nu_plus_xi};
    return {TransitionMatrix(std::move(M), kind), std::move(out)};
}

}  // namespace detail

/// P_(nu) = (I + D_{xi/nu})^{-1} (P + D_nu^{-1} P^T D_nu), computed in the
/// equivalent form (D_nu + D_xi)^{-1} (D_nu P + P^T D_nu). Returns the
/// operator together with the reversibility measure nu + xi.
inline std::pair<TransitionMatrix, VertexMeasure> parametrized_walk(const TransitionMatrix& p,
                                                                    const VertexMeasure& nu) {
    nu.validate();
    require(nu.size() == p.size(), "measure/operator dimension mismatch");
    const Vector& v = nu.values;
    if (p.is_dense()) {
        const Matrix& pd = p.dense();
        Matrix M = v.asDiagonal() * pd;
        M.noalias() += pd.transpose() * v.asDiagonal();
        return detail::reversible_from_balance<Matrix>(std::move(M), pd.transpose() * v, v,
                                                       TransitionMatrix::Kind::parametrized);
    }
    const SpMatrix& ps = p.sparse();
    SpMatrix M = SpMatrix(v.asDiagonal() * ps) + SpMatrix(SpMatrix(ps.transpose()) * v.asDiagonal());
    return detail::reversible_from_balance<SpMatrix>(std::move(M), ps.transpose() * v, v,
                                                     TransitionMatrix::Kind::parametrized);
}

/// Heterogeneous-degree variant built straight from the adjacency:
/// (I + D_{xi/nu~})^{-1} D_out^{-1} (W + D_nu^{-1} W^T D_nu) with xi = nu^T W
/// and nu~_i = nu_i d_i^out. Returns the operator and nu~ + xi.
inline std::pair<TransitionMatrix, VertexMeasure> modified_parametrized_walk(
    const Digraph& g, const VertexMeasure& nu,
    ZeroDegreePolicy policy = ZeroDegreePolicy::self_loop) {
    nu.validate();
    require(nu.size() == g.size(), "measure/graph dimension mismatch");
    const Index n = g.size();

    SpMatrix w = g.adjacency();
    Vector dout = g.out_degrees();
    if ((dout.array() <= 0.0).any()) {
        require(policy == ZeroDegreePolicy::self_loop,
                "graph has a zero out-degree vertex (enable the self-loop patch)");
        std::vector<Eigen::Triplet<Real>> loops;
        for (Index i = 0; i < n; ++i)
            if (dout(i) <= 0.0) {
                loops.emplace_back(i, i, 1.0);
                dout(i) = 1.0;
            }
        SpMatrix fix(n, n);
        fix.setFromTriplets(loops.begin(), loops.end());
        w = SpMatrix(w + fix);
    }

    const Vector& v = nu.values;
    const Vector xi_true = w.transpose() * v;            // xi = nu^T W
    const Vector nu_tilde = v.cwiseProduct(dout);        // nu~_i = nu_i d_i^out
    SpMatrix M = SpMatrix(v.asDiagonal() * w) + SpMatrix(SpMatrix(w.transpose()) * v.asDiagonal());
    return detail::reversible_from_balance<SpMatrix>(
        std::move(M), xi_true, nu_tilde, TransitionMatrix::Kind::modified_parametrized);
}

/// L_RW,(nu) = I - P_(nu).
inline Matrix generalized_rw_laplacian(const TransitionMatrix& p_nu) {
    Matrix l = -p_nu.to_dense();
    l.diagonal().array() += 1.0;
    return l;
}

enum class LaplacianForm { unnormalized, normalized };

/// L_(nu) = D_{nu+xi} - (D_nu P + P^T D_nu) and its symmetrically normalized
/// form. Symmetric by construction; the unnormalized form has zero row sums.
inline Matrix generalized_laplacian(const TransitionMatrix& p, const VertexMeasure& nu,
                                    LaplacianForm form) {
    nu.validate();
    require(nu.size() == p.size(), "measure/operator dimension mismatch");
    const Vector& v = nu.values;
    const Matrix pd = p.to_dense();
    const Vector xi = xi_measure(nu, p).values;
    const Vector mu = v + xi;
    require((mu.array() > 0.0).all(), "nu + xi has a non-positive entry");

    Matrix l = -(v.asDiagonal() * pd);
    l.noalias() -= pd.transpose() * v.asDiagonal();
    l.diagonal() += mu;
    l = 0.5 * (l + l.transpose());  // enforce exact symmetry against rounding
    if (form == LaplacianForm::normalized) {
        const Vector s = mu.array().rsqrt();
        l = s.asDiagonal() * l * s.asDiagonal();
        l = 0.5 * (l + l.transpose());
    }
    return l;
}

/// pi_nu = (nu+xi) / sum(nu+xi); verified to be stationary for p_nu.
inline VertexMeasure stationary_distribution(const TransitionMatrix& p_nu,
                                             const VertexMeasure& nu_plus_xi) {
    nu_plus_xi.validate();
    require(nu_plus_xi.size() == p_nu.size(), "measure/operator dimension mismatch");
    Vector pi = nu_plus_xi.values / nu_plus_xi.values.sum();
    const Real err = (p_nu.left_apply(pi) - pi).lpNorm<Eigen::Infinity>();
    require(err <= 1e-8,
            "candidate stationary distribution fails pi^T P = pi^T (residual " +
                std::to_string(err) + "); operator is not reversible w.r.t. the given measure");
    return {std::move(pi), VertexMeasure::Tag::stationary};
}

}  // namespace prwdkc
