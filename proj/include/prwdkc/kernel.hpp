#pragma once

#include "prwdkc/common.hpp"
#include "prwdkc/walk.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace prwdkc {

/// Dense symmetric similarity kernel tagged with its diffusion time and the
/// measure whose inverse diagonal normalizes it.
struct DiffusionKernel {
    Matrix matrix;
    long time = 0;
    VertexMeasure base_measure;

    Index size() const { return matrix.rows(); }

    Real symmetry_gap() const {
        return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    }
};

/// d_t^2(i,j) = K_ii + K_jj - 2 K_ij, clamped at 0 (cancellation on
/// near-duplicate rows can leave -1e-15).
inline Real diffusion_distance(const DiffusionKernel& k, Index i, Index j) {
    require(i >= 0 && i < k.size() && j >= 0 && j < k.size(), "vertex index out of range");
    const Real d2 = k.matrix(i, i) + k.matrix(j, j) - 2.0 * k.matrix(i, j);
    return d2 < 0.0 ? 0.0 : d2;
}

namespace detail {

inline void renormalize_rows(Matrix& m) {
    const Vector sums = m.rowwise().sum();
    m.array().colwise() /= sums.array();
}

inline void renormalize_rows(SpMatrix& m) {
    const Vector sums = m * Vector::Ones(m.cols());
    for (Index i = 0; i < m.outerSize(); ++i)
        for (SpMatrix::InnerIterator it(m, i); it; ++it) it.valueRef() /= sums(i);
}

inline constexpr int kMaxDyadicExponent = 30;

// square once, renormalizing; sparse results densify past the fill threshold
inline TransitionMatrix square_renormalized(const TransitionMatrix& p) {
    if (p.is_dense()) {
        Matrix sq = p.dense() * p.dense();
        renormalize_rows(sq);
        return TransitionMatrix(std::move(sq), p.kind());
    }
    SpMatrix sq = (p.sparse() * p.sparse()).pruned();
    const Real fill = static_cast<Real>(sq.nonZeros()) /
                      (static_cast<Real>(sq.rows()) * static_cast<Real>(sq.cols()));
    if (fill > TransitionMatrix::kDenseFillThreshold) {
        Matrix d(sq);
        renormalize_rows(d);
        return TransitionMatrix(std::move(d), p.kind());
    }
    renormalize_rows(sq);
    return TransitionMatrix(std::move(sq), p.kind());
}

}  // namespace detail

/// P^{2^j} by j repeated squarings, rows renormalized after every squaring to
/// absorb rounding drift.
inline TransitionMatrix dyadic_power(const TransitionMatrix& p, int j,
                                     int j_max = detail::kMaxDyadicExponent) {
    require(j >= 0, "dyadic exponent must be >= 0");
    require(j <= j_max, "dyadic exponent " + std::to_string(j) + " exceeds the configured cap " +
                            std::to_string(j_max));
    TransitionMatrix result = p;
    for (int step = 0; step < j; ++step) result = detail::square_renormalized(result);
    return result;
}

/// P^t as a dense matrix, by square-and-multiply with the same row
/// renormalization discipline. t = 0 gives the identity.
inline Matrix transition_power_dense(const TransitionMatrix& p, long t) {
    require(t >= 0, "power must be >= 0");
    const Index n = p.size();
    if (t == 0) return Matrix::Identity(n, n);

    Matrix result;
    bool have_result = false;
    Matrix base = p.to_dense();
    for (long remaining = t;;) {
        if (remaining & 1) {
            if (!have_result) {
                result = base;
                have_result = true;
            } else {
                result = result * base;
                detail::renormalize_rows(result);
            }
        }
        remaining >>= 1;
        if (remaining == 0) break;
        base = base * base;
        detail::renormalize_rows(base);
    }
    return result;
}

/// K_t = P^{2t} D_d^{-1} for a reversible walk on an undirected graph.
/// The detailed-balance precondition D_d P = (D_d P)^T is asserted.
inline DiffusionKernel rwdk(const TransitionMatrix& p, const VertexMeasure& degrees, long t,
                            Index kernel_cap = kDefaultKernelCap) {
    degrees.validate();
    require(t >= 0, "diffusion time must be >= 0");
    require(degrees.size() == p.size(), "measure/operator dimension mismatch");
    require(p.size() <= kernel_cap,
            "graph too large for a dense kernel (N=" + std::to_string(p.size()) + ", cap " +
                std::to_string(kernel_cap) + ")");

    const Matrix pd = p.to_dense();
    const Matrix balance = degrees.values.asDiagonal() * pd;
    require((balance - balance.transpose()).cwiseAbs().maxCoeff() <= 1e-8,
            "walk is not reversible w.r.t. the degree measure; rwdk needs an undirected source");

    Matrix k = transition_power_dense(p, 2 * t);
    k.array().rowwise() /= degrees.values.transpose().array();
    return {std::move(k), t, degrees};
}

/// Assembles K_{t,nu} from an already-computed dense power P_(nu)^t.
inline DiffusionKernel p_rwdk_from_power(Matrix power, const VertexMeasure& nu_plus_xi, long t) {
    nu_plus_xi.validate();
    require(t >= 0, "diffusion time must be >= 0");
    require(nu_plus_xi.size() == power.rows(), "measure/operator dimension mismatch");
    power.array().rowwise() /= nu_plus_xi.values.transpose().array();
    DiffusionKernel out{std::move(power), t, nu_plus_xi};
    require(out.symmetry_gap() <= 1e-9,
            "kernel symmetry check failed; the supplied operator is not reversible w.r.t. the "
            "supplied measure");
    return out;
}

/// K_{t,nu} = P_(nu)^t D_{nu+xi}^{-1}. Symmetry (a consequence of detailed
/// balance) is asserted numerically for every emitted kernel.
inline DiffusionKernel p_rwdk(const TransitionMatrix& p_nu, const VertexMeasure& nu_plus_xi,
                              long t, Index kernel_cap = kDefaultKernelCap) {
    require(p_nu.size() <= kernel_cap,
            "graph too large for a dense kernel (N=" + std::to_string(p_nu.size()) + ", cap " +
                std::to_string(kernel_cap) + ")");
    return p_rwdk_from_power(transition_power_dense(p_nu, t), nu_plus_xi, t);
}

}  // namespace prwdkc
