#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace prwdkc {

using Real = double;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SpMatrix = Eigen::SparseMatrix<Real, Eigen::RowMajor>;

// Strictly positive floor for vertex measures (walk-ops contract).
inline constexpr Real kMeasureFloor = 1e-12;

// Smoothing added to probability rows before KL divergences.
inline constexpr Real kKlEpsilon = 1e-10;

// Kernels are materialized dense; refuse graphs beyond this size.
inline constexpr Index kDefaultKernelCap = 20000;

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

}  // namespace prwdkc
