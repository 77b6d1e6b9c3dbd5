#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>

namespace gale {

inline constexpr const char* kVersion = "0.1.0";

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Base class for errors raised by the library. The CLI maps the derived
/// types onto its exit codes.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (exit code 2).
struct config_error : error {
  using error::error;
};

/// Malformed or unusable input data (exit code 3).
struct data_error : error {
  using error::error;
};

/// Numerical failure: factorization breakdown, non-convergence (exit code 4).
struct numeric_error : error {
  using error::error;
};

}  // namespace gale
