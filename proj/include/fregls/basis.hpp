#pragma once

#include <Eigen/Dense>

#include "fregls/funcdata.hpp"

namespace fregls {

enum class BasisFamily { BSpline, Fpc };

const char* to_string(BasisFamily family);

/// K basis functions evaluated on a grid; rows of `eval` are the functions.
/// FPC bases are orthonormal under the grid quadrature and carry the
/// eigenvalues of the sample covariance operator in nonincreasing order.
struct BasisSpec {
  BasisFamily family = BasisFamily::BSpline;
  int order = 0;  // B-spline order (degree + 1); 0 for FPC
  Grid grid;
  Eigen::MatrixXd eval;         // K x M
  Eigen::VectorXd eigenvalues;  // FPC only

  int k() const { return static_cast<int>(eval.rows()); }

  /// First `k` basis functions (FPC bases are nested by construction).
  BasisSpec truncated(int k) const;
};

/// K B-splines of the given order on a clamped uniform knot sequence over the
/// grid interval. Requires K >= order >= 2.
BasisSpec bspline_basis(const Grid& grid, int k, int order = 4);

/// Evaluates all K clamped B-splines at one point (exposed for testing
/// against an independent recursion).
Eigen::VectorXd bspline_eval_at(const Grid& grid, int k, int order, double t);

/// Leading K eigenfunctions of the sample covariance operator of a centered
/// sample. The eigenproblem is solved on the weight-symmetrized covariance
/// D^{1/2} Cov D^{1/2} and mapped back, so eigenfunctions are L2-orthonormal
/// under the grid quadrature. Sign convention: nonnegative integral over the
/// interval, falling back to nonnegative value at t_1.
BasisSpec fpc_basis(const FunctionalSample& centered_sample, int k);

/// Coefficients of each curve in the basis: quadrature scores for FPC,
/// weighted least squares for B-splines. Returns n x K.
Eigen::MatrixXd project(const FunctionalSample& sample, const BasisSpec& basis);

struct DesignMatrix {
  Eigen::MatrixXd z;     // n x K_beta
  Eigen::MatrixXd coef;  // n x K_x
  BasisSpec basis_x;
  BasisSpec basis_beta;
};

/// Z_{ik} = sum_m w_m (sum_j C_{ij} psi_j(t_m)) phi_k(t_m); collapses to the
/// score matrix C when both sides share one orthonormal FPC basis.
DesignMatrix assemble_design(const Eigen::MatrixXd& coef, const BasisSpec& basis_x,
                             const BasisSpec& basis_beta);

/// Pointwise evaluation of the coefficient function: beta(t_m) = sum_k b_k phi_k(t_m).
Eigen::VectorXd beta_curve(const Eigen::VectorXd& b, const BasisSpec& basis_beta);

}  // namespace fregls
