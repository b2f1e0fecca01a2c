#include "fregls/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fregls {

const char* to_string(BasisFamily family) {
  switch (family) {
    case BasisFamily::BSpline: return "bspline";
    case BasisFamily::Fpc: return "fpc";
  }
  return "?";
}

BasisSpec BasisSpec::truncated(int k) const {
  if (family != BasisFamily::Fpc) {
    throw std::invalid_argument("truncation is only meaningful for nested (FPC) bases");
  }
  if (k < 1 || k > this->k()) throw std::invalid_argument("truncation size out of range");
  BasisSpec out = *this;
  out.eval = eval.topRows(k);
  out.eigenvalues = eigenvalues.head(k);
  return out;
}

namespace {

// Clamped knot sequence with uniform interior knots: k + order knots, the
// first and last `order` of them pinned to the interval ends.
std::vector<double> clamped_knots(double a, double b, int k, int order) {
  std::vector<double> knots(static_cast<std::size_t>(k + order));
  const int interior = k - order;  // knots strictly inside (a, b)
  for (int i = 0; i < k + order; ++i) {
    if (i < order) {
      knots[i] = a;
    } else if (i >= k) {
      knots[i] = b;
    } else {
      knots[i] = a + (b - a) * static_cast<double>(i - order + 1) / (interior + 1);
    }
  }
  return knots;
}

}  // namespace

Eigen::VectorXd bspline_eval_at(const Grid& grid, int k, int order, double t) {
  if (order < 2) throw std::invalid_argument("B-spline order must be at least 2");
  if (k < order) {
    throw std::invalid_argument("B-spline basis needs K >= order (K=" + std::to_string(k) +
                                ", order=" + std::to_string(order) + ")");
  }
  const double a = grid.a(), b = grid.b();
  if (t < a || t > b) throw std::invalid_argument("evaluation point outside the grid interval");
  const std::vector<double> knots = clamped_knots(a, b, k, order);
  const int degree = order - 1;

  // Knot span index: knots[span] <= t < knots[span+1], clamped so the right
  // endpoint falls in the last nonempty span.
  int span;
  if (t >= b) {
    span = k - 1;
  } else {
    span = static_cast<int>(std::upper_bound(knots.begin(), knots.end(), t) - knots.begin()) - 1;
    span = std::clamp(span, degree, k - 1);
  }

  // Triangular scheme: values of the `order` B-splines alive on this span.
  std::vector<double> local(static_cast<std::size_t>(order), 0.0);
  std::vector<double> left(static_cast<std::size_t>(order), 0.0);
  std::vector<double> right(static_cast<std::size_t>(order), 0.0);
  local[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = local[r] / (right[r + 1] + left[j - r]);
      local[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    local[j] = saved;
  }

  Eigen::VectorXd values = Eigen::VectorXd::Zero(k);
  for (int r = 0; r <= degree; ++r) values(span - degree + r) = local[r];
  return values;
}

BasisSpec bspline_basis(const Grid& grid, int k, int order) {
  Eigen::MatrixXd eval(k, grid.size());
  for (int j = 0; j < grid.size(); ++j) {
    eval.col(j) = bspline_eval_at(grid, k, order, grid.points(j));
  }
  BasisSpec spec;
  spec.family = BasisFamily::BSpline;
  spec.order = order;
  spec.grid = grid;
  spec.eval = std::move(eval);
  return spec;
}

BasisSpec fpc_basis(const FunctionalSample& centered_sample, int k) {
  const int n = centered_sample.n();
  const int m = centered_sample.m();
  if (k < 1) throw std::invalid_argument("number of principal components must be at least 1");

  // Sample covariance operator on the grid, symmetrized by the quadrature
  // weights so the eigenvectors map back to L2-orthonormal functions.
  const Eigen::VectorXd sqrt_w = centered_sample.grid.weights.array().sqrt();
  Eigen::MatrixXd cov = centered_sample.values.transpose() * centered_sample.values /
                        static_cast<double>(n);
  cov = sqrt_w.asDiagonal() * cov * sqrt_w.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");

  // Eigen returns ascending order; count the numerically nonzero directions.
  const Eigen::VectorXd evals = eig.eigenvalues();
  const double lambda_max = std::max(evals(m - 1), 0.0);
  const double threshold = lambda_max * 1e-10;
  int numeric_rank = 0;
  for (int i = 0; i < m; ++i) {
    if (evals(i) > threshold && evals(i) > 0.0) ++numeric_rank;
  }
  const int attainable = std::min(numeric_rank, std::min(n - 1, m));
  if (k > attainable) {
    throw NumericalError("requested " + std::to_string(k) +
                         " principal components but attainable rank is " +
                         std::to_string(attainable));
  }

  Eigen::MatrixXd eval(k, m);
  Eigen::VectorXd eigenvalues(k);
  const Eigen::VectorXd inv_sqrt_w = sqrt_w.cwiseInverse();
  for (int j = 0; j < k; ++j) {
    const int src = m - 1 - j;  // descending
    eigenvalues(j) = std::max(evals(src), 0.0);
    Eigen::VectorXd fn = inv_sqrt_w.cwiseProduct(eig.eigenvectors().col(src));
    // Deterministic sign: nonnegative integral, tie-broken at the left endpoint.
    const double integral = centered_sample.grid.weights.dot(fn);
    if (integral < -1e-12 || (std::abs(integral) <= 1e-12 && fn(0) < 0.0)) fn = -fn;
    eval.row(j) = fn.transpose();
  }

  BasisSpec spec;
  spec.family = BasisFamily::Fpc;
  spec.grid = centered_sample.grid;
  spec.eval = std::move(eval);
  spec.eigenvalues = std::move(eigenvalues);
  return spec;
}

Eigen::MatrixXd project(const FunctionalSample& sample, const BasisSpec& basis) {
  if (!sample.grid.compatible_with(basis.grid)) throw std::invalid_argument("incompatible grids");
  const Eigen::MatrixXd weighted_basis =
      basis.grid.weights.asDiagonal() * basis.eval.transpose();  // M x K
  if (basis.family == BasisFamily::Fpc) {
    return sample.values * weighted_basis;  // quadrature scores
  }
  // Weighted least squares of each curve onto the spline span.
  const Eigen::MatrixXd gram = basis.eval * weighted_basis;  // K x K
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("singular B-spline Gram matrix");
  const Eigen::MatrixXd rhs = weighted_basis.transpose() * sample.values.transpose();  // K x n
  return llt.solve(rhs).transpose();
}

DesignMatrix assemble_design(const Eigen::MatrixXd& coef, const BasisSpec& basis_x,
                             const BasisSpec& basis_beta) {
  if (!basis_x.grid.compatible_with(basis_beta.grid)) {
    throw std::invalid_argument("incompatible grids");
  }
  if (coef.cols() != basis_x.k()) {
    throw std::invalid_argument("coefficient matrix has " + std::to_string(coef.cols()) +
                                " columns but the predictor basis has " +
                                std::to_string(basis_x.k()) + " functions");
  }
  const Eigen::MatrixXd cross =
      basis_x.eval * basis_x.grid.weights.asDiagonal() * basis_beta.eval.transpose();
  DesignMatrix design;
  design.z = coef * cross;
  design.coef = coef;
  design.basis_x = basis_x;
  design.basis_beta = basis_beta;
  return design;
}

Eigen::VectorXd beta_curve(const Eigen::VectorXd& b, const BasisSpec& basis_beta) {
  if (b.size() != basis_beta.k()) {
    throw std::invalid_argument("coefficient vector length does not match basis size");
  }
  return basis_beta.eval.transpose() * b;
}

}  // namespace fregls
