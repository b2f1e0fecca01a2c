#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fregls/errors.hpp"

namespace fregls {

/// Evaluation grid a = t_1 < ... < t_M = b with trapezoid quadrature weights
/// (w_1 = (t_2-t_1)/2, w_M = (t_M-t_{M-1})/2, interior w_m = (t_{m+1}-t_{m-1})/2).
struct Grid {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;

  /// Builds a grid from strictly increasing points; throws std::invalid_argument
  /// if fewer than two points or not strictly increasing.
  static Grid from_points(Eigen::VectorXd pts);

  /// m equispaced points over [a, b].
  static Grid uniform(double a, double b, int m);

  int size() const { return static_cast<int>(points.size()); }
  double a() const { return points(0); }
  double b() const { return points(points.size() - 1); }

  bool compatible_with(const Grid& other, double tol = 1e-12) const;
};

/// n curves evaluated on a shared grid; row i holds curve i. Non-finite
/// entries are rejected at construction.
struct FunctionalSample {
  Grid grid;
  Eigen::MatrixXd values;        // n x M
  std::vector<std::string> ids;  // empty, or one label per row

  FunctionalSample(Grid g, Eigen::MatrixXd v, std::vector<std::string> row_ids = {});

  int n() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(values.cols()); }
};

/// Quadrature approximation of the L2 inner product of two curves on one grid.
double inner_product(const Grid& grid, const Eigen::VectorXd& f, const Eigen::VectorXd& g);

/// Cross-grid form; throws std::invalid_argument("incompatible grids") when the
/// grids differ.
double inner_product(const Grid& grid_f, const Eigen::VectorXd& f,
                     const Grid& grid_g, const Eigen::VectorXd& g);

double l2_norm_sq(const Grid& grid, const Eigen::VectorXd& f);

struct CenteredSample {
  FunctionalSample sample;
  Eigen::VectorXd mean_curve;
};

/// Subtracts the pointwise mean curve.
CenteredSample center(const FunctionalSample& sample);

/// n standard Wiener paths sampled on the grid: W(t_1) ~ N(0, t_1) (exactly 0
/// when t_1 = 0) and independent Gaussian increments of variance t_{m+1}-t_m.
/// Deterministic given the seed.
FunctionalSample simulate_wiener(int n, const Grid& grid, std::uint64_t seed);

}  // namespace fregls
