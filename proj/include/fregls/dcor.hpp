#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fregls/funcdata.hpp"

namespace fregls {

/// A sample for dependence screening: rows are observations. Plain rows use
/// the Euclidean metric; rows with a grid attached are curves measured in the
/// quadrature-weighted L2 metric.
struct DcorSample {
  Eigen::MatrixXd data;      // n x p (or n x M for curves)
  std::optional<Grid> grid;  // present for functional samples

  static DcorSample vector(Eigen::MatrixXd values);
  static DcorSample scalar(Eigen::VectorXd values);
  static DcorSample functional(const FunctionalSample& sample);

  int n() const { return static_cast<int>(data.rows()); }
};

/// Pairwise distances a_kl = ||X_k - X_l|| under the sample's metric.
Eigen::MatrixXd distance_matrix(const DcorSample& sample);

/// A_kl = a_kl - rowmean_k - colmean_l + grandmean; all row and column sums
/// of the result vanish.
Eigen::MatrixXd double_center(const Eigen::MatrixXd& distances);

struct DcorResult {
  double r = 0.0;  // distance correlation in [0, 1]
  double v2_xy = 0.0;
  double v2_xx = 0.0;
  double v2_yy = 0.0;
  bool degenerate = false;  // a constant sample forced r = 0
};

/// Empirical distance correlation with the biased 1/n^2 estimator:
/// V2(X,Y) = (1/n^2) sum A_kl B_kl, R = sqrt(V2(X,Y)/sqrt(V2(X) V2(Y))).
DcorResult distance_correlation(const DcorSample& x, const DcorSample& y);

struct ScreeningTable {
  std::vector<std::string> candidate_names;
  std::vector<std::string> response_names;
  Eigen::MatrixXd among_candidates;   // symmetric, unit diagonal
  Eigen::MatrixXd against_responses;  // candidates x responses
};

/// Distance correlations among candidate predictors and against each
/// response, in a single table.
ScreeningTable screening_table(const std::vector<std::pair<std::string, DcorSample>>& candidates,
                               const std::vector<std::pair<std::string, DcorSample>>& responses);

}  // namespace fregls
