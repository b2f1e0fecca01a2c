#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fregls/errors.hpp"

namespace fregls {

enum class CovFamily { Identity, Equicorrelated, HeteroBlock, Ar1, Spatial };

const char* to_string(CovFamily family);
CovFamily cov_family_from_string(const std::string& name);

/// Parametric error-covariance family Omega = sigma2 * Sigma(theta).
/// `sigma2` is the overall scale; it is never baked into the materialized
/// Sigma and is profile-estimated from whitened residuals by the fitters.
struct CovarianceSpec {
  CovFamily family = CovFamily::Identity;
  double theta = 0.0;            // AR1 / equicorrelated correlation, spatial range
  Eigen::VectorXd block_vars;    // heteroskedastic block variances
  Eigen::VectorXi block_sizes;   // block lengths, summing to n
  Eigen::MatrixXd locations;     // n x d site coordinates (spatial)
  double sigma2 = 1.0;

  static CovarianceSpec identity();
  static CovarianceSpec ar1(double theta);
  static CovarianceSpec equicorrelated(double theta);
  static CovarianceSpec hetero_block(Eigen::VectorXd vars, Eigen::VectorXi sizes);
  static CovarianceSpec spatial(double range, Eigen::MatrixXd locations);

  /// Copy with the dependence parameter replaced (theta for serial/spatial
  /// families, block variances for the block family).
  CovarianceSpec with_theta(double new_theta) const;
};

/// Materializes the n x n correlation/covariance matrix Sigma(theta):
/// identity; equicorrelated theta off-diagonal; AR(1) theta^|i-j|;
/// block-diagonal block variances; exponential spatial correlation
/// exp(-d(s_i, s_j)/range). Throws NumericalError when the parameters do not
/// yield a positive definite matrix.
Eigen::MatrixXd build_sigma(const CovarianceSpec& spec, int n);

/// Cholesky-based whitening transform: with Sigma = L L', applying L^{-1}
/// turns Sigma-correlated data into unit-covariance data.
class Whitener {
 public:
  explicit Whitener(const Eigen::MatrixXd& sigma);

  /// L^{-1} v.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;

  /// Sigma^{-1} v via the factorization (no explicit inverse).
  Eigen::VectorXd solve_sigma(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd solve_sigma(const Eigen::MatrixXd& m) const;

  const Eigen::MatrixXd& cholesky_lower() const { return lower_; }
  int size() const { return static_cast<int>(lower_.rows()); }

 private:
  Eigen::MatrixXd lower_;
};

inline Whitener whiten(const Eigen::MatrixXd& sigma) { return Whitener(sigma); }

struct ThetaEstimate {
  double theta = 0.0;            // serial/spatial parameter
  Eigen::VectorXd block_vars;    // block family
  bool degenerate = false;       // constant residuals: parameter pinned to 0
};

/// Residual-moment estimate of the dependence parameter: lag-1 sample
/// autocorrelation with the Marriott-Pope finite-sample correction (AR1,
/// clamped to [-0.99, 0.99]), average off-diagonal sample correlation
/// (equicorrelated, clamped to its PD range), per-block variances (block
/// family), least-squares fit of the exponential correlogram (spatial).
/// Requires n >= 3.
ThetaEstimate estimate_theta(const Eigen::VectorXd& residuals, const CovarianceSpec& spec);

/// Spec updated with an estimate.
CovarianceSpec with_estimate(const CovarianceSpec& spec, const ThetaEstimate& estimate);

struct CrossCovariance {
  Eigen::MatrixXd delta;   // q x n, Cov(eps_0, eps) on the correlation scale
  Eigen::MatrixXd sigma0;  // q x q, Corr(eps_0)
};

/// Cross-covariance terms for predicting q new observations at the given
/// horizons past the n training points. AR(1): delta_{j,i} = theta^{n+h_j-i},
/// sigma0_{jk} = theta^{|h_j-h_k|}. All other families treat new points as
/// exchangeable-independent (delta = 0, sigma0 = I). Horizons must be >= 1.
CrossCovariance cross_cov(const CovarianceSpec& spec, int n, const std::vector<int>& horizons);

}  // namespace fregls
