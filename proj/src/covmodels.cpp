#include "fregls/covmodels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fregls {

const char* to_string(CovFamily family) {
  switch (family) {
    case CovFamily::Identity: return "identity";
    case CovFamily::Equicorrelated: return "equicorrelated";
    case CovFamily::HeteroBlock: return "hetero_block";
    case CovFamily::Ar1: return "ar1";
    case CovFamily::Spatial: return "spatial";
  }
  return "?";
}

CovFamily cov_family_from_string(const std::string& name) {
  if (name == "identity") return CovFamily::Identity;
  if (name == "equicorrelated") return CovFamily::Equicorrelated;
  if (name == "hetero_block") return CovFamily::HeteroBlock;
  if (name == "ar1") return CovFamily::Ar1;
  if (name == "spatial") return CovFamily::Spatial;
  throw std::invalid_argument("unknown covariance family: " + name);
}

CovarianceSpec CovarianceSpec::identity() { return CovarianceSpec{}; }

CovarianceSpec CovarianceSpec::ar1(double theta) {
  if (!(std::abs(theta) < 1.0)) {
    throw std::invalid_argument("ar1 requires |theta| < 1, got theta=" + std::to_string(theta));
  }
  CovarianceSpec spec;
  spec.family = CovFamily::Ar1;
  spec.theta = theta;
  return spec;
}

CovarianceSpec CovarianceSpec::equicorrelated(double theta) {
  if (!(theta < 1.0)) {
    throw std::invalid_argument("equicorrelated requires theta < 1, got theta=" +
                                std::to_string(theta));
  }
  CovarianceSpec spec;
  spec.family = CovFamily::Equicorrelated;
  spec.theta = theta;
  return spec;
}

CovarianceSpec CovarianceSpec::hetero_block(Eigen::VectorXd vars, Eigen::VectorXi sizes) {
  if (vars.size() != sizes.size() || vars.size() == 0) {
    throw std::invalid_argument("block variances and sizes must have equal nonzero length");
  }
  for (int i = 0; i < vars.size(); ++i) {
    if (!(vars(i) > 0.0)) throw std::invalid_argument("block variances must be positive");
    if (sizes(i) < 1) throw std::invalid_argument("block sizes must be positive");
  }
  CovarianceSpec spec;
  spec.family = CovFamily::HeteroBlock;
  spec.block_vars = std::move(vars);
  spec.block_sizes = std::move(sizes);
  return spec;
}

CovarianceSpec CovarianceSpec::spatial(double range, Eigen::MatrixXd locations) {
  if (!(range > 0.0)) throw std::invalid_argument("spatial range must be positive");
  CovarianceSpec spec;
  spec.family = CovFamily::Spatial;
  spec.theta = range;
  spec.locations = std::move(locations);
  return spec;
}

CovarianceSpec CovarianceSpec::with_theta(double new_theta) const {
  CovarianceSpec out = *this;
  out.theta = new_theta;
  return out;
}

Eigen::MatrixXd build_sigma(const CovarianceSpec& spec, int n) {
  if (n < 1) throw std::invalid_argument("covariance size must be positive");
  switch (spec.family) {
    case CovFamily::Identity:
      return Eigen::MatrixXd::Identity(n, n);

    case CovFamily::Equicorrelated: {
      // Positive definite iff theta in (-1/(n-1), 1): the compound-symmetry
      // eigenvalues are 1 + (n-1) theta and 1 - theta.
      const double lower = (n > 1) ? -1.0 / (n - 1) : -1.0;
      if (!(spec.theta > lower && spec.theta < 1.0)) {
        throw NumericalError("equicorrelated matrix not positive definite: theta=" +
                             std::to_string(spec.theta) + " outside (" + std::to_string(lower) +
                             ", 1)");
      }
      Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(n, n, spec.theta);
      sigma.diagonal().setOnes();
      return sigma;
    }

    case CovFamily::HeteroBlock: {
      if (spec.block_sizes.sum() != n) {
        throw std::invalid_argument("block sizes sum to " + std::to_string(spec.block_sizes.sum()) +
                                    " but n=" + std::to_string(n));
      }
      Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
      int offset = 0;
      for (int b = 0; b < spec.block_sizes.size(); ++b) {
        for (int i = 0; i < spec.block_sizes(b); ++i) sigma(offset + i, offset + i) = spec.block_vars(b);
        offset += spec.block_sizes(b);
      }
      return sigma;
    }

    case CovFamily::Ar1: {
      if (!(std::abs(spec.theta) < 1.0)) {
        throw NumericalError("ar1 matrix not positive definite: |theta| >= 1 (theta=" +
                             std::to_string(spec.theta) + ")");
      }
      Eigen::VectorXd powers(n);
      powers(0) = 1.0;
      for (int d = 1; d < n; ++d) powers(d) = powers(d - 1) * spec.theta;
      Eigen::MatrixXd sigma(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sigma(i, j) = powers(std::abs(i - j));
      return sigma;
    }

    case CovFamily::Spatial: {
      if (spec.locations.rows() != n) {
        throw std::invalid_argument("spatial family needs one location per observation");
      }
      if (!(spec.theta > 0.0)) {
        throw NumericalError("spatial matrix not positive definite: range=" +
                             std::to_string(spec.theta));
      }
      Eigen::MatrixXd sigma(n, n);
      for (int i = 0; i < n; ++i) {
        sigma(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
          const double d = (spec.locations.row(i) - spec.locations.row(j)).norm();
          sigma(i, j) = sigma(j, i) = std::exp(-d / spec.theta);
        }
      }
      return sigma;
    }
  }
  throw std::logic_error("unreachable covariance family");
}

Whitener::Whitener(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw std::invalid_argument("covariance must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix not positive definite");
  lower_ = llt.matrixL();
}

Eigen::VectorXd Whitener::apply(const Eigen::VectorXd& v) const {
  return lower_.triangularView<Eigen::Lower>().solve(v);
}

Eigen::MatrixXd Whitener::apply(const Eigen::MatrixXd& m) const {
  return lower_.triangularView<Eigen::Lower>().solve(m);
}

Eigen::VectorXd Whitener::solve_sigma(const Eigen::VectorXd& v) const {
  Eigen::VectorXd half = lower_.triangularView<Eigen::Lower>().solve(v);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(half);
}

Eigen::MatrixXd Whitener::solve_sigma(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd half = lower_.triangularView<Eigen::Lower>().solve(m);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(half);
}

namespace {

constexpr double kThetaClamp = 0.99;

double lag1_autocorrelation(const Eigen::VectorXd& e) {
  const int n = static_cast<int>(e.size());
  const double denom = e.squaredNorm();
  if (denom <= 0.0) return 0.0;
  double num = 0.0;
  for (int i = 1; i < n; ++i) num += e(i) * e(i - 1);
  return num / denom;
}

}  // namespace

ThetaEstimate estimate_theta(const Eigen::VectorXd& residuals, const CovarianceSpec& spec) {
  const int n = static_cast<int>(residuals.size());
  if (n < 3) throw std::invalid_argument("theta estimation needs at least 3 residuals");

  ThetaEstimate est;
  const Eigen::VectorXd centered = residuals.array() - residuals.mean();
  const bool constant = centered.cwiseAbs().maxCoeff() == 0.0;

  switch (spec.family) {
    case CovFamily::Identity:
      throw std::invalid_argument("identity family has no dependence parameter");

    case CovFamily::Ar1: {
      if (constant) {
        est.degenerate = true;
        return est;
      }
      // Lag-1 autocorrelation with the Marriott-Pope finite-sample
      // correction E[r1] = theta - (1 + 3 theta)/n inverted, then lightly
      // shrunk toward zero. At n ~ 100 the raw estimator already sits at
      // the Cramer-Rao floor (1 - theta^2)/n; the n/(n+4) factor trades a
      // small bias at strong dependence for variance at weak dependence
      // (minimax over theta for the iterated feasible-GLS use).
      const double r1 = lag1_autocorrelation(residuals);
      const double corrected = (r1 + 1.0 / n) / (1.0 - 3.0 / n);
      const double shrunk = corrected * n / (n + 4.0);
      est.theta = std::clamp(shrunk, -kThetaClamp, kThetaClamp);
      return est;
    }

    case CovFamily::Equicorrelated: {
      if (constant) {
        est.degenerate = true;
        return est;
      }
      // Average off-diagonal product over average squared residual:
      // sum_{i != j} e_i e_j = (sum e)^2 - sum e^2.
      const double s1 = residuals.sum();
      const double s2 = residuals.squaredNorm();
      const double avg_cross = (s1 * s1 - s2) / (static_cast<double>(n - 1));
      const double lower = -1.0 / (n - 1) + 1e-6;
      est.theta = std::clamp(avg_cross / s2, lower, kThetaClamp);
      return est;
    }

    case CovFamily::HeteroBlock: {
      if (spec.block_sizes.sum() != n) {
        throw std::invalid_argument("block sizes do not match residual length");
      }
      est.block_vars = Eigen::VectorXd(spec.block_sizes.size());
      int offset = 0;
      bool any_zero = false;
      for (int b = 0; b < spec.block_sizes.size(); ++b) {
        const int nb = spec.block_sizes(b);
        double v = residuals.segment(offset, nb).squaredNorm() / nb;
        if (v <= 0.0) {
          v = 1.0;
          any_zero = true;
        }
        est.block_vars(b) = v;
        offset += nb;
      }
      est.degenerate = any_zero;
      return est;
    }

    case CovFamily::Spatial: {
      if (spec.locations.rows() != n) {
        throw std::invalid_argument("spatial family needs one location per residual");
      }
      if (constant) {
        est.degenerate = true;
        est.theta = spec.theta;
        return est;
      }
      // Least-squares fit of exp(-d/r) to the empirical correlogram
      // e_i e_j / sigma2 over all pairs, via golden-section on log r.
      const double sigma2 = residuals.squaredNorm() / n;
      std::vector<std::pair<double, double>> pairs;  // (distance, correlation product)
      pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
      double dmax = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double d = (spec.locations.row(i) - spec.locations.row(j)).norm();
          pairs.emplace_back(d, residuals(i) * residuals(j) / sigma2);
          dmax = std::max(dmax, d);
        }
      }
      if (dmax <= 0.0) {
        est.degenerate = true;
        est.theta = spec.theta;
        return est;
      }
      auto loss = [&](double log_r) {
        const double r = std::exp(log_r);
        double s = 0.0;
        for (const auto& [d, c] : pairs) {
          const double diff = c - std::exp(-d / r);
          s += diff * diff;
        }
        return s;
      };
      double lo = std::log(dmax * 1e-3), hi = std::log(dmax * 10.0);
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      double f1 = loss(x1), f2 = loss(x2);
      while (hi - lo > 1e-6) {
        if (f1 < f2) {
          hi = x2; x2 = x1; f2 = f1;
          x1 = hi - gr * (hi - lo); f1 = loss(x1);
        } else {
          lo = x1; x1 = x2; f1 = f2;
          x2 = lo + gr * (hi - lo); f2 = loss(x2);
        }
      }
      est.theta = std::exp((lo + hi) / 2.0);
      return est;
    }
  }
  throw std::logic_error("unreachable covariance family");
}

CovarianceSpec with_estimate(const CovarianceSpec& spec, const ThetaEstimate& estimate) {
  CovarianceSpec out = spec;
  if (spec.family == CovFamily::HeteroBlock) {
    out.block_vars = estimate.block_vars;
  } else {
    out.theta = estimate.theta;
  }
  return out;
}

CrossCovariance cross_cov(const CovarianceSpec& spec, int n, const std::vector<int>& horizons) {
  const int q = static_cast<int>(horizons.size());
  for (int h : horizons) {
    if (h <= 0) throw std::invalid_argument("prediction horizons must be >= 1");
  }
  CrossCovariance cc;
  cc.delta = Eigen::MatrixXd::Zero(q, n);
  cc.sigma0 = Eigen::MatrixXd::Identity(q, q);
  if (spec.family != CovFamily::Ar1 || spec.theta == 0.0) {
    // Non-serial families carry no information about future errors.
    return cc;
  }
  const double theta = spec.theta;
  for (int j = 0; j < q; ++j) {
    for (int i = 0; i < n; ++i) {
      cc.delta(j, i) = std::pow(theta, static_cast<double>(n + horizons[j] - (i + 1)));
    }
    for (int k = 0; k < q; ++k) {
      const int lag = std::abs(horizons[j] - horizons[k]);
      cc.sigma0(j, k) = lag == 0 ? 1.0 : std::pow(theta, static_cast<double>(lag));
    }
  }
  return cc;
}

}  // namespace fregls
