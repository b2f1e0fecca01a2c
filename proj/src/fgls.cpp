#include "fregls/fgls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fregls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double squared(double x) { return x * x; }

}  // namespace

const char* to_string(FitMethod method) {
  switch (method) {
    case FitMethod::Lm: return "lm";
    case FitMethod::Gls: return "gls";
    case FitMethod::Igls: return "igls";
  }
  return "?";
}

double gls_criterion(const Eigen::VectorXd& y, const Eigen::MatrixXd& z,
                     const Eigen::VectorXd& b, const Eigen::MatrixXd& sigma) {
  if (z.rows() != y.size() || z.cols() != b.size()) {
    throw std::invalid_argument("dimension mismatch in GLS criterion");
  }
  const Eigen::VectorXd r = y - z * b;
  Whitener w(sigma);
  return w.apply(r).squaredNorm();
}

double gccv_score(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat,
                  const Eigen::MatrixXd& smoother, const Eigen::MatrixXd& sigma) {
  const auto n = y.size();
  if (y_hat.size() != n || smoother.rows() != n || smoother.cols() != n || sigma.rows() != n ||
      sigma.cols() != n) {
    throw std::invalid_argument("dimension mismatch in GCCV score");
  }
  const double rss = (y - y_hat).squaredNorm();
  // tr(C) with C = 2 S Sigma - S Sigma S'; the second trace is computed as
  // an elementwise sum against S instead of a second n x n product.
  const Eigen::MatrixXd p = smoother * sigma;
  const double tr_c = 2.0 * p.trace() - p.cwiseProduct(smoother).sum();
  if (tr_c >= static_cast<double>(n)) return kInf;
  return rss / squared(1.0 - tr_c / static_cast<double>(n));
}

FglsFit fit_gls(const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const CovarianceSpec& spec) {
  const int n = static_cast<int>(y.size());
  const int k = static_cast<int>(z.cols());
  if (z.rows() != n) throw std::invalid_argument("response and design row counts differ");
  if (k < 1) throw std::invalid_argument("design matrix needs at least one column");
  if (n <= k) {
    throw std::invalid_argument("need more observations than coefficients (n=" +
                                std::to_string(n) + ", K=" + std::to_string(k) + ")");
  }

  Eigen::MatrixXd zt;
  Eigen::VectorXd yt;
  if (spec.family == CovFamily::Identity) {
    zt = z;
    yt = y;
  } else {
    Whitener w(build_sigma(spec, n));
    zt = w.apply(z);
    yt = w.apply(y);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zt);
  if (qr.rank() < k) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (int i = qr.rank(); i < k; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += std::to_string(perm(i));
    }
    throw NumericalError("design matrix rank deficient after whitening; offending columns: " +
                         cols);
  }

  FglsFit fit;
  fit.b = qr.solve(yt);
  fit.fitted = z * fit.b;
  fit.residuals = y - fit.fitted;
  const Eigen::VectorXd rt = yt - zt * fit.b;

  // tr(C) = tr((Z'WZ)^{-1} Z'Z) for the GLS hat matrix; both factors are
  // K x K so no n x n product is formed.
  const Eigen::MatrixXd ztwz = zt.transpose() * zt;
  const Eigen::MatrixXd a_inv = Eigen::LLT<Eigen::MatrixXd>(ztwz).solve(
      Eigen::MatrixXd::Identity(k, k));
  const double tr_c = a_inv.cwiseProduct(z.transpose() * z).sum();
  fit.df = tr_c;

  const double rss_raw = fit.residuals.squaredNorm();
  if (tr_c >= static_cast<double>(n)) {
    fit.gccv = kInf;
    fit.sigma2_hat = std::numeric_limits<double>::quiet_NaN();
  } else {
    fit.gccv = rss_raw / squared(1.0 - tr_c / static_cast<double>(n));
    fit.sigma2_hat = rt.squaredNorm() / (static_cast<double>(n) - tr_c);
  }
  fit.cov_b = fit.sigma2_hat * a_inv;
  fit.cov = spec;
  fit.theta_hat = spec.family == CovFamily::HeteroBlock ? 0.0 : spec.theta;
  fit.method = spec.family == CovFamily::Identity ? FitMethod::Lm : FitMethod::Gls;
  return fit;
}

FglsFit fit_igls(const Eigen::VectorXd& y, const Eigen::MatrixXd& z,
                 const CovarianceSpec& family, const IglsOptions& opts) {
  if (family.family == CovFamily::Identity) {
    throw std::invalid_argument("identity family has no dependence parameter to iterate on");
  }
  if (opts.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  CovarianceSpec spec0 =
      family.family == CovFamily::HeteroBlock ? family : family.with_theta(opts.theta0);
  FglsFit fit = fit_gls(y, z, spec0);
  fit.method = FitMethod::Igls;
  FglsFit best = fit;

  double theta_prev = opts.theta0;
  Eigen::VectorXd vars_prev = family.block_vars;
  bool converged = false;
  int iterations = 0;

  for (int it = 1; it <= opts.max_iter; ++it) {
    const ThetaEstimate est = estimate_theta(fit.residuals, family);
    FglsFit next = fit_gls(y, z, with_estimate(family, est));
    next.method = FitMethod::Igls;
    next.theta_degenerate = est.degenerate;

    double dtheta;
    if (family.family == CovFamily::HeteroBlock) {
      dtheta = (est.block_vars - vars_prev).cwiseAbs().maxCoeff() /
               (1.0 + vars_prev.cwiseAbs().maxCoeff());
      vars_prev = est.block_vars;
    } else {
      dtheta = std::abs(est.theta - theta_prev);
      theta_prev = est.theta;
    }
    const double db = (next.b - fit.b).cwiseAbs().maxCoeff() /
                      (1.0 + fit.b.cwiseAbs().maxCoeff());

    fit = std::move(next);
    iterations = it;
    if (fit.gccv < best.gccv) best = fit;
    if (std::max(dtheta, db) < opts.tol) {
      converged = true;
      break;
    }
  }

  if (converged) {
    fit.iterations = iterations;
    fit.converged = true;
    return fit;
  }
  best.iterations = iterations;
  best.converged = false;
  return best;
}

namespace {

struct Candidate {
  FglsFit fit;
  double score = kInf;           // GCCV used to rank basis dimensions
  double whitened_score = kInf;  // the same candidate read on the whitened scale
};

// Penalty context shared by every candidate of one selection run: the error
// matrix entering the GCCV degrees of freedom, estimated up front from lean
// reference fits. Candidates must not supply their own theta here: an
// overfitted candidate absorbs the serial dependence into its fit and hides
// it from its residuals, an underfitted one dilutes it with unexplained
// signal, and either way the candidate would write its own penalty.
struct SelectionPenalty {
  Eigen::MatrixXd sigma;               // correlation matrix in the tr(C) term
  std::optional<Whitener> whitener;    // Sigma(theta_ref) = L L'
  bool active = false;
};

// Feasible-GLS candidate: OLS fit, residual-moment theta, one GLS refit.
//
// The ranking score is the GCCV of the least-squares smoother S = H_OLS
// under the reference correlation: with an idempotent symmetric S the
// penalty collapses to tr(C) = tr(2 S Sigma - S Sigma S') = tr(H Sigma).
// The companion whitened score re-reads the same fit on the
// Sigma(theta_ref)^{-1/2} scale, where serial noise cannot be chased
// in-sample; select_model uses it to screen out candidates whose raw-scale
// advantage is nothing but absorbed error path.
Candidate candidate_residual_moment(const Eigen::VectorXd& yc, const Eigen::MatrixXd& z,
                                    const CovarianceSpec& cov,
                                    const SelectionPenalty& penalty) {
  const int n = static_cast<int>(yc.size());
  const int k = static_cast<int>(z.cols());
  FglsFit ols = fit_gls(yc, z, CovarianceSpec::identity());
  if (cov.family == CovFamily::Identity) {
    const double score = ols.gccv;  // reduces to GCV
    return {std::move(ols), score, score};
  }
  const ThetaEstimate est = estimate_theta(ols.residuals, cov);
  const CovarianceSpec spec = with_estimate(cov, est);

  double score = kInf;
  double whitened_score = kInf;
  {
    const Eigen::MatrixXd sigma =
        penalty.active ? penalty.sigma : build_sigma(spec, n);
    const Eigen::MatrixXd ztz = z.transpose() * z;
    const Eigen::MatrixXd ztsz = z.transpose() * sigma * z;
    const double tr_c = Eigen::LLT<Eigen::MatrixXd>(ztz).solve(ztsz).trace();
    if (tr_c < static_cast<double>(n)) {
      score = ols.residuals.squaredNorm() / squared(1.0 - tr_c / static_cast<double>(n));
    }
    const double gcv_denom = squared(1.0 - static_cast<double>(k) / n);
    if (penalty.active && penalty.whitener.has_value()) {
      whitened_score = penalty.whitener->apply(ols.residuals).squaredNorm() / gcv_denom;
    } else {
      whitened_score = ols.residuals.squaredNorm() / gcv_denom;
    }
  }

  FglsFit fit = fit_gls(yc, z, spec);
  fit.theta_degenerate = est.degenerate;
  return {std::move(fit), score, whitened_score};
}

// Spec-literal profiling of theta by the fit's own GCCV (coarse grid plus
// golden-section refinement). Selectable through ThetaRule::GccvProfile.
Candidate candidate_gccv_profile(const Eigen::VectorXd& yc, const Eigen::MatrixXd& z,
                                 const SelectConfig& cfg) {
  const int n = static_cast<int>(yc.size());
  double lo = -cfg.theta_abs_max;
  const double hi = cfg.theta_abs_max;
  if (cfg.cov.family == CovFamily::Equicorrelated && n > 1) {
    lo = std::max(lo, -1.0 / (n - 1) + 1e-6);
  }

  auto fit_at = [&](double theta) { return fit_gls(yc, z, cfg.cov.with_theta(theta)); };

  double best_theta = 0.0;
  double best_gccv = kInf;
  for (double theta = lo; theta <= hi + 1e-12; theta += cfg.theta_grid_step) {
    const double g = fit_at(theta).gccv;
    if (g < best_gccv || (g == best_gccv && std::abs(theta) < std::abs(best_theta))) {
      best_gccv = g;
      best_theta = theta;
    }
  }

  // Golden-section refinement inside the bracketing grid cell.
  double a = std::max(lo, best_theta - cfg.theta_grid_step);
  double b = std::min(hi, best_theta + cfg.theta_grid_step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = fit_at(x1).gccv, f2 = fit_at(x2).gccv;
  while (b - a > cfg.golden_tol) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = fit_at(x1).gccv;
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = fit_at(x2).gccv;
    }
  }
  const double refined = (a + b) / 2.0;
  FglsFit fit = fit_at(refined);
  if (!(fit.gccv < best_gccv)) fit = fit_at(best_theta);
  const double score = fit.gccv;
  return {std::move(fit), score, score};
}

void fill_functional_context(FglsFit& fit, const BasisSpec& basis, const Eigen::VectorXd& x_mean,
                             double y_mean) {
  fit.basis = basis;
  fit.beta_hat = beta_curve(fit.b, basis);
  fit.x_mean = x_mean;
  fit.y_mean = y_mean;
}

}  // namespace

FglsFit select_model(const Eigen::VectorXd& y, const FunctionalSample& x, const SelectConfig& cfg) {
  if (cfg.k_min < 1 || cfg.k_max < cfg.k_min) {
    throw std::invalid_argument("empty basis-dimension range");
  }
  if (y.size() != x.n()) {
    throw std::invalid_argument("response/covariate length mismatch");
  }

  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  const CenteredSample cx = center(x);

  // FPC bases are nested: build once at the largest attainable K and slice.
  BasisSpec fpc_full;
  int k_top = cfg.k_max;
  if (cfg.family == BasisFamily::Fpc) {
    const int bound = std::min(cfg.k_max, std::min(x.n() - 1, x.m()));
    int k_try = bound;
    for (; k_try >= cfg.k_min; --k_try) {
      try {
        fpc_full = fpc_basis(cx.sample, k_try);
        break;
      } catch (const NumericalError&) {
        continue;
      }
    }
    if (k_try < cfg.k_min) throw NumericalError("no admissible model");
    k_top = k_try;
  }

  auto design_at = [&](int k) {
    BasisSpec basis = cfg.family == BasisFamily::Fpc
                          ? fpc_full.truncated(k)
                          : bspline_basis(x.grid, k, cfg.bspline_order);
    const Eigen::MatrixXd coef = project(cx.sample, basis);
    Eigen::MatrixXd z = assemble_design(coef, basis, basis).z;
    return std::make_pair(std::move(basis), std::move(z));
  };

  // Reference dependence for the selection penalty, read off lean fits and
  // shared by all candidates (see SelectionPenalty). Underfitting dilutes
  // the residual autocorrelation with unexplained signal and overfitting
  // absorbs it into the fit; both only hide dependence, so the strongest
  // reading over two lean reference dimensions is kept.
  SelectionPenalty penalty;
  if (cfg.cov.family == CovFamily::Ar1 && cfg.theta_rule == ThetaRule::ResidualMoment &&
      !cfg.fixed_theta.has_value()) {
    int lo = cfg.k_min;
    int third = cfg.k_min + (k_top - cfg.k_min) / 3;
    if (cfg.family == BasisFamily::BSpline) {
      lo = std::max(lo, cfg.bspline_order);
      third = std::max(third, cfg.bspline_order);
    }
    double theta_ref = 0.0;
    bool have_ref = false;
    for (int k_ref : {lo, std::min(k_top, std::max(lo, third))}) {
      try {
        const auto [basis_ref, z_ref] = design_at(k_ref);
        const FglsFit ref_ols = fit_gls(yc, z_ref, CovarianceSpec::identity());
        const double th = estimate_theta(ref_ols.residuals, cfg.cov).theta;
        if (!have_ref || std::abs(th) > std::abs(theta_ref)) theta_ref = th;
        have_ref = true;
      } catch (const NumericalError&) {
        continue;
      }
    }
    if (have_ref) {
      // Innovation scaling: an extra dimension can absorb up to
      // 1/(1 - theta^2) marginal variances of a serially dependent error
      // path, so the degrees of freedom are counted at that rate. The
      // whitener stays on the correlation scale (common factors cancel in
      // the guard's comparisons).
      const Eigen::MatrixXd corr = build_sigma(cfg.cov.with_theta(theta_ref), x.n());
      penalty.whitener.emplace(corr);
      penalty.sigma = corr / (1.0 - theta_ref * theta_ref);
      penalty.active = true;
    }
  }

  struct Scored {
    int k;
    double score;
    double whitened;
    double abs_theta;
    FglsFit fit;
    BasisSpec basis;
  };
  std::vector<Scored> candidates;

  for (int k = cfg.k_min; k <= k_top; ++k) {
    if (cfg.family == BasisFamily::BSpline && k < cfg.bspline_order) continue;
    try {
      auto [basis, z] = design_at(k);

      Candidate candidate;
      if (cfg.fixed_theta.has_value() && cfg.cov.family != CovFamily::Identity) {
        FglsFit fixed = fit_gls(yc, z, cfg.cov.with_theta(*cfg.fixed_theta));
        const double score = fixed.gccv;
        candidate = Candidate{std::move(fixed), score, score};
      } else {
        candidate = cfg.theta_rule == ThetaRule::ResidualMoment ||
                            cfg.cov.family == CovFamily::Identity ||
                            cfg.cov.family == CovFamily::HeteroBlock ||
                            cfg.cov.family == CovFamily::Spatial
                        ? candidate_residual_moment(yc, z, cfg.cov, penalty)
                        : candidate_gccv_profile(yc, z, cfg);
      }
      if (std::isinf(candidate.score) || std::isinf(candidate.fit.gccv)) continue;
      candidates.push_back(Scored{k, candidate.score, candidate.whitened_score,
                                  std::abs(candidate.fit.theta_hat), std::move(candidate.fit),
                                  std::move(basis)});
    } catch (const NumericalError&) {
      continue;  // candidate rejected, try the next dimension
    }
  }
  if (candidates.empty()) throw NumericalError("no admissible model");

  // Admissibility guard: a richer candidate must improve on the leanest
  // one's whitened score, otherwise its raw advantage is absorbed error
  // path rather than signal and it is dropped.
  const double whitened_baseline = candidates.front().whitened;
  double min_score = kInf;
  for (const auto& c : candidates) {
    if (c.whitened > whitened_baseline) continue;
    min_score = std::min(min_score, c.score);
  }
  const double cutoff = min_score * (1.0 + cfg.score_tolerance);
  const Scored* best = nullptr;
  for (const auto& c : candidates) {
    if (c.whitened > whitened_baseline || c.score > cutoff) continue;
    if (best == nullptr || c.k < best->k ||
        (c.k == best->k && c.abs_theta < best->abs_theta)) {
      best = &c;
    }
  }

  FglsFit fit = best->fit;
  // Second feasible-GLS stage on the winner: the OLS-based dependence
  // estimate is damped by whatever serial structure the least-squares fit
  // absorbed; re-reading theta from the GLS residuals and refitting once
  // removes most of that damping.
  if (cfg.cov.family != CovFamily::Identity && cfg.theta_rule == ThetaRule::ResidualMoment &&
      !cfg.fixed_theta.has_value()) {
    try {
      const auto [basis2, z2] = design_at(best->k);
      const ThetaEstimate est2 = estimate_theta(fit.residuals, cfg.cov);
      FglsFit upgraded = fit_gls(yc, z2, with_estimate(cfg.cov, est2));
      upgraded.theta_degenerate = est2.degenerate;
      fit = std::move(upgraded);
    } catch (const NumericalError&) {
      // keep the first-stage fit
    }
  }
  fill_functional_context(fit, best->basis, cx.mean_curve, y_mean);
  return fit;
}

FglsFit fit_functional(const Eigen::VectorXd& y, const FunctionalSample& x, const BasisSpec& basis,
                       FitMethod method, const CovarianceSpec& cov_family,
                       const IglsOptions& igls) {
  if (y.size() != x.n()) throw std::invalid_argument("response/covariate length mismatch");
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  const CenteredSample cx = center(x);
  const Eigen::MatrixXd coef = project(cx.sample, basis);
  const Eigen::MatrixXd z = assemble_design(coef, basis, basis).z;

  FglsFit fit;
  switch (method) {
    case FitMethod::Lm:
      fit = fit_gls(yc, z, CovarianceSpec::identity());
      break;
    case FitMethod::Gls: {
      fit = candidate_residual_moment(yc, z, cov_family, SelectionPenalty{}).fit;
      if (cov_family.family != CovFamily::Identity) {
        const ThetaEstimate est2 = estimate_theta(fit.residuals, cov_family);
        fit = fit_gls(yc, z, with_estimate(cov_family, est2));
        fit.theta_degenerate = est2.degenerate;
      }
      fit.method = FitMethod::Gls;
      break;
    }
    case FitMethod::Igls:
      fit = fit_igls(yc, z, cov_family, igls);
      break;
  }
  fill_functional_context(fit, basis, cx.mean_curve, y_mean);
  return fit;
}

Prediction predict(const FglsFit& fit, const FunctionalSample& new_curves,
                   const CovarianceSpec& spec, const std::vector<int>& horizons) {
  if (!fit.basis.has_value()) {
    throw std::invalid_argument("fit carries no functional context; fit through the pipeline");
  }
  const Grid& grid = fit.basis->grid;
  if (!new_curves.grid.compatible_with(grid)) throw std::invalid_argument("incompatible grids");
  const int q = static_cast<int>(horizons.size());
  if (new_curves.n() != q) {
    throw std::invalid_argument("need exactly one new curve per horizon");
  }
  const int n = static_cast<int>(fit.residuals.size());

  Prediction pred;
  const Eigen::MatrixXd xc = new_curves.values.rowwise() - fit.x_mean.transpose();
  pred.regression_part =
      (xc * grid.weights.cwiseProduct(fit.beta_hat)).array() + fit.y_mean;

  const CrossCovariance cc = cross_cov(spec, n, horizons);
  if (spec.family == CovFamily::Ar1 && spec.theta != 0.0) {
    Whitener w(build_sigma(spec, n));
    pred.correction_part = cc.delta * w.solve_sigma(fit.residuals);
    const Eigen::MatrixXd delta_t = cc.delta.transpose();
    pred.variance = fit.sigma2_hat * (cc.sigma0 - cc.delta * w.solve_sigma(delta_t));
  } else {
    pred.correction_part = Eigen::VectorXd::Zero(q);
    pred.variance = fit.sigma2_hat * cc.sigma0;
  }

  for (int j = 0; j < q; ++j) {
    if (pred.variance(j, j) < 0.0) {
      if (pred.variance(j, j) < -1e-10) pred.variance_clipped = true;
      pred.variance(j, j) = 0.0;
    }
  }
  pred.point = pred.regression_part + pred.correction_part;
  return pred;
}

}  // namespace fregls
