#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fregls/bench.hpp"
#include "fregls/rng.hpp"

namespace fregls {

void Panel::validate() const {
  if (groups.empty()) throw std::invalid_argument("panel has no groups");
  const int t = static_cast<int>(groups.front().y.size());
  std::set<std::string> names;
  for (const auto& [name, sample] : groups.front().covariates) names.insert(name);
  if (names.empty()) throw std::invalid_argument("panel has no functional covariates");
  for (const auto& g : groups) {
    if (static_cast<int>(g.y.size()) != t) {
      throw std::invalid_argument("group '" + g.name + "' has a different series length");
    }
    std::set<std::string> local;
    for (const auto& [name, sample] : g.covariates) {
      local.insert(name);
      if (sample.n() != t) {
        throw std::invalid_argument("covariate '" + name + "' of group '" + g.name +
                                    "' is not aligned with the response series");
      }
    }
    if (local != names) {
      throw std::invalid_argument("group '" + g.name + "' carries a different covariate set");
    }
  }
}

namespace {

struct JointFitResult {
  FglsFit core;                           // coefficient-level fit on the stacked design
  std::vector<BasisSpec> bases;           // one per covariate, in set order
  std::vector<Eigen::VectorXd> x_means;   // window mean curve per covariate
  std::vector<Eigen::VectorXd> betas;     // coefficient curve per covariate
  double y_mean = 0.0;
};

FunctionalSample window_rows(const FunctionalSample& sample, int first, int count) {
  return FunctionalSample(sample.grid, sample.values.middleRows(first, count));
}

// Fits y ~ sum_c <X_c, beta_c> on one training window. The basis dimension of
// each covariate is chosen marginally by GCCV, then the stacked design is fit
// jointly. When `dependent` is false the errors are treated as independent
// (FLM); otherwise one residual-moment GLS step is taken (FGLS).
JointFitResult fit_joint(const Eigen::VectorXd& y,
                         const std::vector<const FunctionalSample*>& covariates,
                         const RollingConfig& cfg, bool dependent) {
  JointFitResult out;
  out.y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - out.y_mean;
  const int n = static_cast<int>(y.size());

  Eigen::MatrixXd z(n, 0);
  for (const FunctionalSample* sample : covariates) {
    SelectConfig scfg;
    scfg.family = cfg.basis;
    scfg.k_min = cfg.k_min;
    scfg.k_max = cfg.k_max;
    scfg.bspline_order = cfg.bspline_order;
    scfg.cov = cfg.cov;
    const FglsFit marginal = select_model(y, *sample, scfg);

    CenteredSample cs = center(*sample);
    const Eigen::MatrixXd coef = project(cs.sample, *marginal.basis);
    const Eigen::MatrixXd block = assemble_design(coef, *marginal.basis, *marginal.basis).z;
    z.conservativeResize(n, z.cols() + block.cols());
    z.rightCols(block.cols()) = block;
    out.bases.push_back(*marginal.basis);
    out.x_means.push_back(std::move(cs.mean_curve));
  }

  FglsFit fit = fit_gls(yc, z, CovarianceSpec::identity());
  if (dependent) {
    // Two feasible-GLS stages, as in the single-covariate pipeline.
    const ThetaEstimate est = estimate_theta(fit.residuals, cfg.cov);
    fit = fit_gls(yc, z, with_estimate(cfg.cov, est));
    const ThetaEstimate est2 = estimate_theta(fit.residuals, cfg.cov);
    fit = fit_gls(yc, z, with_estimate(cfg.cov, est2));
    fit.theta_degenerate = est2.degenerate;
  }

  int offset = 0;
  for (const auto& basis : out.bases) {
    out.betas.push_back(beta_curve(fit.b.segment(offset, basis.k()), basis));
    offset += basis.k();
  }
  out.core = std::move(fit);
  return out;
}

double predict_joint(const JointFitResult& fit,
                     const std::vector<Eigen::VectorXd>& new_curves, const Grid& grid,
                     const CovarianceSpec& spec, int horizon) {
  double reg = fit.y_mean;
  for (std::size_t c = 0; c < new_curves.size(); ++c) {
    const Eigen::VectorXd centered = new_curves[c] - fit.x_means[c];
    reg += grid.weights.dot(centered.cwiseProduct(fit.betas[c]));
  }
  const int n = static_cast<int>(fit.core.residuals.size());
  const CrossCovariance cc = cross_cov(spec, n, {horizon});
  double correction = 0.0;
  if (spec.family == CovFamily::Ar1 && spec.theta != 0.0) {
    Whitener w(build_sigma(spec, n));
    correction = (cc.delta * w.solve_sigma(fit.core.residuals))(0);
  }
  return reg + correction;
}

}  // namespace

RollingReport rolling_forecast(const Panel& panel, const RollingConfig& cfg) {
  panel.validate();
  if (cfg.n_train < 8) throw std::invalid_argument("training window too short");
  if (cfg.n_origins < 1) throw std::invalid_argument("need at least one origin");
  if (cfg.horizons.empty()) throw std::invalid_argument("need at least one horizon");
  for (int h : cfg.horizons) {
    if (h < 1) throw std::invalid_argument("horizons must be >= 1");
  }

  std::vector<std::vector<std::string>> sets = cfg.covariate_sets;
  if (sets.empty()) {
    std::vector<std::string> all;
    for (const auto& [name, sample] : panel.groups.front().covariates) all.push_back(name);
    sets.push_back(std::move(all));
  }

  const int t = panel.weeks();
  const int max_h = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
  const int first_origin = cfg.n_train + max_h - 1;
  const int n_h = static_cast<int>(cfg.horizons.size());
  const int n_sets = static_cast<int>(sets.size());

  RollingReport report;
  report.horizons = cfg.horizons;
  report.mspe_flm = Eigen::MatrixXd::Zero(n_sets, n_h);
  report.mspe_fgls = Eigen::MatrixXd::Zero(n_sets, n_h);
  report.mean_theta = Eigen::MatrixXd::Zero(n_sets, n_h);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_sets, n_h);

  for (int s = 0; s < n_sets; ++s) {
    std::string label;
    for (const auto& name : sets[s]) label += (label.empty() ? "" : "+") + name;
    report.set_labels.push_back(label);

    for (int origin = first_origin; origin < first_origin + cfg.n_origins; ++origin) {
      bool origin_used = false;
      for (int hi = 0; hi < n_h; ++hi) {
        const int h = cfg.horizons[hi];
        const int train_first = origin - h - cfg.n_train + 1;
        if (train_first < 0 || origin + h > t - 1) {
          report.gap_log.push_back("set '" + label + "' origin " + std::to_string(origin) +
                                   " h=" + std::to_string(h) + ": window out of range");
          continue;
        }
        for (const auto& group : panel.groups) {
          std::vector<FunctionalSample> windows;
          std::vector<const FunctionalSample*> window_ptrs;
          std::vector<Eigen::VectorXd> new_curves;
          windows.reserve(sets[s].size());
          for (const auto& name : sets[s]) {
            const auto it = group.covariates.find(name);
            if (it == group.covariates.end()) {
              throw std::invalid_argument("unknown covariate '" + name + "' in covariate set");
            }
            windows.push_back(window_rows(it->second, train_first, cfg.n_train));
            new_curves.push_back(it->second.values.row(origin).transpose());
          }
          for (const auto& w : windows) window_ptrs.push_back(&w);
          // Lead-h pairs: curve at week j explains the response at week j+h.
          const Eigen::VectorXd y_train = group.y.segment(train_first + h, cfg.n_train);
          const Grid& grid = windows.front().grid;

          const JointFitResult flm = fit_joint(y_train, window_ptrs, cfg, false);
          const JointFitResult fgls = fit_joint(y_train, window_ptrs, cfg, true);

          const double truth = group.y(origin + h);
          const double e_flm =
              truth - predict_joint(flm, new_curves, grid, CovarianceSpec::identity(), h);
          const double e_fgls =
              truth - predict_joint(fgls, new_curves, grid, fgls.core.cov, h);
          report.mspe_flm(s, hi) += e_flm * e_flm;
          report.mspe_fgls(s, hi) += e_fgls * e_fgls;
          report.mean_theta(s, hi) += fgls.core.theta_hat;
          counts(s, hi) += 1.0;
          origin_used = true;
        }
      }
      if (!origin_used) ++report.skipped_origins;
    }
  }

  if (counts.sum() == 0.0) {
    throw std::invalid_argument("rolling window exhausts the panel: no valid origins");
  }
  for (int s = 0; s < n_sets; ++s) {
    for (int hi = 0; hi < n_h; ++hi) {
      if (counts(s, hi) > 0.0) {
        report.mspe_flm(s, hi) /= counts(s, hi);
        report.mspe_fgls(s, hi) /= counts(s, hi);
        report.mean_theta(s, hi) /= counts(s, hi);
      }
    }
  }
  return report;
}

Panel make_synthetic_panel(const SyntheticPanelConfig& cfg) {
  if (cfg.n_groups < 1 || cfg.weeks < 10) throw std::invalid_argument("panel too small");
  const Grid grid = Grid::uniform(0.0, 1.0, cfg.grid_size);
  const Eigen::VectorXd beta = make_beta(Scenario::A, grid);
  const Eigen::VectorXd weighted_beta = grid.weights.cwiseProduct(beta);

  Panel panel;
  for (int g = 0; g < cfg.n_groups; ++g) {
    const std::uint64_t gs = derive_seed(cfg.seed, static_cast<std::uint64_t>(g));
    FunctionalSample x = simulate_wiener(cfg.weeks, grid, derive_seed(gs, 0));
    const Eigen::VectorXd signal = x.values * weighted_beta;
    const double sd_signal = std::sqrt(
        (signal.array() - signal.mean()).square().sum() / (cfg.weeks - 1));
    const double eps_sd = cfg.noise_scale * sd_signal;

    Rng rng(derive_seed(gs, 1));
    Eigen::VectorXd eps(cfg.weeks);
    eps(0) = eps_sd * rng.normal();
    const double innov_sd = eps_sd * std::sqrt(1.0 - cfg.phi * cfg.phi);
    for (int j = 1; j < cfg.weeks; ++j) eps(j) = cfg.phi * eps(j - 1) + innov_sd * rng.normal();

    // Response led by one week: y_{j} responds to the curve observed at j-1.
    Eigen::VectorXd y(cfg.weeks);
    y(0) = eps(0);
    for (int j = 1; j < cfg.weeks; ++j) y(j) = signal(j - 1) + eps(j);

    PanelGroup group;
    group.name = "g" + std::to_string(g + 1);
    group.y = std::move(y);
    group.covariates.emplace("X", std::move(x));
    panel.groups.push_back(std::move(group));
  }
  return panel;
}

}  // namespace fregls
