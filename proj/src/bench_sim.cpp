#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fregls/bench.hpp"
#include "fregls/rng.hpp"

namespace fregls {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(Scenario scenario) {
  return scenario == Scenario::A ? "a" : "b";
}

Eigen::VectorXd make_beta(Scenario scenario, const Grid& grid) {
  const int m = grid.size();
  Eigen::VectorXd beta(m);
  for (int i = 0; i < m; ++i) {
    const double t = grid.points(i);
    if (scenario == Scenario::A) {
      beta(i) = 2.0 * std::sin(0.5 * M_PI * t) + 4.0 * std::sin(1.5 * M_PI * t) +
                5.0 * std::sin(2.5 * M_PI * t);
    } else {
      beta(i) = std::log(15.0 * t * t + 10.0) + std::cos(4.0 * M_PI * t);
    }
  }
  return beta;
}

void SimConfig::validate() const {
  if (!(snr > 0.0)) throw std::invalid_argument("snr must be positive");
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("phi out of (-1,1)");
  if (n <= 20) throw std::invalid_argument("sample size must exceed 20");
  if (replicas < 1) throw std::invalid_argument("need at least one replica");
  if (horizons.empty()) throw std::invalid_argument("need at least one horizon");
  for (int h : horizons) {
    if (h < 1) throw std::invalid_argument("horizons must be >= 1");
  }
  if (grid_size < 2) throw std::invalid_argument("grid needs at least two points");
  if (methods.empty()) throw std::invalid_argument("need at least one method");
  if (k_min < 0 || k_max < 0 || (k_max > 0 && k_max < k_min)) {
    throw std::invalid_argument("invalid basis-dimension range");
  }
}

int SimConfig::resolved_k_min() const {
  if (k_min > 0) return k_min;
  return basis == BasisFamily::Fpc ? 1 : 4;
}

int SimConfig::resolved_k_max() const {
  if (k_max > 0) return k_max;
  return basis == BasisFamily::Fpc ? 8 : 11;
}

Replica generate_replica(const SimConfig& cfg, int replica_index) {
  cfg.validate();
  const std::uint64_t rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(replica_index));
  const Grid grid = Grid::uniform(0.0, 1.0, cfg.grid_size);
  const Eigen::VectorXd beta = make_beta(cfg.scenario, grid);
  const Eigen::VectorXd weighted_beta = grid.weights.cwiseProduct(beta);

  FunctionalSample x = simulate_wiener(cfg.n, grid, derive_seed(rs, 0));
  Eigen::VectorXd signal = x.values * weighted_beta;

  // Noise calibrated to the replica's own signal variance, so Var(eps) equals
  // snr * Var(signal) exactly in-sample.
  const double signal_var =
      (signal.array() - signal.mean()).square().sum() / static_cast<double>(cfg.n - 1);
  const double eps_sd = std::sqrt(cfg.snr * signal_var);

  const int max_h = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
  Rng noise_rng(derive_seed(rs, 1));
  Eigen::VectorXd eps(cfg.n + max_h);
  eps(0) = eps_sd * noise_rng.normal();
  const double innov_sd = eps_sd * std::sqrt(1.0 - cfg.phi * cfg.phi);
  for (int i = 1; i < eps.size(); ++i) {
    eps(i) = cfg.phi * eps(i - 1) + innov_sd * noise_rng.normal();
  }

  const int q = static_cast<int>(cfg.horizons.size());
  FunctionalSample x_future = simulate_wiener(q, grid, derive_seed(rs, 2));

  Replica rep{std::move(x), signal + eps.head(cfg.n), std::move(signal), eps.head(cfg.n),
              std::move(x_future), Eigen::VectorXd(q), Eigen::VectorXd(q)};
  for (int j = 0; j < q; ++j) {
    const int h = cfg.horizons[j];
    rep.eps_future(j) = eps(cfg.n + h - 1);
    rep.y_future(j) = rep.x_future.values.row(j).dot(weighted_beta) + rep.eps_future(j);
  }
  return rep;
}

bool SimReport::has_method(FitMethod m) const {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

namespace {

void compute_aggregates(SimReport& report) {
  const auto& cfg = report.cfg;
  const int n_h = static_cast<int>(cfg.horizons.size());
  report.failures = 0;
  report.mean_selected_k = 0.0;
  for (auto& v : report.beta_mse) v = kNaN;
  for (auto& v : report.phi_mse) v = kNaN;
  for (auto& v : report.mspe) v.assign(n_h, kNaN);

  int ok_count = 0;
  std::array<double, 3> beta_sum{};
  std::array<double, 3> phi_sum{};
  std::array<std::vector<double>, 3> mspe_sum;
  for (auto& v : mspe_sum) v.assign(n_h, 0.0);

  for (const auto& rec : report.records) {
    if (!rec.ok) {
      ++report.failures;
      continue;
    }
    ++ok_count;
    report.mean_selected_k += rec.selected_k;
    for (FitMethod m : cfg.methods) {
      const auto& mr = rec.method(m);
      if (!mr.has_value()) continue;
      const int mi = static_cast<int>(m);
      beta_sum[mi] += mr->beta_err;
      const double dphi = cfg.phi - mr->theta_hat;
      phi_sum[mi] += dphi * dphi;
      for (int j = 0; j < n_h; ++j) mspe_sum[mi][j] += mr->sq_pred_err[j];
    }
  }

  if (ok_count == 0) return;
  report.mean_selected_k /= ok_count;
  for (FitMethod m : cfg.methods) {
    const int mi = static_cast<int>(m);
    report.beta_mse[mi] = beta_sum[mi] / ok_count;
    report.phi_mse[mi] = m == FitMethod::Lm ? kNaN : phi_sum[mi] / ok_count;
    report.mspe[mi].assign(n_h, 0.0);
    for (int j = 0; j < n_h; ++j) report.mspe[mi][j] = mspe_sum[mi][j] / ok_count;
  }
}

ReplicaRecord run_replica(const SimConfig& cfg, const Grid& grid, const Eigen::VectorXd& beta_true,
                          int index) {
  ReplicaRecord rec;
  rec.index = index;
  try {
    const Replica rep = generate_replica(cfg, index);

    SelectConfig scfg;
    scfg.family = cfg.basis;
    scfg.k_min = cfg.resolved_k_min();
    scfg.k_max = cfg.resolved_k_max();
    scfg.bspline_order = cfg.bspline_order;
    scfg.cov = CovarianceSpec::ar1(0.0);
    const FglsFit selected = select_model(rep.y, rep.x, scfg);
    rec.selected_k = selected.basis->k();

    for (FitMethod m : cfg.methods) {
      FglsFit fit = m == FitMethod::Gls
                        ? selected
                        : fit_functional(rep.y, rep.x, *selected.basis, m,
                                         CovarianceSpec::ar1(0.0));
      MethodRecord mr;
      mr.beta_err = l2_norm_sq(grid, beta_true - fit.beta_hat);
      mr.theta_hat = m == FitMethod::Lm ? 0.0 : fit.theta_hat;
      const Prediction pred = predict(fit, rep.x_future, fit.cov, cfg.horizons);
      mr.sq_pred_err.resize(cfg.horizons.size());
      for (std::size_t j = 0; j < cfg.horizons.size(); ++j) {
        const double e = rep.y_future(static_cast<int>(j)) - pred.point(static_cast<int>(j));
        mr.sq_pred_err[j] = e * e;
      }
      rec.by_method[static_cast<int>(m)] = std::move(mr);
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();
  SimReport report;
  report.cfg = cfg;
  const Grid grid = Grid::uniform(0.0, 1.0, cfg.grid_size);
  const Eigen::VectorXd beta_true = make_beta(cfg.scenario, grid);

  report.records.reserve(cfg.replicas);
  for (int r = 0; r < cfg.replicas; ++r) {
    report.records.push_back(run_replica(cfg, grid, beta_true, r));
  }
  compute_aggregates(report);
  return report;
}

SimReport aggregate_head(const SimReport& report, int replicas) {
  if (replicas < 1 || replicas > static_cast<int>(report.records.size())) {
    throw std::invalid_argument("replica subset out of range");
  }
  SimReport head;
  head.cfg = report.cfg;
  head.cfg.replicas = replicas;
  head.records.assign(report.records.begin(), report.records.begin() + replicas);
  compute_aggregates(head);
  return head;
}

FunctionalSample threshold_transform(const FunctionalSample& curves, double threshold) {
  Eigen::MatrixXd values = (curves.values.array() - threshold).min(0.0);
  return FunctionalSample(curves.grid, std::move(values), curves.ids);
}

ContributionSummary contribution_quartiles(const FglsFit& fit, const FunctionalSample& sample) {
  if (!fit.basis.has_value()) {
    throw std::invalid_argument("fit carries no functional context");
  }
  if (!sample.grid.compatible_with(fit.basis->grid)) {
    throw std::invalid_argument("incompatible grids");
  }
  const int n = sample.n();
  if (n < 4) throw std::invalid_argument("quartile split needs at least 4 curves");

  ContributionSummary out;
  out.v = sample.values * sample.grid.weights.cwiseProduct(fit.beta_hat);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return out.v(a) < out.v(b); });

  for (auto& mean : out.group_means) mean = Eigen::VectorXd::Zero(sample.m());
  for (int pos = 0; pos < n; ++pos) {
    const int group = std::min(3, (4 * pos) / n);
    out.group_means[group] += sample.values.row(order[pos]).transpose();
    ++out.group_sizes[group];
  }
  for (int g = 0; g < 4; ++g) {
    if (out.group_sizes[g] > 0) out.group_means[g] /= out.group_sizes[g];
  }
  return out;
}

}  // namespace fregls
