#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fregls/fgls.hpp"
#include "fregls/funcdata.hpp"

namespace fregls {

// ---------------------------------------------------------------------------
// Monte-Carlo study
// ---------------------------------------------------------------------------

enum class Scenario { A, B };

const char* to_string(Scenario scenario);

/// Coefficient function of the simulation scenario evaluated on a grid over
/// [0,1]: (A) 2 sin(0.5 pi t) + 4 sin(1.5 pi t) + 5 sin(2.5 pi t),
/// (B) log(15 t^2 + 10) + cos(4 pi t).
Eigen::VectorXd make_beta(Scenario scenario, const Grid& grid);

struct SimConfig {
  Scenario scenario = Scenario::A;
  double snr = 0.05;          // Var(eps) / Var(signal)
  double phi = 0.9;           // AR(1) parameter of the errors
  int n = 100;                // sample size per replica
  int replicas = 200;         // desk default; 1000 for full runs
  std::vector<int> horizons = {1, 5, 10};
  BasisFamily basis = BasisFamily::Fpc;
  int k_min = 0, k_max = 0;   // 0 = family default (FPC 1..8, B-spline 4..11)
  int bspline_order = 4;
  std::vector<FitMethod> methods = {FitMethod::Lm, FitMethod::Gls, FitMethod::Igls};
  int grid_size = 101;
  std::uint64_t seed = 0;

  void validate() const;
  int resolved_k_min() const;
  int resolved_k_max() const;
};

/// One simulated data set plus the forward extension used to score
/// predictions: fresh curves at each horizon and the error process continued
/// with the same recursion. Deterministic given (cfg.seed, replica index).
struct Replica {
  FunctionalSample x;          // n training curves
  Eigen::VectorXd y;           // signal + eps
  Eigen::VectorXd signal;      // <X_i, beta>
  Eigen::VectorXd eps;         // training errors
  FunctionalSample x_future;   // one fresh curve per horizon
  Eigen::VectorXd y_future;    // truth at each horizon
  Eigen::VectorXd eps_future;  // error at each horizon
};

Replica generate_replica(const SimConfig& cfg, int replica_index);

struct MethodRecord {
  double beta_err = 0.0;   // ||beta - beta_hat||^2 by quadrature
  double theta_hat = 0.0;  // 0 for LM
  std::vector<double> sq_pred_err;  // per horizon
};

struct ReplicaRecord {
  int index = 0;
  bool ok = false;
  std::string error;
  int selected_k = 0;
  std::array<std::optional<MethodRecord>, 3> by_method;  // indexed by FitMethod

  const std::optional<MethodRecord>& method(FitMethod m) const {
    return by_method[static_cast<int>(m)];
  }
};

struct SimReport {
  SimConfig cfg;
  std::vector<ReplicaRecord> records;
  int failures = 0;

  double mean_selected_k = 0.0;
  std::array<double, 3> beta_mse{};                // by FitMethod; NaN when absent
  std::array<double, 3> phi_mse{};                 // meaningful for Gls/Igls
  std::array<std::vector<double>, 3> mspe{};       // per method, per horizon

  bool has_method(FitMethod m) const;
};

/// Runs the Monte-Carlo study for one (scenario, snr, phi) cell: per replica,
/// selects the basis dimension by GCCV, fits the requested methods on the
/// selected basis, and scores estimation and prediction errors. Failed
/// replicas are recorded and excluded from the aggregates, never silently
/// dropped. Fully deterministic given the config.
SimReport run_simulation(const SimConfig& cfg);

/// Recomputes the aggregate fields from the first `replicas` records; by
/// seed derivation this equals a fresh run with cfg.replicas = replicas.
SimReport aggregate_head(const SimReport& report, int replicas);

// ---------------------------------------------------------------------------
// Covariate transforms and interpretation helpers
// ---------------------------------------------------------------------------

/// Pointwise min(x(t) - threshold, 0): degrees below a threshold.
FunctionalSample threshold_transform(const FunctionalSample& curves, double threshold);

struct ContributionSummary {
  Eigen::VectorXd v;  // projections <X_i, beta_hat>
  std::array<Eigen::VectorXd, 4> group_means;  // mean curve per quartile of v
  std::array<int, 4> group_sizes{};
};

/// Splits the sample by quartiles of the projection values v_i = <X_i, beta_hat>
/// and averages the curves in each group. Ties break by original row order.
/// Requires n >= 4.
ContributionSummary contribution_quartiles(const FglsFit& fit, const FunctionalSample& sample);

// ---------------------------------------------------------------------------
// Rolling-origin forecasting
// ---------------------------------------------------------------------------

/// Weekly panel for one group: a response series and aligned functional
/// covariates (row j of each covariate sample belongs to week j).
struct PanelGroup {
  std::string name;
  Eigen::VectorXd y;
  std::map<std::string, FunctionalSample> covariates;
};

struct Panel {
  std::vector<PanelGroup> groups;

  int weeks() const { return groups.empty() ? 0 : static_cast<int>(groups.front().y.size()); }
  void validate() const;
};

struct RollingConfig {
  int n_train = 104;
  std::vector<int> horizons = {1, 2};
  int n_origins = 40;
  CovarianceSpec cov = CovarianceSpec::ar1(0.5);  // family template for FGLS
  std::vector<std::vector<std::string>> covariate_sets;
  BasisFamily basis = BasisFamily::Fpc;
  int k_min = 1, k_max = 4;
  int bspline_order = 4;
};

struct RollingReport {
  std::vector<std::string> set_labels;
  std::vector<int> horizons;
  Eigen::MatrixXd mspe_flm;   // sets x horizons
  Eigen::MatrixXd mspe_fgls;  // sets x horizons
  Eigen::MatrixXd mean_theta; // sets x horizons, average fitted AR parameter
  int skipped_origins = 0;
  std::vector<std::string> gap_log;
};

/// Rolling-origin evaluation: for each covariate set, origin and group, fits
/// the lead-h regression y_{j+h} ~ X_j on the trailing window with
/// independent (FLM) and dependent (FGLS) errors, predicts the origin week,
/// and averages squared errors over origins and groups. Origins with an
/// insufficient window are skipped and logged; if every origin is skipped an
/// error is thrown.
RollingReport rolling_forecast(const Panel& panel, const RollingConfig& cfg);

struct SyntheticPanelConfig {
  int n_groups = 3;
  int weeks = 80;
  int grid_size = 21;
  double phi = 0.9;
  double noise_scale = 0.7;  // sd(eps) relative to sd(signal)
  std::uint64_t seed = 0;
};

/// Synthetic weekly panel: per group, Wiener covariate curves and a response
/// led by one week with AR(1) errors. Exercises the rolling harness end to
/// end when no real panel is at hand.
Panel make_synthetic_panel(const SyntheticPanelConfig& cfg);

}  // namespace fregls
