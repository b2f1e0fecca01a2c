// Acceptance suite: one line per criterion, nonzero exit on any failure.
//
// The Monte-Carlo criteria run the full benchmark at desk scale (B = 200,
// n = 100) under a fixed seed, so the whole suite is reproducible bit for
// bit. The CLI determinism criterion needs the path to the fregls binary as
// the first program argument.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fregls/bench.hpp"
#include "fregls/dcor.hpp"
#include "fregls/fgls.hpp"
#include "fregls/io.hpp"
#include "fregls/report.hpp"
#include "fregls/rng.hpp"
#include "oracles.hpp"

using namespace fregls;

namespace {

constexpr std::uint64_t kSeed = 2;

struct Criterion {
  int id;
  std::string name;
  bool pass = true;
  std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
  g_results.push_back({id, name, pass, detail});
  std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

bool in_window(double x, double lo, double hi) { return x >= lo && x <= hi; }

int gls_i() { return static_cast<int>(FitMethod::Gls); }
int lm_i() { return static_cast<int>(FitMethod::Lm); }
int igls_i() { return static_cast<int>(FitMethod::Igls); }

// ---------------------------------------------------------------------------
// Criteria 1-4 and 8: the scenario (a) FPC sweep at B=200 (criterion 8 reads
// the first 100 replicas, which by per-replica seed derivation equals a
// B=100 run; the equivalence is asserted in the unit suite).
// ---------------------------------------------------------------------------

void run_scenario_a(const SimSweep& sweep) {
  const std::vector<double>& snrs = sweep.snrs;
  const std::vector<double>& phis = sweep.phis;

  {  // criterion 1: MSPE windows at (snr=0.05, phi=0.9), h=1
    const SimReport& cell = sweep.cell(0, 3);
    const double gls = cell.mspe[gls_i()][0];
    const double lm = cell.mspe[lm_i()][0];
    const bool pass = in_window(gls, 0.014, 0.026) && in_window(lm, 0.05, 0.09) && gls < lm;
    record(1, "MSPE h=1 at (snr=0.05, phi=0.9): GLS in [0.014,0.026], LM in [0.05,0.09], GLS < LM",
           pass, "GLS=" + fmt(gls) + ", LM=" + fmt(lm));
  }

  {  // criterion 2: beta estimation windows at (snr=0.20, phi=0.9)
    const SimReport& cell = sweep.cell(2, 3);
    const double gls = cell.beta_mse[gls_i()];
    const double lm = cell.beta_mse[lm_i()];
    const bool pass = in_window(gls, 0.45, 0.75) && in_window(lm, 0.60, 0.95) && gls < lm;
    record(2, "beta MSE at (snr=0.20, phi=0.9): GLS in [0.45,0.75], LM in [0.60,0.95], GLS < LM",
           pass, "GLS=" + fmt(gls) + ", LM=" + fmt(lm));
  }

  {  // criterion 3: phi MSE capped in every cell, decreasing in phi on average
    bool pass = true;
    double worst = 0.0;
    std::string worst_cell;
    std::vector<double> avg_gls(phis.size(), 0.0), avg_igls(phis.size(), 0.0);
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      for (std::size_t pi = 0; pi < phis.size(); ++pi) {
        const SimReport& cell = sweep.cell(static_cast<int>(si), static_cast<int>(pi));
        for (int mi : {gls_i(), igls_i()}) {
          const double v = cell.phi_mse[mi];
          if (v > worst) {
            worst = v;
            worst_cell = "(" + fmt(snrs[si]) + "," + fmt(phis[pi]) + ")";
          }
          if (!(v <= 0.012)) pass = false;
        }
        avg_gls[pi] += cell.phi_mse[gls_i()] / snrs.size();
        avg_igls[pi] += cell.phi_mse[igls_i()] / snrs.size();
      }
    }
    bool decreasing = true;
    for (std::size_t pi = 1; pi < phis.size(); ++pi) {
      if (avg_gls[pi] > avg_gls[pi - 1] || avg_igls[pi] > avg_igls[pi - 1]) decreasing = false;
    }
    record(3, "phi MSE <= 0.012 in every cell (GLS and iGLS), decreasing in phi on average",
           pass && decreasing,
           "worst=" + fmt(worst) + " at " + worst_cell + "; snr-avg GLS over phi: " +
               fmt(avg_gls[0]) + " -> " + fmt(avg_gls[1]) + " -> " + fmt(avg_gls[2]) + " -> " +
               fmt(avg_gls[3]));
  }

  {  // criterion 4: mean selected K windows
    bool pass = true;
    double lo = 1e9, hi = -1e9;
    for (const auto& row : sweep.cells) {
      for (const auto& cell : row) {
        lo = std::min(lo, cell.mean_selected_k);
        hi = std::max(hi, cell.mean_selected_k);
        if (!in_window(cell.mean_selected_k, 2.8, 4.8)) pass = false;
      }
    }
    record(4, "mean selected K by GCCV in [2.8, 4.8] for every scenario (a) cell", pass,
           "range " + fmt(lo) + " .. " + fmt(hi));
  }

  {  // criterion 8: iGLS/GLS agreement at B=100
    bool pass = true;
    double worst = 0.0;
    for (const auto& row : sweep.cells) {
      for (const auto& cell : row) {
        const SimReport head = aggregate_head(cell, 100);
        const double gap = std::abs(head.beta_mse[igls_i()] - head.beta_mse[gls_i()]);
        worst = std::max(worst, gap);
        if (!(gap <= 0.05)) pass = false;
      }
    }
    record(8, "per-cell |beta MSE(iGLS) - beta MSE(GLS)| <= 0.05 at B=100", pass,
           "largest gap " + fmt(worst));
  }

  {  // supplementary ordering properties of the sweep
    bool snr_ordered = true;
    const std::size_t n_h = sweep.cells.front().front().cfg.horizons.size();
    for (std::size_t pi = 0; pi < phis.size(); ++pi) {
      for (int mi : {lm_i(), gls_i(), igls_i()}) {
        for (std::size_t h = 0; h < n_h; ++h) {
          for (std::size_t si = 1; si < snrs.size(); ++si) {
            if (sweep.cell(static_cast<int>(si), static_cast<int>(pi)).mspe[mi][h] <=
                sweep.cell(static_cast<int>(si - 1), static_cast<int>(pi)).mspe[mi][h]) {
              snr_ordered = false;
            }
          }
        }
      }
    }
    record(11, "[property] MSPE grows with snr for every method, phi and horizon", snr_ordered,
           snr_ordered ? "ordering holds across all cells" : "ordering violated");

    bool monotone_gain = true;
    std::string trace;
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      double prev = -1e9;
      for (std::size_t pi = 0; pi < phis.size(); ++pi) {
        const SimReport& cell = sweep.cell(static_cast<int>(si), static_cast<int>(pi));
        const double gain = cell.mspe[lm_i()][0] - cell.mspe[gls_i()][0];
        if (gain < prev) monotone_gain = false;
        prev = gain;
        if (si == 2) trace += (pi ? ", " : "") + fmt(gain);
      }
    }
    record(12, "[property] the GLS advantage over LM at h=1 grows with phi", monotone_gain,
           "snr=0.2 gains over phi: " + trace);
  }
}

// ---------------------------------------------------------------------------
// Criterion 5: scenario (b) at (snr=0.20, phi=0.9), B-splines vs FPC
// ---------------------------------------------------------------------------

void run_scenario_b() {
  SimConfig cfg;
  cfg.scenario = Scenario::B;
  cfg.snr = 0.20;
  cfg.phi = 0.9;
  cfg.replicas = 200;
  cfg.seed = derive_seed(kSeed, 501);
  cfg.basis = BasisFamily::BSpline;
  const SimReport bsp = run_simulation(cfg);
  cfg.basis = BasisFamily::Fpc;
  cfg.seed = derive_seed(kSeed, 502);
  const SimReport fpc = run_simulation(cfg);

  const double bsp_gls = bsp.beta_mse[gls_i()];
  const double bsp_lm = bsp.beta_mse[lm_i()];
  const double fpc_gls = fpc.beta_mse[gls_i()];
  const bool pass = bsp_gls < bsp_lm && in_window(bsp_gls, 0.35, 0.90) && bsp_gls < fpc_gls;
  record(5,
         "scenario (b) at (0.20, 0.9): B-spline GLS < LM, GLS in [0.35,0.90], below the FPC error",
         pass,
         "BSP GLS=" + fmt(bsp_gls) + ", BSP LM=" + fmt(bsp_lm) + ", FPC GLS=" + fmt(fpc_gls));
}

// ---------------------------------------------------------------------------
// Criterion 6: GLS with identity covariance is OLS, and GCCV is GCV
// ---------------------------------------------------------------------------

void run_ols_equivalence() {
  Rng rng(624);
  bool pass = true;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform() * 30);
    const int k = 2 + static_cast<int>(rng.uniform() * 4);
    Eigen::MatrixXd z(n, k);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      y(i) = rng.normal();
      for (int j = 0; j < k; ++j) z(i, j) = rng.normal();
    }
    const FglsFit fit = fit_gls(y, z, CovarianceSpec::identity());
    const Eigen::VectorXd ols = (z.transpose() * z).ldlt().solve(z.transpose() * y);
    const Eigen::VectorXd fitted = z * ols;
    const double rss = (y - fitted).squaredNorm();
    const double gcv = rss / std::pow(1.0 - static_cast<double>(k) / n, 2.0);

    worst = std::max(worst, (fit.b - ols).cwiseAbs().maxCoeff());
    worst = std::max(worst, (fit.fitted - fitted).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(fit.gccv - gcv) / std::max(1.0, gcv));
    if ((fit.b - ols).cwiseAbs().maxCoeff() > 1e-10 ||
        (fit.fitted - fitted).cwiseAbs().maxCoeff() > 1e-10 ||
        std::abs(fit.gccv - gcv) > 1e-10 * std::max(1.0, gcv)) {
      pass = false;
    }
  }
  record(6, "identity-covariance fits match independent OLS + GCV within 1e-10", pass,
         "largest deviation " + fmt(worst));
}

// ---------------------------------------------------------------------------
// Criterion 7: small-instance oracle equivalence
// ---------------------------------------------------------------------------

void run_oracles() {
  Rng rng(731);
  bool pass = true;
  double worst_fit = 0.0, worst_gccv = 0.0, worst_dcor = 0.0;

  for (int trial = 0; trial < 40; ++trial) {
    const int n = 5 + static_cast<int>(rng.uniform() * 4);  // 5..8
    const int k = 2;
    Eigen::MatrixXd z(n, k);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      y(i) = rng.normal();
      for (int j = 0; j < k; ++j) z(i, j) = rng.normal();
    }

    std::vector<CovarianceSpec> specs = {CovarianceSpec::identity(),
                                         CovarianceSpec::ar1(-0.5 + rng.uniform()),
                                         CovarianceSpec::equicorrelated(0.5 * rng.uniform())};
    {
      Eigen::VectorXd vars(2);
      vars << 0.5 + rng.uniform(), 0.5 + rng.uniform();
      Eigen::VectorXi sizes(2);
      sizes << 2, n - 2;
      specs.push_back(CovarianceSpec::hetero_block(vars, sizes));
      Eigen::MatrixXd loc(n, 2);
      for (int i = 0; i < n; ++i) {
        loc(i, 0) = rng.uniform();
        loc(i, 1) = rng.uniform();
      }
      specs.push_back(CovarianceSpec::spatial(0.5 + rng.uniform(), loc));
    }

    for (const auto& spec : specs) {
      const Eigen::MatrixXd sigma = build_sigma(spec, n);
      const FglsFit fit = fit_gls(y, z, spec);
      const Eigen::VectorXd ref = oracles::gls_dense(y, z, sigma);
      worst_fit = std::max(worst_fit, (fit.b - ref).cwiseAbs().maxCoeff());
      if ((fit.b - ref).cwiseAbs().maxCoeff() > 1e-10) pass = false;

      const double crit = gls_criterion(y, z, fit.b, sigma);
      const double crit_ref = oracles::gls_criterion_dense(y, z, fit.b, sigma);
      if (std::abs(crit - crit_ref) > 1e-10 * std::max(1.0, crit_ref)) pass = false;

      Eigen::MatrixXd s(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(i, j) = 0.4 * rng.normal();
      const Eigen::VectorXd y_hat = s * y;
      const double mine = gccv_score(y, y_hat, s, sigma);
      const double direct = oracles::gccv_direct(y, y_hat, s, sigma);
      if (std::isfinite(mine) && std::isfinite(direct)) {
        const double gap = std::abs(mine - direct) / std::max(1.0, std::abs(direct));
        worst_gccv = std::max(worst_gccv, gap);
        if (gap > 1e-12) pass = false;
      }
    }

    // distance correlation vs the four-loop reference
    const int m = 6 + static_cast<int>(rng.uniform() * 6);
    Eigen::MatrixXd xs(m, 2), ys(m, 1);
    for (int i = 0; i < m; ++i) {
      xs(i, 0) = rng.normal();
      xs(i, 1) = rng.normal();
      ys(i, 0) = rng.normal();
    }
    const DcorSample dx = DcorSample::vector(xs);
    const DcorSample dy = DcorSample::vector(ys);
    const DcorResult mine = distance_correlation(dx, dy);
    const auto ref = oracles::dcor_naive(distance_matrix(dx), distance_matrix(dy));
    worst_dcor = std::max(worst_dcor, std::abs(mine.r - ref.r));
    if (std::abs(mine.r - ref.r) > 1e-12 || std::abs(mine.v2_xy - ref.v2_xy) > 1e-12) {
      pass = false;
    }
  }
  record(7, "dense-inverse GLS within 1e-10, direct GCCV within 1e-12, four-loop dCor within 1e-12",
         pass,
         "worst fit gap " + fmt(worst_fit) + ", GCCV gap " + fmt(worst_gccv) + ", dCor gap " +
             fmt(worst_dcor));
}

// ---------------------------------------------------------------------------
// Criterion 9: rolling harness dominance over 20 seeded runs
// ---------------------------------------------------------------------------

void run_rolling() {
  int wins = 0;
  double ratio_sum = 0.0;
  const int runs = 20;
  for (int s = 0; s < runs; ++s) {
    SyntheticPanelConfig pcfg;
    pcfg.n_groups = 3;
    pcfg.weeks = 80;
    pcfg.grid_size = 21;
    pcfg.phi = 0.9;
    pcfg.noise_scale = 0.7;
    pcfg.seed = derive_seed(kSeed, 900 + static_cast<std::uint64_t>(s));
    const Panel panel = make_synthetic_panel(pcfg);

    RollingConfig rcfg;
    rcfg.n_train = 60;
    rcfg.horizons = {1};
    rcfg.n_origins = 8;
    rcfg.cov = CovarianceSpec::ar1(0.0);
    rcfg.k_min = 1;
    rcfg.k_max = 3;
    const RollingReport report = rolling_forecast(panel, rcfg);
    if (report.mspe_fgls(0, 0) < report.mspe_flm(0, 0)) ++wins;
    if (report.mspe_fgls(0, 0) > 0.0) ratio_sum += report.mspe_flm(0, 0) / report.mspe_fgls(0, 0);
  }
  const bool pass = wins >= 18;
  record(9, "rolling forecast: FGLS beats FLM at h=1 in >= 18 of 20 seeded panels", pass,
         std::to_string(wins) + "/20 wins; mean MSPE ratio FLM/FGLS = " + fmt(ratio_sum / runs) +
             " (soft report; >= 2 expected qualitatively)");
}

// ---------------------------------------------------------------------------
// Criterion 10: byte-identical CLI simulation reports
// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void run_determinism(const std::string& binary) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "fregls_acceptance_det";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string common =
      " simulate --scenario a --snr 0.1 --phi 0.6 --n 40 --replicas 6 --k-min 1 --k-max 3"
      " --grid-size 31 --horizons 1,2 --seed 77 --out ";
  const std::string run_a = binary + common + (base / "a").string() + " >/dev/null 2>&1";
  const std::string run_b = binary + common + (base / "b").string() + " >/dev/null 2>&1";
  bool pass = std::system(run_a.c_str()) == 0 && std::system(run_b.c_str()) == 0;
  std::string detail = pass ? "" : "CLI invocation failed";
  if (pass) {
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
      const auto name = entry.path().filename();
      const std::string lhs = slurp(entry.path());
      const std::string rhs = slurp(base / "b" / name);
      ++compared;
      if (lhs.empty() || lhs != rhs) {
        pass = false;
        detail = "mismatch in " + name.string();
        break;
      }
    }
    if (pass) detail = std::to_string(compared) + " report files byte-identical";
  }
  fs::remove_all(base);
  record(10, "repeated cmd_simulate with one seed yields byte-identical reports", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = std::chrono::steady_clock::now();

  SimConfig tmpl;
  tmpl.scenario = Scenario::A;
  tmpl.n = 100;
  tmpl.replicas = 200;
  tmpl.basis = BasisFamily::Fpc;
  tmpl.seed = kSeed;
  const SimSweep sweep = run_sweep(tmpl, {0.05, 0.10, 0.20}, {0.0, 0.3, 0.6, 0.9});

  run_scenario_a(sweep);
  run_scenario_b();
  run_ols_equivalence();
  run_oracles();
  run_rolling();
  if (argc > 1) {
    run_determinism(argv[1]);
  } else {
    record(10, "repeated cmd_simulate with one seed yields byte-identical reports", false,
           "fregls binary path not supplied");
  }

  int failures = 0;
  for (const auto& c : g_results) {
    if (!c.pass) ++failures;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/%zu criteria passed in %.1fs\n", static_cast<int>(g_results.size()) - failures,
              g_results.size(), elapsed);
  return failures;
}
