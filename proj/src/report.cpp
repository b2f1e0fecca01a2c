#include "fregls/report.hpp"

#include <cmath>

#include "fregls/rng.hpp"

namespace fregls {

namespace {

std::string phi_label(double phi) { return format_sig(phi, 3); }
std::string snr_label(double snr) { return format_sig(snr, 3); }

}  // namespace

SimSweep run_sweep(const SimConfig& tmpl, const std::vector<double>& snrs,
                   const std::vector<double>& phis) {
  SimSweep sweep;
  sweep.snrs = snrs;
  sweep.phis = phis;
  sweep.cells.resize(snrs.size());
  for (std::size_t si = 0; si < snrs.size(); ++si) {
    for (std::size_t pi = 0; pi < phis.size(); ++pi) {
      SimConfig cfg = tmpl;
      cfg.snr = snrs[si];
      cfg.phi = phis[pi];
      cfg.seed = derive_seed(tmpl.seed, si * 1000 + pi);
      sweep.cells[si].push_back(run_simulation(cfg));
    }
  }
  return sweep;
}

Table render_selected_k(const SimSweep& sweep, const NumberFormat& fmt) {
  Table t;
  t.corner = "snr";
  for (double phi : sweep.phis) t.columns.push_back("phi=" + phi_label(phi));
  for (std::size_t si = 0; si < sweep.snrs.size(); ++si) {
    std::vector<std::string> cells;
    for (std::size_t pi = 0; pi < sweep.phis.size(); ++pi) {
      cells.push_back(fmt(sweep.cell(si, pi).mean_selected_k));
    }
    t.add_row(snr_label(sweep.snrs[si]), std::move(cells));
  }
  return t;
}

namespace {

Table render_per_method(const SimSweep& sweep, const NumberFormat& fmt, bool skip_lm,
                        const std::function<double(const SimReport&, FitMethod)>& value) {
  Table t;
  t.corner = "snr,model";
  for (double phi : sweep.phis) t.columns.push_back("phi=" + phi_label(phi));
  const auto& methods = sweep.cells.front().front().cfg.methods;
  for (std::size_t si = 0; si < sweep.snrs.size(); ++si) {
    for (FitMethod m : methods) {
      if (skip_lm && m == FitMethod::Lm) continue;
      std::vector<std::string> cells;
      for (std::size_t pi = 0; pi < sweep.phis.size(); ++pi) {
        cells.push_back(fmt(value(sweep.cell(si, pi), m)));
      }
      t.add_row(snr_label(sweep.snrs[si]) + " " + to_string(m), std::move(cells));
    }
  }
  return t;
}

}  // namespace

Table render_beta_mse(const SimSweep& sweep, const NumberFormat& fmt) {
  return render_per_method(sweep, fmt, false, [](const SimReport& r, FitMethod m) {
    return r.beta_mse[static_cast<int>(m)];
  });
}

Table render_phi_mse(const SimSweep& sweep, const NumberFormat& fmt) {
  return render_per_method(sweep, fmt, true, [](const SimReport& r, FitMethod m) {
    return r.phi_mse[static_cast<int>(m)];
  });
}

Table render_mspe(const SimSweep& sweep, const NumberFormat& fmt) {
  Table t;
  t.corner = "snr,model";
  const auto& first = sweep.cells.front().front().cfg;
  for (double phi : sweep.phis) {
    for (int h : first.horizons) {
      t.columns.push_back("phi=" + phi_label(phi) + " h=" + std::to_string(h));
    }
  }
  for (std::size_t si = 0; si < sweep.snrs.size(); ++si) {
    for (FitMethod m : first.methods) {
      std::vector<std::string> cells;
      for (std::size_t pi = 0; pi < sweep.phis.size(); ++pi) {
        const auto& mspe = sweep.cell(si, pi).mspe[static_cast<int>(m)];
        for (double v : mspe) cells.push_back(fmt(v));
      }
      t.add_row(snr_label(sweep.snrs[si]) + " " + to_string(m), std::move(cells));
    }
  }
  return t;
}

Table render_replica_records(const SimSweep& sweep) {
  Table t;
  const auto& first = sweep.cells.front().front().cfg;
  t.columns = {"snr", "phi", "replica", "ok", "selected_k", "model", "beta_err", "theta_hat"};
  for (int h : first.horizons) t.columns.push_back("sq_err_h" + std::to_string(h));
  const auto fmt = csv_number_format();
  for (std::size_t si = 0; si < sweep.snrs.size(); ++si) {
    for (std::size_t pi = 0; pi < sweep.phis.size(); ++pi) {
      const SimReport& rep = sweep.cell(si, pi);
      for (const auto& rec : rep.records) {
        for (FitMethod m : rep.cfg.methods) {
          const auto& mr = rec.method(m);
          std::vector<std::string> cells = {snr_label(sweep.snrs[si]),
                                            phi_label(sweep.phis[pi]),
                                            std::to_string(rec.index),
                                            rec.ok ? "1" : "0",
                                            std::to_string(rec.selected_k),
                                            to_string(m)};
          if (mr.has_value()) {
            cells.push_back(fmt(mr->beta_err));
            cells.push_back(fmt(mr->theta_hat));
            for (double e : mr->sq_pred_err) cells.push_back(fmt(e));
          } else {
            cells.push_back("nan");
            cells.push_back("nan");
            for (std::size_t j = 0; j < rep.cfg.horizons.size(); ++j) cells.push_back("nan");
          }
          t.add_row("", std::move(cells));
        }
      }
    }
  }
  return t;
}

Table render_fit_summary(const FglsFit& fit, const NumberFormat& fmt) {
  Table t;
  t.columns = {"field", "value"};
  t.add_row("", {"method", to_string(fit.method)});
  if (fit.basis.has_value()) {
    t.add_row("", {"basis", to_string(fit.basis->family)});
    t.add_row("", {"k", std::to_string(fit.basis->k())});
  }
  t.add_row("", {"cov_family", to_string(fit.cov.family)});
  t.add_row("", {"theta_hat", fmt(fit.theta_hat)});
  t.add_row("", {"sigma2_hat", fmt(fit.sigma2_hat)});
  t.add_row("", {"df", fmt(fit.df)});
  t.add_row("", {"gccv", fmt(fit.gccv)});
  t.add_row("", {"y_mean", fmt(fit.y_mean)});
  t.add_row("", {"iterations", std::to_string(fit.iterations)});
  t.add_row("", {"converged", fit.converged ? "1" : "0"});
  return t;
}

Table render_beta_table(const FglsFit& fit, const NumberFormat& fmt) {
  Table t;
  t.columns = {"t", "beta_hat"};
  if (!fit.basis.has_value()) return t;
  const Grid& grid = fit.basis->grid;
  for (int i = 0; i < grid.size(); ++i) {
    t.add_row("", {fmt(grid.points(i)), fmt(fit.beta_hat(i))});
  }
  return t;
}

Table render_prediction(const Prediction& prediction, const std::vector<int>& horizons,
                        const NumberFormat& fmt) {
  Table t;
  t.columns = {"horizon", "point", "regression_part", "correction_part", "variance"};
  for (std::size_t j = 0; j < horizons.size(); ++j) {
    const int i = static_cast<int>(j);
    t.add_row("", {std::to_string(horizons[j]), fmt(prediction.point(i)),
                   fmt(prediction.regression_part(i)), fmt(prediction.correction_part(i)),
                   fmt(prediction.variance(i, i))});
  }
  return t;
}

Table render_screening(const ScreeningTable& screening, const NumberFormat& fmt) {
  Table t;
  t.corner = "R";
  for (const auto& name : screening.candidate_names) t.columns.push_back(name);
  for (const auto& name : screening.response_names) t.columns.push_back(name);
  const int nc = static_cast<int>(screening.candidate_names.size());
  const int nr = static_cast<int>(screening.response_names.size());
  for (int i = 0; i < nc; ++i) {
    std::vector<std::string> cells;
    for (int j = 0; j < nc; ++j) cells.push_back(fmt(screening.among_candidates(i, j)));
    for (int j = 0; j < nr; ++j) cells.push_back(fmt(screening.against_responses(i, j)));
    t.add_row(screening.candidate_names[i], std::move(cells));
  }
  return t;
}

Table render_rolling(const RollingReport& rolling, const NumberFormat& fmt) {
  Table t;
  t.corner = "covariates";
  for (int h : rolling.horizons) {
    t.columns.push_back("flm_h" + std::to_string(h));
    t.columns.push_back("fgls_h" + std::to_string(h));
    t.columns.push_back("theta_h" + std::to_string(h));
  }
  for (std::size_t s = 0; s < rolling.set_labels.size(); ++s) {
    std::vector<std::string> cells;
    for (std::size_t hi = 0; hi < rolling.horizons.size(); ++hi) {
      const int i = static_cast<int>(s), j = static_cast<int>(hi);
      cells.push_back(fmt(rolling.mspe_flm(i, j)));
      cells.push_back(fmt(rolling.mspe_fgls(i, j)));
      cells.push_back(fmt(rolling.mean_theta(i, j)));
    }
    t.add_row(rolling.set_labels[s], std::move(cells));
  }
  return t;
}

}  // namespace fregls
