#pragma once

#include <string>
#include <vector>

#include "fregls/bench.hpp"
#include "fregls/dcor.hpp"
#include "fregls/fgls.hpp"
#include "fregls/format.hpp"

namespace fregls {

/// A grid of simulation cells spanning snr and phi values for one scenario
/// and basis.
struct SimSweep {
  std::vector<double> snrs;
  std::vector<double> phis;
  std::vector<std::vector<SimReport>> cells;  // [snr][phi]

  const SimReport& cell(int snr_idx, int phi_idx) const { return cells[snr_idx][phi_idx]; }
};

/// Runs one cell per (snr, phi) pair; the template carries everything else.
/// Cell seeds derive from the template seed and the cell coordinates.
SimSweep run_sweep(const SimConfig& tmpl, const std::vector<double>& snrs,
                   const std::vector<double>& phis);

Table render_selected_k(const SimSweep& sweep, const NumberFormat& fmt);
Table render_beta_mse(const SimSweep& sweep, const NumberFormat& fmt);
Table render_phi_mse(const SimSweep& sweep, const NumberFormat& fmt);
Table render_mspe(const SimSweep& sweep, const NumberFormat& fmt);
Table render_replica_records(const SimSweep& sweep);

Table render_fit_summary(const FglsFit& fit, const NumberFormat& fmt);
Table render_beta_table(const FglsFit& fit, const NumberFormat& fmt);
Table render_prediction(const Prediction& prediction, const std::vector<int>& horizons,
                        const NumberFormat& fmt);
Table render_screening(const ScreeningTable& screening, const NumberFormat& fmt);
Table render_rolling(const RollingReport& rolling, const NumberFormat& fmt);

}  // namespace fregls
