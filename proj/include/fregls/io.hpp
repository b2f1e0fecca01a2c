#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "fregls/bench.hpp"
#include "fregls/errors.hpp"
#include "fregls/funcdata.hpp"

namespace fregls {

/// Wide-format curves: the header row holds the grid points (strictly
/// increasing reals), optionally preceded by an id column; each remaining row
/// is one curve.
FunctionalSample read_functional_wide(const std::string& path);

/// Long-format curves: three columns (id, t, value); every id must cover the
/// full grid.
FunctionalSample read_functional_long(const std::string& path);

/// Single-column numeric CSV with an optional header line.
Eigen::VectorXd read_scalar_csv(const std::string& path);

/// Panel response: columns (group, week, rate) with consecutive weeks shared
/// by every group.
struct PanelResponse {
  std::vector<std::string> groups;
  std::vector<Eigen::VectorXd> series;  // one per group
};
PanelResponse read_panel_response(const std::string& path);

/// Panel covariate: columns (group, week, t_1..t_M); rows aligned with the
/// response weeks.
struct PanelCovariate {
  std::vector<std::string> groups;
  std::vector<FunctionalSample> samples;  // one per group, rows = weeks
};
PanelCovariate read_panel_covariate(const std::string& path);

/// Builds a Panel from a response file and named covariate files.
Panel read_panel(const std::string& response_path,
                 const std::vector<std::pair<std::string, std::string>>& covariates);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Rows of a matrix as CSV with an optional header line.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header = {});

/// Basis functions as CSV for inspection: header = grid points, one row per
/// basis function.
void write_basis_csv(const std::string& path, const BasisSpec& basis);

}  // namespace fregls
