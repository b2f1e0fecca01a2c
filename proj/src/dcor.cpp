#include "fregls/dcor.hpp"

#include <cmath>
#include <stdexcept>

namespace fregls {

DcorSample DcorSample::vector(Eigen::MatrixXd values) {
  DcorSample s;
  s.data = std::move(values);
  return s;
}

DcorSample DcorSample::scalar(Eigen::VectorXd values) {
  DcorSample s;
  s.data = std::move(values);
  return s;
}

DcorSample DcorSample::functional(const FunctionalSample& sample) {
  DcorSample s;
  s.data = sample.values;
  s.grid = sample.grid;
  return s;
}

Eigen::MatrixXd distance_matrix(const DcorSample& sample) {
  const int n = sample.n();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  if (sample.grid.has_value()) {
    const Eigen::VectorXd& w = sample.grid->weights;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Eigen::VectorXd diff = (sample.data.row(i) - sample.data.row(j)).transpose();
        d(i, j) = d(j, i) = std::sqrt(w.dot(diff.cwiseProduct(diff)));
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        d(i, j) = d(j, i) = (sample.data.row(i) - sample.data.row(j)).norm();
      }
    }
  }
  return d;
}

Eigen::MatrixXd double_center(const Eigen::MatrixXd& distances) {
  if (distances.rows() != distances.cols()) {
    throw std::invalid_argument("distance matrix must be square");
  }
  const Eigen::VectorXd row_means = distances.rowwise().mean();
  const Eigen::VectorXd col_means = distances.colwise().mean();
  const double grand = distances.mean();
  Eigen::MatrixXd centered = distances;
  centered.colwise() -= row_means;
  centered.rowwise() -= col_means.transpose();
  centered.array() += grand;
  return centered;
}

DcorResult distance_correlation(const DcorSample& x, const DcorSample& y) {
  const int n = x.n();
  if (y.n() != n) throw std::invalid_argument("samples must share the number of observations");
  if (n < 2) throw std::invalid_argument("distance correlation needs at least 2 observations");

  const Eigen::MatrixXd a = double_center(distance_matrix(x));
  const Eigen::MatrixXd b = double_center(distance_matrix(y));
  const double n2 = static_cast<double>(n) * static_cast<double>(n);

  DcorResult res;
  res.v2_xy = std::max(a.cwiseProduct(b).sum() / n2, 0.0);
  res.v2_xx = std::max(a.cwiseProduct(a).sum() / n2, 0.0);
  res.v2_yy = std::max(b.cwiseProduct(b).sum() / n2, 0.0);
  const double denom = std::sqrt(res.v2_xx * res.v2_yy);
  if (denom <= 0.0) {
    res.degenerate = true;
    res.r = 0.0;
    return res;
  }
  res.r = std::sqrt(std::min(res.v2_xy / denom, 1.0));
  return res;
}

ScreeningTable screening_table(const std::vector<std::pair<std::string, DcorSample>>& candidates,
                               const std::vector<std::pair<std::string, DcorSample>>& responses) {
  if (candidates.empty()) throw std::invalid_argument("need at least one candidate sample");
  const int nc = static_cast<int>(candidates.size());
  const int nr = static_cast<int>(responses.size());
  const int n = candidates.front().second.n();
  for (const auto& [name, sample] : candidates) {
    if (sample.n() != n) throw std::invalid_argument("sample '" + name + "' has mismatched n");
  }
  for (const auto& [name, sample] : responses) {
    if (sample.n() != n) throw std::invalid_argument("sample '" + name + "' has mismatched n");
  }

  ScreeningTable table;
  table.among_candidates = Eigen::MatrixXd::Identity(nc, nc);
  table.against_responses = Eigen::MatrixXd::Zero(nc, nr);
  for (int i = 0; i < nc; ++i) {
    table.candidate_names.push_back(candidates[i].first);
    for (int j = i + 1; j < nc; ++j) {
      const double r = distance_correlation(candidates[i].second, candidates[j].second).r;
      table.among_candidates(i, j) = table.among_candidates(j, i) = r;
    }
    for (int j = 0; j < nr; ++j) {
      table.against_responses(i, j) =
          distance_correlation(candidates[i].second, responses[j].second).r;
    }
  }
  for (const auto& [name, sample] : responses) table.response_names.push_back(name);
  return table;
}

}  // namespace fregls
