#include "fregls/funcdata.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "fregls/rng.hpp"

namespace fregls {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 applied to master ^ mixed(stream)
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(master ^ mix(stream + 1));
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Grid Grid::from_points(Eigen::VectorXd pts) {
  const int m = static_cast<int>(pts.size());
  if (m < 2) throw std::invalid_argument("grid needs at least two points");
  for (int i = 1; i < m; ++i) {
    if (!(pts(i) > pts(i - 1))) {
      throw std::invalid_argument("grid points must be strictly increasing");
    }
  }
  Eigen::VectorXd w(m);
  w(0) = (pts(1) - pts(0)) / 2.0;
  w(m - 1) = (pts(m - 1) - pts(m - 2)) / 2.0;
  for (int i = 1; i < m - 1; ++i) w(i) = (pts(i + 1) - pts(i - 1)) / 2.0;
  Grid g;
  g.points = std::move(pts);
  g.weights = std::move(w);
  return g;
}

Grid Grid::uniform(double a, double b, int m) {
  if (!(b > a)) throw std::invalid_argument("grid interval must have b > a");
  if (m < 2) throw std::invalid_argument("grid needs at least two points");
  Eigen::VectorXd pts(m);
  for (int i = 0; i < m; ++i) pts(i) = a + (b - a) * static_cast<double>(i) / (m - 1);
  pts(m - 1) = b;
  return from_points(std::move(pts));
}

bool Grid::compatible_with(const Grid& other, double tol) const {
  if (size() != other.size()) return false;
  return (points - other.points).cwiseAbs().maxCoeff() <= tol;
}

FunctionalSample::FunctionalSample(Grid g, Eigen::MatrixXd v, std::vector<std::string> row_ids)
    : grid(std::move(g)), values(std::move(v)), ids(std::move(row_ids)) {
  if (values.cols() != grid.size()) {
    throw std::invalid_argument("curve length does not match grid size");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("curves contain non-finite values");
  }
  if (!ids.empty() && static_cast<int>(ids.size()) != values.rows()) {
    throw std::invalid_argument("row label count does not match number of curves");
  }
}

double inner_product(const Grid& grid, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (f.size() != grid.size() || g.size() != grid.size()) {
    throw std::invalid_argument("incompatible grids");
  }
  return (grid.weights.array() * f.array() * g.array()).sum();
}

double inner_product(const Grid& grid_f, const Eigen::VectorXd& f,
                     const Grid& grid_g, const Eigen::VectorXd& g) {
  if (!grid_f.compatible_with(grid_g)) throw std::invalid_argument("incompatible grids");
  return inner_product(grid_f, f, g);
}

double l2_norm_sq(const Grid& grid, const Eigen::VectorXd& f) {
  return inner_product(grid, f, f);
}

CenteredSample center(const FunctionalSample& sample) {
  if (sample.n() < 1) throw std::invalid_argument("cannot center an empty sample");
  Eigen::VectorXd mean = sample.values.colwise().mean();
  Eigen::MatrixXd centered = sample.values.rowwise() - mean.transpose();
  return {FunctionalSample(sample.grid, std::move(centered), sample.ids), std::move(mean)};
}

FunctionalSample simulate_wiener(int n, const Grid& grid, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one curve");
  const int m = grid.size();
  Rng rng(seed);
  Eigen::MatrixXd values(n, m);
  for (int i = 0; i < n; ++i) {
    double level = 0.0;
    if (grid.points(0) != 0.0) level = std::sqrt(grid.points(0)) * rng.normal();
    values(i, 0) = level;
    for (int j = 1; j < m; ++j) {
      level += std::sqrt(grid.points(j) - grid.points(j - 1)) * rng.normal();
      values(i, j) = level;
    }
  }
  return FunctionalSample(grid, std::move(values));
}

}  // namespace fregls
