#include <cmath>

#include "doctest.h"
#include "fregls/covmodels.hpp"
#include "fregls/rng.hpp"

using namespace fregls;

namespace {

Eigen::VectorXd ar1_path(int n, double theta, double sd, Rng& rng) {
  Eigen::VectorXd e(n);
  e(0) = sd * rng.normal();
  const double innov = sd * std::sqrt(1.0 - theta * theta);
  for (int i = 1; i < n; ++i) e(i) = theta * e(i - 1) + innov * rng.normal();
  return e;
}

}  // namespace

TEST_CASE("build_sigma materializes each family") {
  SUBCASE("ar1 with theta 0 is the identity") {
    const Eigen::MatrixXd s = build_sigma(CovarianceSpec::ar1(0.0), 4);
    CHECK((s - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("ar1 powers") {
    const Eigen::MatrixXd s = build_sigma(CovarianceSpec::ar1(0.5), 3);
    Eigen::MatrixXd expected(3, 3);
    expected << 1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0;
    CHECK((s - expected).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("equicorrelated positive definiteness bound") {
    CHECK_THROWS_AS(build_sigma(CovarianceSpec::equicorrelated(-0.6), 3), NumericalError);
    const Eigen::MatrixXd ok = build_sigma(CovarianceSpec::equicorrelated(-0.4), 3);
    CHECK(ok(0, 1) == doctest::Approx(-0.4));
    CHECK(ok(2, 2) == doctest::Approx(1.0));
  }

  SUBCASE("hetero block layout") {
    Eigen::VectorXd vars(2);
    vars << 4.0, 9.0;
    Eigen::VectorXi sizes(2);
    sizes << 2, 3;
    const Eigen::MatrixXd s = build_sigma(CovarianceSpec::hetero_block(vars, sizes), 5);
    CHECK(s(0, 0) == doctest::Approx(4.0));
    CHECK(s(1, 1) == doctest::Approx(4.0));
    CHECK(s(2, 2) == doctest::Approx(9.0));
    CHECK(s(4, 4) == doctest::Approx(9.0));
    CHECK(s(0, 1) == 0.0);
    CHECK_THROWS_AS(build_sigma(CovarianceSpec::hetero_block(vars, sizes), 6),
                    std::invalid_argument);
  }

  SUBCASE("spatial exponential correlation") {
    Eigen::MatrixXd loc(3, 2);
    loc << 0.0, 0.0, 1.0, 0.0, 0.0, 2.0;
    const Eigen::MatrixXd s = build_sigma(CovarianceSpec::spatial(2.0, loc), 3);
    CHECK(s(0, 1) == doctest::Approx(std::exp(-0.5)));
    CHECK(s(0, 2) == doctest::Approx(std::exp(-1.0)));
    CHECK(s(1, 1) == doctest::Approx(1.0));
  }
}

TEST_CASE("build_sigma output is symmetric positive definite") {
  Rng rng(77);
  Eigen::MatrixXd loc(12, 2);
  for (int i = 0; i < 12; ++i) {
    loc(i, 0) = rng.uniform();
    loc(i, 1) = rng.uniform();
  }
  Eigen::VectorXd vars(3);
  vars << 0.5, 2.0, 1.3;
  Eigen::VectorXi sizes(3);
  sizes << 4, 4, 4;
  const std::vector<CovarianceSpec> specs = {
      CovarianceSpec::identity(), CovarianceSpec::ar1(0.85), CovarianceSpec::ar1(-0.4),
      CovarianceSpec::equicorrelated(0.3), CovarianceSpec::hetero_block(vars, sizes),
      CovarianceSpec::spatial(1.5, loc)};
  for (const auto& spec : specs) {
    const Eigen::MatrixXd s = build_sigma(spec, 12);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_NOTHROW(Whitener{s});
  }
}

TEST_CASE("whitening transform") {
  SUBCASE("identity") {
    const Whitener w(Eigen::MatrixXd::Identity(3, 3));
    Eigen::VectorXd v(3);
    v << 1.0, -2.0, 3.0;
    CHECK((w.apply(v) - v).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("diagonal") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
    s(0, 0) = 4.0;
    s(1, 1) = 9.0;
    const Whitener w(s);
    Eigen::VectorXd v(2);
    v << 1.0, 1.0;
    const Eigen::VectorXd t = w.apply(v);
    CHECK(t(0) == doctest::Approx(0.5));
    CHECK(t(1) == doctest::Approx(1.0 / 3.0));
  }

  SUBCASE("round trip across families") {
    Eigen::VectorXd vars(2);
    vars << 0.5, 2.5;
    Eigen::VectorXi sizes(2);
    sizes << 25, 25;
    const std::vector<CovarianceSpec> specs = {CovarianceSpec::ar1(0.9),
                                               CovarianceSpec::equicorrelated(0.45),
                                               CovarianceSpec::hetero_block(vars, sizes)};
    for (const auto& spec : specs) {
      const Eigen::MatrixXd s = build_sigma(spec, 50);
      const Whitener w(s);
      // L^{-1} Sigma L^{-T} = (L^{-1} (L^{-1} Sigma)')'
      const Eigen::MatrixXd half = w.apply(s);
      const Eigen::MatrixXd identity = w.apply(Eigen::MatrixXd(half.transpose())).transpose();
      CHECK((identity - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  SUBCASE("non positive definite input") {
    Eigen::MatrixXd s(2, 2);
    s << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_WITH_AS(Whitener{s}, "matrix not positive definite", NumericalError);
  }
}

TEST_CASE("ar1 precision matrix is tridiagonal") {
  const int n = 200;
  const Eigen::MatrixXd s = build_sigma(CovarianceSpec::ar1(0.7), n);
  const Whitener w(s);
  const Eigen::MatrixXd inv = w.solve_sigma(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
  double max_off = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(i - j) > 1) max_off = std::max(max_off, std::abs(inv(i, j)));
    }
  }
  CHECK(max_off < 1e-8);
}

TEST_CASE("theta estimation from residuals") {
  const CovarianceSpec ar1 = CovarianceSpec::ar1(0.0);

  SUBCASE("white noise gives a small lag-1 autocorrelation") {
    Rng rng(101);
    Eigen::VectorXd e(10000);
    for (int i = 0; i < e.size(); ++i) e(i) = rng.normal();
    const ThetaEstimate est = estimate_theta(e, ar1);
    CHECK(std::abs(est.theta) < 0.05);
    CHECK_FALSE(est.degenerate);
  }

  SUBCASE("strongly dependent path is recovered") {
    Rng rng(102);
    const Eigen::VectorXd e = ar1_path(10000, 0.9, 1.0, rng);
    const ThetaEstimate est = estimate_theta(e, ar1);
    CHECK(est.theta > 0.88);
    CHECK(est.theta < 0.92);
  }

  SUBCASE("constant residuals degrade gracefully") {
    const Eigen::VectorXd e = Eigen::VectorXd::Constant(10, 2.5);
    const ThetaEstimate est = estimate_theta(e, ar1);
    CHECK(est.theta == 0.0);
    CHECK(est.degenerate);
  }

  SUBCASE("needs at least three points") {
    CHECK_THROWS_AS(estimate_theta(Eigen::VectorXd::Zero(2), ar1), std::invalid_argument);
  }

  SUBCASE("block variances") {
    Eigen::VectorXd vars(2);
    vars << 1.0, 1.0;
    Eigen::VectorXi sizes(2);
    sizes << 3, 3;
    const CovarianceSpec spec = CovarianceSpec::hetero_block(vars, sizes);
    Eigen::VectorXd e(6);
    e << 2.0, -2.0, 2.0, 0.5, -0.5, 0.5;
    const ThetaEstimate est = estimate_theta(e, spec);
    CHECK(est.block_vars(0) == doctest::Approx(4.0));
    CHECK(est.block_vars(1) == doctest::Approx(0.25));
  }

  SUBCASE("equicorrelated parameter from exchangeable residuals") {
    const int n = 400;
    Rng rng(104);
    const CovarianceSpec spec = CovarianceSpec::equicorrelated(0.4);
    const Eigen::MatrixXd s = build_sigma(spec, n);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    const Eigen::VectorXd e = Eigen::LLT<Eigen::MatrixXd>(s).matrixL() * z;
    const ThetaEstimate est = estimate_theta(e, spec);
    CHECK(est.theta > 0.1);
    CHECK(est.theta < 0.99);
  }

  SUBCASE("spatial range recovers the generating scale") {
    // Correlated field via the exact Cholesky factor, then refit.
    const int n = 60;
    Rng rng(103);
    Eigen::MatrixXd loc(n, 2);
    for (int i = 0; i < n; ++i) {
      loc(i, 0) = 3.0 * rng.uniform();
      loc(i, 1) = 3.0 * rng.uniform();
    }
    const CovarianceSpec spec = CovarianceSpec::spatial(0.8, loc);
    const Eigen::MatrixXd s = build_sigma(spec, n);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    const Eigen::VectorXd e = Eigen::LLT<Eigen::MatrixXd>(s).matrixL() * z;
    const ThetaEstimate est = estimate_theta(e, spec);
    CHECK(est.theta > 0.1);
    CHECK(est.theta < 4.0);
  }
}

TEST_CASE("lag-1 estimator is consistent at Table-3 magnitudes") {
  const CovarianceSpec ar1 = CovarianceSpec::ar1(0.0);
  Rng rng(202);
  for (double theta : {0.0, 0.3, 0.6, 0.9}) {
    double mse = 0.0;
    const int replicas = 200;
    for (int r = 0; r < replicas; ++r) {
      const Eigen::VectorXd e = ar1_path(1000, theta, 1.0, rng);
      const double err = estimate_theta(e, ar1).theta - theta;
      mse += err * err;
    }
    mse /= replicas;
    CHECK(mse < 0.01);
  }
}

TEST_CASE("cross covariance terms") {
  SUBCASE("independent future under theta 0") {
    const CrossCovariance cc = cross_cov(CovarianceSpec::ar1(0.0), 5, {1, 2});
    CHECK(cc.delta.cwiseAbs().maxCoeff() == 0.0);
    CHECK((cc.sigma0 - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("ar1 one step ahead") {
    const CrossCovariance cc = cross_cov(CovarianceSpec::ar1(0.5), 3, {1});
    CHECK(cc.delta(0, 0) == doctest::Approx(0.125));
    CHECK(cc.delta(0, 1) == doctest::Approx(0.25));
    CHECK(cc.delta(0, 2) == doctest::Approx(0.5));
  }

  SUBCASE("ar1 future correlation across horizons") {
    const CrossCovariance cc = cross_cov(CovarianceSpec::ar1(0.9), 4, {1, 2});
    CHECK(cc.sigma0(0, 0) == doctest::Approx(1.0));
    CHECK(cc.sigma0(0, 1) == doctest::Approx(0.9));
    CHECK(cc.sigma0(1, 0) == doctest::Approx(0.9));
  }

  SUBCASE("non-serial families are exchangeable") {
    const CrossCovariance cc = cross_cov(CovarianceSpec::equicorrelated(0.4), 6, {1, 3});
    CHECK(cc.delta.cwiseAbs().maxCoeff() == 0.0);
    CHECK((cc.sigma0 - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("horizons must be positive") {
    CHECK_THROWS_AS(cross_cov(CovarianceSpec::ar1(0.5), 3, {0}), std::invalid_argument);
  }
}
