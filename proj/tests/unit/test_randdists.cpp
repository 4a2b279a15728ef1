#include <algorithm>
#include <Eigen/LU>
#include <cmath>

#include "doctest.h"
#include "popnet/errors.hpp"
#include "popnet/randdists.hpp"
#include "support.hpp"

using namespace popnet;

namespace {

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Critical value at level 0.01.
double ks_critical(std::size_t n, std::size_t m) {
  return 1.628 * std::sqrt(static_cast<double>(n + m) / static_cast<double>(n * m));
}

struct SampleMoments {
  double mean, var, se_mean, se_var;
};

SampleMoments sample_moments(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double m = 0.0;
  for (double x : xs) m += x;
  m /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = (x - m) * (x - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  return {m, m2 * n / (n - 1.0), std::sqrt(m2 / n), std::sqrt((m4 - m2 * m2) / n)};
}

}  // namespace

TEST_SUITE("randdists") {

TEST_CASE("streams are deterministic and split independently") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42, 8);
  CHECK(RngStream(42, 7).next_u64() != c.next_u64());
  const RngStream root(1, 0);
  CHECK(root.split(3).next_u64() == root.split(3).next_u64());
  CHECK(root.split(3).next_u64() != root.split(4).next_u64());
}

TEST_CASE("uniform stays inside the open unit interval") {
  RngStream r(1, 1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("serialize round-trips the full state including the cached normal") {
  RngStream r(9, 2);
  r.normal();  // leaves a spare
  const auto text = r.serialize();
  auto copy = RngStream::deserialize(text);
  for (int i = 0; i < 50; ++i) {
    CHECK(copy.normal() == r.normal());
    CHECK(copy.uniform() == r.uniform());
  }
  CHECK_THROWS(RngStream::deserialize("garbage"));
}

TEST_CASE("normal and exponential moments") {
  RngStream r(3, 0);
  std::vector<double> n(100000), e(100000);
  for (auto& x : n) x = r.normal();
  for (auto& x : e) x = r.exponential();
  const auto mn = sample_moments(n), me = sample_moments(e);
  CHECK(std::abs(mn.mean) < 4 * mn.se_mean);
  CHECK(std::abs(mn.var - 1.0) < 4 * mn.se_var);
  CHECK(std::abs(me.mean - 1.0) < 4 * me.se_mean);
  CHECK(std::abs(me.var - 1.0) < 4 * me.se_var);
}

TEST_CASE("gamma moments across shapes") {
  RngStream r(4, 0);
  for (double shape : {0.05, 0.3, 1.0, 2.5, 17.0}) {
    for (double rate : {1.0, 3.0}) {
      std::vector<double> xs(100000);
      for (auto& x : xs) x = sample_gamma(shape, rate, r);
      const auto m = sample_moments(xs);
      CAPTURE(shape);
      CAPTURE(rate);
      CHECK(std::abs(m.mean - shape / rate) < 4 * m.se_mean);
      CHECK(std::abs(m.var - shape / (rate * rate)) < 4 * m.se_var);
    }
  }
  CHECK_THROWS_AS(sample_gamma(0.0, 1.0, r), DomainError);
  CHECK_THROWS_AS(sample_gamma(1.0, -1.0, r), DomainError);
}

TEST_CASE("log-gamma stays finite for tiny shapes") {
  RngStream r(5, 0);
  for (int i = 0; i < 1000; ++i) CHECK(std::isfinite(sample_log_gamma(1e-3, r)));
}

TEST_CASE("dirichlet") {
  RngStream r(6, 0);
  const std::vector<double> alpha(30, 1.0 / 30.0);
  std::vector<std::vector<double>> cols(30);
  for (int i = 0; i < 100000; ++i) {
    const auto x = sample_dirichlet(alpha, r);
    double s = 0.0;
    for (std::size_t h = 0; h < 30; ++h) {
      s += x[h];
      if (h < 3) cols[h].push_back(x[h]);
    }
    REQUIRE(std::abs(s - 1.0) < 1e-12);
  }
  for (int h = 0; h < 3; ++h) {
    const auto m = sample_moments(cols[h]);
    CHECK(std::abs(m.mean - 1.0 / 30.0) < 3 * m.se_mean);
  }
  const std::vector<double> ab{3.5, 1.5};
  std::vector<double> first(100000);
  for (auto& x : first) x = sample_dirichlet(ab, r)[0];
  const auto m = sample_moments(first);
  CHECK(std::abs(m.mean - 0.7) < 3 * m.se_mean);
}

TEST_CASE("multiplicative inverse gamma") {
  RngStream r(7, 0);
  std::vector<double> theta1(100000), theta2(100000);
  int ordered = 0;
  for (std::size_t i = 0; i < theta1.size(); ++i) {
    const auto d = sample_mig(2.5, 3.5, 4, r);
    theta1[i] = d.theta[0];
    theta2[i] = d.theta[1];
    CHECK(d.lambda[0] == 1.0 / d.theta[0]);
    for (int k = 1; k < 4; ++k) REQUIRE(d.lambda[k] == d.lambda[k - 1] / d.theta[k]);
    if (i < 10000 && d.lambda[1] < d.lambda[0]) ++ordered;
  }
  const auto m1 = sample_moments(theta1), m2 = sample_moments(theta2);
  CHECK(std::abs(m1.mean - 2.5) < 4 * m1.se_mean);
  CHECK(std::abs(m2.mean - 3.5) < 4 * m2.se_mean);
  // P(theta_2 > 1) for Ga(3.5, 1) is about 0.934.
  CHECK(ordered > 9000);
}

TEST_CASE("gaussian draws") {
  RngStream r(8, 0);
  const std::vector<double> zero(3, 0.0), one(3, 1.0);
  double c[3][3] = {};
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    const auto x = sample_gaussian(zero, one, r);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) c[a][b] += x[a] * x[b] / N;
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double se = a == b ? std::sqrt(2.0 / N) : std::sqrt(1.0 / N);
      CHECK(std::abs(c[a][b] - (a == b ? 1.0 : 0.0)) < 3 * se);
    }
  }
  CHECK_THROWS_AS(sample_gaussian(zero, std::vector<double>{1.0, 0.0, 1.0}, r), DomainError);
}

TEST_CASE("precision and covariance parameterisations agree") {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  const Eigen::MatrixXd prec = cov.inverse();
  Eigen::VectorXd mean(2);
  mean << 1.0, -0.5;
  const Eigen::VectorXd b = prec * mean;
  RngStream r1(9, 1), r2(9, 2);
  std::vector<double> a0, a1, p0, p1;
  for (int i = 0; i < 10000; ++i) {
    const auto x = sample_gaussian_cov(mean, cov, r1);
    const auto y = sample_gaussian_precision(prec, b, r2);
    a0.push_back(x[0]);
    a1.push_back(x[1]);
    p0.push_back(y[0]);
    p1.push_back(y[1]);
  }
  CHECK(ks_statistic(a0, p0) < ks_critical(10000, 10000));
  CHECK(ks_statistic(a1, p1) < ks_critical(10000, 10000));
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(sample_gaussian_cov(mean, bad, r1), NumericalError);
}

TEST_CASE("cholesky reports the failing pivot") {
  Eigen::MatrixXd m(3, 3);
  m << 4, 2, 0, 2, 1, 0, 0, 0, 1;
  CHECK(cholesky_in_place(m) == 1);
  Eigen::MatrixXd ok = Eigen::MatrixXd::Identity(3, 3) * 4.0;
  CHECK(cholesky_in_place(ok) == -1);
  CHECK(ok(2, 2) == doctest::Approx(2.0));
}

TEST_CASE("polya-gamma closed forms") {
  CHECK(polya_gamma_mean(1.0, 0.0) == 0.25);
  CHECK(polya_gamma_mean(2.0, 2.0) == doctest::Approx(0.5 * std::tanh(1.0)));
  CHECK(polya_gamma_variance(1.0, 0.0) == doctest::Approx(1.0 / 24.0));
  // Small-c expansion joins the direct formula smoothly.
  CHECK(polya_gamma_variance(1.0, 1e-3) == doctest::Approx(polya_gamma_variance(1.0, 2e-3)).epsilon(1e-6));
  const double c = 0.7;
  const double direct = (std::sinh(c) - c) / (4.0 * c * c * c * std::cosh(c / 2) * std::cosh(c / 2));
  CHECK(polya_gamma_variance(1.0, c) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("polya-gamma examples") {
  RngStream r(10, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_polya_gamma(1, 0.0, r);
  auto m = sample_moments(xs);
  CHECK(std::abs(m.mean - 0.25) < 3 * m.se_mean);
  for (auto& x : xs) x = sample_polya_gamma(2, 2.0, r);
  m = sample_moments(xs);
  CHECK(std::abs(m.mean - 0.3807970779778824) < 3 * m.se_mean);

  std::vector<double> pos(10000), neg(10000);
  for (auto& x : pos) x = sample_polya_gamma(3, 1.7, r);
  for (auto& x : neg) x = sample_polya_gamma(3, -1.7, r);
  CHECK(ks_statistic(pos, neg) < ks_critical(10000, 10000));

  CHECK_THROWS_AS(sample_polya_gamma(0, 1.0, r), DomainError);
  CHECK_THROWS_AS(sample_polya_gamma(1, INFINITY, r), DomainError);
}

TEST_CASE("polya-gamma handles large |c|") {
  RngStream r(11, 0);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = sample_polya_gamma(1, 40.0, r);
  const auto m = sample_moments(xs);
  CHECK(std::abs(m.mean - polya_gamma_mean(1, 40.0)) < 4 * m.se_mean);
  for (double x : xs) REQUIRE(x > 0.0);
}

}  // TEST_SUITE
