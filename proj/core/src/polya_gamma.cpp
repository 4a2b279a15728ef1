// Exact Polya-gamma sampling (Polson, Scott & Windle 2013, Devroye-style
// alternating series). PG(1, c) = J*(1, c/2) / 4, where J* is drawn by
// accept/reject from a proposal mixing a truncated exponential (right of t)
// and a truncated inverse Gaussian (left of t).

#include <cmath>
#include <numbers>

#include "popnet/errors.hpp"
#include "popnet/randdists.hpp"

namespace popnet {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTrunc = 0.64;
constexpr double kTruncRecip = 1.0 / kTrunc;

double log_normal_cdf(double x) { return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2)); }

// n-th coefficient of the alternating series for the J*(1) density at x.
double series_coef(int n, double x) {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  if (x <= 0.0) return 0.0;
  const double expnt = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) -
                       2.0 * (n + 0.5) * (n + 0.5) / x;
  return std::exp(expnt);
}

// Probability of proposing from the exponential tail, p / (p + q).
double mass_texpon(double z) {
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double b = std::sqrt(1.0 / kTrunc) * (kTrunc * z - 1.0);
  const double a = -std::sqrt(1.0 / kTrunc) * (kTrunc * z + 1.0);
  const double x0 = std::log(fz) + fz * kTrunc;
  const double xb = x0 - z + log_normal_cdf(b);
  const double xa = x0 + z + log_normal_cdf(a);
  const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian IG(1/z, 1) truncated to (0, t).
double truncated_inverse_gaussian(double z, RngStream& rng) {
  double x = kTrunc + 1.0;
  if (kTruncRecip > z) {
    // Mean beyond t: propose from the z = 0 limit (1 / chi^2_1 truncated) and
    // accept with probability exp(-z^2 x / 2).
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / kTrunc) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * kTrunc;
      x = kTrunc / (x * x);
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > kTrunc) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

// One J*(1, z) draw given the precomputed proposal constants for z.
double sample_jstar(double z, double fz, double p_exp, RngStream& rng) {
  for (;;) {
    double x;
    if (rng.uniform() < p_exp) {
      x = kTrunc + rng.exponential() / fz;
    } else {
      x = truncated_inverse_gaussian(z, rng);
    }
    double s = series_coef(0, x);
    const double y = rng.uniform() * s;
    // Partial sums alternate around the target density; stop as soon as the
    // decision is settled.
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

}  // namespace

double sample_polya_gamma1(double c, RngStream& rng) { return sample_polya_gamma(1, c, rng); }

double sample_polya_gamma(int b, double c, RngStream& rng) {
  if (b < 1) throw DomainError("polya-gamma: b must be a positive integer");
  if (!std::isfinite(c)) throw DomainError("polya-gamma: c must be finite");
  const double z = 0.5 * std::abs(c);
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double p_exp = mass_texpon(z);
  double total = 0.0;
  for (int k = 0; k < b; ++k) total += sample_jstar(z, fz, p_exp, rng);
  return 0.25 * total;
}

}  // namespace popnet
