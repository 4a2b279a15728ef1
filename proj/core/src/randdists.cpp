#include "popnet/randdists.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <sstream>

#include "popnet/errors.hpp"
#include "popnet/lowrank.hpp"

namespace popnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

std::uint64_t derive_stream_id(std::uint64_t stream_id, std::uint64_t child) noexcept {
  return splitmix64(splitmix64(stream_id) ^ (child * 0xd1b54a32d192ed03ULL + 1));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

RngStream RngStream::split(std::uint64_t child) const {
  return RngStream(seed_, derive_stream_id(stream_id_, child));
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double x, y, s;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = y * f;
  has_spare_ = true;
  return x * f;
}

std::string RngStream::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << seed_ << ' ' << stream_id_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << std::hexfloat << spare_
      << std::defaultfloat << ' ' << engine_;
  return out.str();
}

RngStream RngStream::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::uint64_t seed, stream;
  int spare_flag;
  std::string spare_text;
  in >> seed >> stream >> spare_flag >> spare_text;
  RngStream rng(seed, stream);
  rng.has_spare_ = spare_flag != 0;
  rng.spare_ = std::strtod(spare_text.c_str(), nullptr);
  in >> rng.engine_;
  if (!in) throw DomainError("RngStream: malformed serialized state");
  return rng;
}

// Marsaglia & Tsang (2000) squeeze/rejection for shape >= 1; shape < 1 uses
// Ga(a) = Ga(a+1) U^(1/a) on the log scale.
double sample_log_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma: shape must be positive");
  double boost = 0.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::log(rng.uniform()) / a;
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("gamma: rate must be positive");
  return std::exp(sample_log_gamma(shape, rng)) / rate;
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  return 1.0 / sample_gamma(shape, scale, rng);
}

void sample_dirichlet(std::span<const double> alpha, RngStream& rng, std::span<double> out) {
  if (alpha.empty() || out.size() != alpha.size()) throw DomainError("dirichlet: bad dimensions");
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!(alpha[k] > 0.0)) throw DomainError("dirichlet: concentration parameters must be positive");
    out[k] = sample_log_gamma(alpha[k], rng);
  }
  const double norm = log_sum_exp(out);
  double total = 0.0;
  for (double& x : out) {
    x = std::exp(x - norm);
    total += x;
  }
  for (double& x : out) x /= total;
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, RngStream& rng) {
  std::vector<double> out(alpha.size());
  sample_dirichlet(alpha, rng, out);
  return out;
}

MigDraw sample_mig(double a1, double a2, int rank, RngStream& rng) {
  if (!(a1 > 0.0) || !(a2 > 0.0)) throw DomainError("MIG: a1 and a2 must be positive");
  if (rank < 1) throw DomainError("MIG: rank must be at least 1");
  MigDraw d;
  d.theta.resize(static_cast<std::size_t>(rank));
  for (int r = 0; r < rank; ++r) d.theta[r] = sample_gamma(r == 0 ? a1 : a2, 1.0, rng);
  d.lambda = lambda_from_theta(d.theta);
  return d;
}

std::vector<double> sample_gaussian(std::span<const double> mean, std::span<const double> variance,
                                    RngStream& rng) {
  if (mean.size() != variance.size()) throw DomainError("gaussian: mean/variance length mismatch");
  std::vector<double> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!(variance[i] > 0.0) || !std::isfinite(variance[i])) {
      throw DomainError("gaussian: variance at position " + std::to_string(i + 1) +
                        " must be positive");
    }
    out[i] = mean[i] + std::sqrt(variance[i]) * rng.normal();
  }
  return out;
}

int cholesky_in_place(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return static_cast<int>(j);
    d = std::sqrt(d);
    m(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
      m(i, j) = s / d;
    }
    for (Eigen::Index i = 0; i < j; ++i) m(i, j) = 0.0;
  }
  return -1;
}

Eigen::VectorXd sample_gaussian_cov(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                                    RngStream& rng) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw DomainError("gaussian: covariance shape does not match mean");
  }
  Eigen::MatrixXd chol = covariance;
  if (const int pivot = cholesky_in_place(chol); pivot >= 0) {
    throw NumericalError("gaussian: covariance not positive definite at pivot " +
                         std::to_string(pivot + 1));
  }
  Eigen::VectorXd eps(mean.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  return mean + chol.triangularView<Eigen::Lower>() * eps;
}

Eigen::VectorXd sample_gaussian_precision(const Eigen::MatrixXd& precision, const Eigen::VectorXd& b,
                                          RngStream& rng) {
  if (precision.rows() != b.size() || precision.cols() != b.size()) {
    throw DomainError("gaussian: precision shape does not match linear term");
  }
  Eigen::MatrixXd chol = precision;
  if (const int pivot = cholesky_in_place(chol); pivot >= 0) {
    throw NumericalError("gaussian: precision not positive definite at pivot " +
                         std::to_string(pivot + 1));
  }
  Eigen::VectorXd w = chol.triangularView<Eigen::Lower>().solve(b);
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] += rng.normal();
  return chol.triangularView<Eigen::Lower>().transpose().solve(w);
}

double polya_gamma_mean(double b, double c) {
  const double x = std::abs(c);
  if (x < 1e-6) return b * (0.25 - x * x / 48.0);
  return b / (2.0 * x) * std::tanh(0.5 * x);
}

double polya_gamma_variance(double b, double c) {
  const double x = std::abs(c);
  if (x < 1e-3) return b * (1.0 / 24.0 - x * x / 120.0);
  const double ch = std::cosh(0.5 * x);
  return b * (std::sinh(x) - x) / (4.0 * x * x * x * ch * ch);
}

}  // namespace popnet
