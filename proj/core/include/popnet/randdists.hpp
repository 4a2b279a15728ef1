#pragma once

// Seeded sampling primitives used by the priors and the Gibbs sweep.
//
// Every draw goes through an RngStream; there is no global random state.
// Streams are identified by (seed, stream_id) and can be split deterministically,
// so parallel workers each own a substream and results do not depend on
// scheduling.

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace popnet {

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Independent child stream; same (seed, stream_id, child) always gives the same child.
  RngStream split(std::uint64_t child) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53; }
  // Standard exponential.
  double exponential();
  // Standard normal (Marsaglia polar method, spare value cached).
  double normal();

  // Exact textual state (engine + cached normal) for snapshots.
  std::string serialize() const;
  static RngStream deserialize(const std::string& text);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a (seed, stream, child) triple into a fresh 64-bit stream id.
std::uint64_t derive_stream_id(std::uint64_t stream_id, std::uint64_t child) noexcept;

// Gamma(shape, rate); shape > 0, rate > 0.
double sample_gamma(double shape, double rate, RngStream& rng);
// log of a Gamma(shape, 1) draw; stays finite for tiny shapes where the draw underflows.
double sample_log_gamma(double shape, RngStream& rng);
// Inverse-Gamma(shape, scale): 1 / Gamma(shape, rate = scale).
double sample_inverse_gamma(double shape, double scale, RngStream& rng);

std::vector<double> sample_dirichlet(std::span<const double> alpha, RngStream& rng);
void sample_dirichlet(std::span<const double> alpha, RngStream& rng, std::span<double> out);

struct MigDraw {
  std::vector<double> lambda;
  std::vector<double> theta;
};

// Multiplicative inverse gamma: theta_1 ~ Ga(a1,1), theta_m ~ Ga(a2,1) for m > 1,
// lambda_r = prod_{m<=r} 1/theta_m.
MigDraw sample_mig(double a1, double a2, int rank, RngStream& rng);

// Independent coordinates N(mean_i, variance_i); variances must be positive.
std::vector<double> sample_gaussian(std::span<const double> mean, std::span<const double> variance,
                                    RngStream& rng);

// Lower Cholesky factor in place. Returns -1 on success, otherwise the 0-based
// pivot at which positive definiteness failed.
int cholesky_in_place(Eigen::MatrixXd& m);

// N(mean, covariance). Throws NumericalError naming the failing pivot.
Eigen::VectorXd sample_gaussian_cov(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                                    RngStream& rng);

// N(P^-1 b, P^-1) given precision P and linear term b: factor P = L L^T,
// mean = L^-T L^-1 b, draw = mean + L^-T eps.
Eigen::VectorXd sample_gaussian_precision(const Eigen::MatrixXd& precision, const Eigen::VectorXd& b,
                                          RngStream& rng);

// Polya-gamma PG(1, c) via the exact alternating-series accept/reject sampler
// on J*(1, c/2) with truncation point 0.64.
double sample_polya_gamma1(double c, RngStream& rng);
// PG(b, c) for integer b >= 1 as a sum of b independent PG(1, c) draws.
double sample_polya_gamma(int b, double c, RngStream& rng);

// Closed-form PG(b, c) moments.
double polya_gamma_mean(double b, double c);
double polya_gamma_variance(double b, double c);

}  // namespace popnet
