#pragma once

// Deterministic model math for the mixture of low-rank log-odds factorizations:
//
//   S^(h) = Z + vech(Xbar^(h) Xbar^(h)^T),   pi^(h) = logistic(S^(h)),
//   p(a) = sum_h nu_h prod_l pi_l^(h)^a_l (1 - pi_l^(h))^(1 - a_l).
//
// Identified quantities (pi^(h), nu, expected edge probabilities) are the only
// outputs; individual factorizations Xbar^(h) are not unique and are never
// reported on their own.

#include <Eigen/Core>
#include <span>
#include <vector>

#include "popnet/netcore.hpp"

namespace popnet {

// Probabilities consumed by log-likelihoods are clamped to [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-12;

struct SharedSimilarity {
  std::vector<double> z;  // log-odds, one per node pair

  SharedSimilarity() = default;
  explicit SharedSimilarity(std::vector<double> values);
};

struct LatentFactors {
  Eigen::MatrixXd x_bar;       // V x R rescaled coordinates
  std::vector<double> theta;   // R multiplicative gamma factors, > 0
  std::vector<double> lambda;  // lambda_r = prod_{m<=r} 1 / theta_m

  LatentFactors() = default;
  // Derives lambda from theta. Throws DomainError on nonpositive theta or shape mismatch.
  LatentFactors(Eigen::MatrixXd x_bar, std::vector<double> theta);

  int v_count() const noexcept { return static_cast<int>(x_bar.rows()); }
  int rank() const noexcept { return static_cast<int>(x_bar.cols()); }
  // Recompute lambda after theta changed.
  void refresh_lambda();
};

std::vector<double> lambda_from_theta(std::span<const double> theta);

class MixtureModel {
 public:
  // Full model; pi^(h) is computed eagerly from (shared, classes).
  MixtureModel(std::vector<double> nu, SharedSimilarity shared, std::vector<LatentFactors> classes);

  // Model given only its identified functionals (nu, pi^(h)), e.g. posterior means.
  static MixtureModel from_probabilities(int v_count, std::vector<double> nu,
                                         std::vector<std::vector<double>> pi);

  int v_count() const noexcept { return v_count_; }
  std::size_t class_count() const noexcept { return nu_.size(); }
  std::size_t edge_slots() const noexcept { return pair_count(v_count_); }
  const std::vector<double>& nu() const noexcept { return nu_; }
  const std::vector<double>& pi(std::size_t h) const { return pi_[h]; }
  const std::vector<std::vector<double>>& pi() const noexcept { return pi_; }
  bool has_factors() const noexcept { return !classes_.empty(); }
  const SharedSimilarity& shared() const noexcept { return shared_; }
  const LatentFactors& factors(std::size_t h) const { return classes_[h]; }

 private:
  MixtureModel() = default;
  void validate_weights() const;

  int v_count_ = 0;
  std::vector<double> nu_;
  SharedSimilarity shared_;
  std::vector<LatentFactors> classes_;
  std::vector<std::vector<double>> pi_;
};

// S_l = Z_l + sum_r Xbar_vr Xbar_ur for the pair (v,u) at position l.
std::vector<double> class_log_odds(const SharedSimilarity& shared, const LatentFactors& factors);
void class_log_odds(std::span<const double> z, const Eigen::MatrixXd& x_bar, std::span<double> out);

double logistic(double s) noexcept;
double logit(double p);
std::vector<double> logistic_map(std::span<const double> s);
void logistic_map(std::span<const double> s, std::span<double> out);

inline double clamp_probability(double p) noexcept {
  return p < kProbFloor ? kProbFloor : (p > 1.0 - kProbFloor ? 1.0 - kProbFloor : p);
}

// sum_l a_l log pi_l + (1 - a_l) log(1 - pi_l). pi_l must lie strictly inside (0,1).
double network_log_likelihood(const EdgeVector& a, std::span<const double> pi);

double log_mixture_pmf(const EdgeVector& a, const MixtureModel& model);
double mixture_pmf(const EdgeVector& a, const MixtureModel& model);

// Expected value of the network-valued random variable: sum_h nu_h pi^(h).
std::vector<double> expected_edge_probs(const MixtureModel& model);

struct LogOddsMoments {
  std::vector<double> mean;
  std::vector<double> variance;
};

// Prior mean and variance of S_l given lambda: (mu_l, sigma2_l + sum_r lambda_r^2).
LogOddsMoments prior_log_odds_moments(std::span<const double> mu, std::span<const double> sigma2,
                                      std::span<const double> lambda);

double log_sum_exp(std::span<const double> values) noexcept;

}  // namespace popnet
