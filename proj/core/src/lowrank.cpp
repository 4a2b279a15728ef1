#include "popnet/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "popnet/errors.hpp"

namespace popnet {

namespace {

constexpr double kOneBelow = 1.0 - 0x1p-53;

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError(std::string(what) + ": non-finite entry at position " + std::to_string(i + 1));
    }
  }
}

int v_from_slots(std::size_t slots) {
  // Solve V(V-1)/2 = slots.
  const auto v = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(slots))) / 2.0));
  if (pair_count(v) != slots) {
    throw DomainError("length " + std::to_string(slots) + " is not V(V-1)/2 for any V");
  }
  return v;
}

}  // namespace

SharedSimilarity::SharedSimilarity(std::vector<double> values) : z(std::move(values)) {
  require_finite(z, "SharedSimilarity");
}

std::vector<double> lambda_from_theta(std::span<const double> theta) {
  std::vector<double> lambda(theta.size());
  double running = 1.0;
  for (std::size_t r = 0; r < theta.size(); ++r) {
    if (!(theta[r] > 0.0)) throw DomainError("theta entries must be positive");
    running /= theta[r];
    lambda[r] = running;
  }
  return lambda;
}

LatentFactors::LatentFactors(Eigen::MatrixXd xb, std::vector<double> th)
    : x_bar(std::move(xb)), theta(std::move(th)) {
  if (static_cast<std::size_t>(x_bar.cols()) != theta.size()) {
    throw DomainError("LatentFactors: x_bar has " + std::to_string(x_bar.cols()) + " columns but " +
                      std::to_string(theta.size()) + " theta entries");
  }
  if (!x_bar.allFinite()) throw DomainError("LatentFactors: x_bar has non-finite entries");
  refresh_lambda();
}

void LatentFactors::refresh_lambda() { lambda = lambda_from_theta(theta); }

MixtureModel::MixtureModel(std::vector<double> nu, SharedSimilarity shared,
                           std::vector<LatentFactors> classes)
    : nu_(std::move(nu)), shared_(std::move(shared)), classes_(std::move(classes)) {
  if (classes_.empty() || classes_.size() != nu_.size()) {
    throw DomainError("MixtureModel: need one LatentFactors per mixture weight");
  }
  v_count_ = v_from_slots(shared_.z.size());
  validate_weights();
  pi_.reserve(classes_.size());
  for (const auto& f : classes_) {
    if (f.v_count() != v_count_) throw DomainError("MixtureModel: factor rows disagree with V");
    pi_.push_back(logistic_map(class_log_odds(shared_, f)));
  }
}

MixtureModel MixtureModel::from_probabilities(int v_count, std::vector<double> nu,
                                              std::vector<std::vector<double>> pi) {
  MixtureModel m;
  m.v_count_ = v_count;
  m.nu_ = std::move(nu);
  m.pi_ = std::move(pi);
  if (m.pi_.empty() || m.pi_.size() != m.nu_.size()) {
    throw DomainError("MixtureModel: need one probability vector per mixture weight");
  }
  m.validate_weights();
  for (const auto& p : m.pi_) {
    if (p.size() != pair_count(v_count)) throw DomainError("MixtureModel: pi length mismatch");
    for (double x : p) {
      if (!(x >= 0.0 && x <= 1.0)) throw DomainError("MixtureModel: pi entries must lie in [0,1]");
    }
  }
  return m;
}

void MixtureModel::validate_weights() const {
  double total = 0.0;
  for (double w : nu_) {
    if (!(w >= 0.0)) throw DomainError("MixtureModel: negative mixture weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("MixtureModel: weights sum to " + std::to_string(total) + ", not 1");
  }
}

void class_log_odds(std::span<const double> z, const Eigen::MatrixXd& x_bar, std::span<double> out) {
  const auto v_count = static_cast<int>(x_bar.rows());
  if (z.size() != pair_count(v_count) || out.size() != z.size()) {
    throw DomainError("class_log_odds: Z has length " + std::to_string(z.size()) +
                      " but x_bar implies V(V-1)/2 = " + std::to_string(pair_count(v_count)));
  }
  std::size_t l = 0;
  for (int u = 0; u < v_count; ++u) {
    for (int v = u + 1; v < v_count; ++v, ++l) {
      out[l] = z[l] + x_bar.row(v).dot(x_bar.row(u));
    }
  }
}

std::vector<double> class_log_odds(const SharedSimilarity& shared, const LatentFactors& factors) {
  std::vector<double> out(shared.z.size());
  class_log_odds(shared.z, factors.x_bar, out);
  return out;
}

double logistic(double s) noexcept {
  double p;
  if (s >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-s));
  } else {
    const double e = std::exp(s);
    p = e / (1.0 + e);
  }
  return std::clamp(p, std::numeric_limits<double>::denorm_min(), kOneBelow);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logit: probability must lie in (0,1)");
  return std::log(p) - std::log1p(-p);
}

void logistic_map(std::span<const double> s, std::span<double> out) {
  if (out.size() != s.size()) throw DomainError("logistic_map: output length mismatch");
  require_finite(s, "logistic_map");
  std::transform(s.begin(), s.end(), out.begin(), [](double x) { return logistic(x); });
}

std::vector<double> logistic_map(std::span<const double> s) {
  std::vector<double> out(s.size());
  logistic_map(s, out);
  return out;
}

double network_log_likelihood(const EdgeVector& a, std::span<const double> pi) {
  if (a.size() != pi.size()) throw DomainError("network_log_likelihood: length mismatch");
  double total = 0.0;
  for (std::size_t l = 0; l < pi.size(); ++l) {
    const double p = pi[l];
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("network_log_likelihood: pi at position " + std::to_string(l + 1) +
                        " is not strictly inside (0,1); clamp before calling");
    }
    total += a[l] ? std::log(p) : std::log1p(-p);
  }
  return total;
}

double log_sum_exp(std::span<const double> values) noexcept {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

double log_mixture_pmf(const EdgeVector& a, const MixtureModel& model) {
  if (a.v_count() != model.v_count()) throw DomainError("mixture_pmf: V mismatch");
  std::vector<double> terms(model.class_count());
  std::vector<double> clamped(model.edge_slots());
  for (std::size_t h = 0; h < model.class_count(); ++h) {
    const double w = model.nu()[h];
    if (w == 0.0) {
      terms[h] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const auto& p = model.pi(h);
    std::transform(p.begin(), p.end(), clamped.begin(), clamp_probability);
    terms[h] = std::log(w) + network_log_likelihood(a, clamped);
  }
  return log_sum_exp(terms);
}

double mixture_pmf(const EdgeVector& a, const MixtureModel& model) {
  return std::exp(log_mixture_pmf(a, model));
}

std::vector<double> expected_edge_probs(const MixtureModel& model) {
  std::vector<double> out(model.edge_slots(), 0.0);
  for (std::size_t h = 0; h < model.class_count(); ++h) {
    const double w = model.nu()[h];
    const auto& p = model.pi(h);
    for (std::size_t l = 0; l < out.size(); ++l) out[l] += w * p[l];
  }
  return out;
}

LogOddsMoments prior_log_odds_moments(std::span<const double> mu, std::span<const double> sigma2,
                                      std::span<const double> lambda) {
  if (mu.size() != sigma2.size()) throw DomainError("prior_log_odds_moments: mu/sigma2 length mismatch");
  double extra = 0.0;
  for (double lam : lambda) {
    if (!(lam >= 0.0)) throw DomainError("prior_log_odds_moments: lambda must be nonnegative");
    extra += lam * lam;
  }
  LogOddsMoments m{std::vector<double>(mu.begin(), mu.end()), std::vector<double>(sigma2.size())};
  for (std::size_t l = 0; l < sigma2.size(); ++l) {
    if (!(sigma2[l] >= 0.0)) throw DomainError("prior_log_odds_moments: negative sigma2");
    m.variance[l] = sigma2[l] + extra;
  }
  return m;
}

}  // namespace popnet
