#include "popnet/gibbs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "popnet/errors.hpp"

namespace popnet {

namespace {

using Clock = std::chrono::steady_clock;

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out.push_back(' ');
    out += format_double(xs[i]);
  }
  return out;
}

std::vector<double> read_doubles_file(const std::filesystem::path& path, const std::string& key) {
  std::ifstream in(path);
  if (!in) throw ConfigError("key '" + key + "': cannot open per-edge file '" + path.string() + "'");
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    double x = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, x);
    if (ec != std::errc() || ptr != end) {
      throw ConfigError("key '" + key + "': '" + tok + "' in '" + path.string() + "' is not a number");
    }
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError("key '" + key + "': per-edge file is empty");
  return out;
}

std::vector<double> numbers_or_file(const KeyValues& kv, const std::string& key,
                                    const std::filesystem::path& base_dir) {
  try {
    return kv.get_doubles(key);
  } catch (const ConfigError&) {
    std::filesystem::path p(kv.raw(key));
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return read_doubles_file(p, key);
  }
}

bool parse_bool(const KeyValues& kv, const std::string& key, bool fallback) {
  const auto v = kv.get(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes") return true;
  if (*v == "0" || *v == "false" || *v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + *v + "'");
}

int checked_int(const KeyValues& kv, const std::string& key, int fallback) {
  const long long v = kv.get_int(key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError("key '" + key + "' out of range");
  }
  return static_cast<int>(v);
}

std::size_t draw_discrete(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  // Rounding left u above the cumulative total; take the last positive entry.
  for (std::size_t k = probs.size(); k-- > 0;) {
    if (probs[k] > 0.0) return k;
  }
  return probs.size() - 1;
}

// Draw N(P^-1 b, P^-1) using `precision` as scratch; result written to `b`.
void draw_precision_in_place(Eigen::MatrixXd& precision, Eigen::VectorXd& b, RngStream& rng, int h, int v) {
  if (const int pivot = cholesky_in_place(precision); pivot >= 0) {
    throw NumericalError("row update: precision not positive definite (class " + std::to_string(h + 1) +
                         ", node " + std::to_string(v + 1) + ", pivot " + std::to_string(pivot + 1) + ")");
  }
  precision.triangularView<Eigen::Lower>().solveInPlace(b);
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += rng.normal();
  precision.triangularView<Eigen::Lower>().transpose().solveInPlace(b);
}

void derive_caches(GibbsState& state, const ChainData& data) {
  refresh_counts(state, data);
  step_compute_pi(state);
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelConfig

void ModelConfig::validate(std::size_t edge_slots) const {
  if (H < 1) throw ConfigError("H must be >= 1");
  if (R < 1) throw ConfigError("R must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
  if (burn_in >= iterations) throw ConfigError("burn_in must be < iterations");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (!(a1 > 0.0) || !(a2 > 0.0)) throw ConfigError("a1 and a2 must be positive");
  if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
  if (mu.empty() || sigma2.empty()) throw ConfigError("mu and sigma2 must be given");
  for (double m : mu) {
    if (!std::isfinite(m)) throw ConfigError("mu entries must be finite");
  }
  for (double s : sigma2) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("sigma2 entries must be positive");
  }
  if (edge_slots) {
    if (mu.size() != 1 && mu.size() != edge_slots) {
      throw ConfigError("mu has " + std::to_string(mu.size()) + " entries; expected 1 or " +
                        std::to_string(edge_slots));
    }
    if (sigma2.size() != 1 && sigma2.size() != edge_slots) {
      throw ConfigError("sigma2 has " + std::to_string(sigma2.size()) + " entries; expected 1 or " +
                        std::to_string(edge_slots));
    }
  }
}

std::vector<std::string> ModelConfig::warnings() const {
  std::vector<std::string> out;
  if (a2 <= 1.0) {
    out.push_back("a2 <= 1: lambda_r is no longer stochastically decreasing in r");
  }
  return out;
}

std::size_t ModelConfig::kept_count() const {
  return iterations > burn_in ? static_cast<std::size_t>((iterations - burn_in) / thin) : 0;
}

std::vector<double> ModelConfig::mu_vector(std::size_t edge_slots) const {
  return mu.size() == 1 ? std::vector<double>(edge_slots, mu[0]) : mu;
}

std::vector<double> ModelConfig::sigma2_vector(std::size_t edge_slots) const {
  return sigma2.size() == 1 ? std::vector<double>(edge_slots, sigma2[0]) : sigma2;
}

ModelConfig ModelConfig::from_key_values(const KeyValues& kv, const std::filesystem::path& base_dir) {
  static const char* known[] = {"H",    "R",          "mu",      "sigma2",           "a1",
                                "a2",   "iterations", "burn_in", "thin",             "seed",
                                "random_scan_rows",   "snapshot_every"};
  for (const auto& [key, value] : kv.entries()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (!kv.has("seed")) throw ConfigError("missing required key 'seed'");
  ModelConfig cfg;
  cfg.H = checked_int(kv, "H", cfg.H);
  cfg.R = checked_int(kv, "R", cfg.R);
  if (kv.has("mu")) cfg.mu = numbers_or_file(kv, "mu", base_dir);
  if (kv.has("sigma2")) cfg.sigma2 = numbers_or_file(kv, "sigma2", base_dir);
  cfg.a1 = kv.get_double("a1", cfg.a1);
  cfg.a2 = kv.get_double("a2", cfg.a2);
  cfg.iterations = checked_int(kv, "iterations", cfg.iterations);
  cfg.burn_in = checked_int(kv, "burn_in", cfg.burn_in);
  cfg.thin = checked_int(kv, "thin", cfg.thin);
  cfg.seed = kv.get_u64("seed");
  cfg.random_scan_rows = parse_bool(kv, "random_scan_rows", cfg.random_scan_rows);
  cfg.snapshot_every = checked_int(kv, "snapshot_every", cfg.snapshot_every);
  cfg.validate();
  return cfg;
}

KeyValues ModelConfig::to_key_values() const {
  KeyValues kv;
  kv.set("H", std::to_string(H));
  kv.set("R", std::to_string(R));
  kv.set("mu", join_doubles(mu));
  kv.set("sigma2", join_doubles(sigma2));
  kv.set("a1", format_double(a1));
  kv.set("a2", format_double(a2));
  kv.set("iterations", std::to_string(iterations));
  kv.set("burn_in", std::to_string(burn_in));
  kv.set("thin", std::to_string(thin));
  kv.set("seed", std::to_string(seed));
  kv.set("random_scan_rows", random_scan_rows ? "true" : "false");
  kv.set("snapshot_every", std::to_string(snapshot_every));
  return kv;
}

// ---------------------------------------------------------------------------
// Streams and data

ChainStreams::ChainStreams(std::uint64_t seed, std::uint64_t chain_id, int class_count,
                           std::size_t network_count)
    : master(seed, derive_stream_id(chain_id, 0)) {
  const RngStream class_root(seed, derive_stream_id(chain_id, 1));
  const RngStream network_root(seed, derive_stream_id(chain_id, 2));
  classes.reserve(static_cast<std::size_t>(class_count));
  for (int h = 0; h < class_count; ++h) classes.push_back(class_root.split(static_cast<std::uint64_t>(h)));
  networks.reserve(network_count);
  for (std::size_t i = 0; i < network_count; ++i) networks.push_back(network_root.split(i));
}

ChainData::ChainData(int v_count, std::span<const EdgeVector> networks)
    : v_count_(v_count), networks_(networks.begin(), networks.end()) {
  if (v_count < 2) throw DomainError("ChainData: V must be at least 2");
  present_.reserve(networks_.size());
  for (const auto& a : networks_) {
    if (a.v_count() != v_count) throw DomainError("ChainData: network V mismatch");
    std::vector<std::uint32_t> idx;
    for (std::size_t l = 0; l < a.size(); ++l) {
      if (a[l]) idx.push_back(static_cast<std::uint32_t>(l));
    }
    present_.push_back(std::move(idx));
  }
}

// ---------------------------------------------------------------------------
// State construction

GibbsState make_state(int v_count, const ModelConfig& cfg) {
  GibbsState s;
  s.v_count = v_count;
  s.H = cfg.H;
  s.R = cfg.R;
  s.slots = pair_count(v_count);
  cfg.validate(s.slots);
  s.mu = cfg.mu_vector(s.slots);
  s.sigma2 = cfg.sigma2_vector(s.slots);
  s.a1 = cfg.a1;
  s.a2 = cfg.a2;
  s.shared.z.assign(s.slots, 0.0);
  s.classes.resize(static_cast<std::size_t>(cfg.H));
  s.nu.assign(static_cast<std::size_t>(cfg.H), 1.0 / cfg.H);
  const auto hl = static_cast<std::size_t>(cfg.H) * s.slots;
  s.omega.assign(hl, 0.0);
  s.class_sizes.assign(static_cast<std::size_t>(cfg.H), 0);
  s.edge_counts.assign(hl, 0);
  s.deviation.assign(hl, 0.0);
  s.pi.assign(hl, 0.5);
  return s;
}

namespace {

void draw_class_factors_from_prior(GibbsState& s, int h, RngStream& rng) {
  auto mig = sample_mig(s.a1, s.a2, s.R, rng);
  Eigen::MatrixXd x(s.v_count, s.R);
  for (int v = 0; v < s.v_count; ++v) {
    for (int r = 0; r < s.R; ++r) x(v, r) = std::sqrt(mig.lambda[r]) * rng.normal();
  }
  s.classes[h] = LatentFactors(std::move(x), std::move(mig.theta));
}

}  // namespace

GibbsState init_state(const ChainData& data, const ModelConfig& cfg, ChainStreams& streams) {
  if (streams.classes.size() != static_cast<std::size_t>(cfg.H) || streams.networks.size() != data.size()) {
    throw DomainError("init_state: streams do not match (H, n)");
  }
  GibbsState s = make_state(data.v_count(), cfg);
  s.labels.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    s.labels[i] = std::min(cfg.H - 1, static_cast<int>(streams.networks[i].uniform() * cfg.H));
  }
  std::vector<double> totals(s.slots, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (auto l : data.present(i)) totals[l] += 1.0;
  }
  const double denom = static_cast<double>(data.size()) + 2.0;
  for (std::size_t l = 0; l < s.slots; ++l) s.shared.z[l] = logit((totals[l] + 1.0) / denom);
  for (int h = 0; h < cfg.H; ++h) draw_class_factors_from_prior(s, h, streams.classes[h]);
  const std::vector<double> alpha(static_cast<std::size_t>(cfg.H), 1.0 / cfg.H);
  sample_dirichlet(alpha, streams.master, s.nu);
  derive_caches(s, data);
  return s;
}

GibbsState draw_from_prior(const ChainData& data, const ModelConfig& cfg, ChainStreams& streams) {
  GibbsState s = make_state(data.v_count(), cfg);
  const std::vector<double> alpha(static_cast<std::size_t>(cfg.H), 1.0 / cfg.H);
  sample_dirichlet(alpha, streams.master, s.nu);
  s.labels.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    s.labels[i] = static_cast<int>(draw_discrete(s.nu, streams.networks[i].uniform()));
  }
  for (std::size_t l = 0; l < s.slots; ++l) {
    s.shared.z[l] = s.mu[l] + std::sqrt(s.sigma2[l]) * streams.master.normal();
  }
  for (int h = 0; h < cfg.H; ++h) draw_class_factors_from_prior(s, h, streams.classes[h]);
  derive_caches(s, data);
  return s;
}

void refresh_counts(GibbsState& state, const ChainData& data) {
  std::fill(state.class_sizes.begin(), state.class_sizes.end(), 0);
  std::fill(state.edge_counts.begin(), state.edge_counts.end(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int h = state.labels[i];
    ++state.class_sizes[h];
    auto y = state.counts_of(h);
    for (auto l : data.present(i)) ++y[l];
  }
}

void check_counts(const GibbsState& state, const ChainData& data) {
  const int total = std::accumulate(state.class_sizes.begin(), state.class_sizes.end(), 0);
  if (static_cast<std::size_t>(total) != data.size()) {
    throw NumericalError("class sizes sum to " + std::to_string(total) + ", expected " +
                         std::to_string(data.size()));
  }
  std::vector<int> expected(state.edge_counts.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (auto l : data.present(i)) ++expected[state.labels[i] * state.slots + l];
  }
  if (expected != state.edge_counts) throw NumericalError("aggregated edge counts disagree with labels");
}

// ---------------------------------------------------------------------------
// Full conditionals

namespace {

// Per-class terms for log p(a | pi^(h)) = base_h + sum_{l: a_l = 1} w_hl.
struct AllocationTables {
  std::vector<double> base;    // sum_l log(1 - pi_hl)
  std::vector<double> weight;  // log pi_hl - log(1 - pi_hl), H x slots
  std::vector<double> log_nu;
};

AllocationTables allocation_tables(const GibbsState& s) {
  AllocationTables t;
  t.base.assign(static_cast<std::size_t>(s.H), 0.0);
  t.weight.resize(static_cast<std::size_t>(s.H) * s.slots);
  t.log_nu.resize(static_cast<std::size_t>(s.H));
  for (int h = 0; h < s.H; ++h) {
    const auto p = s.pi_of(h);
    double base = 0.0;
    double* w = t.weight.data() + h * s.slots;
    for (std::size_t l = 0; l < s.slots; ++l) {
      const double q = clamp_probability(p[l]);
      const double log_absent = std::log1p(-q);
      base += log_absent;
      w[l] = std::log(q) - log_absent;
    }
    t.base[h] = base;
    t.log_nu[h] = s.nu[h] > 0.0 ? std::log(s.nu[h]) : -std::numeric_limits<double>::infinity();
  }
  return t;
}

template <typename PresentRange>
void allocation_probs_from_tables(const GibbsState& s, const AllocationTables& t, const PresentRange& present,
                                  std::span<double> out) {
  for (int h = 0; h < s.H; ++h) {
    double ll = t.base[h];
    const double* w = t.weight.data() + h * s.slots;
    for (auto l : present) ll += w[l];
    out[h] = t.log_nu[h] + ll;
  }
  const double norm = log_sum_exp(out);
  if (!std::isfinite(norm)) throw NumericalError("allocation: all class log-probabilities are -inf");
  for (double& x : out) x = std::exp(x - norm);
}

}  // namespace

std::vector<double> allocation_probabilities(const GibbsState& state, const EdgeVector& a) {
  if (a.size() != state.slots) throw DomainError("allocation_probabilities: network size mismatch");
  const auto tables = allocation_tables(state);
  std::vector<std::uint32_t> present;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l]) present.push_back(static_cast<std::uint32_t>(l));
  }
  std::vector<double> out(static_cast<std::size_t>(state.H));
  allocation_probs_from_tables(state, tables, present, out);
  return out;
}

GaussianMoments z_conditional(const GibbsState& s, std::size_t l) {
  double precision = 1.0 / s.sigma2[l];
  double linear = s.mu[l] / s.sigma2[l];
  for (int h = 0; h < s.H; ++h) {
    const double w = s.omega[h * s.slots + l];
    precision += w;
    linear += s.edge_counts[h * s.slots + l] - 0.5 * s.class_sizes[h] - w * s.deviation[h * s.slots + l];
  }
  if (!(precision > 0.0) || !std::isfinite(precision)) {
    throw NumericalError("Z update: nonpositive conditional precision at edge " + std::to_string(l + 1));
  }
  const double var = 1.0 / precision;
  return {var * linear, var};
}

namespace {

void accumulate_row_conditional(const GibbsState& s, int h, int v, const PairTable& table,
                                Eigen::MatrixXd& precision, Eigen::VectorXd& linear) {
  const auto& f = s.classes[h];
  const int R = s.R;
  precision.setZero();
  linear.setZero();
  for (int r = 0; r < R; ++r) precision(r, r) = 1.0 / f.lambda[r];
  if (s.class_sizes[h] == 0) return;
  const double half_n = 0.5 * s.class_sizes[h];
  const double* omega = s.omega.data() + h * s.slots;
  const int* counts = s.edge_counts.data() + h * s.slots;
  const auto& z = s.shared.z;
  for (const auto& inc : table.incident(v)) {
    const double w = omega[inc.edge];
    const double y = counts[inc.edge] - half_n - w * z[inc.edge];
    for (int a = 0; a < R; ++a) {
      const double xa = f.x_bar(inc.other, a);
      linear[a] += xa * y;
      const double wxa = w * xa;
      for (int b = 0; b <= a; ++b) precision(a, b) += wxa * f.x_bar(inc.other, b);
    }
  }
  for (int a = 0; a < R; ++a) {
    for (int b = 0; b < a; ++b) precision(b, a) = precision(a, b);
  }
}

}  // namespace

RowConditional row_conditional(const GibbsState& s, int h, int v) {
  const PairTable table(s.v_count);
  RowConditional rc{Eigen::MatrixXd(s.R, s.R), Eigen::VectorXd(s.R)};
  accumulate_row_conditional(s, h, v, table, rc.precision, rc.linear);
  return rc;
}

GammaParams theta_conditional(const GibbsState& s, int h, int r) {
  const auto& f = s.classes[h];
  const int R = s.R;
  const double shape = (r == 0 ? s.a1 : s.a2) + 0.5 * s.v_count * (R - r);
  // theta_m^(-r) = prod_{t <= m, t != r} theta_t for m >= r.
  double partial = 1.0;
  for (int t = 0; t < r; ++t) partial *= f.theta[t];
  double acc = 0.0;
  for (int m = r; m < R; ++m) {
    if (m > r) partial *= f.theta[m];
    acc += partial * f.x_bar.col(m).squaredNorm();
  }
  return {shape, 1.0 + 0.5 * acc};
}

// ---------------------------------------------------------------------------
// Steps

void step_allocate(GibbsState& s, const ChainData& data, ChainStreams& streams) {
  const auto tables = allocation_tables(s);
  std::vector<double> probs(static_cast<std::size_t>(s.H));
  for (std::size_t i = 0; i < data.size(); ++i) {
    allocation_probs_from_tables(s, tables, data.present(i), probs);
    s.labels[i] = static_cast<int>(draw_discrete(probs, streams.networks[i].uniform()));
  }
  refresh_counts(s, data);
}

void step_update_nu(GibbsState& s, ChainStreams& streams) {
  std::vector<double> alpha(static_cast<std::size_t>(s.H));
  for (int h = 0; h < s.H; ++h) alpha[h] = 1.0 / s.H + s.class_sizes[h];
  sample_dirichlet(alpha, streams.master, s.nu);
}

void step_augment_pg(GibbsState& s, ChainStreams& streams) {
  s.pg_draws = 0;
  for (int h = 0; h < s.H; ++h) {
    auto omega = s.omega_of(h);
    const int n_h = s.class_sizes[h];
    if (n_h == 0) {
      std::fill(omega.begin(), omega.end(), 0.0);
      continue;
    }
    const auto dev = s.deviation_of(h);
    auto& rng = streams.classes[h];
    for (std::size_t l = 0; l < s.slots; ++l) {
      omega[l] = sample_polya_gamma(n_h, s.shared.z[l] + dev[l], rng);
    }
    s.pg_draws += s.slots;
  }
}

void step_update_z(GibbsState& s, ChainStreams& streams) {
  for (std::size_t l = 0; l < s.slots; ++l) {
    const auto m = z_conditional(s, l);
    s.shared.z[l] = m.mean + std::sqrt(m.variance) * streams.master.normal();
  }
}

void step_update_rows(GibbsState& s, ChainStreams& streams, bool random_scan) {
  const PairTable table(s.v_count);
  Eigen::MatrixXd precision(s.R, s.R);
  Eigen::VectorXd linear(s.R);
  std::vector<int> order(static_cast<std::size_t>(s.v_count));
  for (int h = 0; h < s.H; ++h) {
    auto& rng = streams.classes[h];
    std::iota(order.begin(), order.end(), 0);
    if (random_scan) {
      for (std::size_t k = order.size(); k > 1; --k) {
        const auto j = std::min(k - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)));
        std::swap(order[k - 1], order[j]);
      }
    }
    auto& x = s.classes[h].x_bar;
    for (int v : order) {
      accumulate_row_conditional(s, h, v, table, precision, linear);
      draw_precision_in_place(precision, linear, rng, h, v);
      x.row(v) = linear.transpose();
    }
  }
}

void step_update_theta(GibbsState& s, ChainStreams& streams) {
  for (int h = 0; h < s.H; ++h) {
    auto& f = s.classes[h];
    auto& rng = streams.classes[h];
    for (int r = 0; r < s.R; ++r) {
      const auto g = theta_conditional(s, h, r);
      f.theta[r] = sample_gamma(g.shape, g.rate, rng);
    }
    f.refresh_lambda();
  }
}

void step_compute_pi(GibbsState& s) {
  const std::vector<double> zero(s.slots, 0.0);
  for (int h = 0; h < s.H; ++h) {
    auto dev = s.deviation_of(h);
    class_log_odds(zero, s.classes[h].x_bar, dev);
    auto p = s.pi_of(h);
    for (std::size_t l = 0; l < s.slots; ++l) p[l] = logistic(s.shared.z[l] + dev[l]);
  }
}

std::vector<EdgeVector> simulate_from_state(const GibbsState& s, ChainStreams& streams) {
  std::vector<EdgeVector> out;
  out.reserve(s.labels.size());
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    EdgeVector a(s.v_count);
    const auto p = s.pi_of(s.labels[i]);
    for (std::size_t l = 0; l < s.slots; ++l) a.set(l, streams.master.uniform() < p[l]);
    out.push_back(std::move(a));
  }
  return out;
}

double StepTimings::total() const { return std::accumulate(seconds.begin(), seconds.end(), 0.0); }

void sweep(GibbsState& s, const ChainData& data, ChainStreams& streams, bool random_scan_rows,
           StepTimings* timings) {
  auto timed = [&](int step, auto&& fn) {
    if (!timings) {
      fn();
      return;
    }
    const auto t0 = Clock::now();
    fn();
    timings->seconds[step] += std::chrono::duration<double>(Clock::now() - t0).count();
  };
  timed(0, [&] { step_allocate(s, data, streams); });
  timed(1, [&] { step_update_nu(s, streams); });
  timed(2, [&] { step_augment_pg(s, streams); });
  timed(3, [&] { step_update_z(s, streams); });
  timed(4, [&] { step_update_rows(s, streams, random_scan_rows); });
  timed(5, [&] { step_update_theta(s, streams); });
  timed(6, [&] { step_compute_pi(s); });
}

// ---------------------------------------------------------------------------
// Traces and chains

void write_record(const GibbsState& s, const TraceLayout& layout, std::span<double> out) {
  if (out.size() != layout.stride()) throw DomainError("write_record: buffer has wrong stride");
  std::copy(s.nu.begin(), s.nu.end(), out.begin() + layout.nu_offset());
  for (std::size_t i = 0; i < layout.n; ++i) out[layout.labels_offset() + i] = s.labels[i] + 1;
  std::copy(s.pi.begin(), s.pi.end(), out.begin() + layout.pi_offset());
  std::copy(s.shared.z.begin(), s.shared.z.end(), out.begin() + layout.z_offset());
  for (int h = 0; h < s.H; ++h) {
    std::copy(s.classes[h].lambda.begin(), s.classes[h].lambda.end(),
              out.begin() + layout.lambda_offset() + h * layout.R);
  }
}

std::vector<int> kept_iteration_indices(const ModelConfig& cfg) {
  std::vector<int> out;
  for (int s = cfg.burn_in + cfg.thin; s <= cfg.iterations; s += cfg.thin) out.push_back(s);
  return out;
}

ChainRunner::ChainRunner(const NetworkDataset& data, ModelConfig cfg, std::uint64_t chain_id)
    : ChainRunner(data.v_count(), data.networks(), std::move(cfg), chain_id) {}

ChainRunner::ChainRunner(int v_count, std::span<const EdgeVector> data, ModelConfig cfg,
                         std::uint64_t chain_id)
    : data_(v_count, data),
      cfg_(std::move(cfg)),
      chain_id_(chain_id),
      streams_(cfg_.seed, chain_id, cfg_.H, data.size()) {
  cfg_.validate(pair_count(v_count));
  state_ = init_state(data_, cfg_, streams_);
  layout_ = TraceLayout{v_count, data.size(), cfg_.H, cfg_.R};
  trace_.layout = layout_;
  trace_.config = cfg_;
  trace_.chain_id = chain_id;
  record_buffer_.resize(layout_.stride());
}

std::string ChainRunner::snapshot() const {
  using nlohmann::json;
  json j;
  j["format"] = "popnet-snapshot";
  j["version"] = 1;
  j["iteration"] = iteration_;
  j["chain_id"] = chain_id_;
  j["config"] = cfg_.to_key_values().to_text();
  j["z"] = state_.shared.z;
  j["nu"] = state_.nu;
  j["labels"] = state_.labels;
  json classes = json::array();
  for (const auto& f : state_.classes) {
    std::vector<double> x(f.x_bar.data(), f.x_bar.data() + f.x_bar.size());
    classes.push_back({{"x_bar", x}, {"theta", f.theta}});
  }
  j["classes"] = std::move(classes);
  json streams;
  streams["master"] = streams_.master.serialize();
  std::vector<std::string> cls, nets;
  for (const auto& r : streams_.classes) cls.push_back(r.serialize());
  for (const auto& r : streams_.networks) nets.push_back(r.serialize());
  streams["classes"] = cls;
  streams["networks"] = nets;
  j["streams"] = std::move(streams);
  j["timings"] = trace_.timings.seconds;
  return j.dump();
}

void ChainRunner::restore(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("snapshot: ") + e.what());
  }
  if (j.value("format", "") != "popnet-snapshot") throw ConfigError("snapshot: not a popnet snapshot");
  if (j.at("config").get<std::string>() != cfg_.to_key_values().to_text()) {
    throw ConfigError("snapshot: configuration differs from the current run");
  }
  if (j.at("chain_id").get<std::uint64_t>() != chain_id_) throw ConfigError("snapshot: chain id differs");
  auto labels = j.at("labels").get<std::vector<int>>();
  if (labels.size() != data_.size()) throw ConfigError("snapshot: network count differs");
  state_.labels = std::move(labels);
  state_.shared.z = j.at("z").get<std::vector<double>>();
  state_.nu = j.at("nu").get<std::vector<double>>();
  const auto& classes = j.at("classes");
  for (int h = 0; h < cfg_.H; ++h) {
    const auto x = classes.at(h).at("x_bar").get<std::vector<double>>();
    Eigen::MatrixXd xb = Eigen::Map<const Eigen::MatrixXd>(x.data(), state_.v_count, cfg_.R);
    state_.classes[h] = LatentFactors(std::move(xb), classes.at(h).at("theta").get<std::vector<double>>());
  }
  const auto& streams = j.at("streams");
  streams_.master = RngStream::deserialize(streams.at("master").get<std::string>());
  const auto cls = streams.at("classes").get<std::vector<std::string>>();
  const auto nets = streams.at("networks").get<std::vector<std::string>>();
  for (std::size_t h = 0; h < cls.size(); ++h) streams_.classes[h] = RngStream::deserialize(cls[h]);
  for (std::size_t i = 0; i < nets.size(); ++i) streams_.networks[i] = RngStream::deserialize(nets[i]);
  trace_.timings.seconds = j.at("timings").get<std::array<double, StepTimings::kSteps>>();
  derive_caches(state_, data_);
  std::fill(state_.omega.begin(), state_.omega.end(), 0.0);
  iteration_ = j.at("iteration").get<int>();
  trace_.kept_iterations.clear();
  trace_.records.clear();
}

void ChainRunner::run(const RunOptions& options, int last_iteration) {
  const int stop = last_iteration < 0 ? cfg_.iterations : std::min(last_iteration, cfg_.iterations);
  const auto t0 = Clock::now();
  while (iteration_ < stop) {
    sweep(state_, data_, streams_, cfg_.random_scan_rows, &trace_.timings);
    ++iteration_;
    const int s = iteration_;
    if (s > cfg_.burn_in && (s - cfg_.burn_in) % cfg_.thin == 0) {
      write_record(state_, layout_, record_buffer_);
      if (options.keep_in_memory) {
        trace_.kept_iterations.push_back(s);
        trace_.records.insert(trace_.records.end(), record_buffer_.begin(), record_buffer_.end());
      }
      if (options.on_record) options.on_record(s, record_buffer_);
    }
    if (options.on_progress && options.progress_every > 0 && s % options.progress_every == 0) {
      options.on_progress(s, cfg_.iterations);
    }
    if (options.on_snapshot && cfg_.snapshot_every > 0 && s % cfg_.snapshot_every == 0 && s < cfg_.iterations) {
      options.on_snapshot(s, snapshot());
    }
  }
  trace_.wall_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
}

PosteriorTrace run_chain(const NetworkDataset& data, const ModelConfig& cfg, const RunOptions& options) {
  ChainRunner runner(data, cfg, options.chain_id);
  runner.run(options);
  return runner.take_trace();
}

std::vector<std::vector<double>> class_mass_trace(const PosteriorTrace& trace) {
  std::vector<std::vector<double>> out(trace.kept(), std::vector<double>(static_cast<std::size_t>(trace.layout.H)));
  for (std::size_t k = 0; k < trace.kept(); ++k) {
    for (int h = 0; h < trace.layout.H; ++h) {
      const auto p = trace.pi_vector(k, h);
      out[k][h] = std::accumulate(p.begin(), p.end(), 0.0);
    }
  }
  return out;
}

std::vector<LabelSwitch> detect_label_switches(const PosteriorTrace& trace) {
  // A swap shows up as most members of one occupied class moving together to
  // a different label between consecutive kept draws, with the pi-mass
  // following them.
  std::vector<LabelSwitch> flags;
  const auto mass = class_mass_trace(trace);
  const std::size_t n = trace.layout.n;
  const int H = trace.layout.H;
  for (std::size_t k = 1; k < trace.kept(); ++k) {
    std::map<int, std::map<int, int>> moves;  // old label -> new label -> count
    std::vector<int> old_sizes(static_cast<std::size_t>(H) + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int a = trace.label(k - 1, i);
      ++old_sizes[a];
      ++moves[a][trace.label(k, i)];
    }
    for (const auto& [a, dest] : moves) {
      if (old_sizes[a] < 2) continue;
      for (const auto& [b, count] : dest) {
        if (b == a || 2 * count <= old_sizes[a]) continue;
        const double stay = std::abs(mass[k][a - 1] - mass[k - 1][a - 1]);
        const double follow = std::abs(mass[k][b - 1] - mass[k - 1][a - 1]);
        if (follow < stay) flags.push_back({trace.kept_iterations[k], a, b});
      }
    }
  }
  return flags;
}

}  // namespace popnet
