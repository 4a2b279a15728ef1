#pragma once

// Posterior sampler for the mixture of low-rank factorizations.
//
// One sweep runs seven steps in a fixed order:
//   [1] allocate networks to classes      (per network, network stream)
//   [2] class weights nu ~ Dirichlet      (master stream)
//   [3] Polya-gamma augmentation omega    (per class, class stream)
//   [4] shared similarity Z, diagonal Gaussian  (master stream)
//   [5] block update of each row of Xbar^(h)    (per class, class stream)
//   [6] MIG factors theta^(h), lambda^(h)       (per class, class stream)
//   [7] recompute pi^(h) = logistic(Z + vech(Xbar Xbar^T))
//
// Every parallelisable unit (network in [1], class in [3], [5], [6]) owns a
// dedicated RNG substream, so the sampled values do not depend on evaluation
// order. Class labels are 0-based in memory and 1-based in traces and files.

#include <Eigen/Core>
#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "popnet/kvconfig.hpp"
#include "popnet/lowrank.hpp"
#include "popnet/netcore.hpp"
#include "popnet/randdists.hpp"

namespace popnet {

struct ModelConfig {
  int H = 30;
  int R = 10;
  // Length 1 (broadcast) or V(V-1)/2.
  std::vector<double> mu{0.0};
  std::vector<double> sigma2{10.0};
  double a1 = 2.5;
  double a2 = 3.5;
  int iterations = 5000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
  bool random_scan_rows = false;
  int snapshot_every = 500;

  // Throws ConfigError. `edge_slots` checks per-edge mu/sigma2 lengths when nonzero.
  void validate(std::size_t edge_slots = 0) const;
  // Non-fatal advisories (e.g. a2 <= 1 loses the shrinkage ordering).
  std::vector<std::string> warnings() const;
  std::size_t kept_count() const;
  std::vector<double> mu_vector(std::size_t edge_slots) const;
  std::vector<double> sigma2_vector(std::size_t edge_slots) const;

  // Keys: H, R, mu, sigma2, a1, a2, iterations, burn_in, thin, seed, random_scan_rows,
  // snapshot_every. mu / sigma2 are a number (broadcast), a list of V(V-1)/2 numbers, or a path, relative to
  // base_dir, to a file of whitespace-separated per-edge values. `seed` is required.
  static ModelConfig from_key_values(const KeyValues& kv, const std::filesystem::path& base_dir = {});
  KeyValues to_key_values() const;
};

// Per-chain random streams: one master, one per class, one per network.
struct ChainStreams {
  RngStream master;
  std::vector<RngStream> classes;
  std::vector<RngStream> networks;

  ChainStreams(std::uint64_t seed, std::uint64_t chain_id, int class_count, std::size_t network_count);
};

// Observed networks with their present-edge lists precomputed.
class ChainData {
 public:
  ChainData(int v_count, std::span<const EdgeVector> networks);
  explicit ChainData(const NetworkDataset& data) : ChainData(data.v_count(), data.networks()) {}

  int v_count() const noexcept { return v_count_; }
  std::size_t size() const noexcept { return networks_.size(); }
  const EdgeVector& network(std::size_t i) const { return networks_[i]; }
  std::span<const std::uint32_t> present(std::size_t i) const { return present_[i]; }

 private:
  int v_count_;
  std::vector<EdgeVector> networks_;
  std::vector<std::vector<std::uint32_t>> present_;
};

struct GibbsState {
  int v_count = 0;
  int H = 0;
  int R = 0;
  std::size_t slots = 0;
  std::vector<double> mu;
  std::vector<double> sigma2;
  double a1 = 0.0;
  double a2 = 0.0;

  SharedSimilarity shared;            // Z
  std::vector<LatentFactors> classes; // Xbar^(h), theta^(h), lambda^(h)
  std::vector<double> nu;
  std::vector<int> labels;            // 0-based G_i
  std::vector<double> omega;          // H x slots, h-major
  std::vector<int> class_sizes;       // n_h
  std::vector<int> edge_counts;       // Y^(h), H x slots, h-major
  std::vector<double> deviation;      // D^(h) = vech(Xbar Xbar^T), H x slots
  std::vector<double> pi;             // pi^(h), H x slots
  std::size_t pg_draws = 0;           // PG(n_h, .) draws in the last step [3]

  std::span<double> omega_of(int h) { return {omega.data() + h * slots, slots}; }
  std::span<const double> omega_of(int h) const { return {omega.data() + h * slots, slots}; }
  std::span<int> counts_of(int h) { return {edge_counts.data() + h * slots, slots}; }
  std::span<const int> counts_of(int h) const { return {edge_counts.data() + h * slots, slots}; }
  std::span<double> deviation_of(int h) { return {deviation.data() + h * slots, slots}; }
  std::span<const double> deviation_of(int h) const { return {deviation.data() + h * slots, slots}; }
  std::span<double> pi_of(int h) { return {pi.data() + h * slots, slots}; }
  std::span<const double> pi_of(int h) const { return {pi.data() + h * slots, slots}; }
};

// Allocates a state shaped for (V, cfg) with empty contents.
GibbsState make_state(int v_count, const ModelConfig& cfg);

// G_i uniform, Z = logit((sum_i a_il + 1) / (n + 2)), theta ~ MIG, Xbar ~ N(0, lambda),
// nu ~ Dirichlet(1/H), omega = 0; counts and pi derived.
GibbsState init_state(const ChainData& data, const ModelConfig& cfg, ChainStreams& streams);

// Draw (nu, G, Z, theta, Xbar) from the prior; counts and pi derived.
GibbsState draw_from_prior(const ChainData& data, const ModelConfig& cfg, ChainStreams& streams);

// Recompute n_h and Y^(h) from the labels.
void refresh_counts(GibbsState& state, const ChainData& data);
// Throws NumericalError if counts disagree with labels.
void check_counts(const GibbsState& state, const ChainData& data);

// Step [1] normalised allocation probabilities for one network.
std::vector<double> allocation_probabilities(const GibbsState& state, const EdgeVector& a);

struct GaussianMoments {
  double mean;
  double variance;
};

// Step [4] full conditional of Z_l.
GaussianMoments z_conditional(const GibbsState& state, std::size_t l);

struct RowConditional {
  Eigen::MatrixXd precision;  // R x R
  Eigen::VectorXd linear;     // eta; mean = precision^-1 eta
};

// Step [5] full conditional of row v of Xbar^(h) given the other rows.
RowConditional row_conditional(const GibbsState& state, int h, int v);

struct GammaParams {
  double shape;
  double rate;
};

// Step [6] full conditional of theta_r^(h) (0-based r) given the current other thetas.
GammaParams theta_conditional(const GibbsState& state, int h, int r);

void step_allocate(GibbsState& state, const ChainData& data, ChainStreams& streams);
void step_update_nu(GibbsState& state, ChainStreams& streams);
void step_augment_pg(GibbsState& state, ChainStreams& streams);
void step_update_z(GibbsState& state, ChainStreams& streams);
void step_update_rows(GibbsState& state, ChainStreams& streams, bool random_scan = false);
void step_update_theta(GibbsState& state, ChainStreams& streams);
void step_compute_pi(GibbsState& state);

// Networks simulated from the current (G, pi): a_il ~ Bernoulli(pi^(G_i)_l).
std::vector<EdgeVector> simulate_from_state(const GibbsState& state, ChainStreams& streams);

struct StepTimings {
  static constexpr int kSteps = 7;
  std::array<double, kSteps> seconds{};  // accumulated wall time per step
  double total() const;
};

void sweep(GibbsState& state, const ChainData& data, ChainStreams& streams, bool random_scan_rows,
           StepTimings* timings = nullptr);

// Fixed-stride record layout: [nu (H)][G (n, 1-based)][pi (H*L, h-major)][Z (L)][lambda (H*R)].
struct TraceLayout {
  int v_count = 0;
  std::size_t n = 0;
  int H = 0;
  int R = 0;

  std::size_t slots() const noexcept { return pair_count(v_count); }
  std::size_t nu_offset() const noexcept { return 0; }
  std::size_t labels_offset() const noexcept { return static_cast<std::size_t>(H); }
  std::size_t pi_offset() const noexcept { return labels_offset() + n; }
  std::size_t z_offset() const noexcept { return pi_offset() + static_cast<std::size_t>(H) * slots(); }
  std::size_t lambda_offset() const noexcept { return z_offset() + slots(); }
  std::size_t stride() const noexcept { return lambda_offset() + static_cast<std::size_t>(H) * R; }
};

void write_record(const GibbsState& state, const TraceLayout& layout, std::span<double> out);

struct LabelSwitch {
  int iteration;  // sweep index where the swap was observed
  int class_a;    // 1-based
  int class_b;
};

struct PosteriorTrace {
  TraceLayout layout;
  ModelConfig config;
  std::uint64_t chain_id = 0;
  std::vector<int> kept_iterations;  // 1-based sweep indices
  std::vector<double> records;       // kept x stride

  // Run metadata; not part of the serialised trace.
  double wall_seconds = 0.0;
  StepTimings timings;

  std::size_t kept() const noexcept { return kept_iterations.size(); }
  std::span<const double> record(std::size_t k) const {
    return {records.data() + k * layout.stride(), layout.stride()};
  }
  double nu(std::size_t k, int h) const { return record(k)[layout.nu_offset() + h]; }
  int label(std::size_t k, std::size_t i) const {
    return static_cast<int>(record(k)[layout.labels_offset() + i]);
  }
  double pi(std::size_t k, int h, std::size_t l) const {
    return record(k)[layout.pi_offset() + h * layout.slots() + l];
  }
  std::span<const double> pi_vector(std::size_t k, int h) const {
    return record(k).subspan(layout.pi_offset() + h * layout.slots(), layout.slots());
  }
  double z(std::size_t k, std::size_t l) const { return record(k)[layout.z_offset() + l]; }
  double lambda(std::size_t k, int h, int r) const {
    return record(k)[layout.lambda_offset() + h * layout.R + r];
  }
};

// Sweep indices kept for (iterations, burn_in, thin): s > burn_in and (s - burn_in) % thin == 0.
std::vector<int> kept_iteration_indices(const ModelConfig& cfg);

struct RunOptions {
  std::uint64_t chain_id = 0;
  bool keep_in_memory = true;
  // Called with each kept record, in order.
  std::function<void(int iteration, std::span<const double> record)> on_record;
  // Called every `progress_every` sweeps.
  std::function<void(int iteration, int total)> on_progress;
  int progress_every = 0;
  // Called with snapshot text every cfg.snapshot_every sweeps (0 disables).
  std::function<void(int iteration, const std::string& snapshot)> on_snapshot;
};

// Resumable chain: init, then sweeps 1..iterations.
class ChainRunner {
 public:
  ChainRunner(const NetworkDataset& data, ModelConfig cfg, std::uint64_t chain_id = 0);
  ChainRunner(int v_count, std::span<const EdgeVector> data, ModelConfig cfg, std::uint64_t chain_id = 0);

  // Restores the state written by snapshot(); data and config must match the original run.
  void restore(const std::string& snapshot);
  std::string snapshot() const;

  // Runs sweeps until `last_iteration` (inclusive) or the configured total.
  void run(const RunOptions& options, int last_iteration = -1);

  int completed_iterations() const noexcept { return iteration_; }
  const GibbsState& state() const noexcept { return state_; }
  const ModelConfig& config() const noexcept { return cfg_; }
  const TraceLayout& layout() const noexcept { return layout_; }
  PosteriorTrace& trace() noexcept { return trace_; }
  PosteriorTrace take_trace() { return std::move(trace_); }

 private:
  ChainData data_;
  ModelConfig cfg_;
  std::uint64_t chain_id_;
  ChainStreams streams_;
  GibbsState state_;
  TraceLayout layout_;
  PosteriorTrace trace_;
  int iteration_ = 0;
  std::vector<double> record_buffer_;
};

PosteriorTrace run_chain(const NetworkDataset& data, const ModelConfig& cfg, const RunOptions& options = {});

// Per-class sum_l pi^(h)_l for each kept iteration (kept x H).
std::vector<std::vector<double>> class_mass_trace(const PosteriorTrace& trace);

// Flags consecutive kept iterations where a majority of an occupied class moved
// to another label together with its pi-mass. Flags only; nothing is relabelled.
std::vector<LabelSwitch> detect_label_switches(const PosteriorTrace& trace);

}  // namespace popnet
