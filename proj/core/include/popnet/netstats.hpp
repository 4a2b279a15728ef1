#pragma once

// Graph statistics, prediction and clustering metrics, and MCMC diagnostics.

#include <span>
#include <vector>

#include "popnet/gibbs.hpp"
#include "popnet/netcore.hpp"

namespace popnet {

struct TopologySummary {
  double degree_mean = 0.0;
  double degree_variance = 0.0;  // population variance
  double transitivity = 0.0;     // 3T / P2
  double avg_path_length = 0.0;  // over connected pairs only
  double degree_assortativity = 0.0;

  bool transitivity_undefined = false;   // P2 = 0, reported as 0
  bool assortativity_undefined = false;  // zero endpoint-degree variance, reported as NaN
  bool no_connected_pairs = false;       // no edges, path length reported as 0
  double unreachable_fraction = 0.0;     // share of node pairs in different components
};

std::vector<int> degrees(const EdgeVector& a);
TopologySummary topology_summary(const EdgeVector& a);

// Unnormalised shortest-path betweenness (each unordered source/target pair counted once).
std::vector<double> betweenness(const EdgeVector& a);

// Newman assortativity of a node partition (`groups[v]`, any integer ids).
// NaN when every edge end falls in one group.
double partition_assortativity(const EdgeVector& a, std::span<const int> groups);

struct FlaggedValue {
  double value = 0.0;
  bool undefined = false;
};

// Mann-Whitney AUC of `scores` for present vs absent edges; ties count one half.
// Undefined (NaN) when `a` is empty or complete.
FlaggedValue auc_edge_prediction(const EdgeVector& a, std::span<const double> scores);

double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b);

// Modal class of each network over the kept draws (1-based); ties go to the smaller label.
std::vector<int> map_cluster_labels(const PosteriorTrace& trace);

struct EssResult {
  double ess = 0.0;
  bool constant = false;    // zero variance; ess = N
  bool antithetic = false;  // ess > N
};

// Geyer initial monotone positive sequence estimator. Requires at least 10 values.
EssResult effective_sample_size(std::span<const double> chain);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Shortest window holding ceil(mass * N) of the sorted samples. Requires at least 20 samples.
Interval hpd_interval(std::span<const double> samples, double mass);

// Linear-interpolation sample quantile (type 7).
double quantile(std::vector<double> values, double prob);

struct PosteriorSummary {
  std::size_t slots = 0;
  int H = 0;
  std::vector<double> pi_bar_mean, pi_bar_lo, pi_bar_hi;  // 2.5% / 97.5% quantiles
  std::vector<double> class_pi_mean;                      // H x slots
  std::vector<double> class_hpd_lo, class_hpd_hi;         // H x slots, 95% HPD
  std::vector<double> nu_mean, nu_lo, nu_hi;
  std::vector<int> map_labels;                            // 1-based
};

// pi_bar at each draw is sum_h nu_h pi^(h). HPDs need at least 20 kept draws;
// with fewer, the interval is the sample range.
PosteriorSummary summarize_posterior(const PosteriorTrace& trace, double mass = 0.95);

}  // namespace popnet
