#pragma once

// Forward simulation of network populations.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "popnet/kvconfig.hpp"
#include "popnet/lowrank.hpp"
#include "popnet/netcore.hpp"
#include "popnet/randdists.hpp"

namespace popnet {

struct EdgeProbabilityMatrix {
  int v_count = 0;
  std::vector<double> probs;  // vech order, entries in (0, 1)
};

// `blocks[v]` is the block of node v (0-based nodes, any integer block ids).
EdgeProbabilityMatrix make_block_probs(int v_count, const std::vector<int>& blocks, double p_within,
                                       double p_between);
EdgeProbabilityMatrix make_er_probs(int v_count, double p);
// p_edge on template edges, p_gap elsewhere; requires p_gap < p_edge.
EdgeProbabilityMatrix make_template_probs(const EdgeVector& templ, double p_edge, double p_gap);

// Seed clique on m + 1 nodes, then each arriving node attaches m edges by preferential attachment.
EdgeVector generate_ba_template(int v_count, int m, RngStream& rng);
// Ring lattice with k (even) neighbours, each edge rewired with probability beta.
EdgeVector generate_ws_template(int v_count, int k, double beta, RngStream& rng);

struct SimulationRecipe {
  int v_count = 0;
  std::size_t n = 0;
  std::vector<double> nu;
  std::vector<EdgeProbabilityMatrix> class_probs;
  // Exact class sizes instead of G_i ~ nu; labels are then shuffled.
  std::optional<std::vector<int>> counts;

  void validate() const;  // throws ValidationError
};

// Draws G_i then a_il ~ Bernoulli(pi^(G_i)_l). Labels are stored 1-based.
NetworkDataset simulate_population(const SimulationRecipe& recipe, RngStream& rng);

// Same mechanism with (nu, pi) taken from `model`.
NetworkDataset posterior_predictive(const MixtureModel& model, std::size_t n_sims, RngStream& rng);

// Recipe files (key = value):
//
//   V = 20
//   n = 100
//   nu = 0.25, 0.25, 0.25, 0.25
//   counts = 25, 25, 25, 25        # optional
//   seed = 17                      # network sampling
//   template_seed = 2024           # BA / WS templates
//   class.1.type = block           # p_within, p_between, blocks (equal-size count)
//   class.2.type = er              # p
//   class.3.type = ba              # m, p_edge, p_gap
//   class.4.type = ws              # k, beta, p_edge, p_gap
struct RecipeFile {
  SimulationRecipe recipe;
  std::uint64_t seed = 0;
  std::uint64_t template_seed = 0;
  std::vector<std::string> class_types;
  KeyValues resolved;  // every parameter, defaults filled in
};

// Throws ConfigError for unknown keys / class types and ValidationError for bad values.
RecipeFile parse_recipe(const KeyValues& kv);
// Built-in recipes by name ("paper_sec5"); nullopt if unknown.
std::optional<std::string> bundled_recipe(const std::string& name);

}  // namespace popnet
