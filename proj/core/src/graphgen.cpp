#include "popnet/graphgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "popnet/errors.hpp"

namespace popnet {

namespace {

void check_open_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(what) + " must lie in (0, 1), got " + std::to_string(p));
  }
}

std::string fmt(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
  return out;
}

std::vector<std::size_t> class_labels(const SimulationRecipe& recipe, RngStream& rng) {
  std::vector<std::size_t> labels(recipe.n);
  if (recipe.counts) {
    std::size_t i = 0;
    for (std::size_t h = 0; h < recipe.counts->size(); ++h) {
      for (int c = 0; c < (*recipe.counts)[h]; ++c) labels[i++] = h;
    }
    for (std::size_t k = labels.size(); k > 1; --k) {
      const auto j = std::min(k - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)));
      std::swap(labels[k - 1], labels[j]);
    }
    return labels;
  }
  for (auto& g : labels) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t h = 0;
    for (; h + 1 < recipe.nu.size(); ++h) {
      acc += recipe.nu[h];
      if (u < acc) break;
    }
    g = h;
  }
  return labels;
}

EdgeVector bernoulli_network(std::span<const double> probs, int v_count, RngStream& rng) {
  EdgeVector a(v_count);
  for (std::size_t l = 0; l < probs.size(); ++l) a.set(l, rng.uniform() < probs[l]);
  return a;
}

}  // namespace

EdgeProbabilityMatrix make_block_probs(int v_count, const std::vector<int>& blocks, double p_within,
                                       double p_between) {
  check_open_probability(p_within, "p_within");
  check_open_probability(p_between, "p_between");
  if (v_count < 2 || blocks.size() != static_cast<std::size_t>(v_count)) {
    throw DomainError("make_block_probs: need one block id per node");
  }
  const PairTable table(v_count);
  EdgeProbabilityMatrix out{v_count, std::vector<double>(table.size())};
  for (std::size_t l = 0; l < table.size(); ++l) {
    const auto [v, u] = table.pair(l);
    out.probs[l] = blocks[v] == blocks[u] ? p_within : p_between;
  }
  return out;
}

EdgeProbabilityMatrix make_er_probs(int v_count, double p) {
  check_open_probability(p, "p");
  if (v_count < 2) throw DomainError("make_er_probs: V must be at least 2");
  return {v_count, std::vector<double>(pair_count(v_count), p)};
}

EdgeProbabilityMatrix make_template_probs(const EdgeVector& templ, double p_edge, double p_gap) {
  check_open_probability(p_edge, "p_edge");
  check_open_probability(p_gap, "p_gap");
  if (!(p_gap < p_edge)) throw DomainError("make_template_probs: p_gap must be below p_edge");
  EdgeProbabilityMatrix out{templ.v_count(), std::vector<double>(templ.size())};
  for (std::size_t l = 0; l < templ.size(); ++l) out.probs[l] = templ[l] ? p_edge : p_gap;
  return out;
}

EdgeVector generate_ba_template(int v_count, int m, RngStream& rng) {
  if (v_count < 2 || m < 1 || m >= v_count) throw DomainError("generate_ba_template: need 1 <= m < V");
  const PairTable table(v_count);
  EdgeVector a(v_count);
  // Each node appears once per incident edge, so a uniform pick is degree-proportional.
  std::vector<int> ends;
  for (int x = 0; x <= m; ++x) {
    for (int y = x + 1; y <= m; ++y) {
      a.set(table.edge(x, y), true);
      ends.push_back(x);
      ends.push_back(y);
    }
  }
  for (int t = m + 1; t < v_count; ++t) {
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < m) {
      const auto k = std::min(ends.size() - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(ends.size())));
      targets.insert(ends[k]);
    }
    for (int w : targets) {
      a.set(table.edge(t, w), true);
      ends.push_back(t);
      ends.push_back(w);
    }
  }
  return a;
}

EdgeVector generate_ws_template(int v_count, int k, double beta, RngStream& rng) {
  if (v_count < 3 || k < 2 || k % 2 != 0 || k >= v_count) {
    throw DomainError("generate_ws_template: need even k with 2 <= k < V");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("generate_ws_template: beta must lie in [0, 1]");
  const PairTable table(v_count);
  std::vector<std::set<int>> adj(static_cast<std::size_t>(v_count));
  for (int v = 0; v < v_count; ++v) {
    for (int j = 1; j <= k / 2; ++j) {
      const int w = (v + j) % v_count;
      adj[v].insert(w);
      adj[w].insert(v);
    }
  }
  for (int j = 1; j <= k / 2; ++j) {
    for (int v = 0; v < v_count; ++v) {
      const int w = (v + j) % v_count;
      if (!adj[v].count(w)) continue;  // already rewired away
      if (rng.uniform() >= beta) continue;
      if (static_cast<int>(adj[v].size()) >= v_count - 1) continue;
      int target;
      do {
        target = std::min(v_count - 1, static_cast<int>(rng.uniform() * v_count));
      } while (target == v || adj[v].count(target));
      adj[v].erase(w);
      adj[w].erase(v);
      adj[v].insert(target);
      adj[target].insert(v);
    }
  }
  EdgeVector a(v_count);
  for (int v = 0; v < v_count; ++v) {
    for (int w : adj[v]) {
      if (w > v) a.set(table.edge(v, w), true);
    }
  }
  return a;
}

void SimulationRecipe::validate() const {
  if (v_count < 2) throw ValidationError("recipe: V must be at least 2");
  if (n < 1) throw ValidationError("recipe: n must be at least 1");
  if (nu.empty() || nu.size() != class_probs.size()) {
    throw ValidationError("recipe: nu needs one weight per class");
  }
  double total = 0.0;
  for (double w : nu) {
    if (!(w >= 0.0)) throw ValidationError("recipe: nu entries must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("recipe: nu must sum to 1, sums to " + fmt(total));
  for (const auto& p : class_probs) {
    if (p.v_count != v_count || p.probs.size() != pair_count(v_count)) {
      throw ValidationError("recipe: class probability matrices must share V");
    }
  }
  if (counts) {
    if (counts->size() != nu.size()) throw ValidationError("recipe: counts needs one entry per class");
    long long sum = 0;
    for (int c : *counts) {
      if (c < 0) throw ValidationError("recipe: counts must be nonnegative");
      sum += c;
    }
    if (sum != static_cast<long long>(n)) throw ValidationError("recipe: counts must sum to n");
  }
}

NetworkDataset simulate_population(const SimulationRecipe& recipe, RngStream& rng) {
  recipe.validate();
  const auto labels = class_labels(recipe, rng);
  std::vector<EdgeVector> networks;
  networks.reserve(recipe.n);
  std::vector<int> truth;
  truth.reserve(recipe.n);
  for (auto g : labels) {
    networks.push_back(bernoulli_network(recipe.class_probs[g].probs, recipe.v_count, rng));
    truth.push_back(static_cast<int>(g) + 1);
  }
  return NetworkDataset(recipe.v_count, std::move(networks), std::move(truth));
}

NetworkDataset posterior_predictive(const MixtureModel& model, std::size_t n_sims, RngStream& rng) {
  SimulationRecipe recipe;
  recipe.v_count = model.v_count();
  recipe.n = n_sims;
  recipe.nu = model.nu();
  for (const auto& p : model.pi()) recipe.class_probs.push_back({model.v_count(), p});
  return simulate_population(recipe, rng);
}

RecipeFile parse_recipe(const KeyValues& kv) {
  RecipeFile out;
  auto& r = out.recipe;
  const long long v = kv.get_int("V");
  const long long n = kv.get_int("n");
  if (v < 2 || v > 100000) throw ValidationError("recipe: V must be at least 2");
  if (n < 1) throw ValidationError("recipe: n must be at least 1");
  r.v_count = static_cast<int>(v);
  r.n = static_cast<std::size_t>(n);
  r.nu = kv.get_doubles("nu");
  out.seed = kv.get_u64("seed");
  out.template_seed = kv.has("template_seed") ? kv.get_u64("template_seed") : out.seed;
  if (kv.has("counts")) {
    std::vector<int> counts;
    for (double c : kv.get_doubles("counts")) {
      if (c != std::floor(c)) throw ValidationError("recipe: counts must be integers");
      counts.push_back(static_cast<int>(c));
    }
    r.counts = std::move(counts);
  }

  std::set<std::string> used{"V", "n", "nu", "counts", "seed", "template_seed"};
  out.resolved.set("V", std::to_string(r.v_count));
  out.resolved.set("n", std::to_string(r.n));
  out.resolved.set("nu", join(r.nu));
  out.resolved.set("seed", std::to_string(out.seed));
  out.resolved.set("template_seed", std::to_string(out.template_seed));
  if (r.counts) {
    std::vector<double> c(r.counts->begin(), r.counts->end());
    out.resolved.set("counts", join(c));
  }

  const RngStream template_root(out.template_seed, derive_stream_id(0, 0x7e3c));
  for (std::size_t c = 1; c <= r.nu.size(); ++c) {
    const std::string prefix = "class." + std::to_string(c) + ".";
    const std::string type_key = prefix + "type";
    if (!kv.has(type_key)) throw ConfigError("recipe: missing '" + type_key + "'");
    const std::string type = kv.raw(type_key);
    used.insert(type_key);
    out.resolved.set(type_key, type);
    out.class_types.push_back(type);
    auto param = [&](const std::string& name, double fallback) {
      const std::string key = prefix + name;
      used.insert(key);
      const double x = kv.get_double(key, fallback);
      out.resolved.set(key, fmt(x));
      return x;
    };
    auto int_param = [&](const std::string& name, int fallback) {
      const double x = param(name, fallback);
      if (x != std::floor(x)) throw ValidationError("recipe: '" + prefix + name + "' must be an integer");
      return static_cast<int>(x);
    };
    try {
      if (type == "block") {
        const double pw = param("p_within", 0.75);
        const double pb = param("p_between", 0.10);
        const int nb = int_param("blocks", 2);
        if (nb < 1 || nb > r.v_count) throw ValidationError("recipe: '" + prefix + "blocks' out of range");
        std::vector<int> blocks(static_cast<std::size_t>(r.v_count));
        for (int x = 0; x < r.v_count; ++x) blocks[x] = x * nb / r.v_count;
        r.class_probs.push_back(make_block_probs(r.v_count, blocks, pw, pb));
      } else if (type == "er") {
        r.class_probs.push_back(make_er_probs(r.v_count, param("p", 15.0 / 19.0)));
      } else if (type == "ba") {
        const int m = int_param("m", 2);
        const double pe = param("p_edge", 0.9);
        const double pg = param("p_gap", 0.05);
        auto rng = template_root.split(c);
        r.class_probs.push_back(make_template_probs(generate_ba_template(r.v_count, m, rng), pe, pg));
      } else if (type == "ws") {
        const int k = int_param("k", 8);
        const double beta = param("beta", 0.15);
        const double pe = param("p_edge", 0.9);
        const double pg = param("p_gap", 0.05);
        auto rng = template_root.split(c);
        r.class_probs.push_back(make_template_probs(generate_ws_template(r.v_count, k, beta, rng), pe, pg));
      } else {
        throw ConfigError("recipe: unknown class type '" + type + "' for class " + std::to_string(c));
      }
    } catch (const DomainError& e) {
      throw ValidationError("recipe: class " + std::to_string(c) + ": " + e.what());
    }
  }
  for (const auto& [key, value] : kv.entries()) {
    if (!used.count(key)) throw ConfigError("recipe: unknown key '" + key + "'");
  }
  r.validate();
  return out;
}

std::optional<std::string> bundled_recipe(const std::string& name) {
  if (name == "paper_sec5") {
    return "# Four classes of 25 networks on 20 nodes.\n"
           "V = 20\n"
           "n = 100\n"
           "nu = 0.25, 0.25, 0.25, 0.25\n"
           "counts = 25, 25, 25, 25\n"
           "seed = 1\n"
           "template_seed = 2024\n"
           "class.1.type = block\n"
           "class.2.type = er\n"
           "class.3.type = ba\n"
           "class.4.type = ws\n";
  }
  return std::nullopt;
}

}  // namespace popnet
