#include "popnet/netstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

#include "popnet/errors.hpp"

namespace popnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<int>> adjacency_lists(const EdgeVector& a) {
  const PairTable table(a.v_count());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(a.v_count()));
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (!a[l]) continue;
    const auto [v, u] = table.pair(l);
    adj[v].push_back(u);
    adj[u].push_back(v);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

long long choose2(long long x) { return x * (x - 1) / 2; }

}  // namespace

std::vector<int> degrees(const EdgeVector& a) {
  const PairTable table(a.v_count());
  std::vector<int> deg(static_cast<std::size_t>(a.v_count()), 0);
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (!a[l]) continue;
    const auto [v, u] = table.pair(l);
    ++deg[v];
    ++deg[u];
  }
  return deg;
}

TopologySummary topology_summary(const EdgeVector& a) {
  const int V = a.v_count();
  const auto adj = adjacency_lists(a);
  TopologySummary s;

  std::vector<long long> deg(static_cast<std::size_t>(V));
  for (int v = 0; v < V; ++v) deg[v] = static_cast<long long>(adj[v].size());
  const double mean = std::accumulate(deg.begin(), deg.end(), 0.0) / V;
  double var = 0.0;
  for (auto d : deg) var += (d - mean) * (d - mean);
  s.degree_mean = mean;
  s.degree_variance = var / V;

  // Triangles: count each once via ordered v < w < x.
  long long triangles = 0;
  long long p2 = 0;
  std::vector<char> mark(static_cast<std::size_t>(V), 0);
  for (int v = 0; v < V; ++v) {
    p2 += choose2(deg[v]);
    for (int w : adj[v]) mark[w] = 1;
    for (int w : adj[v]) {
      if (w <= v) continue;
      for (int x : adj[w]) {
        if (x > w && mark[x]) ++triangles;
      }
    }
    for (int w : adj[v]) mark[w] = 0;
  }
  if (p2 == 0) {
    s.transitivity = 0.0;
    s.transitivity_undefined = true;
  } else {
    s.transitivity = 3.0 * static_cast<double>(triangles) / static_cast<double>(p2);
  }

  long long dist_sum = 0;
  long long connected = 0;
  std::vector<int> dist(static_cast<std::size_t>(V));
  std::queue<int> q;
  for (int src = 0; src < V; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
      }
    }
    for (int t = src + 1; t < V; ++t) {
      if (dist[t] > 0) {
        dist_sum += dist[t];
        ++connected;
      }
    }
  }
  const auto total_pairs = static_cast<long long>(pair_count(V));
  s.unreachable_fraction = 1.0 - static_cast<double>(connected) / static_cast<double>(total_pairs);
  if (connected == 0) {
    s.no_connected_pairs = true;
  } else {
    s.avg_path_length = static_cast<double>(dist_sum) / static_cast<double>(connected);
  }

  // Pearson correlation over both orientations of every edge; integer sums keep it exact.
  long long m = 0, s1 = 0, s2 = 0, sxy = 0;
  for (int v = 0; v < V; ++v) {
    for (int w : adj[v]) {
      ++m;
      s1 += deg[v];
      s2 += deg[v] * deg[v];
      sxy += deg[v] * deg[w];
    }
  }
  const double num = static_cast<double>(m * sxy - s1 * s1);
  const double den = static_cast<double>(m * s2 - s1 * s1);
  if (m == 0 || den == 0.0) {
    s.degree_assortativity = kNaN;
    s.assortativity_undefined = true;
  } else {
    s.degree_assortativity = num / den;
  }
  return s;
}

std::vector<double> betweenness(const EdgeVector& a) {
  const int V = a.v_count();
  const auto adj = adjacency_lists(a);
  std::vector<double> cb(static_cast<std::size_t>(V), 0.0);
  std::vector<int> stack, dist(static_cast<std::size_t>(V));
  std::vector<double> sigma(static_cast<std::size_t>(V)), delta(static_cast<std::size_t>(V));
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(V));
  std::queue<int> q;
  for (int s = 0; s < V; ++s) {
    stack.clear();
    for (int v = 0; v < V; ++v) preds[v].clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(delta.begin(), delta.end(), 0.0);
    sigma[s] = 1.0;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      stack.push_back(v);
      for (int w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    while (!stack.empty()) {
      const int w = stack.back();
      stack.pop_back();
      for (int v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  for (double& x : cb) x *= 0.5;  // each unordered pair was seen from both ends
  return cb;
}

double partition_assortativity(const EdgeVector& a, std::span<const int> groups) {
  if (groups.size() != static_cast<std::size_t>(a.v_count())) {
    throw DomainError("partition_assortativity: need one group per node");
  }
  const PairTable table(a.v_count());
  std::map<std::pair<int, int>, double> e;
  std::map<int, double> ends;
  double total = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (!a[l]) continue;
    const auto [v, u] = table.pair(l);
    const int gv = groups[v], gu = groups[u];
    e[{gv, gu}] += 1.0;
    e[{gu, gv}] += 1.0;
    ends[gv] += 1.0;
    ends[gu] += 1.0;
    total += 2.0;
  }
  if (total == 0.0) return kNaN;
  double trace = 0.0;
  for (const auto& [g, c] : ends) {
    const auto it = e.find({g, g});
    if (it != e.end()) trace += it->second / total;
  }
  double sq = 0.0;
  for (const auto& [g, c] : ends) sq += (c / total) * (c / total);
  if (1.0 - sq <= 0.0) return kNaN;
  return (trace - sq) / (1.0 - sq);
}

FlaggedValue auc_edge_prediction(const EdgeVector& a, std::span<const double> scores) {
  if (scores.size() != a.size()) throw DomainError("auc_edge_prediction: score length mismatch");
  const std::size_t L = a.size();
  const auto pos = a.edge_count();
  const auto neg = L - pos;
  if (pos == 0 || neg == 0) return {kNaN, true};
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
  // Mid-ranks of tied groups; AUC = (rank sum of positives - pos(pos+1)/2) / (pos * neg).
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < L;) {
    std::size_t j = i;
    while (j + 1 < L && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (a[order[k]]) rank_sum += mid;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos), nn = static_cast<double>(neg);
  return {(rank_sum - p * (p + 1.0) / 2.0) / (p * nn), false};
}

double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size()) throw DomainError("adjusted_rand_index: length mismatch");
  std::map<std::pair<int, int>, long long> table;
  std::map<int, long long> rows, cols;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ++table[{labels_a[i], labels_b[i]}];
    ++rows[labels_a[i]];
    ++cols[labels_b[i]];
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, c] : table) index += static_cast<double>(choose2(c));
  for (const auto& [k, c] : rows) sum_a += static_cast<double>(choose2(c));
  for (const auto& [k, c] : cols) sum_b += static_cast<double>(choose2(c));
  const double pairs = static_cast<double>(choose2(static_cast<long long>(labels_a.size())));
  if (pairs == 0.0) return 1.0;
  const double expected = sum_a * sum_b / pairs;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions trivial in the same way
  return (index - expected) / (max_index - expected);
}

std::vector<int> map_cluster_labels(const PosteriorTrace& trace) {
  if (trace.kept() == 0) throw DomainError("map_cluster_labels: trace has no kept draws");
  const int H = trace.layout.H;
  std::vector<int> out(trace.layout.n);
  std::vector<int> counts(static_cast<std::size_t>(H) + 1);
  for (std::size_t i = 0; i < trace.layout.n; ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t k = 0; k < trace.kept(); ++k) ++counts[trace.label(k, i)];
    out[i] = static_cast<int>(std::max_element(counts.begin() + 1, counts.end()) - counts.begin());
  }
  return out;
}

EssResult effective_sample_size(std::span<const double> chain) {
  const std::size_t N = chain.size();
  if (N < 10) throw DomainError("effective_sample_size: need at least 10 values");
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(N);
  std::vector<double> c(N);
  for (std::size_t t = 0; t < N; ++t) c[t] = chain[t] - mean;
  auto autocov = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < N; ++t) acc += c[t] * c[t + k];
    return acc / static_cast<double>(N);
  };
  const double gamma0 = autocov(0);
  const double nd = static_cast<double>(N);
  if (!(gamma0 > 1e-300) || gamma0 <= 1e-24 * (mean * mean)) return {nd, true, false};

  double prev_pair = std::numeric_limits<double>::infinity();
  double pair_sum = 0.0;
  for (std::size_t m = 0; 2 * m + 1 < N; ++m) {
    double pair = autocov(2 * m) / gamma0 + autocov(2 * m + 1) / gamma0;
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    pair_sum += pair;
    prev_pair = pair;
  }
  const double tau = std::max(-1.0 + 2.0 * pair_sum, 1.0 / std::log10(nd));
  const double ess = nd / tau;
  return {ess, false, ess > nd};
}

Interval hpd_interval(std::span<const double> samples, double mass) {
  if (samples.size() < 20) throw DomainError("hpd_interval: need at least 20 samples");
  if (!(mass > 0.0 && mass < 1.0)) throw DomainError("hpd_interval: mass must lie in (0, 1)");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const std::size_t N = s.size();
  const auto need = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(N) - 1e-9));
  const std::size_t span = std::max<std::size_t>(need, 1) - 1;
  Interval best{s[0], s[span]};
  for (std::size_t i = 1; i + span < N; ++i) {
    if (s[i + span] - s[i] < best.hi - best.lo) best = {s[i], s[i + span]};
  }
  return best;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw DomainError("quantile: no values");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(values.size() - 1, lo + 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

PosteriorSummary summarize_posterior(const PosteriorTrace& trace, double mass) {
  const std::size_t K = trace.kept();
  if (K == 0) throw DomainError("summarize_posterior: trace has no kept draws");
  PosteriorSummary out;
  const int H = trace.layout.H;
  const std::size_t L = trace.layout.slots();
  out.slots = L;
  out.H = H;
  const double lo_p = 0.5 * (1.0 - mass), hi_p = 1.0 - lo_p;

  std::vector<double> column(K);
  auto interval_of = [&](std::vector<double>& xs) -> Interval {
    if (xs.size() >= 20) return hpd_interval(xs, mass);
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    return {*mn, *mx};
  };
  auto mean_of = [&](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  };

  out.pi_bar_mean.resize(L);
  out.pi_bar_lo.resize(L);
  out.pi_bar_hi.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (int h = 0; h < H; ++h) acc += trace.nu(k, h) * trace.pi(k, h, l);
      column[k] = acc;
    }
    out.pi_bar_mean[l] = mean_of(column);
    out.pi_bar_lo[l] = quantile(column, lo_p);
    out.pi_bar_hi[l] = quantile(column, hi_p);
  }

  out.class_pi_mean.resize(static_cast<std::size_t>(H) * L);
  out.class_hpd_lo.resize(out.class_pi_mean.size());
  out.class_hpd_hi.resize(out.class_pi_mean.size());
  for (int h = 0; h < H; ++h) {
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t k = 0; k < K; ++k) column[k] = trace.pi(k, h, l);
      const auto iv = interval_of(column);
      out.class_pi_mean[h * L + l] = mean_of(column);
      out.class_hpd_lo[h * L + l] = iv.lo;
      out.class_hpd_hi[h * L + l] = iv.hi;
    }
  }

  for (int h = 0; h < H; ++h) {
    for (std::size_t k = 0; k < K; ++k) column[k] = trace.nu(k, h);
    out.nu_mean.push_back(mean_of(column));
    out.nu_lo.push_back(quantile(column, lo_p));
    out.nu_hi.push_back(quantile(column, hi_p));
  }
  out.map_labels = map_cluster_labels(trace);
  return out;
}

}  // namespace popnet
