#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "popnet/netcore.hpp"
#include "popnet/randdists.hpp"

namespace testing {

inline popnet::EdgeVector random_network(int v, double p, popnet::RngStream& rng) {
  popnet::EdgeVector a(v);
  for (std::size_t l = 0; l < a.size(); ++l) a.set(l, rng.uniform() < p);
  return a;
}

inline popnet::EdgeVector from_edges(int v, const std::vector<std::pair<int, int>>& edges) {
  popnet::AdjacencyMatrix m(v);
  for (auto [x, y] : edges) {
    m.at(x - 1, y - 1) = 1;
    m.at(y - 1, x - 1) = 1;
  }
  return popnet::vech(m);
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
};

inline MeanVar moments(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, v / static_cast<double>(xs.size() - 1)};
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("popnet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
