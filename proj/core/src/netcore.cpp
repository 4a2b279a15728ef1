#include "popnet/netcore.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "popnet/errors.hpp"

namespace popnet {

namespace {

std::size_t edge0(int hi, int lo, int v_count) {
  const auto u = static_cast<std::size_t>(lo);
  return u * v_count - u * (u + 1) / 2 + static_cast<std::size_t>(hi - lo - 1);
}

}  // namespace

std::size_t vech_index(int v, int u, int v_count) {
  if (u < 1 || u >= v || v > v_count) {
    std::ostringstream msg;
    msg << "vech_index: need 1 <= u < v <= V, got v=" << v << " u=" << u << " V=" << v_count;
    throw DomainError(msg.str());
  }
  return edge0(v - 1, u - 1, v_count) + 1;
}

NodePair pair_of_index(std::size_t l, int v_count) {
  const std::size_t total = pair_count(v_count);
  if (l < 1 || l > total) {
    throw DomainError("pair_of_index: index " + std::to_string(l) + " outside 1.." +
                      std::to_string(total));
  }
  // Column u (1-based) holds V-u pairs.
  std::size_t offset = 0;
  for (int u = 1; u < v_count; ++u) {
    const auto column = static_cast<std::size_t>(v_count - u);
    if (l <= offset + column) {
      return {u + static_cast<int>(l - offset), u};
    }
    offset += column;
  }
  throw DomainError("pair_of_index: unreachable");
}

PairTable::PairTable(int v_count) : v_count_(v_count) {
  if (v_count < 2) throw DomainError("PairTable: need at least 2 nodes");
  pairs_.reserve(pair_count(v_count));
  for (int u = 0; u < v_count; ++u) {
    for (int v = u + 1; v < v_count; ++v) pairs_.push_back({v, u});
  }
  incident_.resize(static_cast<std::size_t>(v_count) * (v_count - 1));
  for (int v = 0; v < v_count; ++v) {
    auto* row = incident_.data() + static_cast<std::size_t>(v) * (v_count - 1);
    std::size_t k = 0;
    for (int w = 0; w < v_count; ++w) {
      if (w == v) continue;
      row[k++] = {w, edge(v, w)};
    }
  }
}

std::size_t PairTable::edge(int a, int b) const {
  return a > b ? edge0(a, b, v_count_) : edge0(b, a, v_count_);
}

EdgeVector::EdgeVector(int v_count) : v_count_(v_count), bits_(pair_count(v_count), 0) {
  if (v_count < 2) throw DomainError("EdgeVector: need at least 2 nodes");
}

EdgeVector::EdgeVector(int v_count, std::vector<std::uint8_t> bits)
    : v_count_(v_count), bits_(std::move(bits)) {
  if (v_count < 2) throw DomainError("EdgeVector: need at least 2 nodes");
  if (bits_.size() != pair_count(v_count)) {
    throw ValidationError("EdgeVector: length " + std::to_string(bits_.size()) + " != V(V-1)/2 = " +
                          std::to_string(pair_count(v_count)));
  }
  for (std::size_t l = 0; l < bits_.size(); ++l) {
    if (bits_[l] > 1) {
      throw ValidationError("EdgeVector: entry " + std::to_string(l + 1) + " is not binary");
    }
  }
}

std::size_t EdgeVector::edge_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

EdgeVector vech(const AdjacencyMatrix& adjacency) {
  const int n = adjacency.v_count;
  if (n < 2 || adjacency.cells.size() != static_cast<std::size_t>(n) * n) {
    throw ValidationError("vech: matrix must be V x V with V >= 2");
  }
  auto cell = [](int r, int c) {
    return "(" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")";
  };
  for (int r = 0; r < n; ++r) {
    if (adjacency.at(r, r) != 0) throw ValidationError("vech: nonzero diagonal at " + cell(r, r));
    for (int c = 0; c < n; ++c) {
      const int x = adjacency.at(r, c);
      if (x != 0 && x != 1) throw ValidationError("vech: non-binary entry at " + cell(r, c));
      if (x != adjacency.at(c, r)) {
        throw ValidationError("vech: asymmetric entry at " + (x != 0 ? cell(r, c) : cell(c, r)));
      }
    }
  }
  std::vector<std::uint8_t> bits;
  bits.reserve(pair_count(n));
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) bits.push_back(static_cast<std::uint8_t>(adjacency.at(v, u)));
  }
  return EdgeVector(n, std::move(bits));
}

AdjacencyMatrix unvech(const EdgeVector& edges) {
  const int n = edges.v_count();
  AdjacencyMatrix a(n);
  std::size_t l = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v, ++l) {
      a.at(v, u) = edges[l];
      a.at(u, v) = edges[l];
    }
  }
  return a;
}

std::vector<double> unvech_dense(std::span<const double> values, int v_count, double diagonal) {
  if (values.size() != pair_count(v_count)) throw DomainError("unvech_dense: length mismatch");
  const auto n = static_cast<std::size_t>(v_count);
  std::vector<double> out(n * n, 0.0);
  std::size_t l = 0;
  for (std::size_t u = 0; u < n; ++u) {
    out[u * n + u] = diagonal;
    for (std::size_t v = u + 1; v < n; ++v, ++l) {
      out[v * n + u] = values[l];
      out[u * n + v] = values[l];
    }
  }
  return out;
}

NetworkDataset::NetworkDataset(int v_count, std::vector<EdgeVector> networks,
                               std::optional<std::vector<int>> true_labels)
    : v_count_(v_count), networks_(std::move(networks)), labels_(std::move(true_labels)) {
  if (v_count < 2) throw ValidationError("dataset: V must be at least 2");
  if (networks_.empty()) throw ValidationError("dataset: need at least one network");
  for (std::size_t i = 0; i < networks_.size(); ++i) {
    if (networks_[i].v_count() != v_count || networks_[i].size() != pair_count(v_count)) {
      throw ValidationError("dataset: network " + std::to_string(i + 1) + " has V=" +
                            std::to_string(networks_[i].v_count()) + ", expected " +
                            std::to_string(v_count));
    }
  }
  if (labels_ && labels_->size() != networks_.size()) {
    throw ValidationError("dataset: " + std::to_string(labels_->size()) + " labels for " +
                          std::to_string(networks_.size()) + " networks");
  }
  if (labels_) {
    for (int g : *labels_) {
      if (g < 1) throw ValidationError("dataset: class labels are 1-based");
    }
  }
}

}  // namespace popnet
