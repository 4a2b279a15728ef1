#pragma once

// Lower-triangular ("vech") encoding of undirected binary networks.
//
// Node pairs are ordered column by column through the strict lower triangle:
// (2,1), (3,1), ..., (V,1), (3,2), ..., (V,2), ..., (V,V-1).
// Public indices (node labels, edge positions) are 1-based; storage is 0-based.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace popnet {

// Number of node pairs V(V-1)/2.
constexpr std::size_t pair_count(int v_count) noexcept {
  return v_count < 2 ? 0 : static_cast<std::size_t>(v_count) * (v_count - 1) / 2;
}

struct NodePair {
  int v;  // larger label
  int u;  // smaller label
  friend bool operator==(const NodePair&, const NodePair&) = default;
};

// 1-based position of the pair (v,u), u < v, among the V(V-1)/2 pairs.
std::size_t vech_index(int v, int u, int v_count);

// Inverse of vech_index.
NodePair pair_of_index(std::size_t l, int v_count);

// Precomputed pair lookup for hot loops. All indices 0-based.
class PairTable {
 public:
  struct Incident {
    int other;         // 0-based partner node
    std::size_t edge;  // 0-based edge position
  };

  explicit PairTable(int v_count);

  int v_count() const noexcept { return v_count_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  // 0-based (v,u) with u < v.
  NodePair pair(std::size_t l) const { return pairs_[l]; }
  // Edge position of unordered 0-based pair (a,b), a != b.
  std::size_t edge(int a, int b) const;
  // The V-1 edges touching node v, ascending in the partner's label.
  std::span<const Incident> incident(int v) const {
    return {incident_.data() + static_cast<std::size_t>(v) * (v_count_ - 1),
            static_cast<std::size_t>(v_count_ - 1)};
  }

 private:
  int v_count_;
  std::vector<NodePair> pairs_;
  std::vector<Incident> incident_;
};

class EdgeVector {
 public:
  EdgeVector() = default;
  // All-zero network on v_count nodes.
  explicit EdgeVector(int v_count);
  // Validates length and that every entry is 0 or 1.
  EdgeVector(int v_count, std::vector<std::uint8_t> bits);

  int v_count() const noexcept { return v_count_; }
  std::size_t size() const noexcept { return bits_.size(); }
  std::uint8_t operator[](std::size_t l) const { return bits_[l]; }
  void set(std::size_t l, bool present) { bits_.at(l) = present ? 1 : 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::size_t edge_count() const noexcept;

  friend bool operator==(const EdgeVector&, const EdgeVector&) = default;

 private:
  int v_count_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Dense V x V integer matrix, row-major. Used at the boundary only.
struct AdjacencyMatrix {
  int v_count = 0;
  std::vector<int> cells;

  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(int v) : v_count(v), cells(static_cast<std::size_t>(v) * v, 0) {}
  int& at(int row, int col) { return cells[static_cast<std::size_t>(row) * v_count + col]; }
  int at(int row, int col) const { return cells[static_cast<std::size_t>(row) * v_count + col]; }
};

// Throws ValidationError naming the first offending cell (1-based).
EdgeVector vech(const AdjacencyMatrix& adjacency);
AdjacencyMatrix unvech(const EdgeVector& edges);

// Vech for real-valued symmetric quantities (edge probabilities and similar).
std::vector<double> unvech_dense(std::span<const double> values, int v_count, double diagonal = 0.0);

class NetworkDataset {
 public:
  NetworkDataset(int v_count, std::vector<EdgeVector> networks,
                 std::optional<std::vector<int>> true_labels = std::nullopt);

  int v_count() const noexcept { return v_count_; }
  std::size_t size() const noexcept { return networks_.size(); }
  std::size_t edge_slots() const noexcept { return pair_count(v_count_); }
  const EdgeVector& operator[](std::size_t i) const { return networks_[i]; }
  std::span<const EdgeVector> networks() const noexcept { return networks_; }
  const std::optional<std::vector<int>>& true_labels() const noexcept { return labels_; }

 private:
  int v_count_;
  std::vector<EdgeVector> networks_;
  std::optional<std::vector<int>> labels_;
};

enum class DatasetFormat { Vech, AdjList };

DatasetFormat parse_dataset_format(const std::string& tag);
std::string to_string(DatasetFormat format);

// Throws ParseError (with line number) or ValidationError.
NetworkDataset load_dataset(std::istream& in, DatasetFormat format);
void save_dataset(std::ostream& out, const NetworkDataset& data, DatasetFormat format);

// Guesses the format from the first lines (AdjList if a "network" record follows the header).
NetworkDataset load_dataset_file(const std::string& path);
NetworkDataset load_dataset_file(const std::string& path, DatasetFormat format);
void save_dataset_file(const std::string& path, const NetworkDataset& data,
                       DatasetFormat format = DatasetFormat::Vech);

}  // namespace popnet
