#include <sstream>

#include "doctest.h"
#include "popnet/errors.hpp"
#include "popnet/netcore.hpp"
#include "support.hpp"

using namespace popnet;

TEST_SUITE("netcore") {

TEST_CASE("vech_index examples") {
  CHECK(vech_index(2, 1, 3) == 1);
  CHECK(vech_index(4, 2, 4) == 5);
  CHECK(vech_index(68, 67, 68) == 2278);
  CHECK(pair_count(68) == 2278);
}

TEST_CASE("vech_index matches column-order enumeration") {
  // Oracle: walk the columns of the lower triangle and number the pairs.
  for (int V = 2; V <= 12; ++V) {
    std::size_t l = 0;
    for (int u = 1; u < V; ++u) {
      for (int v = u + 1; v <= V; ++v) {
        ++l;
        CHECK(vech_index(v, u, V) == l);
        CHECK(pair_of_index(l, V) == NodePair{v, u});
      }
    }
    CHECK(l == pair_count(V));
  }
}

TEST_CASE("vech_index rejects bad pairs") {
  CHECK_THROWS_AS(vech_index(2, 2, 3), DomainError);
  CHECK_THROWS_AS(vech_index(1, 2, 3), DomainError);
  CHECK_THROWS_AS(vech_index(4, 1, 3), DomainError);
  CHECK_THROWS_AS(vech_index(2, 0, 3), DomainError);
  CHECK_THROWS_AS(pair_of_index(0, 3), DomainError);
  CHECK_THROWS_AS(pair_of_index(4, 3), DomainError);
}

TEST_CASE("pair_of_index inverts vech_index on random pairs") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int V = 2 + static_cast<int>(rng.uniform() * 200);
    const int a = 1 + static_cast<int>(rng.uniform() * V);
    int b = 1 + static_cast<int>(rng.uniform() * V);
    if (a == b) b = a == V ? a - 1 : a + 1;
    const int v = std::max(a, b), u = std::min(a, b);
    REQUIRE(pair_of_index(vech_index(v, u, V), V) == NodePair{v, u});
  }
}

TEST_CASE("PairTable agrees with vech_index") {
  const PairTable t(7);
  for (std::size_t l = 0; l < t.size(); ++l) {
    const auto p = t.pair(l);
    CHECK(vech_index(p.v + 1, p.u + 1, 7) == l + 1);
    CHECK(t.edge(p.v, p.u) == l);
    CHECK(t.edge(p.u, p.v) == l);
  }
  for (int v = 0; v < 7; ++v) {
    const auto inc = t.incident(v);
    REQUIRE(inc.size() == 6);
    for (std::size_t k = 0; k + 1 < inc.size(); ++k) CHECK(inc[k].other < inc[k + 1].other);
    for (const auto& e : inc) CHECK(t.edge(v, e.other) == e.edge);
  }
}

TEST_CASE("vech examples") {
  AdjacencyMatrix m(3);
  m.at(1, 0) = m.at(0, 1) = 1;
  CHECK(vech(m).bits().size() == 3);
  CHECK(vech(m) == EdgeVector(3, {1, 0, 0}));
  CHECK(vech(AdjacencyMatrix(4)) == EdgeVector(4));
  AdjacencyMatrix k3(3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) k3.at(r, c) = r != c;
  CHECK(vech(k3) == EdgeVector(3, {1, 1, 1}));
}

TEST_CASE("vech names the offending cell") {
  AdjacencyMatrix m(3);
  m.at(2, 0) = 1;
  CHECK_THROWS_WITH_AS(vech(m), doctest::Contains("(3,1)"), ValidationError);
  AdjacencyMatrix d(3);
  d.at(1, 1) = 1;
  CHECK_THROWS_WITH_AS(vech(d), doctest::Contains("diagonal"), ValidationError);
  AdjacencyMatrix b(3);
  b.at(1, 0) = b.at(0, 1) = 2;
  CHECK_THROWS_AS(vech(b), ValidationError);
}

TEST_CASE("EdgeVector validates its contents") {
  CHECK_THROWS_AS(EdgeVector(3, {1, 0}), ValidationError);
  CHECK_THROWS_AS(EdgeVector(3, {1, 0, 2}), ValidationError);
  CHECK_THROWS_AS(EdgeVector(1), DomainError);
  CHECK(EdgeVector(3, {1, 0, 1}).edge_count() == 2);
}

TEST_CASE("vech and unvech are inverse") {
  RngStream rng(5, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const int V = 2 + static_cast<int>(rng.uniform() * 15);
    const auto a = testing::random_network(V, rng.uniform(), rng);
    const auto m = unvech(a);
    REQUIRE(vech(m) == a);
    for (int r = 0; r < V; ++r) {
      CHECK(m.at(r, r) == 0);
      for (int c = 0; c < V; ++c) CHECK(m.at(r, c) == m.at(c, r));
    }
    REQUIRE(unvech(vech(m)).cells == m.cells);
  }
}

TEST_CASE("unvech_dense places values symmetrically") {
  const std::vector<double> vals{0.1, 0.2, 0.3};
  const auto d = unvech_dense(vals, 3, -1.0);
  CHECK(d[0] == -1.0);
  CHECK(d[1 * 3 + 0] == 0.1);
  CHECK(d[0 * 3 + 1] == 0.1);
  CHECK(d[2 * 3 + 0] == 0.2);
  CHECK(d[2 * 3 + 1] == 0.3);
  CHECK(d[1 * 3 + 2] == 0.3);
}

TEST_CASE("load vech dataset") {
  std::istringstream in("V=3 n=2\n1 0 0\n1 1 1\n");
  const auto d = load_dataset(in, DatasetFormat::Vech);
  CHECK(d.size() == 2);
  CHECK(d.v_count() == 3);
  CHECK(d[0] == EdgeVector(3, {1, 0, 0}));
  CHECK(d[1] == EdgeVector(3, {1, 1, 1}));
  CHECK_FALSE(d.true_labels().has_value());
}

TEST_CASE("vech dataset parse errors carry line numbers") {
  std::istringstream short_row("V=3 n=2\n1 0 0\n1 1\n");
  try {
    load_dataset(short_row, DatasetFormat::Vech);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream bad_value("V=3 n=1\n1 0 2\n");
  CHECK_THROWS_AS(load_dataset(bad_value, DatasetFormat::Vech), ParseError);
  std::istringstream truncated("V=3 n=3\n1 0 0\n");
  CHECK_THROWS_AS(load_dataset(truncated, DatasetFormat::Vech), ParseError);
  std::istringstream bad_header("V=3\n1 0 0\n");
  CHECK_THROWS_AS(load_dataset(bad_header, DatasetFormat::Vech), ParseError);
}

TEST_CASE("adjacency-list dataset") {
  std::istringstream in("V=4 n=2\nnetwork 1\n1 2\n4 3\nnetwork 2\nlabels: 2 1\n");
  const auto d = load_dataset(in, DatasetFormat::AdjList);
  CHECK(d[0] == testing::from_edges(4, {{1, 2}, {3, 4}}));
  CHECK(d[1].edge_count() == 0);
  REQUIRE(d.true_labels().has_value());
  CHECK(*d.true_labels() == std::vector<int>{2, 1});
}

TEST_CASE("adjacency-list rejects self-loops, duplicates and out-of-range nodes") {
  std::istringstream loop("V=3 n=1\nnetwork 1\n2 2\n");
  CHECK_THROWS_AS(load_dataset(loop, DatasetFormat::AdjList), ValidationError);
  std::istringstream dup("V=3 n=1\nnetwork 1\n1 2\n2 1\n");
  CHECK_THROWS_AS(load_dataset(dup, DatasetFormat::AdjList), ValidationError);
  std::istringstream range("V=3 n=1\nnetwork 1\n1 4\n");
  CHECK_THROWS_AS(load_dataset(range, DatasetFormat::AdjList), ValidationError);
}

TEST_CASE("save then load is the identity, byte for byte") {
  RngStream rng(3, 3);
  for (auto fmt : {DatasetFormat::Vech, DatasetFormat::AdjList}) {
    std::vector<EdgeVector> nets;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
      nets.push_back(testing::random_network(7, 0.3, rng));
      labels.push_back(1 + i % 3);
    }
    const NetworkDataset d(7, nets, labels);
    std::ostringstream a;
    save_dataset(a, d, fmt);
    std::istringstream in(a.str());
    const auto back = load_dataset(in, fmt);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(back[i] == d[i]);
    CHECK(*back.true_labels() == labels);
    std::ostringstream b;
    save_dataset(b, back, fmt);
    CHECK(a.str() == b.str());
  }
}

TEST_CASE("file loader detects the format") {
  const auto dir = testing::scratch_dir("netcore");
  const NetworkDataset d(4, {testing::from_edges(4, {{1, 2}, {2, 3}})});
  for (auto fmt : {DatasetFormat::Vech, DatasetFormat::AdjList}) {
    const auto path = (dir / ("d." + to_string(fmt))).string();
    save_dataset_file(path, d, fmt);
    CHECK(load_dataset_file(path)[0] == d[0]);
  }
  CHECK_THROWS_AS(load_dataset_file((dir / "missing.txt").string()), IoError);
}

TEST_CASE("NetworkDataset invariants") {
  CHECK_THROWS(NetworkDataset(3, {}));
  CHECK_THROWS(NetworkDataset(3, {EdgeVector(3), EdgeVector(4)}));
  CHECK_THROWS(NetworkDataset(3, {EdgeVector(3)}, std::vector<int>{1, 2}));
  CHECK_THROWS(NetworkDataset(3, {EdgeVector(3)}, std::vector<int>{0}));
}

}  // TEST_SUITE
