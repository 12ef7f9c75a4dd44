#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "phylo/priors.hpp"
#include "phylo/rand.hpp"
#include "phylo/trees.hpp"
#include "phylo/util.hpp"

using namespace phylo;

namespace {

// Five-leaf tree matching the worked example: leaves 1..5 are ids 0..4, the
// mergers create ids 5..8 in time order: (4,5) first, then (1,2), then the
// pair {first cherry, 3}, then the root.
RankedTree example_tree(double x1, double x2, double x3, double x4) {
  RankedTree t;
  t.n = 5;
  t.leaf_labels = {"1", "2", "3", "4", "5"};
  t.mergers = {{3, 4}, {0, 1}, {2, 5}, {6, 7}};
  t.holding_times = {x1, x2, x3, x4};
  t.validate();
  return t;
}

double path_to_root(const BranchMap& bm, int leaf) {
  // independent oracle: climb parents, summing lengths
  double total = 0.0;
  int node = leaf;
  while (true) {
    bool found = false;
    for (const auto& b : bm) {
      if (b.v == node) {
        total += b.length;
        node = b.u;
        found = true;
        break;
      }
    }
    if (!found) return total;
  }
}

UnrootedTree quartet(double a, double b, double c, double d, double e) {
  // ((1,2),(3,4)) with internal nodes 4, 5
  UnrootedTree t;
  t.n = 4;
  t.leaf_labels = {"1", "2", "3", "4"};
  t.edges = {{4, 0, a}, {4, 1, b}, {5, 2, c}, {5, 3, d}, {4, 5, e}};
  t.validate();
  return t;
}

struct RankedEnumerator {
  int n;
  std::set<std::string>* keys;
  void go(RankedTree& t, std::vector<int> alive) {
    if (alive.size() == 1) {
      keys->insert(canonical_topology(t, TopologyMode::ranked));
      return;
    }
    for (size_t i = 0; i < alive.size(); ++i)
      for (size_t j = i + 1; j < alive.size(); ++j) {
        auto next = alive;
        const int a = next[i], b = next[j];
        next.erase(next.begin() + j);
        next.erase(next.begin() + i);
        next.push_back(n + static_cast<int>(t.mergers.size()));
        t.mergers.emplace_back(std::min(a, b), std::max(a, b));
        go(t, next);
        t.mergers.pop_back();
      }
  }
};

void enumerate_ranked(int n, std::set<std::string>& keys) {
  RankedTree t;
  t.n = n;
  for (int i = 0; i < n; ++i) t.leaf_labels.push_back(std::to_string(i + 1));
  t.holding_times.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) t.holding_times[i] = 1.0 + i;
  std::vector<int> alive;
  for (int i = 0; i < n; ++i) alive.push_back(i);
  RankedEnumerator{n, &keys}.go(t, alive);
}

void enumerate_unrooted(const UnrootedTree& t, int n_target,
                        std::set<std::string>& keys) {
  if (t.n == n_target) {
    keys.insert(canonical_topology(t, TopologyMode::unrooted));
    return;
  }
  // attach the next leaf to every edge (the end choice does not change the
  // topology, only edge indexing)
  for (int ei = 0; ei < t.edge_count(); ++ei) {
    UnrootedTree ext;
    ext.n = t.n + 1;
    ext.leaf_labels = t.leaf_labels;
    ext.leaf_labels.push_back(std::to_string(t.n + 1));
    for (const auto& e : t.edges)
      ext.edges.push_back(
          {e.u < t.n ? e.u : e.u + 1, e.v < t.n ? e.v : e.v + 1, e.length});
    const int w = 2 * (t.n + 1) - 3;
    auto& host = ext.edges[ei];
    const int displaced = host.u;
    host.u = w;
    ext.edges.push_back({w, displaced, 1.0});
    ext.edges.push_back({w, t.n, 1.0});
    ext.validate();
    enumerate_unrooted(ext, n_target, keys);
  }
}

}  // namespace

TEST_CASE("ranked branch map matches the worked example") {
  const auto t = example_tree(0.1, 0.2, 0.3, 0.4);
  const auto bm = branch_map(t);
  CHECK(bm.size() == 8);
  // branch from the third merger (id 7) down to the first (id 5): x2 + x3
  bool found = false;
  for (const auto& b : bm) {
    if (b.u == 7 && b.v == 5) {
      found = true;
      CHECK(b.length == doctest::Approx(0.2 + 0.3).epsilon(1e-14));
      CHECK_FALSE(b.is_external);
    }
  }
  CHECK(found);
}

TEST_CASE("two-leaf tree: both pendant branches span the single holding time") {
  RankedTree t;
  t.n = 2;
  t.leaf_labels = {"1", "2"};
  t.mergers = {{0, 1}};
  t.holding_times = {0.7};
  const auto bm = branch_map(t);
  REQUIRE(bm.size() == 2);
  for (const auto& b : bm) {
    CHECK(b.length == doctest::Approx(0.7));
    CHECK(b.is_external);
  }
  CHECK(min_external_length(bm) == doctest::Approx(0.7));
}

TEST_CASE("ultrametricity: every leaf path equals the total height") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto t = sample(KingmanPrior{5}, rng);
    const auto bm = branch_map(t);
    const double total = t.total_height();
    for (int leaf = 0; leaf < 5; ++leaf)
      CHECK(path_to_root(bm, leaf) == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("unrooted branch map is the identity on edges") {
  const auto q = quartet(1, 2, 3, 4, 5);
  const auto bm = branch_map(q);
  REQUIRE(bm.size() == 5);
  int external = 0;
  double total = 0.0;
  for (const auto& b : bm) {
    external += b.is_external ? 1 : 0;
    total += b.length;
  }
  CHECK(external == 4);
  CHECK(total == doctest::Approx(15.0));

  Rng rng(3);
  const auto t5 = sample(UniformPrior{5, 1.0}, rng);
  CHECK(branch_map(t5).size() == 7);
}

TEST_CASE("restrict to full size is the identity") {
  Rng rng(11);
  const auto t = sample(KingmanPrior{6}, rng);
  CHECK(restrict_kingman(t, 6) == t);
}

TEST_CASE("worked example restricted to the first four leaves") {
  const auto t = example_tree(0.1, 0.2, 0.3, 0.4);
  const auto r = restrict_kingman(t, 4);
  CHECK(r.n == 4);
  CHECK(r.leaf_labels == std::vector<std::string>{"1", "2", "3", "4"});
  CHECK(r.mergers == std::vector<std::pair<int, int>>{{0, 1}, {2, 3}, {4, 5}});
  CHECK(r.holding_times == std::vector<double>{0.1, 0.2, 0.3});
}

TEST_CASE("extend/restrict identity for the coalescent parametrization") {
  Rng rng(23);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 2 + rng.uniform_int(6);
    const auto t = sample(KingmanPrior{n}, rng);
    const auto ext = extend_kingman(t, rng);
    CHECK(ext.n == n + 1);
    CHECK(restrict_kingman(ext, n) == t);
  }
}

TEST_CASE("extension appends the new holding time at the leafmost slot") {
  Rng rng(5);
  const auto t = sample(KingmanPrior{4}, rng);
  const auto ext = extend_kingman_detail(t, rng);
  REQUIRE(ext.tree.holding_times.size() == 4);
  for (int i = 0; i < 3; ++i)
    CHECK(ext.tree.holding_times[i] == t.holding_times[i]);
  CHECK(ext.tree.holding_times[3] > 0.0);
  const auto rec = match_kingman_extension(t, ext.tree);
  CHECK(rec.insert_pos == ext.insert_pos);
  CHECK(rec.host_lineage == ext.host_lineage);
  CHECK(rec.node_map == ext.node_map);
}

TEST_CASE("extend/restrict identity for the sequential construction") {
  Rng rng(29);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 4 + rng.uniform_int(4);
    const auto t = sample(UniformPrior{n, 1.0}, rng);
    const auto ext = extend_uniform(t, 1.0, rng);
    CHECK(ext.edge_count() == 2 * (n + 1) - 3);
    CHECK(restrict_uniform(ext, ext.leaf_labels.back()) == t);
  }
}

TEST_CASE("restriction drops two edges") {
  Rng rng(31);
  const auto t = sample(UniformPrior{5, 1.0}, rng);
  const auto r = restrict_uniform(t, rng);
  CHECK(r.n == 4);
  CHECK(r.edge_count() == 5);
}

TEST_CASE("repeated restriction keeps the topology marginal uniform") {
  Rng rng(37);
  const int samples = 30000;
  std::map<std::string, long> counts;
  for (int i = 0; i < samples; ++i) {
    auto t = sample(UniformPrior{6, 1.0}, rng);
    while (t.n > 4) t = restrict_uniform(t, rng);
    // survivors keep their original labels; rank them so only the shape counts
    const auto order = label_order(t.leaf_labels);
    for (int r = 0; r < t.n; ++r) t.leaf_labels[order[r]] = std::to_string(r + 1);
    ++counts[canonical_topology(t, TopologyMode::unrooted)];
  }
  REQUIRE(counts.size() == 3);
  for (const auto& [key, c] : counts)
    CHECK(std::abs(c - samples / 3.0) < 5.0 * std::sqrt(samples / 3.0));
}

TEST_CASE("ranked topology counts for small leaf numbers") {
  std::set<std::string> k3, k4, k5;
  enumerate_ranked(3, k3);
  enumerate_ranked(4, k4);
  enumerate_ranked(5, k5);
  CHECK(k3.size() == 3);
  CHECK(k4.size() == 18);
  CHECK(k5.size() == 180);
  CHECK(ranked_topology_count(3) == 3.0);
  CHECK(ranked_topology_count(4) == 18.0);
  CHECK(ranked_topology_count(5) == 180.0);
}

TEST_CASE("unrooted topology counts for small leaf numbers") {
  UnrootedTree star;
  star.n = 3;
  star.leaf_labels = {"1", "2", "3"};
  star.edges = {{3, 0, 1.0}, {3, 1, 1.0}, {3, 2, 1.0}};
  std::set<std::string> k4, k5, k6;
  enumerate_unrooted(star, 4, k4);
  enumerate_unrooted(star, 5, k5);
  enumerate_unrooted(star, 6, k6);
  CHECK(k4.size() == 3);
  CHECK(k5.size() == 15);
  CHECK(k6.size() == 105);
  CHECK(unrooted_topology_count(4) == 3.0);
  CHECK(unrooted_topology_count(5) == 15.0);
  CHECK(unrooted_topology_count(6) == 105.0);
}

TEST_CASE("canonical keys ignore internal numbering and edge order") {
  const auto a = quartet(1, 2, 3, 4, 5);
  // same shape, internal nodes swapped and edges listed differently
  UnrootedTree b;
  b.n = 4;
  b.leaf_labels = {"1", "2", "3", "4"};
  b.edges = {{5, 3, 4.0}, {4, 5, 5.0}, {5, 2, 3.0}, {4, 0, 1.0}, {4, 1, 2.0}};
  b.validate();
  CHECK(canonical_topology(a, TopologyMode::unrooted) ==
        canonical_topology(b, TopologyMode::unrooted));
  // a different quartet pairing gets another key
  UnrootedTree c;
  c.n = 4;
  c.leaf_labels = {"1", "2", "3", "4"};
  c.edges = {{4, 0, 1.0}, {4, 2, 2.0}, {5, 1, 3.0}, {5, 3, 4.0}, {4, 5, 5.0}};
  CHECK(canonical_topology(a, TopologyMode::unrooted) !=
        canonical_topology(c, TopologyMode::unrooted));
}

TEST_CASE("ranked and shape keys separate exactly where they should") {
  const auto t = example_tree(0.1, 0.2, 0.3, 0.4);
  // same labeled shape, the two independent cherries merged in the other order
  RankedTree s;
  s.n = 5;
  s.leaf_labels = t.leaf_labels;
  s.mergers = {{0, 1}, {3, 4}, {2, 6}, {5, 7}};
  s.holding_times = t.holding_times;
  s.validate();
  CHECK(canonical_topology(t, TopologyMode::ranked) !=
        canonical_topology(s, TopologyMode::ranked));
  CHECK(canonical_topology(t, TopologyMode::rooted_unranked) ==
        canonical_topology(s, TopologyMode::rooted_unranked));
  CHECK(canonical_topology(t, TopologyMode::unrooted) ==
        canonical_topology(s, TopologyMode::unrooted));
}

TEST_CASE("ranked mode rejects unrooted trees") {
  const auto q = quartet(1, 2, 3, 4, 5);
  CHECK_THROWS(canonical_topology(q, TopologyMode::ranked));
}

TEST_CASE("external length floor") {
  BranchMap bm = {{5, 0, 0.4, true},
                  {5, 1, 0.6, true},
                  {6, 2, 1.0, true},
                  {6, 5, 0.3, false}};
  CHECK(min_external_length(bm) == doctest::Approx(0.4));
  CHECK(external_length_floor(bm, 1.0) == doctest::Approx(0.2));
  for (auto& b : bm) b.length = 100.0;
  CHECK(external_length_floor(bm, 1.0) == doctest::Approx(0.5));
  BranchMap internal_only = {{5, 6, 1.0, false}};
  CHECK_THROWS(min_external_length(internal_only));
}

TEST_CASE("validation rejects broken trees") {
  RankedTree t;
  t.n = 3;
  t.leaf_labels = {"1", "2", "3"};
  t.mergers = {{0, 1}, {1, 3}};  // 1 already merged
  t.holding_times = {0.5, 0.5};
  CHECK_THROWS(t.validate());
  t.mergers = {{0, 1}, {2, 3}};
  t.holding_times = {0.5, -0.5};
  CHECK_THROWS(t.validate());
  CHECK_THROWS(restrict_kingman(example_tree(1, 1, 1, 1), 1));

  UnrootedTree u;
  u.n = 4;
  u.leaf_labels = {"1", "2", "3", "4"};
  u.edges = {{4, 0, 1}, {4, 1, 1}, {5, 2, 1}, {5, 3, 1}, {4, 5, 0.0}};
  CHECK_THROWS(u.validate());  // zero length
  Rng rng(1);
  const auto small = sample(UniformPrior{4, 1.0}, rng);
  CHECK_THROWS(restrict_uniform(small, small.leaf_labels[0]));
}
