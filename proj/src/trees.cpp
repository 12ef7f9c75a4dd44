#include "phylo/trees.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "phylo/util.hpp"

namespace phylo {

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_labels(const std::vector<std::string>& labels) {
  std::set<std::string> seen;
  for (const auto& s : labels) {
    check(!s.empty(), "tree: empty leaf label");
    check(s.find_first_of("(),:;[] \t\n") == std::string::npos,
          "tree: leaf label contains reserved characters");
    check(seen.insert(s).second, "tree: duplicate leaf label");
  }
}

}  // namespace

// ----------------------------------------------------------------- RankedTree

double RankedTree::height_of_event(int e) const {
  double h = 0.0;
  for (int j = 0; j <= e; ++j) h += holding_times[n - 2 - j];
  return h;
}

double RankedTree::total_height() const {
  double h = 0.0;
  for (double x : holding_times) h += x;
  return h;
}

std::vector<int> RankedTree::death_event() const {
  std::vector<int> death(node_count(), -1);
  for (int e = 0; e < static_cast<int>(mergers.size()); ++e) {
    death[mergers[e].first] = e;
    death[mergers[e].second] = e;
  }
  return death;
}

void RankedTree::validate() const {
  check(n >= 2, "RankedTree: need at least two leaves");
  check(static_cast<int>(leaf_labels.size()) == n, "RankedTree: label count");
  check(static_cast<int>(mergers.size()) == n - 1, "RankedTree: merger count");
  check(static_cast<int>(holding_times.size()) == n - 1,
        "RankedTree: holding time count");
  check_labels(leaf_labels);
  for (double x : holding_times)
    check(x > 0.0 && std::isfinite(x), "RankedTree: holding times must be positive");

  std::vector<bool> alive(node_count(), false);
  for (int i = 0; i < n; ++i) alive[i] = true;
  for (int e = 0; e < n - 1; ++e) {
    const auto [a, b] = mergers[e];
    check(a >= 0 && b >= 0 && a < node_count() && b < node_count(),
          "RankedTree: merger references unknown node");
    check(a < b, "RankedTree: merger pair must be ordered");
    check(alive[a] && alive[b], "RankedTree: merger of a dead lineage");
    alive[a] = alive[b] = false;
    alive[n + e] = true;
  }
}

BranchMap branch_map(const RankedTree& tree) {
  tree.validate();
  const int n = tree.n;
  std::vector<double> height(tree.node_count(), 0.0);
  std::vector<int> parent(tree.node_count(), -1);
  for (int e = 0; e < n - 1; ++e) {
    height[n + e] = tree.height_of_event(e);
    parent[tree.mergers[e].first] = n + e;
    parent[tree.mergers[e].second] = n + e;
  }
  BranchMap out;
  out.reserve(2 * n - 2);
  for (int v = 0; v < tree.node_count(); ++v) {
    if (parent[v] < 0) continue;
    out.push_back({parent[v], v, height[parent[v]] - height[v], v < n});
  }
  return out;
}

// ---------------------------------------------------------------- UnrootedTree

std::vector<std::vector<int>> UnrootedTree::incident_edges() const {
  std::vector<std::vector<int>> inc(node_count());
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    inc[edges[i].u].push_back(i);
    inc[edges[i].v].push_back(i);
  }
  return inc;
}

void UnrootedTree::validate() const {
  check(n >= 3, "UnrootedTree: need at least three leaves");
  check(static_cast<int>(leaf_labels.size()) == n, "UnrootedTree: label count");
  check(static_cast<int>(edges.size()) == edge_count(), "UnrootedTree: edge count");
  check_labels(leaf_labels);
  for (const auto& e : edges) {
    check(e.u >= 0 && e.v >= 0 && e.u < node_count() && e.v < node_count(),
          "UnrootedTree: edge references unknown node");
    check(e.u != e.v, "UnrootedTree: self loop");
    check(e.length > 0.0 && std::isfinite(e.length),
          "UnrootedTree: branch lengths must be positive");
  }
  const auto inc = incident_edges();
  for (int v = 0; v < node_count(); ++v) {
    const size_t want = (v < n) ? 1 : 3;
    check(inc[v].size() == want, "UnrootedTree: wrong node degree");
  }
  // Connectivity: |edges| = |nodes| - 1 plus reachability gives a tree.
  std::vector<bool> seen(node_count(), false);
  std::vector<int> stack = {0};
  seen[0] = true;
  int visited = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    ++visited;
    for (int ei : inc[v]) {
      const int w = edges[ei].u == v ? edges[ei].v : edges[ei].u;
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  check(visited == node_count(), "UnrootedTree: disconnected");
}

BranchMap branch_map(const UnrootedTree& tree) {
  tree.validate();
  BranchMap out;
  out.reserve(tree.edges.size());
  for (const auto& e : tree.edges)
    out.push_back({e.u, e.v, e.length, e.u < tree.n || e.v < tree.n});
  return out;
}

double min_external_length(const BranchMap& branches) {
  double best = -1.0;
  for (const auto& b : branches)
    if (b.is_external && (best < 0.0 || b.length < best)) best = b.length;
  if (best < 0.0)
    throw std::invalid_argument("min_external_length: no external branches");
  return best;
}

double external_length_floor(const BranchMap& branches, double eta) {
  if (eta <= 0.0)
    throw std::invalid_argument("external_length_floor: eta must be positive");
  return std::min(min_external_length(branches) / 2.0, 1.0 / (2.0 * eta));
}

// -------------------------------------------------- Kingman extend / restrict

RankedExtension extend_kingman_detail(const RankedTree& tree, Rng& rng) {
  tree.validate();
  if (!labels_are_integers(tree.leaf_labels))
    throw std::invalid_argument("extend_kingman: integer leaf labels required");
  const int n = tree.n;

  // Uniform slot among the binom(n+1,2) (position, lineage) choices: the new
  // merger sits before old merger j and absorbs one of the n-j lineages alive
  // there.
  const int total = n * (n + 1) / 2;
  int c = rng.uniform_int(total);
  int pos = 0;
  while (c >= n - pos) {
    c -= n - pos;
    ++pos;
  }

  // Lineages alive just before old merger `pos`, in id order.
  std::vector<int> alive;
  for (int i = 0; i < n; ++i) alive.push_back(i);
  for (int e = 0; e < pos; ++e) {
    auto kill = [&](int id) {
      alive.erase(std::find(alive.begin(), alive.end(), id));
    };
    kill(tree.mergers[e].first);
    kill(tree.mergers[e].second);
    alive.push_back(n + e);
  }
  const int host = alive[c];

  long max_label = 0;
  for (const auto& s : tree.leaf_labels) max_label = std::max(max_label, std::stol(s));

  RankedExtension ext;
  ext.insert_pos = pos;
  ext.host_lineage = host;
  ext.new_leaf = n;
  ext.new_internal = (n + 1) + pos;

  RankedTree& out = ext.tree;
  out.n = n + 1;
  out.leaf_labels = tree.leaf_labels;
  out.leaf_labels.push_back(std::to_string(max_label + 1));
  out.holding_times = tree.holding_times;
  out.holding_times.push_back(rng.exponential(binom2(n + 1)));

  ext.node_map.assign(tree.node_count(), -1);
  for (int i = 0; i < n; ++i) ext.node_map[i] = i;
  for (int e = 0; e < n - 1; ++e)
    ext.node_map[n + e] = (n + 1) + (e < pos ? e : e + 1);

  // cur[] tracks where each base lineage currently lives in the output; the
  // host lineage is redirected through the inserted merger.
  std::vector<int> cur(tree.node_count(), -1);
  for (int i = 0; i < n; ++i) cur[i] = i;
  out.mergers.reserve(n);
  int out_index = 0;
  auto emit = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    out.mergers.emplace_back(a, b);
    ++out_index;
  };
  for (int e = 0; e <= n - 1; ++e) {
    if (e == pos) {
      const int inserted = (n + 1) + out_index;
      emit(cur[host], n);
      cur[host] = inserted;
    }
    if (e == n - 1) break;
    const int created = (n + 1) + out_index;
    emit(cur[tree.mergers[e].first], cur[tree.mergers[e].second]);
    cur[n + e] = created;
  }
  out.validate();
  return ext;
}

RankedTree extend_kingman(const RankedTree& tree, Rng& rng) {
  return extend_kingman_detail(tree, rng).tree;
}

RankedTree restrict_kingman(const RankedTree& tree, int m) {
  tree.validate();
  if (m < 2 || m > tree.n)
    throw std::invalid_argument("restrict_kingman: m out of range");
  if (m == tree.n) return tree;

  const int n = tree.n;
  const auto order = label_order(tree.leaf_labels);
  std::vector<bool> keep(n, false);
  for (int r = 0; r < m; ++r) keep[order[r]] = true;

  RankedTree out;
  out.n = m;
  // Kept leaves preserve their relative id order.
  std::vector<int> lineage(tree.node_count(), -1);
  for (int i = 0, next = 0; i < n; ++i) {
    if (keep[i]) {
      out.leaf_labels.push_back(tree.leaf_labels[i]);
      lineage[i] = next++;
    }
  }
  int created = 0;
  for (int e = 0; e < n - 1; ++e) {
    const int a = lineage[tree.mergers[e].first];
    const int b = lineage[tree.mergers[e].second];
    if (a >= 0 && b >= 0) {
      out.mergers.emplace_back(std::min(a, b), std::max(a, b));
      lineage[n + e] = m + created++;
    } else if (a >= 0 || b >= 0) {
      lineage[n + e] = std::max(a, b);
    }
  }
  if (created != m - 1)
    throw std::logic_error("restrict_kingman: merger count mismatch");
  out.holding_times.assign(tree.holding_times.begin(),
                           tree.holding_times.begin() + (m - 1));
  out.validate();
  return out;
}

RankedExtension match_kingman_extension(const RankedTree& base,
                                        const RankedTree& ext) {
  base.validate();
  ext.validate();
  if (ext.n != base.n + 1)
    throw std::invalid_argument("match_kingman_extension: leaf counts not adjacent");
  if (restrict_kingman(ext, base.n) != base)
    throw std::invalid_argument("match_kingman_extension: trees are not nested");

  const int n = base.n;
  const auto order = label_order(ext.leaf_labels);
  const int new_leaf = order.back();
  if (new_leaf != n)
    throw std::invalid_argument(
        "match_kingman_extension: new leaf must carry the last label and id");

  RankedExtension rec;
  rec.tree = ext;
  rec.new_leaf = new_leaf;
  int pos = -1;
  for (int e = 0; e < n; ++e) {
    if (ext.mergers[e].first == new_leaf || ext.mergers[e].second == new_leaf) {
      pos = e;
      break;
    }
  }
  rec.insert_pos = pos;
  rec.new_internal = (n + 1) + pos;
  rec.node_map.assign(base.node_count(), -1);
  for (int i = 0; i < n; ++i) rec.node_map[i] = i;
  for (int e = 0; e < n - 1; ++e)
    rec.node_map[n + e] = (n + 1) + (e < pos ? e : e + 1);

  // The host is the other party of the inserted merger, pulled back to base ids.
  const int other = ext.mergers[pos].first == new_leaf ? ext.mergers[pos].second
                                                       : ext.mergers[pos].first;
  if (other < n) {
    rec.host_lineage = other;
  } else {
    const int ext_event = other - (n + 1);
    rec.host_lineage = n + (ext_event < pos ? ext_event : ext_event - 1);
  }
  return rec;
}

// -------------------------------------------------- uniform extend / restrict

UniformExtension extend_uniform_detail(const UnrootedTree& tree, double lambda,
                                       Rng& rng) {
  tree.validate();
  if (lambda <= 0.0)
    throw std::invalid_argument("extend_uniform: lambda must be positive");
  if (!labels_are_integers(tree.leaf_labels))
    throw std::invalid_argument("extend_uniform: integer leaf labels required");
  const int n = tree.n;

  UniformExtension ext;
  ext.host_edge = rng.uniform_int(tree.edge_count());
  ext.host_end = rng.uniform_int(2);
  ext.new_leaf = n;
  ext.new_internal = 2 * n - 1;

  long max_label = 0;
  for (const auto& s : tree.leaf_labels) max_label = std::max(max_label, std::stol(s));

  ext.node_map.assign(tree.node_count(), -1);
  for (int i = 0; i < n; ++i) ext.node_map[i] = i;
  for (int i = n; i < tree.node_count(); ++i) ext.node_map[i] = i + 1;

  UnrootedTree& out = ext.tree;
  out.n = n + 1;
  out.leaf_labels = tree.leaf_labels;
  out.leaf_labels.push_back(std::to_string(max_label + 1));
  out.edges.reserve(tree.edge_count() + 2);
  for (const auto& e : tree.edges)
    out.edges.push_back({ext.node_map[e.u], ext.node_map[e.v], e.length});

  const int w = ext.new_internal;
  auto& host = out.edges[ext.host_edge];
  int displaced;
  if (ext.host_end == 0) {
    displaced = host.u;
    host.u = w;
  } else {
    displaced = host.v;
    host.v = w;
  }
  out.edges.push_back({w, displaced, rng.exponential(lambda)});
  out.edges.push_back({w, ext.new_leaf, rng.exponential(lambda)});
  out.validate();
  return ext;
}

UnrootedTree extend_uniform(const UnrootedTree& tree, double lambda, Rng& rng) {
  return extend_uniform_detail(tree, lambda, rng).tree;
}

UnrootedTree restrict_uniform(const UnrootedTree& tree,
                              const std::string& leaf_label) {
  tree.validate();
  if (tree.n < 5)
    throw std::invalid_argument("restrict_uniform: need at least five leaves");
  int leaf = -1;
  for (int i = 0; i < tree.n; ++i)
    if (tree.leaf_labels[i] == leaf_label) leaf = i;
  if (leaf < 0) throw std::invalid_argument("restrict_uniform: unknown leaf label");

  const auto inc = tree.incident_edges();
  const int pendant = inc[leaf][0];
  const auto& pe = tree.edges[pendant];
  const int hub = pe.u == leaf ? pe.v : pe.u;

  int keep_edge = -1, drop_edge = -1;
  for (int ei : inc[hub]) {
    if (ei == pendant) continue;
    if (keep_edge < 0)
      keep_edge = ei;
    else
      drop_edge = ei;
  }
  if (keep_edge > drop_edge) std::swap(keep_edge, drop_edge);

  const auto& de = tree.edges[drop_edge];
  const int far = de.u == hub ? de.v : de.u;

  // Node compaction drops the leaf and the hub, preserving id order.
  std::vector<int> node_map(tree.node_count(), -1);
  int next_leaf = 0;
  for (int i = 0; i < tree.n; ++i)
    if (i != leaf) node_map[i] = next_leaf++;
  int next_internal = next_leaf;
  for (int i = tree.n; i < tree.node_count(); ++i)
    if (i != hub) node_map[i] = next_internal++;

  UnrootedTree out;
  out.n = tree.n - 1;
  for (int i = 0; i < tree.n; ++i)
    if (i != leaf) out.leaf_labels.push_back(tree.leaf_labels[i]);
  for (int ei = 0; ei < tree.edge_count(); ++ei) {
    if (ei == pendant || ei == drop_edge) continue;
    auto e = tree.edges[ei];
    if (ei == keep_edge) {
      if (e.u == hub)
        e.u = far;
      else
        e.v = far;
    }
    out.edges.push_back({node_map[e.u], node_map[e.v], e.length});
  }
  out.validate();
  return out;
}

UnrootedTree restrict_uniform(const UnrootedTree& tree, Rng& rng) {
  const int leaf = rng.uniform_int(tree.n);
  return restrict_uniform(tree, tree.leaf_labels[leaf]);
}

UniformExtension match_uniform_extension(const UnrootedTree& base,
                                         const UnrootedTree& ext) {
  base.validate();
  ext.validate();
  const int n = base.n;
  if (ext.n != n + 1)
    throw std::invalid_argument("match_uniform_extension: leaf counts not adjacent");
  const auto order = label_order(ext.leaf_labels);
  const int new_leaf = order.back();
  if (new_leaf != n)
    throw std::invalid_argument(
        "match_uniform_extension: new leaf must carry the last label and id");
  if (restrict_uniform(ext, ext.leaf_labels[new_leaf]) != base)
    throw std::invalid_argument("match_uniform_extension: trees are not nested");

  const auto inc = ext.incident_edges();
  const int pendant = inc[new_leaf][0];
  if (pendant != ext.edge_count() - 1)
    throw std::invalid_argument("match_uniform_extension: pendant edge misplaced");
  const auto& pe = ext.edges[pendant];
  const int w = pe.u == new_leaf ? pe.v : pe.u;

  UniformExtension rec;
  rec.tree = ext;
  rec.new_leaf = new_leaf;
  rec.new_internal = w;
  const int stub = ext.edge_count() - 2;
  for (int ei : inc[w]) {
    if (ei != pendant && ei != stub) rec.host_edge = ei;
  }
  rec.node_map.assign(base.node_count(), -1);
  for (int i = 0; i < n; ++i) rec.node_map[i] = i;
  for (int i = n; i < base.node_count(); ++i) rec.node_map[i] = i + 1;
  // Which end of the host edge the new node took over.
  const auto& bh = base.edges[rec.host_edge];
  const auto& eh = ext.edges[rec.host_edge];
  rec.host_end = (eh.u == w && eh.v == rec.node_map[bh.v]) ? 0 : 1;
  return rec;
}

// ------------------------------------------------------------ canonical keys

std::string to_string(TopologyMode mode) {
  switch (mode) {
    case TopologyMode::ranked: return "ranked";
    case TopologyMode::rooted_unranked: return "rooted-unranked";
    case TopologyMode::unrooted: return "unrooted";
  }
  return "?";
}

TopologyMode topology_mode_from_string(const std::string& s) {
  if (s == "ranked") return TopologyMode::ranked;
  if (s == "rooted-unranked") return TopologyMode::rooted_unranked;
  if (s == "unrooted") return TopologyMode::unrooted;
  throw std::invalid_argument("unknown topology mode: " + s);
}

namespace {

// Canonical key of an unrooted shape given as an adjacency list: root the
// shape at the leaf with the smallest label and serialize with sorted child
// keys, which is invariant to node numbering.
std::string unrooted_key(const std::vector<std::vector<int>>& adj,
                         const std::vector<std::string>& leaf_labels) {
  const int n_leaves = static_cast<int>(leaf_labels.size());
  const auto order = label_order(leaf_labels);
  const int start = order[0];

  std::vector<std::string> memo;
  auto desc = [&](auto&& self, int v, int from) -> std::string {
    if (v < n_leaves) return leaf_labels[v];
    std::vector<std::string> parts;
    for (int w : adj[v])
      if (w != from) parts.push_back(self(self, w, v));
    std::sort(parts.begin(), parts.end());
    std::string s = "(";
    for (size_t i = 0; i < parts.size(); ++i) {
      if (i) s += ",";
      s += parts[i];
    }
    return s + ")";
  };
  return "U:[" + leaf_labels[start] + "]" + desc(desc, adj[start][0], start);
}

}  // namespace

std::string canonical_topology(const RankedTree& tree, TopologyMode mode) {
  tree.validate();
  const int n = tree.n;
  if (mode == TopologyMode::ranked) {
    // Lineages named by their smallest leaf label; event order is the key.
    const bool numeric = labels_are_integers(tree.leaf_labels);
    std::vector<std::string> min_label(tree.node_count());
    for (int i = 0; i < n; ++i) min_label[i] = tree.leaf_labels[i];
    std::string key = "R:";
    for (int e = 0; e < n - 1; ++e) {
      auto a = min_label[tree.mergers[e].first];
      auto b = min_label[tree.mergers[e].second];
      if (label_less(b, a, numeric)) std::swap(a, b);
      key += "(" + a + "|" + b + ")";
      min_label[n + e] = a;
    }
    return key;
  }
  if (mode == TopologyMode::rooted_unranked) {
    std::vector<std::string> key(tree.node_count());
    for (int i = 0; i < n; ++i) key[i] = tree.leaf_labels[i];
    for (int e = 0; e < n - 1; ++e) {
      auto a = key[tree.mergers[e].first];
      auto b = key[tree.mergers[e].second];
      if (b < a) std::swap(a, b);
      key[n + e] = "(" + a + "," + b + ")";
    }
    return "S:" + key[tree.root()];
  }
  // Unrooted shape: suppress the root (it has degree 2).
  if (n == 2) return "U:[" + sorted_labels(tree.leaf_labels)[0] + "]" +
                     sorted_labels(tree.leaf_labels)[1];
  std::vector<std::vector<int>> adj(tree.node_count());
  const auto bm = branch_map(tree);
  const int root = tree.root();
  std::vector<int> root_children;
  for (const auto& b : bm) {
    if (b.u == root) {
      root_children.push_back(b.v);
      continue;
    }
    adj[b.u].push_back(b.v);
    adj[b.v].push_back(b.u);
  }
  adj[root_children[0]].push_back(root_children[1]);
  adj[root_children[1]].push_back(root_children[0]);
  return unrooted_key(adj, tree.leaf_labels);
}

std::string canonical_topology(const UnrootedTree& tree, TopologyMode mode) {
  if (mode != TopologyMode::unrooted)
    throw std::invalid_argument(
        "canonical_topology: unrooted trees only support unrooted mode");
  tree.validate();
  std::vector<std::vector<int>> adj(tree.node_count());
  for (const auto& e : tree.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return unrooted_key(adj, tree.leaf_labels);
}

}  // namespace phylo
