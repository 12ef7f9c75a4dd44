#include "phylo/sites.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "phylo/rand.hpp"
#include "phylo/util.hpp"

namespace phylo {

namespace {

constexpr uint64_t kRoleRoot = 0;
constexpr uint64_t kRoleBranchBase = 1;
constexpr uint64_t kRolePendant = 0xE000000000000000ULL;
constexpr uint8_t kAbsent = 0xff;

int draw_from(Rng& rng, const Eigen::VectorXd& dist) {
  double u = rng.uniform();
  for (int a = 0; a + 1 < dist.size(); ++a) {
    u -= dist(a);
    if (u < 0.0) return a;
  }
  return static_cast<int>(dist.size()) - 1;
}

// One jump-process run along a branch: exponential holds at rate -Q_aa and
// jumps proportional to the off-diagonal row.  Returns the end allele.
uint8_t simulate_branch(Rng& rng, const MutationModel& model, uint8_t start,
                        double length, std::vector<MutEvent>& out) {
  out.clear();
  uint8_t a = start;
  double t = 0.0;
  const auto& q = model.Q();
  while (true) {
    const double rate = -q(a, a);
    if (rate <= 0.0) return a;
    t += rng.exponential(rate);
    if (t >= length) return a;
    double u = rng.uniform() * rate;
    uint8_t b = a;
    for (int j = 0; j < model.size(); ++j) {
      if (j == a) continue;
      u -= q(a, j);
      if (u < 0.0) {
        b = static_cast<uint8_t>(j);
        break;
      }
    }
    if (b == a) {
      for (int j = model.size() - 1; j >= 0; --j)
        if (j != a) {
          b = static_cast<uint8_t>(j);
          break;
        }
    }
    out.push_back({t, b});
    a = b;
  }
}

uint8_t allele_at_offset(const std::vector<MutEvent>& events, uint8_t start,
                         double offset) {
  uint8_t a = start;
  for (const auto& e : events) {
    if (e.offset > offset) break;
    a = e.allele;
  }
  return a;
}

// Node alleles for one site of a ranked tree obtained by replaying the log.
std::vector<uint8_t> replay_ranked_nodes(const RankedTree& tree,
                                         const EventLog& log, int site) {
  const auto bm = branch_map(tree);
  std::vector<int> branch_of_child(tree.node_count(), -1);
  for (int i = 0; i < static_cast<int>(bm.size()); ++i)
    branch_of_child[bm[i].v] = i;

  std::vector<uint8_t> allele(tree.node_count(), kAbsent);
  allele[tree.root()] = log.root_alleles[site];
  // Children always have lower creation index than their parent, so walking
  // nodes downward fills parents before children.
  for (int v = tree.node_count() - 2; v >= 0; --v) {
    const int bi = branch_of_child[v];
    const int p = bm[bi].u;
    allele[v] = allele_at_offset(log.events[bi][site], allele[p], bm[bi].length);
  }
  return allele;
}

struct LeafRooting {
  int root_leaf;                 // smallest-label leaf
  std::vector<int> parent_edge;  // node -> edge toward the root leaf
  std::vector<int> walk_order;   // nodes in root-to-tip order
};

LeafRooting leaf_rooting(const UnrootedTree& tree) {
  LeafRooting r;
  r.root_leaf = label_order(tree.leaf_labels)[0];
  r.parent_edge.assign(tree.node_count(), -1);
  const auto inc = tree.incident_edges();
  std::vector<bool> seen(tree.node_count(), false);
  seen[r.root_leaf] = true;
  r.walk_order.push_back(r.root_leaf);
  for (size_t i = 0; i < r.walk_order.size(); ++i) {
    const int v = r.walk_order[i];
    for (int ei : inc[v]) {
      const auto& e = tree.edges[ei];
      const int w = e.u == v ? e.v : e.u;
      if (seen[w]) continue;
      seen[w] = true;
      r.parent_edge[w] = ei;
      r.walk_order.push_back(w);
    }
  }
  return r;
}

std::vector<uint8_t> replay_unrooted_nodes(const UnrootedTree& tree,
                                           const EventLog& log, int site) {
  const auto rooting = leaf_rooting(tree);
  std::vector<uint8_t> allele(tree.node_count(), kAbsent);
  allele[rooting.root_leaf] = log.root_alleles[site];
  for (int v : rooting.walk_order) {
    const int ei = rooting.parent_edge[v];
    if (ei < 0) continue;
    const auto& e = tree.edges[ei];
    const int p = e.u == v ? e.v : e.u;
    allele[v] = allele_at_offset(log.events[ei][site], allele[p], e.length);
  }
  return allele;
}

}  // namespace

SiteMatrix SiteMatrix::prefix(int k_prefix) const {
  if (k_prefix < 0 || k_prefix > k)
    throw std::invalid_argument("SiteMatrix::prefix: bad length");
  SiteMatrix out;
  out.leaf_labels = leaf_labels;
  out.k = k_prefix;
  out.alleles.resize(static_cast<size_t>(rows()) * k_prefix);
  for (int r = 0; r < rows(); ++r)
    for (int s = 0; s < k_prefix; ++s) out.at(r, s) = at(r, s);
  out.provenance = provenance;
  out.seed = seed;
  return out;
}

// ------------------------------------------------------------- ranked trees

SiteMatrix simulate_sites(const RankedTree& tree, const MutationModel& model,
                          int k, uint64_t seed) {
  tree.validate();
  if (k <= 0) throw std::invalid_argument("simulate_sites: k must be positive");
  const int n = tree.n;
  const auto bm = branch_map(tree);
  std::vector<int> branch_of_child(tree.node_count(), -1);
  for (int i = 0; i < static_cast<int>(bm.size()); ++i)
    branch_of_child[bm[i].v] = i;

  std::vector<double> height(tree.node_count(), 0.0);
  for (int e = 0; e < n - 1; ++e) height[n + e] = tree.height_of_event(e);
  std::vector<int> parent(tree.node_count(), -1);
  for (const auto& b : bm) parent[b.v] = b.u;

  SiteMatrix m;
  m.leaf_labels = sorted_labels(tree.leaf_labels);
  m.k = k;
  m.alleles.assign(static_cast<size_t>(n) * k, 0);
  m.seed = seed;
  m.provenance = canonical_topology(tree, TopologyMode::ranked);
  m.log.emplace();
  m.log->root_alleles.resize(k);
  m.log->events.assign(bm.size(), std::vector<std::vector<MutEvent>>(k));
  m.boundaries.emplace();
  m.boundaries->k = k;
  m.boundaries->boundaries = n - 1;
  m.boundaries->nodes = tree.node_count();
  m.boundaries->data.assign(
      static_cast<size_t>(k) * (n - 1) * tree.node_count(), kAbsent);

  const auto order = label_order(tree.leaf_labels);
  std::vector<int> row_of_leaf(n);
  for (int r = 0; r < n; ++r) row_of_leaf[order[r]] = r;

  std::vector<uint8_t> allele(tree.node_count());
  for (int s = 0; s < k; ++s) {
    Rng root_rng = Rng::stream(seed, static_cast<uint64_t>(s), kRoleRoot);
    allele[tree.root()] = static_cast<uint8_t>(draw_from(root_rng, model.root_dist()));
    m.log->root_alleles[s] = allele[tree.root()];
    for (int v = tree.node_count() - 2; v >= 0; --v) {
      const int bi = branch_of_child[v];
      Rng rng = Rng::stream(seed, static_cast<uint64_t>(s),
                            kRoleBranchBase + static_cast<uint64_t>(bi));
      allele[v] = simulate_branch(rng, model, allele[parent[v]], bm[bi].length,
                                  m.log->events[bi][s]);
    }
    for (int i = 0; i < n; ++i) m.at(row_of_leaf[i], s) = allele[i];

    // Boundary slices: the allele of every lineage at each merger time.
    for (int e = 0; e < n - 1; ++e) {
      const double he = height[n + e];
      m.boundaries->at(s, e, n + e) = allele[n + e];
      for (int v = 0; v < tree.node_count(); ++v) {
        const int p = parent[v];
        if (p < 0) continue;
        if (height[v] < he && he <= height[p]) {
          const int bi = branch_of_child[v];
          m.boundaries->at(s, e, v) = allele_at_offset(
              m.log->events[bi][s], allele[p], height[p] - he);
        }
      }
    }
  }
  return m;
}

SiteMatrix extend_sites(const SiteMatrix& base, const RankedTree& base_tree,
                        const RankedTree& extended_tree,
                        const MutationModel& model, uint64_t seed) {
  const auto rec = match_kingman_extension(base_tree, extended_tree);
  if (!base.boundaries)
    throw std::invalid_argument("extend_sites: base carries no event record");
  if (base.leaf_labels != sorted_labels(base_tree.leaf_labels))
    throw std::invalid_argument("extend_sites: data/tree leaf mismatch");
  const int n = base_tree.n;
  const int k = base.k;
  const int j = rec.insert_pos;
  const int host = rec.host_lineage;

  std::vector<double> base_height(n - 1);
  for (int e = 0; e < n - 1; ++e) base_height[e] = base_tree.height_of_event(e);
  const auto base_order = label_order(base_tree.leaf_labels);
  std::vector<int> row_of_leaf(n);
  for (int r = 0; r < n; ++r) row_of_leaf[base_order[r]] = r;
  const double attach_height = (j == 0) ? 0.0 : base_height[j - 1];
  const double x_new = extended_tree.holding_times[n - 1];
  const double path_length = attach_height + x_new;

  // Checkpoints where the fresh pendant path crosses the old merger slices.
  std::vector<std::pair<double, int>> checkpoints;  // (offset, base event)
  for (int e = 0; e < j; ++e)
    checkpoints.emplace_back(
        attach_height - (e == 0 ? 0.0 : base_height[e - 1]), e);
  std::sort(checkpoints.begin(), checkpoints.end());

  SiteMatrix out;
  out.leaf_labels = sorted_labels(extended_tree.leaf_labels);
  out.k = k;
  out.alleles.assign(static_cast<size_t>(n + 1) * k, 0);
  out.seed = seed;
  out.provenance = canonical_topology(extended_tree, TopologyMode::ranked);
  out.boundaries.emplace();
  out.boundaries->k = k;
  out.boundaries->boundaries = n;
  out.boundaries->nodes = extended_tree.node_count();
  out.boundaries->data.assign(
      static_cast<size_t>(k) * n * extended_tree.node_count(), kAbsent);

  // When the host lineage was created by the merger just below the insertion,
  // the attachment slice coincides with its birth node.  Seeding the pendant
  // with the birth allele would collapse the junction onto that node and
  // erase the data's evidence for the inserted split, so the junction allele
  // is drawn backward from the birth allele across the true separation
  // between the two mergers; its marginal is exactly the slice marginal, so
  // the new leaf's law is unchanged.
  const bool host_at_slice = j >= 1 && host == n + (j - 1);
  Eigen::VectorXd slice_marginal;
  Eigen::MatrixXd backward_step;
  if (host_at_slice) {
    const double root_height = base_tree.total_height();
    slice_marginal =
        model.transition(root_height - attach_height).transpose() *
        model.root_dist();
    const double gap =
        attach_height - (j >= 2 ? base_height[j - 2] : 0.0);
    backward_step = model.transition(gap);
  }

  const auto& bt = *base.boundaries;
  std::vector<MutEvent> scratch;
  for (int s = 0; s < k; ++s) {
    // Shared rows verbatim; the shared realization is untouched.
    for (int r = 0; r < n; ++r) out.at(r, s) = base.at(r, s);

    uint8_t attach_allele =
        (j == 0) ? base.at(row_of_leaf[host], s)  // host is a leaf at j == 0
                 : bt.at(s, j - 1, host);
    if (attach_allele == kAbsent)
      throw std::logic_error("extend_sites: attachment lineage absent");

    Rng rng = Rng::stream(seed, static_cast<uint64_t>(s), kRolePendant);
    if (host_at_slice) {
      const int h = model.size();
      double total = 0.0;
      for (int a = 0; a < h; ++a)
        total += slice_marginal(a) * backward_step(a, attach_allele);
      double u = rng.uniform() * total;
      int drawn = h - 1;
      for (int a = 0; a < h; ++a) {
        u -= slice_marginal(a) * backward_step(a, attach_allele);
        if (u < 0.0) {
          drawn = a;
          break;
        }
      }
      attach_allele = static_cast<uint8_t>(drawn);
    }

    // Fresh evolution down the pendant path, recording the slice crossings.
    simulate_branch(rng, model, attach_allele, path_length, scratch);
    for (const auto& [offset, e] : checkpoints)
      out.boundaries->at(s, e, rec.new_leaf) =
          allele_at_offset(scratch, attach_allele, offset);
    out.at(n, s) = allele_at_offset(scratch, attach_allele, path_length);

    // Copy the base slices through the node map; the host lineage above the
    // insertion belongs to the inserted node.
    for (int bi = 0; bi < n; ++bi) {
      if (bi == j) {
        for (int u = 0; u < base_tree.node_count(); ++u) {
          uint8_t value;
          if (j == 0) {
            if (u >= n) continue;
            value = base.at(row_of_leaf[u], s);  // leaf-level slice
          } else {
            value = bt.at(s, j - 1, u);
            if (value == kAbsent) continue;
            // Only lineages still alive after merger j-1 cross this slice.
            const auto& mg = base_tree.mergers[j - 1];
            if (u == mg.first || u == mg.second) continue;
          }
          out.boundaries->at(s, bi, rec.node_map[u]) = value;
        }
        out.boundaries->at(s, bi, rec.new_internal) = attach_allele;
        out.boundaries->at(s, bi, rec.new_leaf) = attach_allele;
        if (host >= 0)
          out.boundaries->at(s, bi, rec.node_map[host]) = attach_allele;
        continue;
      }
      const int e = bi < j ? bi : bi - 1;
      for (int u = 0; u < base_tree.node_count(); ++u) {
        const uint8_t value = bt.at(s, e, u);
        if (value == kAbsent) continue;
        const int target =
            (u == host && e >= j) ? rec.new_internal : rec.node_map[u];
        out.boundaries->at(s, bi, target) = value;
      }
    }
  }
  return out;
}

std::vector<uint8_t> replay_leaf_alleles(const RankedTree& tree,
                                         const EventLog& log, int site) {
  const auto nodes = replay_ranked_nodes(tree, log, site);
  const auto order = label_order(tree.leaf_labels);
  std::vector<uint8_t> rows(tree.n);
  for (int r = 0; r < tree.n; ++r) rows[r] = nodes[order[r]];
  return rows;
}

// ------------------------------------------------------------ unrooted trees

SiteMatrix simulate_sites(const UnrootedTree& tree, const MutationModel& model,
                          int k, uint64_t seed) {
  tree.validate();
  if (k <= 0) throw std::invalid_argument("simulate_sites: k must be positive");
  if (!model.reversible())
    throw std::invalid_argument(
        "simulate_sites: unrooted trees require a reversible model");
  const int n = tree.n;
  const auto rooting = leaf_rooting(tree);

  SiteMatrix m;
  m.leaf_labels = sorted_labels(tree.leaf_labels);
  m.k = k;
  m.alleles.assign(static_cast<size_t>(n) * k, 0);
  m.seed = seed;
  m.provenance = canonical_topology(tree, TopologyMode::unrooted);
  m.log.emplace();
  m.log->root_alleles.resize(k);
  m.log->events.assign(tree.edge_count(), std::vector<std::vector<MutEvent>>(k));

  const auto order = label_order(tree.leaf_labels);
  std::vector<int> row_of_leaf(n);
  for (int r = 0; r < n; ++r) row_of_leaf[order[r]] = r;

  std::vector<uint8_t> allele(tree.node_count());
  for (int s = 0; s < k; ++s) {
    Rng root_rng = Rng::stream(seed, static_cast<uint64_t>(s), kRoleRoot);
    allele[rooting.root_leaf] =
        static_cast<uint8_t>(draw_from(root_rng, model.root_dist()));
    m.log->root_alleles[s] = allele[rooting.root_leaf];
    for (int v : rooting.walk_order) {
      const int ei = rooting.parent_edge[v];
      if (ei < 0) continue;
      const auto& e = tree.edges[ei];
      const int p = e.u == v ? e.v : e.u;
      Rng rng = Rng::stream(seed, static_cast<uint64_t>(s),
                            kRoleBranchBase + static_cast<uint64_t>(ei));
      allele[v] =
          simulate_branch(rng, model, allele[p], e.length, m.log->events[ei][s]);
    }
    for (int i = 0; i < n; ++i) m.at(row_of_leaf[i], s) = allele[i];
  }
  return m;
}

SiteMatrix extend_sites(const SiteMatrix& base, const UnrootedTree& base_tree,
                        const UnrootedTree& extended_tree,
                        const MutationModel& model, uint64_t seed) {
  const auto rec = match_uniform_extension(base_tree, extended_tree);
  if (!base.log)
    throw std::invalid_argument("extend_sites: base carries no event log");
  if (base.leaf_labels != sorted_labels(base_tree.leaf_labels))
    throw std::invalid_argument("extend_sites: data/tree leaf mismatch");
  const int n = base_tree.n;
  const int k = base.k;

  // Hanging the new leaf directly off the displaced endpoint would make the
  // data look as if the reconnecting stub had length zero and, when the stub
  // is internal, erase the evidence for its split.  The new leaf instead
  // branches off an interior junction of the subdivided edge, half the stub
  // length in from the displaced end.  The carried transcript of that edge
  // is split at the junction between its two daughter edges (so every stored
  // transcript stays a real one and shared rows replay unchanged), and the
  // fresh pendant path is stored time-rescaled onto the pendant edge.
  const auto& base_host = base_tree.edges[rec.host_edge];
  const int displaced = rec.host_end == 0 ? base_host.u : base_host.v;
  const int pendant_index = extended_tree.edge_count() - 1;
  const int stub_index = extended_tree.edge_count() - 2;
  const double pendant_length = extended_tree.edges[pendant_index].length;
  const double stub_length = extended_tree.edges[stub_index].length;
  const double junction_in = 0.5 * std::min(stub_length, base_host.length);
  const double effective_pendant = junction_in + pendant_length;

  const auto base_rooting = leaf_rooting(base_tree);
  // offset of the junction from the rootward end of the host edge
  const int host_child = base_rooting.parent_edge[base_host.u] == rec.host_edge
                             ? base_host.u
                             : base_host.v;
  const int host_parent = base_host.u == host_child ? base_host.v : base_host.u;
  const double junction_offset = host_child == displaced
                                     ? base_host.length - junction_in
                                     : junction_in;
  // The daughter edge on the rootward side of the junction keeps the leading
  // piece of the transcript; the other daughter gets the remainder.
  const bool stub_is_rootward = host_parent == displaced;

  SiteMatrix out;
  out.leaf_labels = sorted_labels(extended_tree.leaf_labels);
  out.k = k;
  out.alleles.assign(static_cast<size_t>(n + 1) * k, 0);
  out.seed = seed;
  out.provenance = canonical_topology(extended_tree, TopologyMode::unrooted);
  out.log.emplace();
  out.log->root_alleles = base.log->root_alleles;
  out.log->events.assign(extended_tree.edge_count(),
                         std::vector<std::vector<MutEvent>>(k));
  for (int ei = 0; ei < base_tree.edge_count(); ++ei)
    out.log->events[ei] = base.log->events[ei];
  // The reconnecting stub carries no events: its far endpoint keeps the
  // allele it had before the subdivision.

  std::vector<MutEvent> scratch;
  for (int s = 0; s < k; ++s) {
    for (int r = 0; r < n; ++r) out.at(r, s) = base.at(r, s);
    const auto node_alleles = replay_unrooted_nodes(base_tree, *base.log, s);
    const auto& host_events = base.log->events[rec.host_edge][s];
    const uint8_t junction_allele = allele_at_offset(
        host_events, node_alleles[host_parent], junction_offset);

    // Split the transcript at the junction.
    std::vector<MutEvent> leading, trailing;
    for (const auto& ev : host_events) {
      if (ev.offset <= junction_offset)
        leading.push_back(ev);
      else
        trailing.push_back({ev.offset - junction_offset, ev.allele});
    }
    if (stub_is_rootward) {
      out.log->events[stub_index][s] = std::move(leading);
      out.log->events[rec.host_edge][s] = std::move(trailing);
    } else {
      out.log->events[rec.host_edge][s] = std::move(leading);
      out.log->events[stub_index][s] = std::move(trailing);
    }

    Rng rng = Rng::stream(seed, static_cast<uint64_t>(s), kRolePendant);
    const uint8_t leaf_allele = simulate_branch(
        rng, model, junction_allele, effective_pendant, scratch);
    auto& stored = out.log->events[pendant_index][s];
    stored.clear();
    const double squeeze = pendant_length / effective_pendant;
    for (const auto& ev : scratch)
      stored.push_back({ev.offset * squeeze, ev.allele});
    out.at(n, s) = leaf_allele;
  }
  return out;
}

std::vector<uint8_t> replay_leaf_alleles(const UnrootedTree& tree,
                                         const EventLog& log, int site) {
  const auto nodes = replay_unrooted_nodes(tree, log, site);
  const auto order = label_order(tree.leaf_labels);
  std::vector<uint8_t> rows(tree.n);
  for (int r = 0; r < tree.n; ++r) rows[r] = nodes[order[r]];
  return rows;
}

// ------------------------------------------------------------------ utility

SiteMatrix project_rows(const SiteMatrix& m,
                        const std::vector<std::string>& labels) {
  SiteMatrix out;
  out.leaf_labels = sorted_labels(labels);
  out.k = m.k;
  out.alleles.resize(out.leaf_labels.size() * static_cast<size_t>(m.k));
  out.provenance = m.provenance;
  out.seed = m.seed;
  for (size_t r = 0; r < out.leaf_labels.size(); ++r) {
    const auto it = std::find(m.leaf_labels.begin(), m.leaf_labels.end(),
                              out.leaf_labels[r]);
    if (it == m.leaf_labels.end())
      throw std::invalid_argument("project_rows: unknown label");
    const int src = static_cast<int>(it - m.leaf_labels.begin());
    for (int s = 0; s < m.k; ++s)
      out.at(static_cast<int>(r), s) = m.at(src, s);
  }
  return out;
}

std::string to_text(const SiteMatrix& m, const MutationModel& model) {
  std::string out;
  for (int r = 0; r < m.rows(); ++r) {
    if (r) out += ' ';
    out += m.leaf_labels[r];
  }
  out += '\n';
  for (int r = 0; r < m.rows(); ++r) {
    for (int s = 0; s < m.k; ++s) out += model.symbols()[m.at(r, s)];
    out += '\n';
  }
  return out;
}

SiteMatrix parse_text(const std::string& text, const MutationModel& model) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("site text: empty input");
  SiteMatrix m;
  {
    std::istringstream hs(header);
    std::string label;
    while (hs >> label) m.leaf_labels.push_back(label);
  }
  if (m.leaf_labels.empty()) throw std::runtime_error("site text: no leaf labels");
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.size() != m.leaf_labels.size())
    throw std::runtime_error("site text: row count does not match header");
  m.k = static_cast<int>(rows[0].size());
  m.alleles.resize(rows.size() * static_cast<size_t>(m.k));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != m.k)
      throw std::runtime_error("site text: ragged rows");
    for (int s = 0; s < m.k; ++s) {
      const auto pos = model.symbols().find(rows[r][s]);
      if (pos == std::string::npos)
        throw std::runtime_error("site text: unknown allele symbol");
      m.at(static_cast<int>(r), s) = static_cast<uint8_t>(pos);
    }
  }
  return m;
}

std::string to_nexus_characters(const SiteMatrix& m, const MutationModel& model) {
  std::string out = "#NEXUS\nBEGIN DATA;\n  DIMENSIONS NTAX=" +
                    std::to_string(m.rows()) + " NCHAR=" + std::to_string(m.k) +
                    ";\n  FORMAT SYMBOLS=\"" + model.symbols() + "\";\n  MATRIX\n";
  for (int r = 0; r < m.rows(); ++r) {
    out += "    " + m.leaf_labels[r] + " ";
    for (int s = 0; s < m.k; ++s) out += model.symbols()[m.at(r, s)];
    out += '\n';
  }
  out += "  ;\nEND;\n";
  return out;
}

std::vector<uint8_t> event_sidecar_bytes(const SiteMatrix& m) {
  if (!m.log) throw std::invalid_argument("event sidecar: no log present");
  std::vector<uint8_t> out = {'P', 'H', 'E', 'V'};
  auto put_u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  auto put_u64 = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  put_u32(1);  // version
  put_u64(static_cast<uint64_t>(m.k));
  put_u32(static_cast<uint32_t>(m.log->events.size()));
  out.insert(out.end(), m.log->root_alleles.begin(), m.log->root_alleles.end());
  for (const auto& branch : m.log->events) {
    for (const auto& site : branch) {
      put_varint(out, site.size());
      for (const auto& ev : site) {
        uint64_t bits;
        std::memcpy(&bits, &ev.offset, sizeof bits);
        put_u64(bits);
        out.push_back(ev.allele);
      }
    }
  }
  return out;
}

void attach_event_sidecar(SiteMatrix& m, const std::vector<uint8_t>& bytes) {
  size_t pos = 0;
  auto need = [&](size_t c) {
    if (pos + c > bytes.size()) throw std::runtime_error("event sidecar: truncated");
  };
  need(4);
  if (std::memcmp(bytes.data(), "PHEV", 4) != 0)
    throw std::runtime_error("event sidecar: bad magic");
  pos = 4;
  auto get_u32 = [&]() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos++]) << (8 * i);
    return v;
  };
  auto get_u64 = [&]() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes[pos++]) << (8 * i);
    return v;
  };
  const uint32_t version = get_u32();
  if (version != 1) throw std::runtime_error("event sidecar: unknown version");
  const uint64_t k = get_u64();
  if (static_cast<int>(k) != m.k)
    throw std::runtime_error("event sidecar: site count mismatch");
  const uint32_t branches = get_u32();
  EventLog log;
  need(k);
  log.root_alleles.assign(bytes.begin() + pos, bytes.begin() + pos + k);
  pos += k;
  log.events.assign(branches, std::vector<std::vector<MutEvent>>(m.k));
  for (uint32_t b = 0; b < branches; ++b) {
    for (int s = 0; s < m.k; ++s) {
      const uint64_t count = get_varint(bytes.data(), bytes.size(), pos);
      auto& evs = log.events[b][s];
      evs.resize(count);
      for (uint64_t i = 0; i < count; ++i) {
        const uint64_t bits = get_u64();
        std::memcpy(&evs[i].offset, &bits, sizeof bits);
        need(1);
        evs[i].allele = bytes[pos++];
      }
    }
  }
  m.log = std::move(log);
}

}  // namespace phylo
