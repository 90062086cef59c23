#include "pdgnn/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "binio.hpp"

namespace pdgnn {

TransactionGraph TransactionGraph::build(std::vector<std::string> accounts,
                                         std::vector<DirectedEdge> edges,
                                         std::vector<std::uint8_t> phishing) {
  const std::size_t n = accounts.size();
  if (phishing.size() != n) throw std::invalid_argument("phishing flags must match node count");
  if (!std::is_sorted(accounts.begin(), accounts.end())) {
    throw std::invalid_argument("accounts must be sorted");
  }
  if (std::adjacent_find(accounts.begin(), accounts.end()) != accounts.end()) {
    throw std::invalid_argument("duplicate account id");
  }

  for (const auto& e : edges) {
    if (e.src >= n || e.dst >= n) throw std::invalid_argument("edge endpoint out of range");
    if (e.src == e.dst) throw std::invalid_argument("self-loops are not allowed");
    if (e.amount < 0.0) throw std::invalid_argument("edge amount must be non-negative");
    if (e.count == 0) throw std::invalid_argument("edge count must be positive");
  }
  std::sort(edges.begin(), edges.end(), [](const DirectedEdge& a, const DirectedEdge& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].src == edges[i - 1].src && edges[i].dst == edges[i - 1].dst) {
      throw std::invalid_argument("duplicate ordered pair in edge list");
    }
  }

  TransactionGraph g;
  g.accounts_ = std::move(accounts);
  g.phishing_ = std::move(phishing);

  g.out_offsets_.assign(n + 1, 0);
  g.in_offsets_.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++g.out_offsets_[e.src + 1];
    ++g.in_offsets_[e.dst + 1];
  }
  std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
  std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(), g.in_offsets_.begin());

  g.out_arcs_.resize(edges.size());
  g.in_arcs_.resize(edges.size());
  std::vector<std::size_t> out_fill(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  for (const auto& e : edges) {
    g.out_arcs_[out_fill[e.src]++] = Arc{e.dst, e.amount, e.count};
    g.in_arcs_[in_fill[e.dst]++] = Arc{e.src, e.amount, e.count};
  }
  // Edges arrive sorted by (src, dst), so out rows are already ordered; in
  // rows inherit src order within each dst bucket, which is also ascending.
  return g;
}

std::optional<std::uint32_t> TransactionGraph::find_account(std::string_view id) const {
  auto it = std::lower_bound(accounts_.begin(), accounts_.end(), id);
  if (it == accounts_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - accounts_.begin());
}

std::size_t TransactionGraph::phishing_count() const {
  return static_cast<std::size_t>(std::count(phishing_.begin(), phishing_.end(), std::uint8_t{1}));
}

std::vector<std::uint32_t> TransactionGraph::phishing_nodes() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < phishing_.size(); ++i) {
    if (phishing_[i]) out.push_back(i);
  }
  return out;
}

std::span<const Arc> TransactionGraph::out_arcs(std::uint32_t u) const {
  if (u >= node_count()) throw std::out_of_range("node index out of range");
  return {out_arcs_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
}

std::span<const Arc> TransactionGraph::in_arcs(std::uint32_t u) const {
  if (u >= node_count()) throw std::out_of_range("node index out of range");
  return {in_arcs_.data() + in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]};
}

std::vector<std::uint32_t> TransactionGraph::undirected_neighbors(std::uint32_t u) const {
  auto outs = out_arcs(u);
  auto ins = in_arcs(u);
  std::vector<std::uint32_t> merged;
  merged.reserve(outs.size() + ins.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < outs.size() || j < ins.size()) {
    std::uint32_t next;
    if (j == ins.size() || (i < outs.size() && outs[i].node <= ins[j].node)) {
      next = outs[i++].node;
    } else {
      next = ins[j++].node;
    }
    if (merged.empty() || merged.back() != next) merged.push_back(next);
  }
  return merged;
}

std::vector<DirectedEdge> TransactionGraph::edges() const {
  std::vector<DirectedEdge> out;
  out.reserve(edge_count());
  for (std::uint32_t u = 0; u < node_count(); ++u) {
    for (const Arc& a : out_arcs(u)) out.push_back({u, a.node, a.amount, a.count});
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> weakly_connected_components(const TransactionGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::int64_t> comp(n, -1);
  std::vector<std::vector<std::uint32_t>> components;
  std::vector<std::uint32_t> stack;

  for (std::uint32_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const auto id = static_cast<std::int64_t>(components.size());
    components.emplace_back();
    comp[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      std::uint32_t u = stack.back();
      stack.pop_back();
      components[id].push_back(u);
      for (const Arc& a : g.out_arcs(u)) {
        if (comp[a.node] < 0) {
          comp[a.node] = id;
          stack.push_back(a.node);
        }
      }
      for (const Arc& a : g.in_arcs(u)) {
        if (comp[a.node] < 0) {
          comp[a.node] = id;
          stack.push_back(a.node);
        }
      }
    }
    std::sort(components[id].begin(), components[id].end());
  }

  // Decreasing size; ties go to the component holding the smallest index.
  std::sort(components.begin(), components.end(),
            [](const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });
  return components;
}

TransactionGraph largest_wcc(const TransactionGraph& g) {
  if (g.empty()) throw std::invalid_argument("largest_wcc: empty graph");
  auto components = weakly_connected_components(g);
  return induced_subgraph(g, components.front());
}

double average_degree(const TransactionGraph& g) {
  if (g.empty()) throw std::invalid_argument("average_degree: empty graph");
  return 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
}

double density(const TransactionGraph& g) {
  const auto n = static_cast<double>(g.node_count());
  if (g.node_count() < 2) throw std::invalid_argument("density requires at least 2 nodes");
  return 2.0 * static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

UndirectedView symmetrize(const TransactionGraph& g, EdgeAttribute attr) {
  UndirectedView view;
  view.node_count = g.node_count();
  auto value = [attr](const Arc& a) {
    return attr == EdgeAttribute::Amount ? a.amount : static_cast<double>(a.count);
  };
  for (std::uint32_t u = 0; u < g.node_count(); ++u) {
    for (const Arc& a : g.out_arcs(u)) {
      if (a.node < u) continue;  // handled from the other endpoint
      double w = value(a);
      // add the reverse arc, if present
      auto ins = g.in_arcs(u);
      auto it = std::lower_bound(ins.begin(), ins.end(), a.node,
                                 [](const Arc& x, std::uint32_t v) { return x.node < v; });
      if (it != ins.end() && it->node == a.node) w += value(*it);
      view.edges.push_back({u, a.node, w});
    }
    // pairs where only the reverse direction exists
    for (const Arc& a : g.in_arcs(u)) {
      if (a.node < u) continue;
      auto outs = g.out_arcs(u);
      auto it = std::lower_bound(outs.begin(), outs.end(), a.node,
                                 [](const Arc& x, std::uint32_t v) { return x.node < v; });
      if (it != outs.end() && it->node == a.node) continue;  // already emitted above
      view.edges.push_back({u, a.node, value(a)});
    }
  }
  std::sort(view.edges.begin(), view.edges.end(),
            [](const UndirectedEdge& a, const UndirectedEdge& b) {
              return std::tie(a.u, a.v) < std::tie(b.u, b.v);
            });
  return view;
}

TransactionGraph induced_subgraph(const TransactionGraph& g,
                                  std::span<const std::uint32_t> nodes) {
  const std::size_t n = g.node_count();
  std::vector<std::uint32_t> remap(n, UINT32_MAX);
  std::vector<std::string> accounts;
  std::vector<std::uint8_t> phishing;
  accounts.reserve(nodes.size());
  phishing.reserve(nodes.size());
  std::uint32_t next = 0;
  for (std::uint32_t u : nodes) {
    if (u >= n) throw std::out_of_range("induced_subgraph: node index out of range");
    if (next > 0 && nodes[next - 1] >= u) {
      throw std::invalid_argument("induced_subgraph: nodes must be sorted unique");
    }
    remap[u] = next++;
    accounts.push_back(g.account(u));
    phishing.push_back(g.is_phishing(u) ? 1 : 0);
  }
  // Node indices follow account order in g, so a sorted index list keeps the
  // account list sorted too.

  std::vector<DirectedEdge> edges;
  for (std::uint32_t u : nodes) {
    for (const Arc& a : g.out_arcs(u)) {
      if (remap[a.node] != UINT32_MAX) {
        edges.push_back({remap[u], remap[a.node], a.amount, a.count});
      }
    }
  }
  return TransactionGraph::build(std::move(accounts), std::move(edges), std::move(phishing));
}

namespace {
constexpr char kSnapshotMagic[9] = "PDGNNGR1";
}

void save_snapshot(const TransactionGraph& g, std::ostream& out) {
  binio::write_magic(out, kSnapshotMagic);
  binio::write_u64(out, g.node_count());
  binio::write_u64(out, g.edge_count());
  for (std::uint32_t i = 0; i < g.node_count(); ++i) binio::write_str(out, g.account(i));
  for (std::uint32_t i = 0; i < g.node_count(); ++i) binio::write_u8(out, g.is_phishing(i) ? 1 : 0);
  for (std::uint32_t u = 0; u < g.node_count(); ++u) {
    for (const Arc& a : g.out_arcs(u)) {
      binio::write_u32(out, u);
      binio::write_u32(out, a.node);
      binio::write_f64(out, a.amount);
      binio::write_u64(out, a.count);
    }
  }
  if (!out) throw ConfigError("failed to write graph snapshot");
}

TransactionGraph load_snapshot(std::istream& in) {
  binio::expect_magic(in, kSnapshotMagic, "graph snapshot");
  const std::uint64_t n = binio::read_u64(in);
  const std::uint64_t m = binio::read_u64(in);
  std::vector<std::string> accounts(n);
  for (auto& s : accounts) s = binio::read_str(in);
  std::vector<std::uint8_t> phishing(n);
  for (auto& f : phishing) f = binio::read_u8(in);
  std::vector<DirectedEdge> edges(m);
  for (auto& e : edges) {
    e.src = binio::read_u32(in);
    e.dst = binio::read_u32(in);
    e.amount = binio::read_f64(in);
    e.count = binio::read_u64(in);
  }
  return TransactionGraph::build(std::move(accounts), std::move(edges), std::move(phishing));
}

void save_snapshot_file(const TransactionGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  save_snapshot(g, out);
}

TransactionGraph load_snapshot_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  return load_snapshot(in);
}

}  // namespace pdgnn
