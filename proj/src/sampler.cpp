#include "pdgnn/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "binio.hpp"
#include "pdgnn/rng.hpp"

namespace pdgnn {

std::string SamplingStrategy::name() const {
  auto c = [](EdgeAttribute a) { return a == EdgeAttribute::Amount ? 'a' : 't'; };
  return std::string{c(rank_attribute), '-', c(weight_attribute)};
}

int compute_k_from_counts(std::uint64_t nodes, std::uint64_t edges) {
  if (nodes < 2) throw std::invalid_argument("compute_k requires at least 2 nodes");
  // k = ceil( (2E/V) * (1 + 2E/(V(V-1))) )
  //   = ceil( 2E * (V(V-1) + 2E) / (V^2 (V-1)) )
  // Evaluated in 128-bit integers so the ceiling can never drift across a
  // floating-point boundary.
  using u128 = unsigned __int128;
  const u128 v = nodes;
  const u128 e = edges;
  const u128 num = 2 * e * (v * (v - 1) + 2 * e);
  const u128 den = v * v * (v - 1);
  const u128 k = num == 0 ? 0 : (num + den - 1) / den;
  return static_cast<int>(k);
}

int compute_k(const TransactionGraph& g) {
  return compute_k_from_counts(g.node_count(), g.edge_count());
}

namespace {

// A ranked neighbor candidate: primary/secondary carry the rank attribute
// and the tiebreak attribute as doubles.
struct Candidate {
  std::uint32_t node;
  double primary;
  double secondary;
};

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.primary != b.primary) return a.primary > b.primary;
  if (a.secondary != b.secondary) return a.secondary > b.secondary;
  return a.node < b.node;
}

Candidate make_candidate(std::uint32_t node, double amount, double count, EdgeAttribute rank) {
  if (rank == EdgeAttribute::Amount) return {node, amount, count};
  return {node, count, amount};
}

}  // namespace

std::vector<std::uint32_t> rank_neighbors(const TransactionGraph& g, std::uint32_t node,
                                          const SamplingStrategy& strategy, int k) {
  if (node >= g.node_count()) throw std::out_of_range("rank_neighbors: unknown node");
  if (k <= 0) return {};

  std::vector<Candidate> candidates;
  if (strategy.direction == DirectionMode::Undirected) {
    // Merge the two sorted adjacency rows, summing attributes per neighbor.
    auto outs = g.out_arcs(node);
    auto ins = g.in_arcs(node);
    std::size_t i = 0, j = 0;
    while (i < outs.size() || j < ins.size()) {
      std::uint32_t nb;
      double amount = 0.0, count = 0.0;
      if (j == ins.size() || (i < outs.size() && outs[i].node <= ins[j].node)) {
        nb = outs[i].node;
        amount += outs[i].amount;
        count += static_cast<double>(outs[i].count);
        ++i;
      } else {
        nb = ins[j].node;
      }
      if (j < ins.size() && ins[j].node == nb) {
        amount += ins[j].amount;
        count += static_cast<double>(ins[j].count);
        ++j;
      }
      candidates.push_back(make_candidate(nb, amount, count, strategy.rank_attribute));
    }
  } else {
    // Each directed arc competes on its own; a neighbor reachable both ways
    // is ranked by its best arc.
    for (const Arc& a : g.out_arcs(node)) {
      candidates.push_back(
          make_candidate(a.node, a.amount, static_cast<double>(a.count), strategy.rank_attribute));
    }
    for (const Arc& a : g.in_arcs(node)) {
      candidates.push_back(
          make_candidate(a.node, a.amount, static_cast<double>(a.count), strategy.rank_attribute));
    }
  }

  std::stable_sort(candidates.begin(), candidates.end(), candidate_before);

  std::vector<std::uint32_t> picked;
  picked.reserve(static_cast<std::size_t>(k));
  for (const Candidate& c : candidates) {
    if (std::find(picked.begin(), picked.end(), c.node) != picked.end()) continue;
    picked.push_back(c.node);
    if (static_cast<int>(picked.size()) == k) break;
  }
  return picked;
}

AccountSubgraph extract_subgraph(const TransactionGraph& g, std::uint32_t center,
                                 const SamplingStrategy& strategy, int k) {
  if (center >= g.node_count()) throw std::out_of_range("extract_subgraph: unknown center");

  std::vector<std::uint32_t> visited{center};
  std::unordered_map<std::uint32_t, std::uint32_t> local;  // global -> local
  local.emplace(center, 0);

  std::vector<std::uint32_t> frontier{center};
  for (int hop = 0; hop < strategy.hops && !frontier.empty(); ++hop) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t u : frontier) {
      for (std::uint32_t nb : rank_neighbors(g, u, strategy, k)) {
        if (local.contains(nb)) continue;
        local.emplace(nb, static_cast<std::uint32_t>(visited.size()));
        visited.push_back(nb);
        next.push_back(nb);
      }
    }
    frontier = std::move(next);
  }

  AccountSubgraph sub;
  sub.center = 0;
  sub.nodes = visited;
  sub.label = g.is_phishing(center) ? 1 : 0;

  // Induced closure: every g-edge between visited nodes, carrying the
  // strategy's weight attribute.
  for (std::uint32_t u : visited) {
    for (const Arc& a : g.out_arcs(u)) {
      auto it = local.find(a.node);
      if (it == local.end()) continue;
      double w = strategy.weight_attribute == EdgeAttribute::Amount
                     ? a.amount
                     : static_cast<double>(a.count);
      sub.edges.push_back({local.at(u), it->second, w});
    }
  }
  std::sort(sub.edges.begin(), sub.edges.end(), [](const SubgraphEdge& a, const SubgraphEdge& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });

  sub.features = node_features(sub, g);
  return sub;
}

Eigen::MatrixXd node_features(const AccountSubgraph& sub, const TransactionGraph& g) {
  const auto n = static_cast<Eigen::Index>(sub.nodes.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, kFeatureDim);

  std::unordered_map<std::uint32_t, std::uint32_t> local;
  for (std::uint32_t i = 0; i < sub.nodes.size(); ++i) local.emplace(sub.nodes[i], i);

  std::vector<double> in_t(n, 0.0), out_t(n, 0.0), in_a(n, 0.0), out_a(n, 0.0);
  std::vector<double> in_deg(n, 0.0), out_deg(n, 0.0);
  std::vector<std::vector<std::uint32_t>> nbrs(n);

  for (std::uint32_t u : sub.nodes) {
    const std::uint32_t lu = local.at(u);
    for (const Arc& a : g.out_arcs(u)) {
      auto it = local.find(a.node);
      if (it == local.end()) continue;
      const std::uint32_t lv = it->second;
      out_deg[lu] += 1.0;
      in_deg[lv] += 1.0;
      out_t[lu] += static_cast<double>(a.count);
      in_t[lv] += static_cast<double>(a.count);
      out_a[lu] += a.amount;
      in_a[lv] += a.amount;
      nbrs[lu].push_back(lv);
      nbrs[lv].push_back(lu);
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    auto& ns = nbrs[i];
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    f(i, 0) = in_deg[i];
    f(i, 1) = out_deg[i];
    f(i, 2) = in_t[i];
    f(i, 3) = out_t[i];
    f(i, 4) = std::log1p(in_a[i]);
    f(i, 5) = std::log1p(out_a[i]);
    f(i, 6) = static_cast<double>(ns.size());
    f(i, 7) = 0.0;
  }
  f(sub.center, 7) = 1.0;
  return f;
}

Dataset build_dataset(const TransactionGraph& g, const SamplingStrategy& strategy,
                      std::uint64_t seed) {
  auto positives = g.phishing_nodes();
  if (positives.empty()) throw std::invalid_argument("build_dataset: no labeled phishing node");

  std::vector<std::uint32_t> unlabeled;
  unlabeled.reserve(g.node_count() - positives.size());
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    if (!g.is_phishing(i)) unlabeled.push_back(i);
  }
  if (unlabeled.size() < positives.size()) {
    throw std::invalid_argument("build_dataset: not enough unlabeled nodes for negatives");
  }

  // Uniform sample without replacement, then sorted for canonical order.
  Rng rng(seed);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    std::size_t j = i + rng.bounded(unlabeled.size() - i);
    std::swap(unlabeled[i], unlabeled[j]);
  }
  std::vector<std::uint32_t> negatives(unlabeled.begin(),
                                       unlabeled.begin() + static_cast<std::ptrdiff_t>(positives.size()));
  std::sort(negatives.begin(), negatives.end());

  Dataset ds;
  ds.strategy = strategy;
  ds.k = compute_k(g);
  ds.items.reserve(positives.size() * 2);
  for (std::uint32_t c : positives) ds.items.push_back(extract_subgraph(g, c, strategy, ds.k));
  for (std::uint32_t c : negatives) ds.items.push_back(extract_subgraph(g, c, strategy, ds.k));
  return ds;
}

namespace {
constexpr char kDatasetMagic[9] = "PDGNNDS1";
}

void save_dataset(const Dataset& ds, std::ostream& out) {
  binio::write_magic(out, kDatasetMagic);
  binio::write_u8(out, ds.strategy.rank_attribute == EdgeAttribute::Amount ? 0 : 1);
  binio::write_u8(out, ds.strategy.weight_attribute == EdgeAttribute::Amount ? 0 : 1);
  binio::write_u8(out, ds.strategy.direction == DirectionMode::Directed ? 0 : 1);
  binio::write_u8(out, 0);
  binio::write_u32(out, static_cast<std::uint32_t>(ds.strategy.hops));
  binio::write_u32(out, static_cast<std::uint32_t>(ds.k));
  binio::write_u32(out, kFeatureDim);
  binio::write_u64(out, ds.items.size());
  for (const auto& sub : ds.items) {
    binio::write_u64(out, sub.nodes.size());
    binio::write_u64(out, sub.edges.size());
    binio::write_u32(out, sub.center);
    binio::write_u8(out, static_cast<std::uint8_t>(sub.label));
    for (std::uint32_t nidx : sub.nodes) binio::write_u32(out, nidx);
    for (const auto& e : sub.edges) {
      binio::write_u32(out, e.src);
      binio::write_u32(out, e.dst);
      binio::write_f64(out, e.weight);
    }
    for (Eigen::Index r = 0; r < sub.features.rows(); ++r) {
      for (Eigen::Index c = 0; c < sub.features.cols(); ++c) {
        binio::write_f64(out, sub.features(r, c));
      }
    }
  }
  if (!out) throw ConfigError("failed to write dataset");
}

Dataset load_dataset(std::istream& in) {
  binio::expect_magic(in, kDatasetMagic, "dataset");
  Dataset ds;
  ds.strategy.rank_attribute = binio::read_u8(in) == 0 ? EdgeAttribute::Amount : EdgeAttribute::Count;
  ds.strategy.weight_attribute = binio::read_u8(in) == 0 ? EdgeAttribute::Amount : EdgeAttribute::Count;
  ds.strategy.direction = binio::read_u8(in) == 0 ? DirectionMode::Directed : DirectionMode::Undirected;
  binio::read_u8(in);
  ds.strategy.hops = static_cast<int>(binio::read_u32(in));
  ds.k = static_cast<int>(binio::read_u32(in));
  const std::uint32_t d = binio::read_u32(in);
  if (d != kFeatureDim) throw ConfigError("dataset feature dimension mismatch");
  const std::uint64_t count = binio::read_u64(in);
  ds.items.resize(count);
  for (auto& sub : ds.items) {
    const std::uint64_t n = binio::read_u64(in);
    const std::uint64_t m = binio::read_u64(in);
    sub.center = binio::read_u32(in);
    sub.label = binio::read_u8(in);
    sub.nodes.resize(n);
    for (auto& nidx : sub.nodes) nidx = binio::read_u32(in);
    sub.edges.resize(m);
    for (auto& e : sub.edges) {
      e.src = binio::read_u32(in);
      e.dst = binio::read_u32(in);
      e.weight = binio::read_f64(in);
    }
    sub.features.resize(static_cast<Eigen::Index>(n), kFeatureDim);
    for (Eigen::Index r = 0; r < sub.features.rows(); ++r) {
      for (Eigen::Index c = 0; c < sub.features.cols(); ++c) {
        sub.features(r, c) = binio::read_f64(in);
      }
    }
  }
  return ds;
}

void save_dataset_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  save_dataset(ds, out);
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  return load_dataset(in);
}

}  // namespace pdgnn
