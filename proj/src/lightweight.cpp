#include "pdgnn/lightweight.hpp"

#include <algorithm>
#include <stdexcept>

#include "pdgnn/rng.hpp"

namespace pdgnn {

TransactionGraph first_order_neighborhood(const TransactionGraph& g, const LabelSet& seeds) {
  std::vector<std::uint8_t> keep(g.node_count(), 0);
  bool any_seed = false;
  for (const auto& id : seeds.ids()) {
    auto idx = g.find_account(id);
    if (!idx) continue;
    any_seed = true;
    keep[*idx] = 1;
    for (const Arc& a : g.out_arcs(*idx)) keep[a.node] = 1;
    for (const Arc& a : g.in_arcs(*idx)) keep[a.node] = 1;
  }
  if (!any_seed) throw std::invalid_argument("no seed account present in the graph");

  std::vector<std::uint32_t> nodes;
  for (std::uint32_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) nodes.push_back(i);
  }
  return induced_subgraph(g, nodes);
}

TransactionGraph random_walk_rescale(const TransactionGraph& g, const RescaleConfig& cfg) {
  if (cfg.target_scale < 2) throw std::invalid_argument("target_scale must be >= 2");
  if (cfg.target_scale > g.node_count()) {
    throw std::invalid_argument("target_scale exceeds the node count");
  }
  if (weakly_connected_components(g).size() != 1) {
    throw std::invalid_argument("random_walk_rescale requires a weakly connected graph");
  }

  Rng rng(cfg.rng_seed);

  std::uint32_t current;
  if (cfg.start_account) {
    auto idx = g.find_account(*cfg.start_account);
    if (!idx) throw std::invalid_argument("start account not in graph: " + *cfg.start_account);
    current = *idx;
  } else {
    auto phishing = g.phishing_nodes();
    if (!phishing.empty()) {
      current = phishing[rng.bounded(phishing.size())];
    } else {
      current = static_cast<std::uint32_t>(rng.bounded(g.node_count()));
    }
  }

  std::vector<std::uint8_t> visited(g.node_count(), 0);
  std::vector<std::uint32_t> visit_order;  // for uniform teleport targets
  visited[current] = 1;
  visit_order.push_back(current);

  while (visit_order.size() < cfg.target_scale) {
    auto neighbors = g.undirected_neighbors(current);
    if (neighbors.empty()) {
      // Isolated node: jump back into the visited set. Unreachable on a
      // connected graph of >= 2 nodes, kept for pathological inputs.
      current = visit_order[rng.bounded(visit_order.size())];
      continue;
    }
    current = neighbors[rng.bounded(neighbors.size())];
    if (!visited[current]) {
      visited[current] = 1;
      visit_order.push_back(current);
    }
  }

  std::sort(visit_order.begin(), visit_order.end());
  return induced_subgraph(g, visit_order);
}

}  // namespace pdgnn
