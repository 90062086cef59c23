#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pdgnn/graph.hpp"
#include "pdgnn/ingest.hpp"

namespace pdgnn {

struct RescaleConfig {
  std::size_t target_scale = 2;  // desired node count, >= 2
  std::uint64_t rng_seed = 0;
  std::optional<std::string> start_account;  // default: a random phishing node
};

// Induced subgraph on the seeds plus every account adjacent to a seed in
// either direction. Throws if no seed is present in g.
TransactionGraph first_order_neighborhood(const TransactionGraph& g, const LabelSet& seeds);

// Random-walk reduction to exactly target_scale visited nodes. The walk
// starts at cfg.start_account (default: uniformly random phishing node, else
// uniformly random node) and moves to a uniformly random neighbor of the
// current node, visited or not; a node with no neighbors at all teleports to
// a random visited node. Requires target_scale <= |V| and g weakly
// connected. Fully deterministic given rng_seed.
TransactionGraph random_walk_rescale(const TransactionGraph& g, const RescaleConfig& cfg);

}  // namespace pdgnn
