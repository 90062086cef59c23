#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdgnn/graph.hpp"

namespace pdgnn {

enum class DirectionMode { Directed, Undirected };

// The (rank, weight) attribute pair names the dataset variant: a-a, a-t,
// t-a, t-t. Ranking drives neighbor selection, weight is what the extracted
// edges carry.
struct SamplingStrategy {
  EdgeAttribute rank_attribute = EdgeAttribute::Count;
  EdgeAttribute weight_attribute = EdgeAttribute::Count;
  int hops = 2;
  DirectionMode direction = DirectionMode::Undirected;

  std::string name() const;  // "t-t" style
};

inline constexpr int kFeatureDim = 8;

struct SubgraphEdge {
  std::uint32_t src;
  std::uint32_t dst;
  double weight;

  friend bool operator==(const SubgraphEdge&, const SubgraphEdge&) = default;
};

// Ego-subgraph around one target account. Node/edge indices are local;
// `nodes` maps local -> global. Edges are the induced closure over the
// sampled node set, each carrying the strategy's weight attribute.
struct AccountSubgraph {
  std::uint32_t center = 0;  // local index of the target account
  std::vector<std::uint32_t> nodes;
  std::vector<SubgraphEdge> edges;
  Eigen::MatrixXd features;  // |nodes| x kFeatureDim, row = local index
  int label = 0;             // phishing = 1, normal = 0
};

// Adaptive neighbor budget: k = ceil(avg_degree * (1 + density)) computed in
// exact integer arithmetic so the ceiling never drifts across a float
// boundary. Requires nodes >= 2.
int compute_k_from_counts(std::uint64_t nodes, std::uint64_t edges);
int compute_k(const TransactionGraph& g);

// Distinct neighbors of `node` ordered by descending rank attribute, at most
// k of them (all of them when fewer exist). Undirected mode merges the two
// directions with summed attributes; directed mode ranks each directed arc
// on its own. Ties: other attribute descending, then node index ascending.
std::vector<std::uint32_t> rank_neighbors(const TransactionGraph& g, std::uint32_t node,
                                          const SamplingStrategy& strategy, int k);

// Breadth-first expansion from `center` for strategy.hops levels, each
// frontier node expanded by rank_neighbors(..., k); edges are the induced
// closure over the visited set. Deterministic.
AccountSubgraph extract_subgraph(const TransactionGraph& g, std::uint32_t center,
                                 const SamplingStrategy& strategy, int k);

// Per-node features computed within the subgraph:
// [in_deg, out_deg, sum_in_t, sum_out_t, ln(1+sum_in_a), ln(1+sum_out_a),
//  unique_neighbors, is_center].
Eigen::MatrixXd node_features(const AccountSubgraph& sub, const TransactionGraph& g);

struct Dataset {
  SamplingStrategy strategy;
  int k = 0;
  std::vector<AccountSubgraph> items;  // positives first, each class sorted by center
};

// One positive subgraph per phishing node plus an equal number of negatives
// centered on unlabeled nodes drawn uniformly without replacement (seeded).
// Throws when g has no labeled node or not enough unlabeled ones.
Dataset build_dataset(const TransactionGraph& g, const SamplingStrategy& strategy,
                      std::uint64_t seed);

void save_dataset(const Dataset& ds, std::ostream& out);
Dataset load_dataset(std::istream& in);
void save_dataset_file(const Dataset& ds, const std::string& path);
Dataset load_dataset_file(const std::string& path);

}  // namespace pdgnn
