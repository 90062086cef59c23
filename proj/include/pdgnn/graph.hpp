#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdgnn/errors.hpp"

namespace pdgnn {

// Which of the two per-pair edge attributes an operation reads:
// a = summed transferred amount, t = transaction count.
enum class EdgeAttribute { Amount, Count };

// One stored directed arc. `node` is the destination when read from the
// out-adjacency and the source when read from the in-adjacency.
struct Arc {
  std::uint32_t node;
  double amount;
  std::uint64_t count;

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct DirectedEdge {
  std::uint32_t src;
  std::uint32_t dst;
  double amount;
  std::uint64_t count;

  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

// Immutable compact directed graph, one arc per ordered account pair.
// Accounts are stored sorted, so node indices do not depend on input order,
// and every adjacency list is sorted by neighbor index.
class TransactionGraph {
public:
  TransactionGraph() = default;

  // `accounts` sorted unique, `edges` sorted by (src, dst) unique with no
  // self-loops, `phishing` sized like `accounts`. Throws on violations.
  static TransactionGraph build(std::vector<std::string> accounts,
                                std::vector<DirectedEdge> edges,
                                std::vector<std::uint8_t> phishing);

  std::size_t node_count() const { return accounts_.size(); }
  std::size_t edge_count() const { return out_arcs_.size(); }
  bool empty() const { return accounts_.empty(); }

  const std::string& account(std::uint32_t idx) const { return accounts_[idx]; }
  const std::vector<std::string>& accounts() const { return accounts_; }
  std::optional<std::uint32_t> find_account(std::string_view id) const;

  bool is_phishing(std::uint32_t idx) const { return phishing_[idx] != 0; }
  const std::vector<std::uint8_t>& phishing_flags() const { return phishing_; }
  std::size_t phishing_count() const;
  std::vector<std::uint32_t> phishing_nodes() const;

  std::span<const Arc> out_arcs(std::uint32_t u) const;
  std::span<const Arc> in_arcs(std::uint32_t u) const;

  // Distinct neighbors of u ignoring direction, ascending.
  std::vector<std::uint32_t> undirected_neighbors(std::uint32_t u) const;

  // All edges, (src, dst) ascending.
  std::vector<DirectedEdge> edges() const;

  friend bool operator==(const TransactionGraph&, const TransactionGraph&) = default;

private:
  std::vector<std::string> accounts_;
  std::vector<std::uint8_t> phishing_;
  std::vector<std::size_t> out_offsets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Arc> out_arcs_;
  std::vector<Arc> in_arcs_;
};

// Components ignoring edge direction, ordered by decreasing size; ties broken
// by smallest minimum node index. Node lists are ascending.
std::vector<std::vector<std::uint32_t>> weakly_connected_components(const TransactionGraph& g);

// Induced subgraph on the largest component. Throws on an empty graph.
TransactionGraph largest_wcc(const TransactionGraph& g);

// 2|E|/|V| over stored directed edges. Throws on an empty graph.
double average_degree(const TransactionGraph& g);

// 2|E|/(|V|(|V|-1)). Requires |V| >= 2.
double density(const TransactionGraph& g);

struct UndirectedEdge {
  std::uint32_t u;
  std::uint32_t v;
  double weight;

  friend bool operator==(const UndirectedEdge&, const UndirectedEdge&) = default;
};

// Undirected weighted view: weight{u,v} = attr(u->v) + attr(v->u), u < v,
// edges ascending by (u, v).
struct UndirectedView {
  std::size_t node_count = 0;
  std::vector<UndirectedEdge> edges;
};

UndirectedView symmetrize(const TransactionGraph& g, EdgeAttribute attr);

// Induced subgraph on `nodes` (sorted unique indices of g). Keeps account
// ids, phishing flags and every edge between retained nodes.
TransactionGraph induced_subgraph(const TransactionGraph& g, std::span<const std::uint32_t> nodes);

// Binary snapshot container. Round-trips losslessly; identical graphs
// serialize to identical bytes.
void save_snapshot(const TransactionGraph& g, std::ostream& out);
TransactionGraph load_snapshot(std::istream& in);
void save_snapshot_file(const TransactionGraph& g, const std::string& path);
TransactionGraph load_snapshot_file(const std::string& path);

}  // namespace pdgnn
