#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ppqc {

using NodeId = std::uint32_t;
using Rng = std::mt19937_64;

// A directed edge: `src` transmits, `dst` receives.
struct Edge {
  NodeId src = 0;
  NodeId dst = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Immutable directed graph with a per-node round-robin order over
// out-neighbors. out_neighbors(j)[p] is the neighbor whose order is p, so the
// order is a bijection onto {0, ..., out_degree(j) - 1} by construction.
class Digraph {
 public:
  Digraph() = default;

  // Validates: n >= 2, ids in range, no self-loops, no duplicate edges.
  // Each node's round-robin order follows the order its edges are listed in.
  Digraph(std::size_t n, std::vector<Edge> edges);

  std::size_t node_count() const { return out_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Sorted by (src, dst).
  std::span<const Edge> edges() const { return edges_; }

  std::span<const NodeId> out_neighbors(NodeId j) const { return out_.at(j); }
  // Ascending id order.
  std::span<const NodeId> in_neighbors(NodeId j) const { return in_.at(j); }

  std::size_t out_degree(NodeId j) const { return out_.at(j).size(); }
  std::size_t in_degree(NodeId j) const { return in_.at(j).size(); }

  bool has_edge(NodeId src, NodeId dst) const;

  // Round-robin priority of `dst` among the out-neighbors of `src`.
  std::size_t order_of(NodeId src, NodeId dst) const;

  // Returns a copy whose round-robin orders are `orders[j]` (listed by
  // priority). Each list must be a permutation of the current out-neighbor set.
  Digraph with_out_order(std::vector<std::vector<NodeId>> orders) const;

  friend bool operator==(const Digraph&, const Digraph&) = default;

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> out_;
  std::vector<std::vector<NodeId>> in_;
};

bool is_strongly_connected(const Digraph& g);

// D_max^+ : the largest out-degree in the network.
std::size_t max_out_degree(const Digraph& g);

// Uniformly shuffles each node's round-robin order.
Digraph assign_edge_order(const Digraph& g, Rng& rng);

inline constexpr int kGenerationRetryBudget = 10'000;

// Directed Erdős–Rényi G(n, p), rejected until strongly connected; the edge
// order is then shuffled from the same generator. Throws GenerationFailure
// after kGenerationRetryBudget rejections.
Digraph generate_random_strongly_connected(std::size_t n, double p, Rng& rng);

// Fixtures.
Digraph directed_cycle(std::size_t n);
Digraph directed_path(std::size_t n);
Digraph complete_bidirectional(std::size_t n);
// Node 0 is the center; leaves 1..leaves are joined to it in both directions.
Digraph bidirectional_star(std::size_t leaves);

// Edge-list text: "n m" then m lines "src dst". Parsing throws
// GraphFormatError. Line order per source is its round-robin order, and the
// writer emits edges in that order, so a written graph reloads identically.
Digraph read_edge_list(std::istream& in);
Digraph load_edge_list(const std::string& path);
void write_edge_list(std::ostream& out, const Digraph& g);

}  // namespace ppqc
