#include "ppqc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ppqc/errors.hpp"

namespace ppqc {

Digraph::Digraph(std::size_t n, std::vector<Edge> edges) : edges_(std::move(edges)) {
  if (n < 2) {
    throw GraphFormatError("digraph needs at least 2 nodes, got " + std::to_string(n));
  }
  out_.assign(n, {});
  in_.assign(n, {});
  for (const Edge& e : edges_) {
    if (e.src < n && e.dst < n) out_[e.src].push_back(e.dst);
  }
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.src >= n || e.dst >= n) {
      throw GraphFormatError("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                             " references a node outside [0, " + std::to_string(n) + ")");
    }
    if (e.src == e.dst) {
      throw GraphFormatError("self-loop on node " + std::to_string(e.src));
    }
    if (i > 0 && edges_[i - 1] == e) {
      throw GraphFormatError("duplicate edge " + std::to_string(e.src) + "->" +
                             std::to_string(e.dst));
    }
  }
  for (const Edge& e : edges_) in_[e.dst].push_back(e.src);
}

bool Digraph::has_edge(NodeId src, NodeId dst) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{src, dst});
}

std::size_t Digraph::order_of(NodeId src, NodeId dst) const {
  const auto& out = out_.at(src);
  auto it = std::find(out.begin(), out.end(), dst);
  if (it == out.end()) {
    throw ContractViolation("no edge " + std::to_string(src) + "->" + std::to_string(dst));
  }
  return static_cast<std::size_t>(it - out.begin());
}

Digraph Digraph::with_out_order(std::vector<std::vector<NodeId>> orders) const {
  if (orders.size() != out_.size()) {
    throw GraphFormatError("out-order table has wrong node count");
  }
  for (std::size_t j = 0; j < orders.size(); ++j) {
    if (!std::is_permutation(orders[j].begin(), orders[j].end(), out_[j].begin(),
                             out_[j].end())) {
      throw GraphFormatError("out-order of node " + std::to_string(j) +
                             " is not a bijection onto its out-neighbors");
    }
  }
  Digraph copy = *this;
  copy.out_ = std::move(orders);
  return copy;
}

namespace {

// Number of nodes reachable from node 0 following edges forward (or backward).
std::size_t reach_count(const Digraph& g, bool forward) {
  std::vector<char> seen(g.node_count(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : forward ? g.out_neighbors(v) : g.in_neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  if (g.node_count() == 0) return false;
  return reach_count(g, true) == g.node_count() && reach_count(g, false) == g.node_count();
}

std::size_t max_out_degree(const Digraph& g) {
  std::size_t best = 0;
  for (NodeId j = 0; j < g.node_count(); ++j) best = std::max(best, g.out_degree(j));
  return best;
}

Digraph assign_edge_order(const Digraph& g, Rng& rng) {
  std::vector<std::vector<NodeId>> orders(g.node_count());
  for (NodeId j = 0; j < g.node_count(); ++j) {
    auto out = g.out_neighbors(j);
    orders[j].assign(out.begin(), out.end());
    std::sort(orders[j].begin(), orders[j].end());
    std::shuffle(orders[j].begin(), orders[j].end(), rng);
  }
  return g.with_out_order(std::move(orders));
}

Digraph generate_random_strongly_connected(std::size_t n, double p, Rng& rng) {
  if (n < 2) throw GenerationFailure("n must be at least 2");
  if (!(p > 0.0 && p <= 1.0)) throw GenerationFailure("edge probability must lie in (0, 1]");
  std::bernoulli_distribution coin(p);
  for (int attempt = 0; attempt < kGenerationRetryBudget; ++attempt) {
    std::vector<Edge> edges;
    for (NodeId src = 0; src < n; ++src) {
      for (NodeId dst = 0; dst < n; ++dst) {
        if (src != dst && coin(rng)) edges.push_back({src, dst});
      }
    }
    Digraph g(n, std::move(edges));
    if (is_strongly_connected(g)) return assign_edge_order(g, rng);
  }
  std::ostringstream msg;
  msg << "no strongly connected G(" << n << ", " << p << ") sample within "
      << kGenerationRetryBudget << " attempts";
  throw GenerationFailure(msg.str());
}

Digraph directed_cycle(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId j = 0; j < n; ++j) edges.push_back({j, static_cast<NodeId>((j + 1) % n)});
  return Digraph(n, std::move(edges));
}

Digraph directed_path(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId j = 0; j + 1 < n; ++j) edges.push_back({j, j + 1});
  return Digraph(n, std::move(edges));
}

Digraph complete_bidirectional(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = 0; b < n; ++b)
      if (a != b) edges.push_back({a, b});
  return Digraph(n, std::move(edges));
}

Digraph bidirectional_star(std::size_t leaves) {
  std::vector<Edge> edges;
  for (NodeId leaf = 1; leaf <= leaves; ++leaf) {
    edges.push_back({0, leaf});
    edges.push_back({leaf, 0});
  }
  return Digraph(leaves + 1, std::move(edges));
}

Digraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& why) -> GraphFormatError {
    return GraphFormatError("edge list line " + std::to_string(line_no) + ": " + why);
  };

  if (!next_line()) throw GraphFormatError("edge list is empty");
  long long n = 0, m = 0;
  {
    std::istringstream header(line);
    if (!(header >> n >> m) || n < 0 || m < 0) throw fail("expected header \"n m\"");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    if (!next_line()) throw fail("expected " + std::to_string(m) + " edges, found " + std::to_string(i));
    std::istringstream row(line);
    long long src = 0, dst = 0;
    std::string extra;
    if (!(row >> src >> dst) || (row >> extra)) throw fail("expected \"src dst\"");
    if (src < 0 || dst < 0 || src >= n || dst >= n) throw fail("node id out of range");
    edges.push_back({static_cast<NodeId>(src), static_cast<NodeId>(dst)});
  }
  if (next_line()) throw fail("trailing content after " + std::to_string(m) + " edges");
  return Digraph(static_cast<std::size_t>(n), std::move(edges));
}

Digraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list " + path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Digraph& g) {
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  for (NodeId src = 0; src < g.node_count(); ++src)
    for (NodeId dst : g.out_neighbors(src)) out << src << ' ' << dst << '\n';
}

}  // namespace ppqc
