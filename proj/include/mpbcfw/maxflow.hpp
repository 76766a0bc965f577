#ifndef MPBCFW_MAXFLOW_HPP
#define MPBCFW_MAXFLOW_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace mpbcfw {

/// Directed s-t network over `node_count` ordinary nodes plus two terminals.
/// Terminals are addressed by source() and sink(); every arc carries an
/// implicit reverse arc of capacity zero.
template <typename Scalar>
class FlowNetwork {
 public:
  struct Arc {
    std::size_t from;
    std::size_t to;
    Scalar capacity;
  };

  explicit FlowNetwork(std::size_t node_count) : node_count_(node_count) {}

  std::size_t node_count() const { return node_count_; }
  std::size_t source() const { return node_count_; }
  std::size_t sink() const { return node_count_ + 1; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  void add_arc(std::size_t from, std::size_t to, Scalar capacity) {
    if (from > sink() || to > sink()) throw std::invalid_argument("add_arc: node out of range");
    if (!(capacity >= Scalar(0)) || !std::isfinite(capacity))
      throw std::invalid_argument("add_arc: capacity must be finite and non-negative");
    if (from == to) throw std::invalid_argument("add_arc: self-loop");
    if ((from == source() && to == sink()) || (from == sink() && to == source()))
      throw std::invalid_argument("add_arc: arc directly between terminals");
    arcs_.push_back({from, to, capacity});
  }

  /// Sum of capacities leaving `source_side` for the complement. Terminals are
  /// placed implicitly: source on the source side, sink on the other.
  Scalar cut_capacity(const std::vector<bool>& source_side) const {
    if (source_side.size() != node_count_) throw std::invalid_argument("cut_capacity: size mismatch");
    auto side = [&](std::size_t v) {
      if (v == source()) return true;
      if (v == sink()) return false;
      return bool(source_side[v]);
    };
    Scalar total(0);
    for (const auto& a : arcs_)
      if (side(a.from) && !side(a.to)) total += a.capacity;
    return total;
  }

 private:
  std::size_t node_count_;
  std::vector<Arc> arcs_;
};

template <typename Scalar>
struct MaxFlowResult {
  Scalar flow_value{0};
  /// source_side[v] for each ordinary node v: reachable from the source in
  /// the final residual graph.
  std::vector<bool> source_side;
};

/// Residual capacities at or below this are treated as saturated.
inline constexpr double kFlowEpsilon = 1e-12;

/// Exact maximum flow by Dinic's blocking-flow algorithm; the returned cut is
/// the canonical minimum cut (source-reachable set of the residual graph).
template <typename Scalar>
MaxFlowResult<Scalar> max_flow(const FlowNetwork<Scalar>& net) {
  const std::size_t total_nodes = net.node_count() + 2;
  const std::size_t s = net.source();
  const std::size_t t = net.sink();
  const Scalar eps(kFlowEpsilon);

  // Paired residual edges: edge e and e^1 are mutual reverses.
  struct Edge {
    std::size_t to;
    Scalar residual;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adj(total_nodes);
  edges.reserve(net.arcs().size() * 2);
  for (const auto& a : net.arcs()) {
    adj[a.from].push_back(edges.size());
    edges.push_back({a.to, a.capacity});
    adj[a.to].push_back(edges.size());
    edges.push_back({a.from, Scalar(0)});
  }

  std::vector<int> level(total_nodes);
  std::vector<std::size_t> next_edge(total_nodes);

  auto bfs = [&]() {
    std::fill(level.begin(), level.end(), -1);
    std::queue<std::size_t> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (std::size_t e : adj[v]) {
        if (edges[e].residual > eps && level[edges[e].to] < 0) {
          level[edges[e].to] = level[v] + 1;
          q.push(edges[e].to);
        }
      }
    }
    return level[t] >= 0;
  };

  // Iterative DFS for one augmenting path in the level graph.
  std::vector<std::size_t> path;
  auto augment = [&]() -> Scalar {
    path.clear();
    std::size_t v = s;
    while (true) {
      if (v == t) {
        Scalar push = std::numeric_limits<Scalar>::infinity();
        for (std::size_t e : path) push = std::min(push, edges[e].residual);
        for (std::size_t e : path) {
          edges[e].residual -= push;
          edges[e ^ 1].residual += push;
        }
        return push;
      }
      bool advanced = false;
      for (; next_edge[v] < adj[v].size(); ++next_edge[v]) {
        const std::size_t e = adj[v][next_edge[v]];
        const std::size_t w = edges[e].to;
        if (edges[e].residual > eps && level[w] == level[v] + 1) {
          path.push_back(e);
          v = w;
          advanced = true;
          break;
        }
      }
      if (!advanced) {
        if (v == s) return Scalar(0);
        // Dead end: retreat and skip the edge that led here.
        level[v] = -1;
        const std::size_t back = path.back();
        path.pop_back();
        v = edges[back ^ 1].to;
        ++next_edge[v];
      }
    }
  };

  Scalar flow(0);
  while (bfs()) {
    std::fill(next_edge.begin(), next_edge.end(), 0);
    while (true) {
      const Scalar pushed = augment();
      if (!(pushed > Scalar(0))) break;
      flow += pushed;
    }
  }

  MaxFlowResult<Scalar> result;
  result.flow_value = flow;
  result.source_side.assign(net.node_count(), false);
  // level[] after the final failed BFS marks exactly the source-reachable set.
  for (std::size_t v = 0; v < net.node_count(); ++v) result.source_side[v] = level[v] >= 0;
  return result;
}

/// Binary pairwise energy E(y) = sum_v unary[v][y_v] + sum_(k,l) weight [y_k != y_l].
template <typename Scalar>
struct BinaryEnergy {
  struct Unary {
    Scalar cost0;
    Scalar cost1;
  };
  struct Pairwise {
    std::size_t k;
    std::size_t l;
    Scalar weight;
  };

  std::vector<Unary> unary;
  std::vector<Pairwise> pairwise;

  std::size_t size() const { return unary.size(); }

  Scalar evaluate(const std::vector<int>& labels) const {
    if (labels.size() != unary.size()) throw std::invalid_argument("BinaryEnergy::evaluate: size mismatch");
    Scalar e(0);
    for (std::size_t v = 0; v < unary.size(); ++v) e += labels[v] ? unary[v].cost1 : unary[v].cost0;
    for (const auto& p : pairwise)
      if (labels[p.k] != labels[p.l]) e += p.weight;
    return e;
  }
};

template <typename Scalar>
struct EnergyNetwork {
  FlowNetwork<Scalar> network;
  /// energy(y) = cut_capacity(y) + constant, with label 1 on the source side.
  Scalar constant{0};
};

/// Standard cut construction. Label 1 is the source side, label 0 the sink
/// side, so indifferent nodes fall to label 0 under the canonical cut.
template <typename Scalar>
EnergyNetwork<Scalar> energy_to_network(const BinaryEnergy<Scalar>& e) {
  EnergyNetwork<Scalar> out{FlowNetwork<Scalar>(e.size()), Scalar(0)};
  auto& net = out.network;
  for (std::size_t v = 0; v < e.size(); ++v) {
    const auto [c0, c1] = e.unary[v];
    if (!std::isfinite(c0) || !std::isfinite(c1)) throw std::invalid_argument("energy_to_network: non-finite unary");
    const Scalar base = std::min(c0, c1);
    out.constant += base;
    // Label 0 (sink side) cuts source->v; label 1 (source side) cuts v->sink.
    if (c0 > base) net.add_arc(net.source(), v, c0 - base);
    if (c1 > base) net.add_arc(v, net.sink(), c1 - base);
  }
  for (const auto& p : e.pairwise) {
    if (!(p.weight >= Scalar(0))) throw std::invalid_argument("energy_to_network: negative pairwise weight");
    if (p.k >= e.size() || p.l >= e.size() || p.k == p.l)
      throw std::invalid_argument("energy_to_network: invalid edge");
    if (p.weight == Scalar(0)) continue;
    net.add_arc(p.k, p.l, p.weight);
    net.add_arc(p.l, p.k, p.weight);
  }
  return out;
}

template <typename Scalar>
struct BinaryLabeling {
  std::vector<int> labels;
  Scalar energy{0};
};

template <typename Scalar>
BinaryLabeling<Scalar> minimize_binary_energy(const BinaryEnergy<Scalar>& e) {
  const auto reduced = energy_to_network(e);
  const auto flow = max_flow(reduced.network);
  BinaryLabeling<Scalar> out;
  out.labels.resize(e.size());
  for (std::size_t v = 0; v < e.size(); ++v) out.labels[v] = flow.source_side[v] ? 1 : 0;
  out.energy = e.evaluate(out.labels);
  return out;
}

}  // namespace mpbcfw

#endif  // MPBCFW_MAXFLOW_HPP
