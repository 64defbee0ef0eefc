#include <algorithm>
#include <numeric>

#include "pairclass/graph.hpp"

namespace pairclass {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);  // smallest index becomes the root, keeps output stable
    parent[b] = a;
  }
};

void check_tau(const ComparabilityGraph& graph, const std::vector<int>& tau) {
  if (static_cast<int>(tau.size()) != graph.n)
    fail(ErrorCode::invalid_argument, "tau must assign a type to every vertex");
  for (int t : tau)
    if (t < 1) fail(ErrorCode::invalid_argument, "types must be positive integers");
}

}  // namespace

TypedGraph tau_collapse(const ComparabilityGraph& graph, const std::vector<int>& tau) {
  check_tau(graph, tau);
  UnionFind uf(graph.n);
  for (auto [i, j] : graph.edges)
    if (tau[i] == tau[j]) uf.unite(i, j);

  std::vector<int> root_to_vertex(graph.n, -1);
  TypedGraph tg;
  for (int v = 0; v < graph.n; ++v) {
    int r = uf.find(v);
    if (root_to_vertex[r] < 0) {
      root_to_vertex[r] = static_cast<int>(tg.members.size());
      tg.members.push_back({});
      tg.types.push_back(tau[v]);
    }
    tg.members[root_to_vertex[r]].push_back(v);
  }
  for (auto& group : tg.members) std::sort(group.begin(), group.end());

  std::vector<std::pair<int, int>> edges;
  for (auto [i, j] : graph.edges) {
    int a = root_to_vertex[uf.find(i)];
    int b = root_to_vertex[uf.find(j)];
    if (a == b) continue;  // contracted same-type edge
    if (a > b) std::swap(a, b);
    edges.emplace_back(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  tg.edges = std::move(edges);
  tg.adjacency.assign(tg.size(), {});
  for (auto [a, b] : tg.edges) {
    tg.adjacency[a].push_back(b);
    tg.adjacency[b].push_back(a);
  }
  for (auto& nbrs : tg.adjacency) std::sort(nbrs.begin(), nbrs.end());
  return tg;
}

bool has_full_monotone_path(const TypedGraph& tg, int k0) {
  if (k0 < 1) fail(ErrorCode::invalid_argument, "k0 must be >= 1");
  if (tg.size() == 0) return false;
  if (k0 == 1) return true;  // any single vertex is a length-0 path
  // A strictly monotone path of k0 vertices over types {1..k0} must visit
  // types 1,2,...,k0 in order, so layer-by-layer reachability along unit-step
  // edges decides existence.
  std::vector<char> reachable(tg.size(), 0);
  for (int v = 0; v < tg.size(); ++v)
    if (tg.types[v] == 1) reachable[v] = 1;
  for (int level = 2; level <= k0; ++level) {
    std::vector<char> next(tg.size(), 0);
    bool any = false;
    for (int v = 0; v < tg.size(); ++v) {
      if (tg.types[v] != level) continue;
      for (int u : tg.adjacency[v]) {
        if (tg.types[u] == level - 1 && reachable[u]) {
          next[v] = 1;
          any = true;
          break;
        }
      }
    }
    if (!any) return false;
    reachable.swap(next);
  }
  return true;
}

namespace {

// Vertices lying on some unit-step increasing path that starts and ends in
// `anchor`. Interior vertices need not be anchored.
std::vector<char> on_unit_path_between(const TypedGraph& tg, const std::vector<char>& anchor) {
  const int n = tg.size();
  // forward[v]: a unit-step path from an anchored vertex reaches v.
  std::vector<char> forward(anchor.begin(), anchor.end());
  std::vector<char> backward(anchor.begin(), anchor.end());
  int max_type = 0;
  for (int t : tg.types) max_type = std::max(max_type, t);
  for (int level = 2; level <= max_type; ++level) {
    for (int v = 0; v < n; ++v) {
      if (tg.types[v] != level || forward[v]) continue;
      for (int u : tg.adjacency[v]) {
        if (tg.types[u] == level - 1 && forward[u]) {
          forward[v] = 1;
          break;
        }
      }
    }
  }
  for (int level = max_type - 1; level >= 1; --level) {
    for (int v = 0; v < n; ++v) {
      if (tg.types[v] != level || backward[v]) continue;
      for (int u : tg.adjacency[v]) {
        if (tg.types[u] == level + 1 && backward[u]) {
          backward[v] = 1;
          break;
        }
      }
    }
  }
  std::vector<char> result(n, 0);
  for (int v = 0; v < n; ++v) result[v] = forward[v] && backward[v];
  return result;
}

}  // namespace

std::vector<int> identified_set(const TypedGraph& tg, int k0) {
  if (k0 < 1) fail(ErrorCode::invalid_argument, "k0 must be >= 1");
  const int n = tg.size();
  std::vector<char> identified(n, 0);

  if (k0 == 1) {
    // A length-0 monotone path covers every vertex.
    std::fill(identified.begin(), identified.end(), 1);
  } else {
    // Round 1: vertices on a strictly monotone path of k0 vertices. Such a
    // path steps through types 1..k0, so a vertex of type t qualifies iff a
    // unit-step chain reaches it from type 1 and continues to type k0.
    std::vector<char> from_bottom(n, 0);
    for (int v = 0; v < n; ++v)
      if (tg.types[v] == 1) from_bottom[v] = 1;
    for (int level = 2; level <= k0; ++level) {
      for (int v = 0; v < n; ++v) {
        if (tg.types[v] != level) continue;
        for (int u : tg.adjacency[v]) {
          if (tg.types[u] == level - 1 && from_bottom[u]) {
            from_bottom[v] = 1;
            break;
          }
        }
      }
    }
    std::vector<char> to_top(n, 0);
    for (int v = 0; v < n; ++v)
      if (tg.types[v] == k0) to_top[v] = 1;
    for (int level = k0 - 1; level >= 1; --level) {
      for (int v = 0; v < n; ++v) {
        if (tg.types[v] != level) continue;
        for (int u : tg.adjacency[v]) {
          if (tg.types[u] == level + 1 && to_top[u]) {
            to_top[v] = 1;
            break;
          }
        }
      }
    }
    for (int v = 0; v < n; ++v) identified[v] = from_bottom[v] && to_top[v];
  }

  // Later rounds: a monotone path whose end vertices are already identified
  // and whose length equals their type difference steps types by exactly one,
  // so every vertex on it becomes identified. Iterate to the fixed point.
  for (;;) {
    std::vector<char> covered = on_unit_path_between(tg, identified);
    bool changed = false;
    for (int v = 0; v < tg.size(); ++v) {
      if (covered[v] && !identified[v]) {
        identified[v] = 1;
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<int> agents;
  for (int v = 0; v < n; ++v)
    if (identified[v])
      agents.insert(agents.end(), tg.members[v].begin(), tg.members[v].end());
  std::sort(agents.begin(), agents.end());
  return agents;
}

IdentificationReport check_identified(const ComparabilityGraph& graph, const std::vector<int>& tau,
                                      int k0) {
  check_tau(graph, tau);
  TypedGraph tg = tau_collapse(graph, tau);

  // Longest strictly monotone path (jumps allowed): longest path in the DAG
  // of increasing-type edges, by dynamic programming over vertices sorted by
  // type.
  IdentificationReport report;
  const int n = tg.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return tg.types[a] < tg.types[b]; });
  std::vector<int> best(n, 0);
  int longest = 0;
  for (int v : order) {
    for (int u : tg.adjacency[v]) {
      if (tg.types[u] < tg.types[v]) best[v] = std::max(best[v], best[u] + 1);
    }
    longest = std::max(longest, best[v]);
  }
  report.longest_monotone_path = n == 0 ? 0 : longest;
  report.inferred_k0 = n == 0 ? 0 : longest + 1;

  int k0_used = k0 > 0 ? k0 : report.inferred_k0;
  report.k0_used = k0_used;
  report.has_full_monotone_path = has_full_monotone_path(tg, std::max(k0_used, 1));
  report.n_star = identified_set(tg, std::max(k0_used, 1));
  report.identified = report.has_full_monotone_path &&
                      static_cast<int>(report.n_star.size()) == graph.n;
  return report;
}

}  // namespace pairclass
