#pragma once

#include <utility>
#include <vector>

#include "pairclass/common.hpp"

namespace pairclass {

// Simple undirected graph on dense vertex indices; edges mark testable pairs.
struct ComparabilityGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;   // i < j, sorted, deduplicated
  std::vector<std::vector<int>> adjacency;  // sorted neighbor lists

  static ComparabilityGraph make(int n, std::vector<std::pair<int, int>> edges);
  bool has_edge(int i, int j) const;
  bool complete() const;
};

// Result of contracting same-type adjacent vertices. Vertex k of the collapsed
// graph carries the original agents in members[k] and their shared type.
struct TypedGraph {
  std::vector<std::vector<int>> members;  // sorted original indices per collapsed vertex
  std::vector<int> types;                 // 1-based type per collapsed vertex
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adjacency;

  int size() const { return static_cast<int>(members.size()); }
};

struct IdentificationReport {
  bool identified = false;
  bool has_full_monotone_path = false;
  std::vector<int> n_star;  // sorted original agent indices
  int k0_used = 0;
  int longest_monotone_path = 0;  // edge count of the longest strictly monotone path
  int inferred_k0 = 0;            // longest_monotone_path + 1
};

// Contracts every connected same-type component of comparable pairs into one
// vertex; inherited edges are deduplicated.
TypedGraph tau_collapse(const ComparabilityGraph& graph, const std::vector<int>& tau);

// True iff some path of k0 vertices with strictly increasing types exists.
// Types live in {1..k0}, so such a path must step through 1,2,...,k0.
bool has_full_monotone_path(const TypedGraph& tg, int k0);

// Fixed point N*: agents whose type is pinned down by monotone-path arguments.
std::vector<int> identified_set(const TypedGraph& tg, int k0);

// k0 <= 0 means unknown: it is then inferred as 1 + longest monotone path.
IdentificationReport check_identified(const ComparabilityGraph& graph, const std::vector<int>& tau,
                                      int k0 = 0);

}  // namespace pairclass
