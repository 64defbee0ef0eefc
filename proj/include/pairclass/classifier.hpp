#pragma once

#include <functional>
#include <vector>

#include "pairclass/common.hpp"
#include "pairclass/engine.hpp"

namespace pairclass {

// Ordered list of disjoint agent groups covering the roster; a later group
// index means a higher type.
struct OrderedPartition {
  std::vector<std::vector<int>> groups;  // each sorted ascending

  int group_count() const { return static_cast<int>(groups.size()); }
  int agent_count() const;
  std::vector<int> labels(int n) const;  // agent -> 0-based group index
  bool operator==(const OrderedPartition& other) const { return groups == other.groups; }
};

struct ClassifierConfig {
  std::function<double(int)> r_rule;  // split margin r_L, default (log L)^(1/3)
  std::function<double(int)> g_rule;  // penalty g(L), default log log L
  int k_max = 0;                      // 0 means roster size

  double r_of(int markets) const;
  double g_of(int markets) const;
};

struct SelectKResult {
  int k_hat = 0;
  OrderedPartition partition;
  std::vector<double> objective_trace;  // objective at K = 1..achieved
  std::vector<double> goodness_trace;   // V(K) at K = 1..achieved
  bool truncated = false;               // splitting stalled before K_max
  int achieved_k = 0;
};

// One round of the Split Algorithm on `subset`.
std::pair<std::vector<int>, std::vector<int>> split(const std::vector<int>& subset,
                                                    const PValueMatrices& pv, double r);

// Index of the group most likely to contain heterogeneous types (smallest
// within-group p0); singletons are never selected.
int selection_step(const OrderedPartition& partition, const PValueMatrices& pv);

OrderedPartition classify_for_k(const std::vector<int>& roster, const PValueMatrices& pv, int k,
                                const ClassifierConfig& cfg, int markets);

// V(K): average over groups of |min within-group log p0|; empty minima count 0.
double goodness(const OrderedPartition& partition, const PValueMatrices& pv);

SelectKResult select_k(const std::vector<int>& roster, const PValueMatrices& pv,
                       const ClassifierConfig& cfg, int markets);

}  // namespace pairclass
