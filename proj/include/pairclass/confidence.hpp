#pragma once

#include <cstdint>
#include <vector>

#include "pairclass/classifier.hpp"
#include "pairclass/engine.hpp"
#include "pairclass/panel.hpp"

namespace pairclass {

struct ConfidenceConfig {
  IndexSpec index;
  TestConfig test;
  ClassifierConfig classifier;
  int64_t threshold = 30;
  double alpha = 0.05;
  int draws = 99;  // outer bootstrap draws B2
  uint64_t seed = 0;
  int threads = 1;
};

struct ConfidenceResult {
  int group_index = 0;  // 1-based k
  double alpha = 0.0;
  int m_star = 0;
  std::vector<int> set;           // original-sample chain element C_k(m*)
  std::vector<double> pi_curve;   // cumulative-max smoothed, m = 0..n
  std::vector<double> pi_raw;
  int k_hat = 0;
  OrderedPartition base_partition;
  std::vector<int> base_group;
  int mismatched_draws = 0;  // bootstrap draws without a k-th group (count as non-covering)
  int failed_draws = 0;      // bootstrap draws where classification errored
  bool reached_level = true; // false when only the full roster attains 1 - alpha
};

// Greedy chain N_k = C(0) c C(1) c ... c roster, each step adding the outside
// agent with the smallest minimal delta0 to the current set; ties go to the
// smallest roster index. The returned list excludes C(0) itself.
std::vector<std::vector<int>> nested_sets(const std::vector<int>& group, const Matrix& delta_zero);

ConfidenceResult confidence_set(const MarketPanel& panel, int group_index,
                                const ConfidenceConfig& cfg);

}  // namespace pairclass
