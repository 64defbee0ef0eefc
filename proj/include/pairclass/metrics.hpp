#pragma once

#include <utility>
#include <vector>

#include "pairclass/classifier.hpp"

namespace pairclass {

struct DiscrepancyReport {
  double delta = 0.0;
  std::vector<int> per_group;  // minimal symmetric-difference size per T1 group
};

// delta(T1, T2): for each T1 group, the smallest symmetric difference against
// any T2 group, averaged. Not symmetric in its arguments.
DiscrepancyReport discrepancy(const OrderedPartition& t1, const OrderedPartition& t2);

struct AggregateReport {
  double mean_k = 0.0;
  double ead = 0.0;
  std::vector<std::pair<double, double>> had;  // (lambda, exceedance rate)
};

AggregateReport aggregate(const OrderedPartition& true_t,
                          const std::vector<std::pair<int, OrderedPartition>>& estimates, int n,
                          const std::vector<double>& lambdas);

}  // namespace pairclass
