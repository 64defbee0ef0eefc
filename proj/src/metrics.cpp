#include "pairclass/metrics.hpp"

#include <algorithm>

namespace pairclass {

namespace {

int symmetric_difference_size(const std::vector<int>& a, const std::vector<int>& b) {
  // Both sorted ascending.
  size_t ia = 0, ib = 0;
  int common = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] == b[ib]) {
      ++common;
      ++ia;
      ++ib;
    } else if (a[ia] < b[ib]) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return static_cast<int>(a.size()) + static_cast<int>(b.size()) - 2 * common;
}

std::vector<int> sorted_union(const OrderedPartition& t) {
  std::vector<int> all;
  for (const auto& g : t.groups) all.insert(all.end(), g.begin(), g.end());
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

DiscrepancyReport discrepancy(const OrderedPartition& t1, const OrderedPartition& t2) {
  if (t1.groups.empty() || t2.groups.empty())
    fail(ErrorCode::invalid_argument, "discrepancy of empty partition");
  if (sorted_union(t1) != sorted_union(t2))
    fail(ErrorCode::invalid_argument, "partitions cover different rosters");
  DiscrepancyReport report;
  for (const auto& group : t1.groups) {
    int best = std::numeric_limits<int>::max();
    for (const auto& other : t2.groups)
      best = std::min(best, symmetric_difference_size(group, other));
    report.per_group.push_back(best);
    report.delta += static_cast<double>(best);
  }
  report.delta /= static_cast<double>(t1.group_count());
  return report;
}

AggregateReport aggregate(const OrderedPartition& true_t,
                          const std::vector<std::pair<int, OrderedPartition>>& estimates, int n,
                          const std::vector<double>& lambdas) {
  if (estimates.empty()) fail(ErrorCode::invalid_argument, "no estimates to aggregate");
  for (double lambda : lambdas)
    if (!(lambda > 0.0 && lambda < 1.0))
      fail(ErrorCode::invalid_argument, "lambda thresholds must lie in (0,1)");
  AggregateReport report;
  std::vector<double> deltas;
  deltas.reserve(estimates.size());
  for (const auto& [k_hat, estimate] : estimates) {
    report.mean_k += static_cast<double>(k_hat);
    deltas.push_back(discrepancy(true_t, estimate).delta);
    report.ead += deltas.back();
  }
  report.mean_k /= static_cast<double>(estimates.size());
  report.ead /= static_cast<double>(estimates.size());
  for (double lambda : lambdas) {
    int exceed = 0;
    for (double d : deltas)
      if (d > lambda * static_cast<double>(n)) ++exceed;
    report.had.emplace_back(lambda, static_cast<double>(exceed) / static_cast<double>(estimates.size()));
  }
  return report;
}

}  // namespace pairclass
