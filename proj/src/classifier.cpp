#include "pairclass/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pairclass {

namespace {

double log_p(const Matrix& m, int i, int j) {
  double p = m.at(i, j);
  if (std::isnan(p))
    fail(ErrorCode::invalid_argument, "missing p-value for a required pair");
  return std::log(p);
}

void require_markets(int markets) {
  if (markets < 8) fail(ErrorCode::invalid_argument, "classifier needs L >= 8 markets");
}

}  // namespace

int OrderedPartition::agent_count() const {
  int total = 0;
  for (const auto& g : groups) total += static_cast<int>(g.size());
  return total;
}

std::vector<int> OrderedPartition::labels(int n) const {
  std::vector<int> out(n, -1);
  for (int k = 0; k < group_count(); ++k)
    for (int a : groups[k]) {
      if (a < 0 || a >= n || out[a] != -1)
        fail(ErrorCode::invalid_argument, "partition does not cover the roster exactly once");
      out[a] = k;
    }
  for (int v : out)
    if (v < 0) fail(ErrorCode::invalid_argument, "partition does not cover the roster");
  return out;
}

double ClassifierConfig::r_of(int markets) const {
  if (r_rule) return r_rule(markets);
  // Margin for the split sets. Any r_L with r_L -> infinity and
  // r_L / log L -> 0 is admissible; the 0.7 exponent keeps chance-level
  // directional evidence from riding along with decisive splits, which the
  // 1/3 exponent lets through often enough to distort small groups.
  return std::pow(std::log(static_cast<double>(markets)), 0.7);
}

double ClassifierConfig::g_of(int markets) const {
  if (g_rule) return g_rule(markets);
  return std::log(std::log(static_cast<double>(markets)));
}

std::pair<std::vector<int>, std::vector<int>> split(const std::vector<int>& subset,
                                                    const PValueMatrices& pv, double r) {
  if (subset.size() < 2) fail(ErrorCode::invalid_argument, "split needs at least two agents");
  std::vector<int> order = subset;
  std::sort(order.begin(), order.end());  // argmin ties go to the smallest roster index

  double best_score = std::numeric_limits<double>::infinity();
  int best_agent = -1;
  std::vector<int> best_lower_set, best_upper_set;
  double best_s1 = 0.0, best_s2 = 0.0;

  for (int i : order) {
    std::vector<int> lower, upper;  // agents below / above i
    double s1 = 0.0, s2 = 0.0;
    for (int j : order) {
      if (j == i) continue;
      double lp = log_p(pv.p_plus, i, j);
      double lm = log_p(pv.p_minus, i, j);
      if (lp <= lm - r) {
        lower.push_back(j);
        s1 += lp;
      }
      if (lm <= lp - r) {
        upper.push_back(j);
        s2 += lm;
      }
    }
    if (!lower.empty()) s1 /= static_cast<double>(lower.size());
    if (!upper.empty()) s2 /= static_cast<double>(upper.size());
    double score = std::min(s1, s2);
    if (score < best_score) {  // ties keep the smallest roster index (subset is ascending)
      best_score = score;
      best_agent = i;
      best_lower_set = std::move(lower);
      best_upper_set = std::move(upper);
      best_s1 = s1;
      best_s2 = s2;
    }
  }

  std::vector<int> lower_group, upper_group;
  if (best_s1 <= best_s2) {
    lower_group = best_lower_set;
    for (int a : subset)
      if (std::find(lower_group.begin(), lower_group.end(), a) == lower_group.end())
        upper_group.push_back(a);
  } else {
    upper_group = best_upper_set;
    for (int a : subset)
      if (std::find(upper_group.begin(), upper_group.end(), a) == upper_group.end())
        lower_group.push_back(a);
  }
  // No pair cleared the margin: peel the tie-break winner off so the split
  // still makes progress.
  if (lower_group.empty() || upper_group.empty()) {
    lower_group = {best_agent};
    upper_group.clear();
    for (int a : subset)
      if (a != best_agent) upper_group.push_back(a);
  }
  std::sort(lower_group.begin(), lower_group.end());
  std::sort(upper_group.begin(), upper_group.end());
  return {lower_group, upper_group};
}

int selection_step(const OrderedPartition& partition, const PValueMatrices& pv) {
  if (partition.groups.empty()) fail(ErrorCode::invalid_argument, "empty partition");
  double best = std::numeric_limits<double>::infinity();
  int best_k = -1;
  for (int k = 0; k < partition.group_count(); ++k) {
    const auto& group = partition.groups[k];
    if (group.size() < 2) continue;  // singletons carry p_k = 1 and are never selected
    double pk = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < group.size(); ++a)
      for (size_t b = a + 1; b < group.size(); ++b) {
        double p = pv.p_zero.at(group[a], group[b]);
        if (std::isnan(p)) fail(ErrorCode::invalid_argument, "missing p-value for a required pair");
        pk = std::min(pk, p);
      }
    if (pk < best) {  // strict: ties resolve to the smallest group index
      best = pk;
      best_k = k;
    }
  }
  if (best_k < 0)
    fail(ErrorCode::cannot_split, "every group is a singleton; nothing left to split");
  return best_k;
}

namespace {

OrderedPartition run_sequence(const std::vector<int>& roster, const PValueMatrices& pv, int k,
                              double r, std::vector<OrderedPartition>* trace) {
  OrderedPartition part;
  std::vector<int> all = roster;
  std::sort(all.begin(), all.end());
  part.groups = {all};
  if (trace) trace->push_back(part);
  if (k == 1) return part;

  auto [lo, hi] = split(all, pv, r);
  part.groups = {lo, hi};
  if (trace) trace->push_back(part);

  while (part.group_count() < k) {
    int target = selection_step(part, pv);  // throws cannot_split when stalled
    auto [glo, ghi] = split(part.groups[target], pv, r);
    part.groups[target] = glo;
    part.groups.insert(part.groups.begin() + target + 1, ghi);
    if (trace) trace->push_back(part);
  }
  return part;
}

}  // namespace

OrderedPartition classify_for_k(const std::vector<int>& roster, const PValueMatrices& pv, int k,
                                const ClassifierConfig& cfg, int markets) {
  require_markets(markets);
  int k_max = cfg.k_max > 0 ? cfg.k_max : static_cast<int>(roster.size());
  if (k < 1 || k > k_max || k > static_cast<int>(roster.size()))
    fail(ErrorCode::invalid_argument, "requested group count out of range");
  double r = cfg.r_of(markets);
  if (!(r > 0.0)) fail(ErrorCode::invalid_argument, "r_L rule must be positive");
  try {
    return run_sequence(roster, pv, k, r, nullptr);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::cannot_split) throw;
    fail(ErrorCode::cannot_split,
         std::string("splitting stalled before reaching the requested group count: ") + e.what());
  }
}

namespace {

double group_min_log_p0(const std::vector<int>& group, const PValueMatrices& pv) {
  double min_log = 0.0;  // empty min reads as log 1 = 0
  for (size_t a = 0; a < group.size(); ++a)
    for (size_t b = a + 1; b < group.size(); ++b)
      min_log = std::min(min_log, log_p(pv.p_zero, group[a], group[b]));
  return min_log;
}

// E[-log min of m iid uniforms] = H_m, the m-th harmonic number.
double harmonic(int64_t m) {
  double h = 0.0;
  for (int64_t t = 1; t <= m; ++t) h += 1.0 / static_cast<double>(t);
  return h;
}

// Group contribution to the selection objective: the exceedance of the
// within-group |min log p0| over a null benchmark for a minimum of m
// exchangeable p-values. The raw minimum sits near H_m plus Gumbel noise
// even when the group is homogeneous, growing with the group size; left
// uncentered it would swamp a slowly increasing penalty g(L) at realistic
// market counts. The benchmark H_m + 2.0 is roughly the null 93rd
// percentile, so homogeneous groups contribute zero most of the time while
// a genuinely mixed group still diverges with L.
double centered_group_term(const std::vector<int>& group, const PValueMatrices& pv) {
  if (group.size() < 2) return 0.0;
  int64_t pairs = static_cast<int64_t>(group.size()) * (group.size() - 1) / 2;
  double raw = std::fabs(group_min_log_p0(group, pv));
  return std::max(0.0, raw - harmonic(pairs) - 2.0);
}

}  // namespace

double goodness(const OrderedPartition& partition, const PValueMatrices& pv) {
  if (partition.groups.empty()) fail(ErrorCode::invalid_argument, "empty partition");
  double total = 0.0;
  for (const auto& group : partition.groups) {
    if (group.size() < 2) continue;  // empty min: log 1 = 0
    total += std::fabs(group_min_log_p0(group, pv));
  }
  return total / static_cast<double>(partition.group_count());
}

SelectKResult select_k(const std::vector<int>& roster, const PValueMatrices& pv,
                       const ClassifierConfig& cfg, int markets) {
  require_markets(markets);
  int k_max = cfg.k_max > 0 ? cfg.k_max : static_cast<int>(roster.size());
  k_max = std::min<int>(k_max, static_cast<int>(roster.size()));
  if (k_max < 1) fail(ErrorCode::invalid_argument, "empty roster");
  double r = cfg.r_of(markets);
  double g = cfg.g_of(markets);
  if (!(r > 0.0) || !(g > 0.0))
    fail(ErrorCode::invalid_argument, "r_L and g_L rules must be positive for this L");

  // One sequential run; the partition for each K refines the previous one.
  std::vector<OrderedPartition> nested;
  bool truncated = false;
  try {
    run_sequence(roster, pv, k_max, r, &nested);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::cannot_split) throw;
    truncated = true;
  }

  SelectKResult out;
  out.truncated = truncated;
  out.achieved_k = static_cast<int>(nested.size());
  double best = std::numeric_limits<double>::infinity();
  for (size_t idx = 0; idx < nested.size(); ++idx) {
    int k = static_cast<int>(idx) + 1;
    // Objective: null-centered goodness plus the K g(L) penalty. The raw
    // V(K) is reported alongside in goodness_trace.
    double centered = 0.0;
    for (const auto& group : nested[idx].groups) centered += centered_group_term(group, pv);
    centered /= static_cast<double>(k);
    double objective = centered + static_cast<double>(k) * g;
    out.goodness_trace.push_back(goodness(nested[idx], pv));
    out.objective_trace.push_back(objective);
    if (objective < best) {  // ties keep the smallest K
      best = objective;
      out.k_hat = k;
      out.partition = nested[idx];
    }
  }
  return out;
}

}  // namespace pairclass
