#include "pairclass/confidence.hpp"

#include <algorithm>
#include <cmath>

#include "pairclass/parallel.hpp"
#include "pairclass/rng.hpp"

namespace pairclass {

std::vector<std::vector<int>> nested_sets(const std::vector<int>& group, const Matrix& delta_zero) {
  if (group.empty()) fail(ErrorCode::invalid_argument, "nested_sets needs a non-empty group");
  const int n = delta_zero.n;
  std::vector<char> inside(n, 0);
  for (int a : group) {
    if (a < 0 || a >= n) fail(ErrorCode::invalid_argument, "group member out of range");
    inside[a] = 1;
  }
  std::vector<int> current = group;
  std::sort(current.begin(), current.end());
  std::vector<std::vector<int>> chain;
  for (;;) {
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int candidate = 0; candidate < n; ++candidate) {
      if (inside[candidate]) continue;
      double score = std::numeric_limits<double>::infinity();
      for (int member : current) {
        double d = delta_zero.at(candidate, member);
        if (!std::isnan(d)) score = std::min(score, d);
      }
      if (score < best_score) {  // strict: ties keep the smallest index
        best_score = score;
        best = candidate;
      }
    }
    if (best < 0) break;  // chain reached the roster
    inside[best] = 1;
    current.insert(std::lower_bound(current.begin(), current.end(), best), best);
    chain.push_back(current);
  }
  return chain;
}

namespace {

MarketPanel resample_panel(const MarketPanel& panel, Rng& rng) {
  MarketPanel out;
  out.roster = panel.roster;
  out.covariate_names = panel.covariate_names;
  const int L = panel.n_markets();
  out.markets.reserve(L);
  for (int m = 0; m < L; ++m) {
    size_t pick = rng.next_below(static_cast<uint64_t>(L));
    out.markets.push_back(panel.markets[pick]);
  }
  return out;
}

bool is_subset(const std::vector<int>& small, const std::vector<int>& big) {
  // Both sorted.
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

struct PipelineOutcome {
  bool ok = false;
  bool has_group = false;
  OrderedPartition partition;
  std::vector<int> group;
  std::vector<std::vector<int>> chain;
};

PipelineOutcome run_pipeline(const MarketPanel& panel, int group_index,
                             const ConfidenceConfig& cfg, uint64_t pvalue_seed) {
  PipelineOutcome out;
  PairCoverage coverage = pair_coverage(panel, cfg.threshold);
  ComparabilityGraph graph = comparability_graph(coverage);
  TestConfig test = cfg.test;
  test.seed = pvalue_seed;
  PValueMatrices pv = pvalue_matrices(panel, graph, cfg.index, test);
  std::vector<int> roster(panel.n_agents());
  for (int a = 0; a < panel.n_agents(); ++a) roster[a] = a;
  SelectKResult sel = select_k(roster, pv, cfg.classifier, panel.n_markets());
  out.ok = true;
  out.partition = sel.partition;
  if (group_index <= sel.partition.group_count()) {
    out.has_group = true;
    out.group = sel.partition.groups[group_index - 1];
    out.chain = nested_sets(out.group, pv.delta_zero);
  }
  return out;
}

}  // namespace

ConfidenceResult confidence_set(const MarketPanel& panel, int group_index,
                                const ConfidenceConfig& cfg) {
  if (group_index < 1) fail(ErrorCode::invalid_argument, "group index is 1-based");
  if (cfg.draws < 1) fail(ErrorCode::invalid_argument, "confidence bootstrap draws must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    fail(ErrorCode::invalid_argument, "alpha must lie in (0,1)");

  PipelineOutcome base = run_pipeline(panel, group_index, cfg, cfg.test.seed);
  if (!base.has_group)
    fail(ErrorCode::invalid_argument,
         "classification produced only " + std::to_string(base.partition.group_count()) +
             " groups; group index " + std::to_string(group_index) + " does not exist");

  const int n = panel.n_agents();
  const int m_max = n;  // pi is tracked on m = 0..n; chains cap at the roster

  // Each outer draw reruns the whole classification on a resampled panel.
  // The resampling stream and the inner p-value streams are seeded apart from
  // the original run's p-value bootstrap.
  std::vector<std::vector<char>> covers(cfg.draws);
  std::vector<int> status(cfg.draws, 0);  // 0 ok, 1 mismatched, 2 failed
  parallel_for(static_cast<size_t>(cfg.draws), cfg.threads, [&](size_t s) {
    Rng rng(mix_seed({cfg.seed, seed_tag::confidence_resample, static_cast<uint64_t>(s)}));
    MarketPanel redrawn = resample_panel(panel, rng);
    std::vector<char> flags(static_cast<size_t>(m_max) + 1, 0);
    flags[m_max] = 1;  // the full roster always covers
    try {
      PipelineOutcome draw = run_pipeline(
          redrawn, group_index, cfg,
          mix_seed({cfg.seed, seed_tag::confidence_pvalues, static_cast<uint64_t>(s)}));
      if (!draw.has_group) {
        status[s] = 1;
      } else {
        for (int m = 0; m <= m_max; ++m) {
          const std::vector<int>* probe = &draw.group;
          if (m > 0 && !draw.chain.empty()) {
            size_t idx = std::min<size_t>(static_cast<size_t>(m) - 1, draw.chain.size() - 1);
            probe = &draw.chain[idx];
          }
          flags[m] = is_subset(base.group, *probe) ? 1 : 0;
        }
        flags[m_max] = 1;
      }
    } catch (const Error&) {
      status[s] = 2;
    }
    covers[s] = std::move(flags);
  });

  ConfidenceResult result;
  result.group_index = group_index;
  result.alpha = cfg.alpha;
  result.k_hat = base.partition.group_count();
  result.base_partition = base.partition;
  result.base_group = base.group;

  result.pi_raw.assign(static_cast<size_t>(m_max) + 1, 0.0);
  for (int s = 0; s < cfg.draws; ++s) {
    if (status[s] == 1) ++result.mismatched_draws;
    if (status[s] == 2) ++result.failed_draws;
    for (int m = 0; m <= m_max; ++m) {
      double c = status[s] == 0 ? covers[s][m] : (m == m_max ? 1.0 : 0.0);
      result.pi_raw[m] += c;
    }
  }
  for (double& v : result.pi_raw) v /= static_cast<double>(cfg.draws);
  result.pi_curve = result.pi_raw;
  for (size_t m = 1; m < result.pi_curve.size(); ++m)
    result.pi_curve[m] = std::max(result.pi_curve[m], result.pi_curve[m - 1]);

  int m_star = -1;
  for (int m = 0; m <= m_max; ++m) {
    if (result.pi_curve[m] >= 1.0 - cfg.alpha) {
      m_star = m;
      break;
    }
  }
  if (m_star < 0) {
    m_star = m_max;
    result.reached_level = false;
  }
  result.m_star = m_star;
  if (m_star == 0) {
    result.set = base.group;
  } else {
    size_t idx = std::min<size_t>(static_cast<size_t>(m_star) - 1, base.chain.size() - 1);
    result.set = base.chain.empty() ? base.group : base.chain[idx];
  }
  return result;
}

}  // namespace pairclass
