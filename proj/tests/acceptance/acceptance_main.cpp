// Acceptance suite: replays the simulation studies and structural checks the
// library is expected to satisfy, one verdict line per criterion. Individual
// criteria can be run with --criterion N; --threads T caps worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "pairclass/classifier.hpp"
#include "pairclass/confidence.hpp"
#include "pairclass/engine.hpp"
#include "pairclass/graph.hpp"
#include "pairclass/json_io.hpp"
#include "pairclass/metrics.hpp"
#include "pairclass/panel.hpp"
#include "pairclass/parallel.hpp"
#include "pairclass/rng.hpp"
#include "pairclass/simulation.hpp"

using namespace pairclass;

namespace {

int g_threads = 2;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    }
  }
  void note(const std::string& text) {
    if (!detail.empty()) detail += "; ";
    detail += text;
  }
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<int> iota_roster(int n) {
  std::vector<int> r(n);
  for (int a = 0; a < n; ++a) r[a] = a;
  return r;
}

MonteCarloConfig study_config(int n, int k0, double d_mu, int markets, int reps, uint64_t seed) {
  MonteCarloConfig cfg;
  cfg.dgp.n = n;
  cfg.dgp.k0 = k0;
  cfg.dgp.group_sizes.assign(k0, n / k0);
  for (int k = 0; k < k0; ++k) cfg.dgp.mu.push_back(2.0 + d_mu * k);
  cfg.dgp.sigma = 0.5;  // sigma^2 = 0.25
  cfg.dgp.markets = markets;
  cfg.replications = reps;
  cfg.test.draws = 199;
  cfg.seed = seed;
  cfg.threads = g_threads;
  return cfg;
}

// --------------------------------------------------------------------------
// Criterion 1: with a single homogeneous group the selector stays at K = 1.
// --------------------------------------------------------------------------
Verdict criterion1() {
  Verdict v;
  for (int markets : {100, 400}) {
    MonteCarloConfig cfg = study_config(12, 1, 0.0, markets, 200, 1000 + markets);
    cfg.dgp.mu = {2.0};
    cfg.dgp.group_sizes = {12};
    MonteCarloResult res = run_montecarlo(cfg);
    v.note("L=" + std::to_string(markets) + ": mean_K=" + fmt(res.mean_k) +
           " EAD=" + fmt(res.ead));
    v.require(res.mean_k <= 1.05, "mean K <= 1.05 at L=" + std::to_string(markets));
    v.require(res.ead <= 0.05, "EAD <= 0.05 at L=" + std::to_string(markets));
    v.require(res.failed_replications == 0, "no failed replications");
  }
  return v;
}

// --------------------------------------------------------------------------
// Criterion 2: strong separation recovers K0 = 2 and K0 = 4 near-exactly.
// --------------------------------------------------------------------------
Verdict criterion2() {
  Verdict v;
  {
    MonteCarloConfig cfg = study_config(12, 2, 0.6, 400, 200, 2002);
    MonteCarloResult res = run_montecarlo(cfg);
    v.note("K0=2: mean_K=" + fmt(res.mean_k) + " EAD=" + fmt(res.ead));
    v.require(res.mean_k >= 1.95 && res.mean_k <= 2.05, "mean K in [1.95, 2.05]");
    v.require(res.ead <= 0.05, "EAD <= 0.05 for K0=2");
  }
  {
    MonteCarloConfig cfg = study_config(12, 4, 0.6, 400, 200, 2004);
    MonteCarloResult res = run_montecarlo(cfg);
    v.note("K0=4: mean_K=" + fmt(res.mean_k) + " EAD=" + fmt(res.ead));
    v.require(res.mean_k >= 3.85 && res.mean_k <= 4.05, "mean K in [3.85, 4.05]");
    v.require(res.ead <= 0.15, "EAD <= 0.15 for K0=4");
  }
  return v;
}

// --------------------------------------------------------------------------
// Criterion 3: weak separation and few markets degrade as in the reference
// study, rather than failing silently or staying perfect.
// --------------------------------------------------------------------------
Verdict criterion3() {
  Verdict v;
  MonteCarloConfig cfg = study_config(12, 4, 0.2, 100, 200, 3001);
  MonteCarloResult res = run_montecarlo(cfg);
  v.note("mean_K=" + fmt(res.mean_k) + " EAD=" + fmt(res.ead));
  v.require(res.mean_k >= 2.8 && res.mean_k <= 3.7, "mean K in [2.8, 3.7]");
  v.require(res.ead >= 0.8 && res.ead <= 2.2, "EAD in [0.8, 2.2]");
  return v;
}

// --------------------------------------------------------------------------
// Criterion 4: identification golden cases, exact.
// --------------------------------------------------------------------------
Verdict criterion4() {
  Verdict v;
  {
    // Chain of five vertices whose admissible type structures are ambiguous:
    // with types (1,2,1,3,1) there is no full monotone path for K0 = 3.
    ComparabilityGraph g = ComparabilityGraph::make(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    auto report = check_identified(g, {1, 2, 1, 3, 1}, 3);
    v.require(!report.identified, "figure-3 fixture not identified");
    v.require(!report.has_full_monotone_path, "figure-3 fixture lacks a full path");
  }
  {
    // Six vertices; adjacent same-type pair {2,3} collapses, nodes 23-4-5 sit
    // on the unique full monotone path, vertices 1 and 6 stay unpinned.
    ComparabilityGraph g =
        ComparabilityGraph::make(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
    auto report = check_identified(g, {2, 1, 1, 2, 3, 2}, 3);
    v.require(!report.identified, "figure-4 fixture not identified");
    v.require(report.has_full_monotone_path, "figure-4 fixture has the full path");
    v.require(report.n_star == std::vector<int>{1, 2, 3, 4},
              "figure-4 N* = members of 23, 4, 5");
  }
  for (int k0 : {2, 3, 4}) {
    int n = 3 * k0;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    std::vector<int> tau(n);
    for (int a = 0; a < n; ++a) tau[a] = 1 + a % k0;
    auto report = check_identified(ComparabilityGraph::make(n, edges), tau, k0);
    v.require(report.identified, "complete graph identified at K0=" + std::to_string(k0));
  }
  v.note("fig3/fig4/complete-graph cases exact");
  return v;
}

// --------------------------------------------------------------------------
// Criterion 5: forced-extreme p-values; select_k recovers every ordered
// partition of up to 7 agents exactly, and attains the enumerated objective
// minimum for up to 6 agents.
// --------------------------------------------------------------------------
namespace c5 {

PValueMatrices forced(const std::vector<int>& tau, double eps) {
  int n = static_cast<int>(tau.size());
  PValueMatrices pv;
  std::vector<std::string> roster;
  for (int a = 0; a < n; ++a) roster.push_back("a" + std::to_string(a));
  pv.init(roster);
  pv.complete = true;
  pv.markets = 400;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      pv.p_plus.at(i, j) = tau[i] > tau[j] ? eps : 1.0 - eps;
      pv.p_minus.at(i, j) = tau[i] < tau[j] ? eps : 1.0 - eps;
      pv.p_zero.at(i, j) = tau[i] != tau[j] ? eps : 1.0 - eps;
    }
  return pv;
}

OrderedPartition partition_of(const std::vector<int>& tau) {
  int k0 = *std::max_element(tau.begin(), tau.end());
  OrderedPartition t;
  t.groups.resize(k0);
  for (size_t a = 0; a < tau.size(); ++a) t.groups[tau[a] - 1].push_back(static_cast<int>(a));
  return t;
}

// All ordered partitions of n agents as surjective label vectors onto {1..K}.
std::vector<std::vector<int>> all_ordered_partitions(int n) {
  std::vector<std::vector<int>> out;
  for (int K = 1; K <= n; ++K) {
    std::vector<int> tau(n, 1);
    for (;;) {
      int seen_mask = 0;
      for (int a = 0; a < n; ++a) seen_mask |= 1 << (tau[a] - 1);
      if (seen_mask == (1 << K) - 1) out.push_back(tau);
      int pos = n - 1;
      while (pos >= 0 && tau[pos] == K) {
        tau[pos] = 1;
        --pos;
      }
      if (pos < 0) break;
      ++tau[pos];
    }
  }
  return out;
}

double harmonic(int64_t m) {
  double h = 0.0;
  for (int64_t t = 1; t <= m; ++t) h += 1.0 / static_cast<double>(t);
  return h;
}

// Mirrors the selection objective: per group, |min log p0| centered at the
// null expectation H(#pairs) and floored at zero, averaged, plus K g(L).
double objective_of(const std::vector<int>& candidate, const std::vector<int>& truth, double eps,
                    double g) {
  int n = static_cast<int>(candidate.size());
  int K = *std::max_element(candidate.begin(), candidate.end());
  double log_eps = std::log(eps);
  double log_one = std::log(1.0 - eps);
  double total = 0.0;
  for (int k = 1; k <= K; ++k) {
    double min_log = 0.0;
    int64_t pairs = 0;
    for (int i = 0; i < n; ++i) {
      if (candidate[i] != k) continue;
      for (int j = i + 1; j < n; ++j) {
        if (candidate[j] != k) continue;
        double lp = truth[i] != truth[j] ? log_eps : log_one;
        min_log = std::min(min_log, lp);
        ++pairs;
      }
    }
    if (pairs > 0) total += std::max(0.0, std::fabs(min_log) - harmonic(pairs) - 2.0);
  }
  return total / K + K * g;
}

}  // namespace c5

Verdict criterion5() {
  Verdict v;
  const double eps = 1e-12;
  const int markets = 400;
  ClassifierConfig cfg;
  const double g = cfg.g_of(markets);
  int64_t total_cases = 0;
  int64_t oracle_cases = 0;

  for (int n = 1; n <= 7; ++n) {
    auto truths = c5::all_ordered_partitions(n);
    std::vector<std::vector<int>> candidates = n <= 6 ? truths : std::vector<std::vector<int>>{};
    std::vector<char> ok(truths.size(), 1);
    parallel_for(truths.size(), g_threads, [&](size_t t) {
      const auto& tau = truths[t];
      int k0 = *std::max_element(tau.begin(), tau.end());
      PValueMatrices pv = c5::forced(tau, eps);
      SelectKResult res = select_k(iota_roster(n), pv, ClassifierConfig{}, markets);
      if (res.k_hat != k0 || !(res.partition == c5::partition_of(tau))) {
        ok[t] = 0;
        return;
      }
      if (n <= 6) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& cand : candidates)
          best = std::min(best, c5::objective_of(cand, tau, eps, g));
        if (std::fabs(res.objective_trace[res.k_hat - 1] - best) > 1e-9) ok[t] = 0;
      }
    });
    for (char o : ok)
      if (!o) v.require(false, "exact recovery at n=" + std::to_string(n));
    total_cases += static_cast<int64_t>(truths.size());
    if (n <= 6) oracle_cases += static_cast<int64_t>(truths.size());
  }
  v.note(std::to_string(total_cases) + " ordered partitions recovered exactly, " +
         std::to_string(oracle_cases) + " checked against the enumeration oracle");
  return v;
}

// --------------------------------------------------------------------------
// Criterion 6: null calibration of the zero-hypothesis p-value.
// --------------------------------------------------------------------------
Verdict criterion6() {
  Verdict v;
  const int reps = 500, L = 200, B = 199;
  std::vector<double> pvals(reps);
  parallel_for(static_cast<size_t>(reps), g_threads, [&](size_t rep) {
    Rng rng(mix_seed({6006, seed_tag::replication, static_cast<uint64_t>(rep)}));
    MarketPanel panel;
    panel.roster = {"a", "b"};
    for (int m = 0; m < L; ++m) {
      MarketObservation obs;
      obs.market_id = "m" + std::to_string(m);
      obs.agents = {0, 1};
      obs.outcomes = {rng.next_normal(), rng.next_normal()};
      obs.covariates = {{}, {}};
      panel.markets.push_back(std::move(obs));
    }
    TestConfig cfg;
    cfg.draws = B;
    cfg.seed = mix_seed({6007, static_cast<uint64_t>(rep)});
    PairTestResult res =
        bootstrap_pvalues(panel, 0, 1, {IndexKind::cdf_dominance, CdfOrientation::value}, cfg);
    pvals[rep] = res.p_zero;
  });
  double mean = 0.0;
  int reject = 0;
  for (double p : pvals) {
    mean += p;
    if (p <= 0.05) ++reject;
  }
  mean /= reps;
  double rate = static_cast<double>(reject) / reps;
  v.note("mean p0=" + fmt(mean) + " rejection@0.05=" + fmt(rate));
  v.require(mean >= 0.40 && mean <= 0.60, "mean p0 in [0.40, 0.60]");
  v.require(rate >= 0.02 && rate <= 0.10, "rejection rate in [0.02, 0.10]");
  return v;
}

// --------------------------------------------------------------------------
// Criterion 7: two-step estimation agrees with the infeasible estimator and
// the true-group estimator is unbiased at the documented scale.
// --------------------------------------------------------------------------
Verdict criterion7() {
  Verdict v;
  TwoStepConfig cfg;
  cfg.dgp.n = 16;
  cfg.dgp.k0 = 4;
  cfg.dgp.group_sizes = {4, 4, 4, 4};
  cfg.dgp.mu = {2.0, 2.4, 2.8, 3.2};
  cfg.dgp.sigma = 0.5;
  cfg.dgp.markets = 400;
  cfg.dgp.participation = Participation::random_pairs;
  cfg.replications = 200;
  cfg.test.draws = 199;
  cfg.seed = 7007;
  cfg.threads = g_threads;
  TwoStepReport report = two_step_experiment(cfg);
  v.note("agreement=" + fmt(report.agreement_rate));
  v.require(report.failed_replications == 0, "no failed replications");
  v.require(report.agreement_rate >= 0.95, "P{theta_hat = theta_tilde} >= 0.95");
  for (int k = 0; k < 4; ++k) {
    v.note("bias(mu_" + std::to_string(k + 1) + ")=" + fmt(report.bias_true_groups[k], 4));
    v.require(std::fabs(report.bias_true_groups[k]) <= 0.08,
              "|bias mu_" + std::to_string(k + 1) + "| <= 0.08 under true groups");
  }
  return v;
}

// --------------------------------------------------------------------------
// Criterion 8: bootstrap confidence set coverage of the true group.
// --------------------------------------------------------------------------
Verdict criterion8() {
  Verdict v;
  const int reps = 200;
  std::vector<char> covered(reps, 0);
  std::vector<char> failed(reps, 0);
  parallel_for(static_cast<size_t>(reps), g_threads, [&](size_t rep) {
    DgpNormalBids dgp;
    dgp.n = 12;
    dgp.k0 = 2;
    dgp.group_sizes = {6, 6};
    dgp.mu = {2.0, 2.2};  // D_mu = 0.2
    dgp.sigma = 0.5;
    dgp.markets = 200;
    uint64_t rep_seed = mix_seed({8008, seed_tag::replication, static_cast<uint64_t>(rep)});
    GeneratedPanel gen = generate(dgp, rep_seed);
    ConfidenceConfig cfg;
    cfg.test.draws = 99;
    cfg.test.seed = rep_seed;
    cfg.draws = 99;
    cfg.alpha = 0.05;
    cfg.seed = mix_seed({8009, static_cast<uint64_t>(rep)});
    cfg.threads = 1;  // replication level already parallel
    try {
      ConfidenceResult res = confidence_set(gen.panel, 1, cfg);
      const auto& truth = gen.true_partition.groups[0];
      covered[rep] =
          std::includes(res.set.begin(), res.set.end(), truth.begin(), truth.end()) ? 1 : 0;
    } catch (const Error&) {
      failed[rep] = 1;
    }
  });
  int n_cov = 0, n_fail = 0;
  for (int rep = 0; rep < reps; ++rep) {
    n_cov += covered[rep];
    n_fail += failed[rep];
  }
  double coverage = static_cast<double>(n_cov) / reps;
  v.note("coverage=" + fmt(coverage) + " failures=" + std::to_string(n_fail));
  v.require(n_fail == 0, "no failed replications");
  v.require(coverage >= 0.90, "coverage >= 0.90 at alpha = 0.05");
  return v;
}

// --------------------------------------------------------------------------
// Criterion 9: determinism of every pipeline stage, byte-for-byte.
// --------------------------------------------------------------------------
Verdict criterion9() {
  Verdict v;

  DgpNormalBids dgp;
  dgp.n = 8;
  dgp.k0 = 2;
  dgp.group_sizes = {4, 4};
  dgp.mu = {2.0, 2.6};
  dgp.sigma = 0.5;
  dgp.markets = 60;

  // simulate
  GeneratedPanel g1 = generate(dgp, 99);
  GeneratedPanel g2 = generate(dgp, 99);
  v.require(panel_to_csv(g1.panel) == panel_to_csv(g2.panel), "simulate determinism");

  // pvalues (single vs multi thread, twice)
  IndexSpec spec{IndexKind::cdf_dominance, CdfOrientation::value};
  TestConfig test;
  test.draws = 99;
  test.seed = 5;
  ComparabilityGraph graph = comparability_graph(pair_coverage(g1.panel, 30));
  TestConfig threaded = test;
  threaded.threads = 4;
  std::string pv1 = pvalues_to_json(pvalue_matrices(g1.panel, graph, spec, test), spec, test, 30)
                        .dump(2);
  std::string pv2 =
      pvalues_to_json(pvalue_matrices(g1.panel, graph, spec, threaded), spec, test, 30).dump(2);
  v.require(pv1 == pv2, "pvalues determinism across thread counts");

  // classify
  PValueMatrices pv = pvalue_matrices(g1.panel, graph, spec, test);
  ClassifierConfig ccfg;
  SelectKResult s1 = select_k(iota_roster(8), pv, ccfg, 60);
  SelectKResult s2 = select_k(iota_roster(8), pv, ccfg, 60);
  v.require(classification_to_json(pv.roster, s1, 60, 0, ccfg.r_of(60), ccfg.g_of(60)).dump(2) ==
                classification_to_json(pv.roster, s2, 60, 0, ccfg.r_of(60), ccfg.g_of(60)).dump(2),
            "classify determinism");

  // confidence
  ConfidenceConfig conf;
  conf.test.draws = 29;
  conf.test.seed = 3;
  conf.draws = 9;
  conf.seed = 3;
  conf.threads = 2;
  std::string c1 = confidence_to_json(g1.panel.roster, confidence_set(g1.panel, 1, conf), conf)
                       .dump(2);
  std::string c2 = confidence_to_json(g1.panel.roster, confidence_set(g1.panel, 1, conf), conf)
                       .dump(2);
  v.require(c1 == c2, "confidence determinism");

  // montecarlo
  MonteCarloConfig mc;
  mc.dgp = dgp;
  mc.replications = 4;
  mc.test.draws = 29;
  mc.seed = 13;
  mc.threads = 2;
  std::string m1 = montecarlo_to_csv(run_montecarlo(mc));
  std::string m2 = montecarlo_to_csv(run_montecarlo(mc));
  v.require(m1 == m2, "montecarlo determinism");

  // twostep
  TwoStepConfig ts;
  ts.dgp.n = 8;
  ts.dgp.k0 = 4;
  ts.dgp.group_sizes = {2, 2, 2, 2};
  ts.dgp.mu = {2.0, 2.4, 2.8, 3.2};
  ts.dgp.sigma = 0.5;
  ts.dgp.markets = 120;
  ts.dgp.participation = Participation::random_pairs;
  ts.replications = 3;
  ts.test.draws = 29;
  ts.seed = 17;
  ts.threads = 2;
  std::string t1 = twostep_to_json(two_step_experiment(ts), ts).dump(2);
  std::string t2 = twostep_to_json(two_step_experiment(ts), ts).dump(2);
  v.require(t1 == t2, "twostep determinism");

  v.note("all stages byte-identical across reruns (per-platform check)");
  return v;
}

// --------------------------------------------------------------------------
// Criterion 10: property suites, >= 1000 randomized cases each.
// --------------------------------------------------------------------------
Verdict criterion10() {
  Verdict v;

  {  // pairwise_engine: delta0 bounds and p-value duality.
    std::vector<char> ok(1000, 1);
    parallel_for(1000, g_threads, [&](size_t trial) {
      Rng rng(mix_seed({10100, static_cast<uint64_t>(trial)}));
      int L = 16 + static_cast<int>(rng.next_below(24));
      MarketPanel panel;
      panel.roster = {"a", "b"};
      for (int m = 0; m < L; ++m) {
        MarketObservation obs;
        obs.market_id = "m" + std::to_string(m);
        obs.agents = {0, 1};
        obs.outcomes = {rng.next_normal(), 0.3 * rng.next_unit() + rng.next_normal()};
        obs.covariates = {{}, {}};
        panel.markets.push_back(std::move(obs));
      }
      TestConfig cfg;
      cfg.draws = 19;
      cfg.grid = 40;
      cfg.seed = trial;
      IndexSpec spec{IndexKind::cdf_dominance,
                     trial % 2 == 0 ? CdfOrientation::value : CdfOrientation::procurement};
      PairTestResult ij = bootstrap_pvalues(panel, 0, 1, spec, cfg);
      PairTestResult ji = bootstrap_pvalues(panel, 1, 0, spec, cfg);
      bool good = ij.delta_zero >= ij.delta_plus - 1e-12 &&
                  ij.delta_zero >= ij.delta_minus - 1e-12 &&
                  ij.delta_zero <= ij.delta_plus + ij.delta_minus + 1e-12 &&
                  ij.p_minus == ji.p_plus && ij.p_plus == ji.p_minus && ij.p_zero == ji.p_zero &&
                  ij.p_plus > 0.0 && ij.p_plus <= 1.0 && ij.p_zero > 0.0 && ij.p_zero <= 1.0;
      ok[trial] = good ? 1 : 0;
    });
    int good = 0;
    for (char o : ok) good += o;
    v.require(good == 1000, "engine delta bounds and duality (1000 cases)");
  }

  {  // classifier: nesting and exact group counts on random matrices.
    std::vector<char> ok(1000, 1);
    parallel_for(1000, g_threads, [&](size_t trial) {
      Rng rng(mix_seed({10200, static_cast<uint64_t>(trial)}));
      int n = 3 + static_cast<int>(rng.next_below(4));
      PValueMatrices pv;
      std::vector<std::string> roster;
      for (int a = 0; a < n; ++a) roster.push_back("a" + std::to_string(a));
      pv.init(roster);
      pv.complete = true;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          double p = 0.999 * rng.next_unit() + 5e-4;
          double m = 0.999 * rng.next_unit() + 5e-4;
          double z = 0.999 * rng.next_unit() + 5e-4;
          pv.p_plus.at(i, j) = p;
          pv.p_minus.at(i, j) = m;
          pv.p_plus.at(j, i) = m;
          pv.p_minus.at(j, i) = p;
          pv.p_zero.at(i, j) = z;
          pv.p_zero.at(j, i) = z;
        }
      ClassifierConfig cfg;
      std::vector<int> prev_labels;
      bool good = true;
      for (int k = 1; k <= n && good; ++k) {
        OrderedPartition part = classify_for_k(iota_roster(n), pv, k, cfg, 50);
        if (part.group_count() != k || part.agent_count() != n) good = false;
        std::vector<int> labels = part.labels(n);
        if (k > 1) {
          for (int a = 0; a < n && good; ++a)
            for (int b = 0; b < n; ++b)
              if (labels[a] == labels[b] && prev_labels[a] != prev_labels[b]) {
                good = false;
                break;
              }
        }
        prev_labels = labels;
      }
      ok[trial] = good ? 1 : 0;
    });
    int good = 0;
    for (char o : ok) good += o;
    v.require(good == 1000, "classifier nesting and exact K (1000 cases)");
  }

  {  // metrics: self-discrepancy zero, HAD monotone.
    Rng rng(10300);
    bool good = true;
    for (int trial = 0; trial < 1000 && good; ++trial) {
      int n = 3 + static_cast<int>(rng.next_below(7));
      auto random_partition = [&](int size) {
        int k = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(size)));
        std::vector<std::vector<int>> groups(k);
        for (int a = 0; a < size; ++a) groups[rng.next_below(static_cast<uint64_t>(k))].push_back(a);
        OrderedPartition t;
        for (auto& grp : groups)
          if (!grp.empty()) t.groups.push_back(grp);
        return t;
      };
      OrderedPartition truth = random_partition(n);
      if (discrepancy(truth, truth).delta != 0.0) good = false;
      std::vector<std::pair<int, OrderedPartition>> est;
      for (int e = 0; e < 5; ++e) {
        OrderedPartition p = random_partition(n);
        est.emplace_back(p.group_count(), p);
      }
      auto rep = aggregate(truth, est, n, {0.10, 0.25, 0.50, 0.75, 0.90});
      for (size_t k = 1; k < rep.had.size(); ++k)
        if (rep.had[k].second > rep.had[k - 1].second + 1e-12) good = false;
    }
    v.require(good, "metrics self-zero and HAD monotonicity (1000 cases)");
  }

  {  // identification: collapse idempotence and N* edge monotonicity.
    Rng rng(10400);
    bool good = true;
    for (int trial = 0; trial < 1000 && good; ++trial) {
      int n = 3 + static_cast<int>(rng.next_below(6));
      std::vector<std::pair<int, int>> edges;
      std::vector<std::pair<int, int>> all_edges;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) all_edges.emplace_back(i, j);
      for (auto e : all_edges)
        if (rng.next_unit() < 0.35) edges.push_back(e);
      int k0 = 1 + static_cast<int>(rng.next_below(3));
      std::vector<int> tau(n);
      for (auto& t : tau) t = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(k0)));

      TypedGraph tg = tau_collapse(ComparabilityGraph::make(n, edges), tau);
      TypedGraph again = tau_collapse(ComparabilityGraph::make(tg.size(), tg.edges), tg.types);
      if (again.size() != tg.size() || again.edges != tg.edges) good = false;

      auto base = identified_set(tg, k0);
      auto grown_edges = edges;
      grown_edges.push_back(all_edges[rng.next_below(all_edges.size())]);
      auto grown =
          identified_set(tau_collapse(ComparabilityGraph::make(n, grown_edges), tau), k0);
      if (!std::includes(grown.begin(), grown.end(), base.begin(), base.end())) good = false;
    }
    v.require(good, "identification idempotence and N* monotonicity (1000 cases)");
  }

  v.note("4 property suites, >= 1000 cases each");
  return v;
}

struct Criterion {
  int id;
  const char* name;
  Verdict (*fn)();
};

const Criterion kCriteria[] = {
    {1, "single-group detection (Table-2 analog)", criterion1},
    {2, "strong-separation recovery (Table-3 analog)", criterion2},
    {3, "weak-separation degradation (Table-3 analog)", criterion3},
    {4, "identification golden cases", criterion4},
    {5, "classifier oracle equivalence (forced p-values)", criterion5},
    {6, "null p-value calibration", criterion6},
    {7, "two-step agreement and bias", criterion7},
    {8, "confidence-set coverage", criterion8},
    {9, "determinism", criterion9},
    {10, "property suites", criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  g_threads = default_thread_count();
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--criterion") == 0 && a + 1 < argc) {
      only = std::atoi(argv[++a]);
    } else if (std::strcmp(argv[a], "--threads") == 0 && a + 1 < argc) {
      g_threads = std::atoi(argv[++a]);
      if (g_threads <= 0) g_threads = default_thread_count();
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N] [--threads T]\n");
      return 2;
    }
  }

  bool all_pass = true;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    std::fprintf(stderr, "running criterion %d: %s...\n", c.id, c.name);
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("[criterion %d] %s - %s (%s)\n", c.id, v.pass ? "PASS" : "FAIL", c.name,
                v.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && v.pass;
  }
  return all_pass ? 0 : 1;
}
