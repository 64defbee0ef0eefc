#include "pairclass/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pairclass/parallel.hpp"
#include "pairclass/rng.hpp"

namespace pairclass {

void DgpNormalBids::validate() const {
  if (n < 1 || k0 < 1) fail(ErrorCode::invalid_argument, "dgp needs n >= 1 and K0 >= 1");
  if (static_cast<int>(group_sizes.size()) != k0 || static_cast<int>(mu.size()) != k0)
    fail(ErrorCode::invalid_argument, "dgp needs one size and one mean per group");
  int total = 0;
  for (int s : group_sizes) {
    if (s < 1) fail(ErrorCode::invalid_argument, "group sizes must be positive");
    total += s;
  }
  if (total != n) fail(ErrorCode::invalid_argument, "group sizes must sum to n");
  for (size_t k = 1; k < mu.size(); ++k)
    if (!(mu[k] > mu[k - 1])) fail(ErrorCode::invalid_argument, "group means must be increasing");
  if (sigma < 0.0) fail(ErrorCode::invalid_argument, "sigma must be nonnegative");
  if (markets < 1) fail(ErrorCode::invalid_argument, "dgp needs at least one market");
  if (participation == Participation::random_pairs && k0 < 2)
    fail(ErrorCode::invalid_argument, "random-pairs participation needs K0 >= 2");
}

std::vector<int> DgpNormalBids::tau() const {
  std::vector<int> out;
  for (int k = 0; k < k0; ++k)
    for (int s = 0; s < group_sizes[k]; ++s) out.push_back(k + 1);
  return out;
}

double DgpNormalBids::cost_lower() const {
  double acc = 0.0;
  for (double m : mu) acc += m - 1.96 * sigma;
  return acc / static_cast<double>(k0);
}

double DgpNormalBids::cost_upper() const {
  double acc = 0.0;
  for (double m : mu) acc += m + 1.96 * sigma;
  return acc / static_cast<double>(k0);
}

DgpNormalBids DgpNormalBids::design(const std::string& name, int markets, double d_mu, double mu1,
                                    double sigma) {
  DgpNormalBids dgp;
  dgp.markets = markets;
  dgp.sigma = sigma;
  if (name == "S1") {
    dgp.n = 12;
    dgp.k0 = 2;
  } else if (name == "S2") {
    dgp.n = 12;
    dgp.k0 = 4;
  } else if (name == "S3") {
    dgp.n = 40;
    dgp.k0 = 2;
  } else if (name == "S4") {
    dgp.n = 40;
    dgp.k0 = 4;
  } else {
    fail(ErrorCode::invalid_argument, "unknown design '" + name + "' (want S1|S2|S3|S4)");
  }
  dgp.group_sizes.assign(dgp.k0, dgp.n / dgp.k0);
  for (int k = 0; k < dgp.k0; ++k) dgp.mu.push_back(mu1 + d_mu * static_cast<double>(k));
  dgp.validate();
  return dgp;
}

namespace {

std::string padded_id(const char* prefix, int index, int width) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%s%0*d", prefix, std::min(width, 12), index);
  return buf;
}

}  // namespace

GeneratedPanel generate(const DgpNormalBids& dgp, uint64_t seed) {
  dgp.validate();
  std::vector<int> tau = dgp.tau();

  GeneratedPanel out;
  int agent_width = dgp.n >= 100 ? 3 : 2;
  for (int a = 0; a < dgp.n; ++a) out.panel.roster.push_back(padded_id("a", a + 1, agent_width));
  out.true_partition.groups.resize(dgp.k0);
  for (int a = 0; a < dgp.n; ++a) out.true_partition.groups[tau[a] - 1].push_back(a);

  int market_width = 1;
  for (int v = dgp.markets; v > 0; v /= 10) ++market_width;
  Rng rng(mix_seed({seed, seed_tag::dgp}));

  if (dgp.participation == Participation::full) {
    for (int m = 0; m < dgp.markets; ++m) {
      MarketObservation obs;
      obs.market_id = padded_id("m", m + 1, market_width);
      for (int a = 0; a < dgp.n; ++a) {
        obs.agents.push_back(a);
        obs.outcomes.push_back(dgp.mu[tau[a] - 1] + dgp.sigma * rng.next_normal());
        obs.covariates.push_back({});
      }
      out.panel.markets.push_back(std::move(obs));
    }
  } else {
    double lo = dgp.cost_lower();
    double hi = dgp.cost_upper();
    // Group offsets into the roster (agents are laid out group by group).
    std::vector<int> offset(dgp.k0, 0);
    for (int k = 1; k < dgp.k0; ++k) offset[k] = offset[k - 1] + dgp.group_sizes[k - 1];
    auto draw_cost = [&](int group) {
      double mu = dgp.mu[group];
      if (dgp.sigma == 0.0) return mu;  // noiseless: truncation is vacuous
      for (;;) {
        double c = mu + dgp.sigma * rng.next_normal();
        if (c >= lo && c <= hi) return c;
      }
    };
    uint64_t n_group_pairs =
        static_cast<uint64_t>(dgp.k0) * static_cast<uint64_t>(dgp.k0 - 1) / 2;
    for (int m = 0; m < dgp.markets; ++m) {
      // Uniform unordered pair of distinct groups.
      uint64_t pick = rng.next_below(n_group_pairs);
      int g1 = 0;
      while (pick >= static_cast<uint64_t>(dgp.k0 - 1 - g1)) {
        pick -= static_cast<uint64_t>(dgp.k0 - 1 - g1);
        ++g1;
      }
      int g2 = g1 + 1 + static_cast<int>(pick);
      int a1 = offset[g1] + static_cast<int>(rng.next_below(dgp.group_sizes[g1]));
      int a2 = offset[g2] + static_cast<int>(rng.next_below(dgp.group_sizes[g2]));
      MarketObservation obs;
      obs.market_id = padded_id("m", m + 1, market_width);
      obs.agents = {a1, a2};
      obs.outcomes = {draw_cost(g1), draw_cost(g2)};
      obs.covariates = {{}, {}};
      out.panel.markets.push_back(std::move(obs));
    }
  }
  out.panel.validate();
  return out;
}

MonteCarloResult run_montecarlo(const MonteCarloConfig& cfg) {
  cfg.dgp.validate();
  if (cfg.replications < 1) fail(ErrorCode::invalid_argument, "replications must be >= 1");

  struct RepOutcome {
    bool ok = false;
    int k_hat = 0;
    OrderedPartition partition;
  };
  std::vector<RepOutcome> outcomes(cfg.replications);
  OrderedPartition true_t;

  {
    GeneratedPanel probe = generate(cfg.dgp, mix_seed({cfg.seed, seed_tag::replication, 0}));
    true_t = probe.true_partition;
  }

  parallel_for(static_cast<size_t>(cfg.replications), cfg.threads, [&](size_t rep) {
    uint64_t rep_seed = mix_seed({cfg.seed, seed_tag::replication, static_cast<uint64_t>(rep)});
    try {
      GeneratedPanel gen = generate(cfg.dgp, rep_seed);
      PairCoverage coverage = pair_coverage(gen.panel, cfg.threshold);
      ComparabilityGraph graph = comparability_graph(coverage);
      TestConfig test = cfg.test;
      test.seed = rep_seed;
      test.threads = 1;  // parallelism lives at the replication level
      PValueMatrices pv = pvalue_matrices(gen.panel, graph, cfg.index, test);
      std::vector<int> roster(gen.panel.n_agents());
      for (int a = 0; a < gen.panel.n_agents(); ++a) roster[a] = a;
      SelectKResult sel = select_k(roster, pv, cfg.classifier, gen.panel.n_markets());
      outcomes[rep] = {true, sel.k_hat, sel.partition};
    } catch (const Error&) {
      outcomes[rep] = {};
    }
  });

  std::vector<std::pair<int, OrderedPartition>> estimates;
  int failed = 0;
  for (const auto& o : outcomes) {
    if (o.ok)
      estimates.emplace_back(o.k_hat, o.partition);
    else
      ++failed;
  }
  if (estimates.empty()) fail(ErrorCode::numeric, "every replication failed");

  AggregateReport agg = aggregate(true_t, estimates, cfg.dgp.n, cfg.lambdas);
  MonteCarloResult result;
  result.n = cfg.dgp.n;
  result.markets = cfg.dgp.markets;
  result.d_mu = cfg.dgp.k0 >= 2 ? cfg.dgp.mu[1] - cfg.dgp.mu[0] : 0.0;
  result.k0 = cfg.dgp.k0;
  result.mean_k = agg.mean_k;
  result.ead = agg.ead;
  result.had = agg.had;
  result.replications = static_cast<int>(estimates.size());
  result.failed_replications = failed;
  return result;
}

// ---------------------------------------------------------------------------
// Truncated-normal moments and the two-step experiment.
// ---------------------------------------------------------------------------

namespace detail {

namespace {
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }
}  // namespace

double truncated_normal_mean(double mu, double sigma, double lo, double hi) {
  if (sigma <= 0.0) return std::clamp(mu, lo, hi);
  double a = (lo - mu) / sigma;
  double b = (hi - mu) / sigma;
  double mass = normal_cdf(b) - normal_cdf(a);
  if (mass <= 1e-300) return mu < lo ? lo : hi;  // truncation window far in a tail
  return mu + sigma * (normal_pdf(a) - normal_pdf(b)) / mass;
}

double truncated_normal_var(double mu, double sigma, double lo, double hi) {
  if (sigma <= 0.0) return 0.0;
  double a = (lo - mu) / sigma;
  double b = (hi - mu) / sigma;
  double mass = normal_cdf(b) - normal_cdf(a);
  if (mass <= 1e-300) return 0.0;
  double da = normal_pdf(a), db = normal_pdf(b);
  double m1 = (da - db) / mass;
  double term = (a * da - b * db) / mass;
  return sigma * sigma * (1.0 + term - m1 * m1);
}

MomentFit fit_truncated_moments(const std::vector<double>& group_means,
                                const std::vector<double>& group_vars,
                                const std::vector<int64_t>& group_counts) {
  const int K = static_cast<int>(group_means.size());
  if (K < 1 || group_vars.size() != group_means.size() || group_counts.size() != group_means.size())
    fail(ErrorCode::invalid_argument, "moment fit needs aligned per-group inputs");

  double total = 0.0, pooled_var = 0.0;
  for (int k = 0; k < K; ++k) {
    total += static_cast<double>(group_counts[k]);
    pooled_var += static_cast<double>(group_counts[k]) * group_vars[k];
  }
  if (total <= 0.0) fail(ErrorCode::insufficient_data, "no observations for moment fit");
  pooled_var /= total;

  MomentFit fit;
  fit.mu = group_means;
  fit.sigma = std::sqrt(std::max(pooled_var, 0.0));
  double scale = 1.0;
  for (double m : group_means) scale = std::max(scale, std::fabs(m));
  if (fit.sigma <= 1e-9 * scale) {  // noiseless up to rounding: means are exact
    fit.sigma = 0.0;
    return fit;
  }

  // Bounds depend on the parameters, so alternate: solve each mean equation
  // in mu_k, then the pooled-variance equation in sigma, then refresh bounds.
  auto bounds = [&](const MomentFit& f, double& lo, double& hi) {
    double mean_mu = 0.0;
    for (double m : f.mu) mean_mu += m;
    mean_mu /= static_cast<double>(K);
    lo = mean_mu - 1.96 * f.sigma;
    hi = mean_mu + 1.96 * f.sigma;
  };

  for (int iter = 0; iter < 200; ++iter) {
    MomentFit prev = fit;
    double lo, hi;
    bounds(fit, lo, hi);

    for (int k = 0; k < K; ++k) {
      // The truncated mean is increasing in mu with range (lo, hi); a sample
      // mean outside the current window has no preimage, keep it as is.
      double target = group_means[k];
      if (target <= lo || target >= hi) {
        fit.mu[k] = target;
        continue;
      }
      double step = 6.0 * fit.sigma + 1.0;
      double a = target - step;
      double b = target + step;
      for (int guard = 0; guard < 60 && truncated_normal_mean(a, fit.sigma, lo, hi) >= target;
           ++guard)
        a -= step;
      for (int guard = 0; guard < 60 && truncated_normal_mean(b, fit.sigma, lo, hi) <= target;
           ++guard)
        b += step;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (a + b);
        if (truncated_normal_mean(mid, fit.sigma, lo, hi) < target)
          a = mid;
        else
          b = mid;
      }
      fit.mu[k] = 0.5 * (a + b);
    }

    {
      // Monotone in sigma: bisect the count-weighted average variance.
      auto model_var = [&](double s) {
        double model = 0.0;
        for (int k = 0; k < K; ++k)
          model += static_cast<double>(group_counts[k]) *
                   truncated_normal_var(fit.mu[k], s, lo, hi);
        return model / total;
      };
      double a = 0.0;
      double b = 4.0 * std::sqrt(pooled_var) + 1.0;
      for (int guard = 0; guard < 60 && model_var(b) <= pooled_var; ++guard) b *= 2.0;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (a + b);
        if (model_var(mid) < pooled_var)
          a = mid;
        else
          b = mid;
      }
      fit.sigma = 0.5 * (a + b);
    }

    double drift = std::fabs(fit.sigma - prev.sigma);
    for (int k = 0; k < K; ++k) drift = std::max(drift, std::fabs(fit.mu[k] - prev.mu[k]));
    if (drift < 1e-11) break;
  }
  return fit;
}

}  // namespace detail

namespace {

// Per-group outcome moments under a given partition.
void group_moments(const MarketPanel& panel, const OrderedPartition& partition,
                   std::vector<double>& means, std::vector<double>& vars,
                   std::vector<int64_t>& counts) {
  const int K = partition.group_count();
  std::vector<int> label = partition.labels(panel.n_agents());
  means.assign(K, 0.0);
  vars.assign(K, 0.0);
  counts.assign(K, 0);
  for (const auto& m : panel.markets)
    for (size_t r = 0; r < m.agents.size(); ++r) {
      int k = label[m.agents[r]];
      means[k] += m.outcomes[r];
      counts[k] += 1;
    }
  for (int k = 0; k < K; ++k) {
    if (counts[k] == 0) fail(ErrorCode::insufficient_data, "group with no observations");
    means[k] /= static_cast<double>(counts[k]);
  }
  for (const auto& m : panel.markets)
    for (size_t r = 0; r < m.agents.size(); ++r) {
      int k = label[m.agents[r]];
      double d = m.outcomes[r] - means[k];
      vars[k] += d * d;
    }
  for (int k = 0; k < K; ++k) vars[k] /= static_cast<double>(counts[k]);
}

std::vector<double> estimate_theta(const MarketPanel& panel, const OrderedPartition& partition) {
  std::vector<double> means, vars;
  std::vector<int64_t> counts;
  group_moments(panel, partition, means, vars, counts);
  detail::MomentFit fit = detail::fit_truncated_moments(means, vars, counts);
  std::vector<double> theta = fit.mu;
  theta.push_back(fit.sigma);
  return theta;
}

}  // namespace

TwoStepReport two_step_experiment(const TwoStepConfig& cfg) {
  cfg.dgp.validate();
  if (cfg.dgp.participation != Participation::random_pairs)
    fail(ErrorCode::invalid_argument, "two-step experiment requires the random-pairs DGP");
  if (cfg.replications < 1) fail(ErrorCode::invalid_argument, "replications must be >= 1");

  const int K0 = cfg.dgp.k0;
  struct RepOutcome {
    bool ok = false;
    bool agree = false;
    int k_hat = 0;
    std::vector<double> theta_hat;    // size K_hat + 1, rank-matched below
    std::vector<double> theta_tilde;  // size K0 + 1
  };
  std::vector<RepOutcome> outcomes(cfg.replications);

  parallel_for(static_cast<size_t>(cfg.replications), cfg.threads, [&](size_t rep) {
    uint64_t rep_seed = mix_seed({cfg.seed, seed_tag::replication, static_cast<uint64_t>(rep)});
    try {
      GeneratedPanel gen = generate(cfg.dgp, rep_seed);
      // Step 1: classify. Same-group agents never share a market here, so the
      // presence index is the only estimable pairwise comparison; every pair
      // has one-sided support, so classification runs on the complete graph.
      std::vector<std::pair<int, int>> edges;
      for (int i = 0; i < cfg.dgp.n; ++i)
        for (int j = i + 1; j < cfg.dgp.n; ++j) edges.emplace_back(i, j);
      ComparabilityGraph graph = ComparabilityGraph::make(cfg.dgp.n, std::move(edges));
      TestConfig test = cfg.test;
      test.seed = rep_seed;
      test.threads = 1;
      PValueMatrices pv = pvalue_matrices(gen.panel, graph, cfg.index, test);
      std::vector<int> roster(cfg.dgp.n);
      for (int a = 0; a < cfg.dgp.n; ++a) roster[a] = a;
      SelectKResult sel = select_k(roster, pv, cfg.classifier, cfg.dgp.markets);

      // Step 2: closed-form truncated moment inversion under both partitions.
      RepOutcome out;
      out.ok = true;
      out.k_hat = sel.k_hat;
      out.theta_tilde = estimate_theta(gen.panel, gen.true_partition);
      out.theta_hat = estimate_theta(gen.panel, sel.partition);
      out.agree = sel.partition == gen.true_partition && out.theta_hat == out.theta_tilde;
      outcomes[rep] = std::move(out);
    } catch (const Error&) {
      outcomes[rep] = {};
    }
  });

  TwoStepReport report;
  report.mu_true = cfg.dgp.mu;
  report.sigma_true = cfg.dgp.sigma;
  const int P = K0 + 1;  // mu_1..K0, sigma
  report.bias_estimated.assign(P, 0.0);
  report.mse_estimated.assign(P, 0.0);
  report.bias_true_groups.assign(P, 0.0);
  report.mse_true_groups.assign(P, 0.0);
  std::vector<int64_t> matched(P, 0);
  int agreements = 0, usable = 0;

  std::vector<double> theta0 = cfg.dgp.mu;
  theta0.push_back(cfg.dgp.sigma);

  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++report.failed_replications;
      continue;
    }
    ++usable;
    if (o.agree) ++agreements;
    report.k_hat.push_back(o.k_hat);
    report.theta_tilde.push_back(o.theta_tilde);
    // Rank-match estimated groups to true groups; unmatched ranks stay NaN.
    std::vector<double> hat(P, nan_value());
    int matched_groups = std::min(o.k_hat, K0);
    for (int k = 0; k < matched_groups; ++k) hat[k] = o.theta_hat[k];
    hat[P - 1] = o.theta_hat.back();
    report.theta_hat.push_back(hat);

    for (int p = 0; p < P; ++p) {
      double err_tilde = o.theta_tilde[p] - theta0[p];
      report.bias_true_groups[p] += err_tilde;
      report.mse_true_groups[p] += err_tilde * err_tilde;
      if (!std::isnan(hat[p])) {
        double err = hat[p] - theta0[p];
        report.bias_estimated[p] += err;
        report.mse_estimated[p] += err * err;
        ++matched[p];
      }
    }
  }
  if (usable == 0) fail(ErrorCode::numeric, "every replication failed");
  report.replications = usable;
  report.agreement_rate = static_cast<double>(agreements) / static_cast<double>(usable);
  for (int p = 0; p < P; ++p) {
    report.bias_true_groups[p] /= static_cast<double>(usable);
    report.mse_true_groups[p] /= static_cast<double>(usable);
    if (matched[p] > 0) {
      report.bias_estimated[p] /= static_cast<double>(matched[p]);
      report.mse_estimated[p] /= static_cast<double>(matched[p]);
    } else {
      report.bias_estimated[p] = nan_value();
      report.mse_estimated[p] = nan_value();
    }
  }
  return report;
}

}  // namespace pairclass
