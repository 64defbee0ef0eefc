#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pairclass/classifier.hpp"
#include "pairclass/engine.hpp"
#include "pairclass/metrics.hpp"
#include "pairclass/panel.hpp"

namespace pairclass {

enum class Participation { full, random_pairs };

// Synthetic market DGP: group-k agents emit N(mu[k-1], sigma^2) outcomes.
// Under full participation every agent appears in every market; under
// random_pairs each market holds one agent from each of two random groups,
// with outcomes truncated to the shared cost bounds.
struct DgpNormalBids {
  int n = 0;
  int k0 = 0;
  std::vector<int> group_sizes;
  std::vector<double> mu;  // strictly increasing, one per group
  double sigma = 0.5;
  int markets = 0;  // L
  Participation participation = Participation::full;

  void validate() const;
  std::vector<int> tau() const;  // 1-based type per agent index
  // Shared truncation bounds of the random-pairs design.
  double cost_lower() const;
  double cost_upper() const;

  static DgpNormalBids design(const std::string& name, int markets, double d_mu,
                              double mu1 = 2.0, double sigma = 0.5);
};

struct GeneratedPanel {
  MarketPanel panel;
  OrderedPartition true_partition;
};

GeneratedPanel generate(const DgpNormalBids& dgp, uint64_t seed);

struct MonteCarloConfig {
  DgpNormalBids dgp;
  int replications = 200;
  IndexSpec index{IndexKind::cdf_dominance, CdfOrientation::value};
  TestConfig test;
  ClassifierConfig classifier;
  int64_t threshold = 30;
  std::vector<double> lambdas = {0.10, 0.25, 0.50, 0.75, 0.90};
  uint64_t seed = 0;
  int threads = 1;
};

struct MonteCarloResult {
  int n = 0;
  int markets = 0;
  double d_mu = 0.0;
  int k0 = 0;
  double mean_k = 0.0;
  double ead = 0.0;
  std::vector<std::pair<double, double>> had;
  int replications = 0;
  int failed_replications = 0;
};

MonteCarloResult run_montecarlo(const MonteCarloConfig& cfg);

struct TwoStepConfig {
  DgpNormalBids dgp;  // must be random_pairs
  int replications = 200;
  IndexSpec index{IndexKind::presence_mean, CdfOrientation::value};
  TestConfig test;
  ClassifierConfig classifier;
  uint64_t seed = 0;
  int threads = 1;
};

struct TwoStepReport {
  std::vector<double> mu_true;
  double sigma_true = 0.0;
  int replications = 0;
  double agreement_rate = 0.0;  // P{theta_hat == theta_tilde}
  // Parameter order: mu_1..mu_K0, sigma.
  std::vector<double> bias_estimated, mse_estimated;
  std::vector<double> bias_true_groups, mse_true_groups;
  std::vector<std::vector<double>> theta_hat;    // per replication; NaN when rank unmatched
  std::vector<std::vector<double>> theta_tilde;
  std::vector<int> k_hat;  // per replication
  int failed_replications = 0;
};

TwoStepReport two_step_experiment(const TwoStepConfig& cfg);

namespace detail {
// Moments of a normal truncated to [lo, hi].
double truncated_normal_mean(double mu, double sigma, double lo, double hi);
double truncated_normal_var(double mu, double sigma, double lo, double hi);
// Moment inversion for (mu_1..K, sigma) given per-group sample means and the
// pooled within-group variance, under the shared truncation bounds implied by
// the parameters themselves.
struct MomentFit {
  std::vector<double> mu;
  double sigma = 0.0;
};
MomentFit fit_truncated_moments(const std::vector<double>& group_means,
                                const std::vector<double>& group_vars,
                                const std::vector<int64_t>& group_counts);
}  // namespace detail

}  // namespace pairclass
