#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pairclass/common.hpp"
#include "pairclass/graph.hpp"
#include "pairclass/panel.hpp"

namespace pairclass {

enum class IndexKind {
  conditional_mean,  // kernel-regression difference, integrated over covariates
  cdf_dominance,     // outcome-CDF difference, integrated over the outcome axis
  presence_mean,     // mean outcome conditional on presence/absence
};

// cdf_dominance sign convention. `value`: stochastically higher outcomes mean
// a higher type. `procurement`: survival-function form, stochastically lower
// outcomes mean a higher type.
enum class CdfOrientation { value, procurement };

struct IndexSpec {
  IndexKind kind = IndexKind::cdf_dominance;
  CdfOrientation orientation = CdfOrientation::value;
};

struct TestConfig {
  int draws = 199;              // bootstrap draws B
  double bandwidth_c = 1.06;    // h = c * sd(x) * L_pair^exponent, per covariate dimension
  double bandwidth_exponent = -0.2;
  int grid = 100;               // quadrature nodes G
  double trim_lo = 0.05;        // pooled-quantile trim for the integration range
  double trim_hi = 0.95;
  uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct PairTestResult {
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double delta_zero = 0.0;
  double p_plus = 1.0;
  double p_minus = 1.0;
  double p_zero = 1.0;
  int64_t n_joint = 0;  // qualifying markets under the kind's conditioning event
};

struct StatisticTriplet {
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double delta_zero = 0.0;
  int64_t n_joint = 0;
};

// p-value and statistic matrices over the roster; diagonal entries stay NaN,
// as do pairs absent from the comparability graph.
struct PValueMatrices {
  std::vector<std::string> roster;
  int n = 0;
  Matrix p_plus;      // p_plus.at(i,j) pairs with p_minus.at(i,j) == p_plus.at(j,i)
  Matrix p_minus;
  Matrix p_zero;      // symmetric
  Matrix delta_plus;  // delta_plus.at(j,i) is the minus statistic of (i,j)
  Matrix delta_zero;  // symmetric
  CountMatrix joint_counts;
  bool complete = false;
  int markets = 0;

  void init(const std::vector<std::string>& roster_ids);
};

// Nadaraya-Watson regression with a product Epanechnikov kernel. Returns one
// value per grid point; points whose kernel-weight denominator falls below
// 1e-12 come back as NaN.
std::vector<double> kernel_regression(const std::vector<std::vector<double>>& xs,
                                      const std::vector<double>& ys,
                                      const std::vector<std::vector<double>>& eval_grid,
                                      const std::vector<double>& h);

StatisticTriplet statistic_triplet(const MarketPanel& panel, int i, int j, const IndexSpec& index,
                                   const TestConfig& cfg);

PairTestResult bootstrap_pvalues(const MarketPanel& panel, int i, int j, const IndexSpec& index,
                                 const TestConfig& cfg);

PValueMatrices pvalue_matrices(const MarketPanel& panel, const ComparabilityGraph& graph,
                               const IndexSpec& index, const TestConfig& cfg);

std::string index_kind_name(IndexKind kind);
std::string orientation_name(CdfOrientation o);
IndexKind index_kind_from_name(const std::string& name);
CdfOrientation orientation_from_name(const std::string& name);

namespace detail {
// CDF-difference statistics of two samples on an explicit quadrature grid;
// exposed for fixed-grid property tests.
StatisticTriplet cdf_delta_on_grid(const std::vector<double>& yi, const std::vector<double>& yj,
                                   const std::vector<double>& grid, CdfOrientation orientation);
// log of the upper normal tail, stable for large t.
double log_normal_upper_tail(double t);
}  // namespace detail

}  // namespace pairclass
