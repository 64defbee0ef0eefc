#include "pairclass/engine.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

#include "pairclass/parallel.hpp"
#include "pairclass/rng.hpp"

namespace pairclass {

void TestConfig::validate() const {
  if (draws < 1) fail(ErrorCode::invalid_argument, "bootstrap draws must be >= 1");
  if (grid < 2) fail(ErrorCode::invalid_argument, "quadrature grid must have >= 2 nodes");
  if (!(trim_lo > 0.0 && trim_lo < trim_hi && trim_hi < 1.0))
    fail(ErrorCode::invalid_argument, "trim quantiles must satisfy 0 < lo < hi < 1");
  if (!(bandwidth_c > 0.0)) fail(ErrorCode::invalid_argument, "bandwidth constant must be > 0");
}

void PValueMatrices::init(const std::vector<std::string>& roster_ids) {
  roster = roster_ids;
  n = static_cast<int>(roster_ids.size());
  p_plus = Matrix(n);
  p_minus = Matrix(n);
  p_zero = Matrix(n);
  delta_plus = Matrix(n);
  delta_zero = Matrix(n);
  joint_counts = CountMatrix(n);
}

std::string index_kind_name(IndexKind kind) {
  switch (kind) {
    case IndexKind::conditional_mean: return "mean";
    case IndexKind::cdf_dominance: return "cdf";
    case IndexKind::presence_mean: return "presence";
  }
  return "?";
}

std::string orientation_name(CdfOrientation o) {
  return o == CdfOrientation::value ? "value" : "procurement";
}

IndexKind index_kind_from_name(const std::string& name) {
  if (name == "mean") return IndexKind::conditional_mean;
  if (name == "cdf") return IndexKind::cdf_dominance;
  if (name == "presence") return IndexKind::presence_mean;
  fail(ErrorCode::invalid_argument, "unknown index kind '" + name + "' (want mean|cdf|presence)");
}

CdfOrientation orientation_from_name(const std::string& name) {
  if (name == "value") return CdfOrientation::value;
  if (name == "procurement") return CdfOrientation::procurement;
  fail(ErrorCode::invalid_argument, "unknown orientation '" + name + "' (want value|procurement)");
}

namespace detail {

double log_normal_upper_tail(double t) {
  if (t < 8.0) {
    return std::log(0.5 * std::erfc(t * M_SQRT1_2));
  }
  double exact = 0.5 * std::erfc(t * M_SQRT1_2);
  if (exact > 0.0) return std::log(exact);
  // Mills-ratio expansion for the far tail where erfc underflows.
  double t2 = t * t;
  return -0.5 * t2 - 0.5 * std::log(2.0 * M_PI) - std::log(t) + std::log1p(-1.0 / t2 + 3.0 / (t2 * t2));
}

StatisticTriplet cdf_delta_on_grid(const std::vector<double>& yi, const std::vector<double>& yj,
                                   const std::vector<double>& grid, CdfOrientation orientation) {
  if (yi.empty() || yj.empty()) fail(ErrorCode::insufficient_data, "empty sample");
  if (grid.size() < 2) fail(ErrorCode::invalid_argument, "grid must have >= 2 nodes");
  const size_t G = grid.size();
  StatisticTriplet out;
  out.n_joint = static_cast<int64_t>(std::min(yi.size(), yj.size()));
  double sign = orientation == CdfOrientation::value ? 1.0 : -1.0;
  for (size_t g = 0; g < G; ++g) {
    double w;
    if (g == 0)
      w = (grid[1] - grid[0]) / 2.0;
    else if (g + 1 == G)
      w = (grid[G - 1] - grid[G - 2]) / 2.0;
    else
      w = (grid[g + 1] - grid[g - 1]) / 2.0;
    double fi = 0.0, fj = 0.0;
    for (double y : yi) fi += (y <= grid[g]) ? 1.0 : 0.0;
    for (double y : yj) fj += (y <= grid[g]) ? 1.0 : 0.0;
    fi /= static_cast<double>(yi.size());
    fj /= static_cast<double>(yj.size());
    double r = sign * (fj - fi);
    out.delta_plus += w * std::max(r, 0.0);
    out.delta_minus += w * std::max(-r, 0.0);
    out.delta_zero += w * std::fabs(r);
  }
  return out;
}

}  // namespace detail

namespace {

constexpr double kDenominatorFloor = 1e-12;

double epanechnikov_product(const std::vector<double>& x, const std::vector<double>& center,
                            const std::vector<double>& h) {
  double k = 1.0;
  for (size_t d = 0; d < h.size(); ++d) {
    double u = (x[d] - center[d]) / h[d];
    if (u <= -1.0 || u >= 1.0) return 0.0;
    k *= 0.75 * (1.0 - u * u) / h[d];
  }
  return k;
}

// ---------------------------------------------------------------------------
// Per-pair preprocessed context. Statistics are evaluated either on the
// original sample or on a multiset of resampled market indices.
// ---------------------------------------------------------------------------

struct PairContext {
  IndexKind kind;
  CdfOrientation orientation = CdfOrientation::value;
  int L = 0;
  int64_t n_joint = 0;

  // cdf_dominance: grid positions per panel market (-1 when not qualifying).
  std::vector<double> grid;
  std::vector<double> weights;
  std::vector<int32_t> pos_i, pos_j;
  std::vector<double> r0;

  // presence_mean: per-market side code (0 none/both, 1 i-only, 2 j-only).
  std::vector<int8_t> side;
  std::vector<double> side_value;
  double r0_presence = 0.0;

  // conditional_mean: per qualifying market, precomputed kernel weight rows
  // over the retained grid. wy = y * w.
  std::vector<int32_t> cm_row;  // per panel market: row index or -1
  std::vector<double> h;        // per-dimension bandwidths
  int cm_points = 0;            // retained grid size
  std::vector<double> cm_weights;
  std::vector<double> w_i, wy_i, w_j, wy_j;  // row-major [row][point]
  std::vector<double> r0_cm;

  StatisticTriplet original;
};

struct DrawStats {
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double delta_zero = 0.0;
  bool ok = true;
};

std::vector<double> make_trimmed_grid(std::vector<double> pooled, const TestConfig& cfg) {
  std::sort(pooled.begin(), pooled.end());
  double lo = quantile_sorted(pooled, cfg.trim_lo);
  double hi = quantile_sorted(pooled, cfg.trim_hi);
  if (!(hi > lo))
    fail(ErrorCode::degenerate_support, "degenerate integration range: trim quantiles coincide");
  std::vector<double> grid(cfg.grid);
  double step = (hi - lo) / static_cast<double>(cfg.grid - 1);
  for (int g = 0; g < cfg.grid; ++g) grid[g] = lo + step * static_cast<double>(g);
  grid.back() = hi;
  return grid;
}

std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
  const size_t G = nodes.size();
  std::vector<double> w(G);
  for (size_t g = 0; g < G; ++g) {
    if (g == 0)
      w[g] = (nodes[1] - nodes[0]) / 2.0;
    else if (g + 1 == G)
      w[g] = (nodes[G - 1] - nodes[G - 2]) / 2.0;
    else
      w[g] = (nodes[g + 1] - nodes[g - 1]) / 2.0;
  }
  return w;
}

void prepare_cdf(PairContext& ctx, const MarketPanel& panel, int i, int j, const TestConfig& cfg) {
  const int L = panel.n_markets();
  ctx.pos_i.assign(L, -1);
  ctx.pos_j.assign(L, -1);
  std::vector<double> yi, yj;
  for (int m = 0; m < L; ++m) {
    const auto& obs = panel.markets[m];
    int ri = -1, rj = -1;
    for (size_t r = 0; r < obs.agents.size(); ++r) {
      if (obs.agents[r] == i) ri = static_cast<int>(r);
      if (obs.agents[r] == j) rj = static_cast<int>(r);
    }
    if (ri >= 0 && rj >= 0) {
      yi.push_back(obs.outcomes[ri]);
      yj.push_back(obs.outcomes[rj]);
    }
  }
  ctx.n_joint = static_cast<int64_t>(yi.size());
  if (yi.empty())
    fail(ErrorCode::insufficient_data, "no markets contain both agents of the pair");

  std::vector<double> pooled = yi;
  pooled.insert(pooled.end(), yj.begin(), yj.end());
  ctx.grid = make_trimmed_grid(std::move(pooled), cfg);
  ctx.weights = trapezoid_weights(ctx.grid);

  // Re-walk the panel to store per-market grid positions aligned with market
  // indices (resampling works in market-index space).
  size_t q = 0;
  for (int m = 0; m < L; ++m) {
    const auto& obs = panel.markets[m];
    int ri = -1, rj = -1;
    for (size_t r = 0; r < obs.agents.size(); ++r) {
      if (obs.agents[r] == i) ri = static_cast<int>(r);
      if (obs.agents[r] == j) rj = static_cast<int>(r);
    }
    if (ri >= 0 && rj >= 0) {
      double vi = obs.outcomes[ri];
      double vj = obs.outcomes[rj];
      ctx.pos_i[m] = static_cast<int32_t>(
          std::lower_bound(ctx.grid.begin(), ctx.grid.end(), vi) - ctx.grid.begin());
      ctx.pos_j[m] = static_cast<int32_t>(
          std::lower_bound(ctx.grid.begin(), ctx.grid.end(), vj) - ctx.grid.begin());
      ++q;
    }
  }
  (void)q;
}

// ECDF difference on the fixed grid from grid-position histograms.
DrawStats eval_cdf(const PairContext& ctx, const int32_t* sampled, int count_sampled,
                   std::vector<int32_t>& hist_i, std::vector<int32_t>& hist_j,
                   bool recenter) {
  const int G = static_cast<int>(ctx.grid.size());
  std::fill(hist_i.begin(), hist_i.end(), 0);
  std::fill(hist_j.begin(), hist_j.end(), 0);
  int64_t total = 0;
  for (int s = 0; s < count_sampled; ++s) {
    int m = sampled[s];
    int32_t pi = ctx.pos_i[m];
    if (pi < 0) continue;
    hist_i[pi] += 1;
    hist_j[ctx.pos_j[m]] += 1;
    ++total;
  }
  DrawStats out;
  if (total == 0) {
    out.ok = false;
    return out;
  }
  double sign = ctx.orientation == CdfOrientation::value ? 1.0 : -1.0;
  double inv = 1.0 / static_cast<double>(total);
  int64_t cum_i = 0, cum_j = 0;
  for (int g = 0; g < G; ++g) {
    cum_i += hist_i[g];
    cum_j += hist_j[g];
    double r = sign * (static_cast<double>(cum_j) - static_cast<double>(cum_i)) * inv;
    if (recenter) r -= ctx.r0[g];
    double w = ctx.weights[g];
    out.delta_plus += w * std::max(r, 0.0);
    out.delta_minus += w * std::max(-r, 0.0);
    out.delta_zero += w * std::fabs(r);
  }
  return out;
}

void prepare_presence(PairContext& ctx, const MarketPanel& panel, int i, int j) {
  const int L = panel.n_markets();
  ctx.side.assign(L, 0);
  ctx.side_value.assign(L, 0.0);
  int64_t count_i = 0, count_j = 0;
  for (int m = 0; m < L; ++m) {
    const auto& obs = panel.markets[m];
    int ri = -1, rj = -1;
    for (size_t r = 0; r < obs.agents.size(); ++r) {
      if (obs.agents[r] == i) ri = static_cast<int>(r);
      if (obs.agents[r] == j) rj = static_cast<int>(r);
    }
    if (ri >= 0 && rj < 0) {
      ctx.side[m] = 1;
      ctx.side_value[m] = obs.outcomes[ri];
      ++count_i;
    } else if (rj >= 0 && ri < 0) {
      ctx.side[m] = 2;
      ctx.side_value[m] = obs.outcomes[rj];
      ++count_j;
    }
  }
  if (count_i == 0 || count_j == 0)
    fail(ErrorCode::insufficient_data,
         "presence index needs markets where exactly one agent of the pair is present");
  ctx.n_joint = count_i + count_j;
}

DrawStats eval_presence(const PairContext& ctx, const int32_t* sampled, int count_sampled,
                        bool recenter) {
  double sum_i = 0.0, sum_j = 0.0;
  int64_t n_i = 0, n_j = 0;
  for (int s = 0; s < count_sampled; ++s) {
    int m = sampled[s];
    int8_t side = ctx.side[m];
    if (side == 1) {
      sum_i += ctx.side_value[m];
      ++n_i;
    } else if (side == 2) {
      sum_j += ctx.side_value[m];
      ++n_j;
    }
  }
  DrawStats out;
  if (n_i == 0 || n_j == 0) {
    out.ok = false;
    return out;
  }
  double r = sum_i / static_cast<double>(n_i) - sum_j / static_cast<double>(n_j);
  if (recenter) r -= ctx.r0_presence;
  out.delta_plus = std::max(r, 0.0);
  out.delta_minus = std::max(-r, 0.0);
  out.delta_zero = std::fabs(r);
  return out;
}

void prepare_conditional_mean(PairContext& ctx, const MarketPanel& panel, int i, int j,
                              const TestConfig& cfg) {
  const int d = panel.covariate_dim();
  if (d < 1)
    fail(ErrorCode::invalid_argument,
         "conditional-mean index requires covariates (panel has none)");
  const int L = panel.n_markets();
  ctx.cm_row.assign(L, -1);
  std::vector<double> yi, yj;
  std::vector<std::vector<double>> xi, xj;
  for (int m = 0; m < L; ++m) {
    const auto& obs = panel.markets[m];
    int ri = -1, rj = -1;
    for (size_t r = 0; r < obs.agents.size(); ++r) {
      if (obs.agents[r] == i) ri = static_cast<int>(r);
      if (obs.agents[r] == j) rj = static_cast<int>(r);
    }
    if (ri >= 0 && rj >= 0) {
      ctx.cm_row[m] = static_cast<int32_t>(yi.size());
      yi.push_back(obs.outcomes[ri]);
      yj.push_back(obs.outcomes[rj]);
      xi.push_back(obs.covariates[ri]);
      xj.push_back(obs.covariates[rj]);
    }
  }
  const size_t q = yi.size();
  ctx.n_joint = static_cast<int64_t>(q);
  if (q == 0) fail(ErrorCode::insufficient_data, "no markets contain both agents of the pair");

  // Rule-of-thumb bandwidth per dimension from the pooled covariate sample.
  std::vector<double> h(d);
  double scale = std::pow(static_cast<double>(q), cfg.bandwidth_exponent);
  for (int dim = 0; dim < d; ++dim) {
    double mean = 0.0;
    for (size_t r = 0; r < q; ++r) mean += xi[r][dim] + xj[r][dim];
    mean /= static_cast<double>(2 * q);
    double ss = 0.0;
    for (size_t r = 0; r < q; ++r) {
      ss += (xi[r][dim] - mean) * (xi[r][dim] - mean);
      ss += (xj[r][dim] - mean) * (xj[r][dim] - mean);
    }
    double sd = std::sqrt(ss / static_cast<double>(2 * q));
    if (!(sd > 0.0))
      fail(ErrorCode::degenerate_support, "covariate dimension with zero variance");
    h[dim] = cfg.bandwidth_c * sd * scale;
  }
  ctx.h = h;

  // Evaluation grid on the pooled covariate sample. One dimension: equispaced
  // trapezoid nodes between the trim quantiles. Higher dimensions: the pooled
  // sample points inside the per-dimension trim box, equal weights.
  std::vector<std::vector<double>> grid_points;
  std::vector<double> grid_weights;
  if (d == 1) {
    std::vector<double> pooled;
    pooled.reserve(2 * q);
    for (size_t r = 0; r < q; ++r) {
      pooled.push_back(xi[r][0]);
      pooled.push_back(xj[r][0]);
    }
    auto nodes = make_trimmed_grid(std::move(pooled), cfg);
    auto weights = trapezoid_weights(nodes);
    for (size_t g = 0; g < nodes.size(); ++g) {
      grid_points.push_back({nodes[g]});
      grid_weights.push_back(weights[g]);
    }
  } else {
    std::vector<double> lo(d), hi(d);
    for (int dim = 0; dim < d; ++dim) {
      std::vector<double> pooled;
      pooled.reserve(2 * q);
      for (size_t r = 0; r < q; ++r) {
        pooled.push_back(xi[r][dim]);
        pooled.push_back(xj[r][dim]);
      }
      std::sort(pooled.begin(), pooled.end());
      lo[dim] = quantile_sorted(pooled, cfg.trim_lo);
      hi[dim] = quantile_sorted(pooled, cfg.trim_hi);
      if (!(hi[dim] > lo[dim]))
        fail(ErrorCode::degenerate_support, "degenerate integration range in covariate dimension");
    }
    auto inside = [&](const std::vector<double>& x) {
      for (int dim = 0; dim < d; ++dim)
        if (x[dim] < lo[dim] || x[dim] > hi[dim]) return false;
      return true;
    };
    for (size_t r = 0; r < q; ++r) {
      if (inside(xi[r])) grid_points.push_back(xi[r]);
      if (inside(xj[r])) grid_points.push_back(xj[r]);
    }
    if (grid_points.empty())
      fail(ErrorCode::degenerate_support, "no pooled covariate points inside the trim box");
    grid_weights.assign(grid_points.size(), 1.0 / static_cast<double>(grid_points.size()));
  }

  // Kernel weight rows on the candidate grid; drop points undefined for
  // either agent on the original sample.
  const size_t Gc = grid_points.size();
  std::vector<double> wi(q * Gc), wj(q * Gc);
  std::vector<double> den_i(Gc, 0.0), den_j(Gc, 0.0);
  for (size_t r = 0; r < q; ++r) {
    for (size_t g = 0; g < Gc; ++g) {
      double ki = epanechnikov_product(xi[r], grid_points[g], h);
      double kj = epanechnikov_product(xj[r], grid_points[g], h);
      wi[r * Gc + g] = ki;
      wj[r * Gc + g] = kj;
      den_i[g] += ki;
      den_j[g] += kj;
    }
  }
  std::vector<int> keep;
  for (size_t g = 0; g < Gc; ++g)
    if (den_i[g] >= kDenominatorFloor && den_j[g] >= kDenominatorFloor)
      keep.push_back(static_cast<int>(g));
  if (keep.size() < 2)
    fail(ErrorCode::degenerate_support,
         "fewer than two grid points with defined regressions for both agents");

  ctx.cm_points = static_cast<int>(keep.size());
  if (d == 1) {
    // Recompute trapezoid weights over the retained (still sorted) nodes.
    std::vector<double> nodes;
    for (int g : keep) nodes.push_back(grid_points[g][0]);
    ctx.cm_weights = trapezoid_weights(nodes);
  } else {
    ctx.cm_weights.clear();
    for (int g : keep) ctx.cm_weights.push_back(grid_weights[g]);
  }
  const size_t G = keep.size();
  ctx.w_i.resize(q * G);
  ctx.wy_i.resize(q * G);
  ctx.w_j.resize(q * G);
  ctx.wy_j.resize(q * G);
  for (size_t r = 0; r < q; ++r) {
    for (size_t gg = 0; gg < G; ++gg) {
      double ki = wi[r * Gc + keep[gg]];
      double kj = wj[r * Gc + keep[gg]];
      ctx.w_i[r * G + gg] = ki;
      ctx.wy_i[r * G + gg] = ki * yi[r];
      ctx.w_j[r * G + gg] = kj;
      ctx.wy_j[r * G + gg] = kj * yj[r];
    }
  }
}

DrawStats eval_conditional_mean(const PairContext& ctx, const int32_t* sampled, int count_sampled,
                                std::vector<double>& num_i, std::vector<double>& den_i,
                                std::vector<double>& num_j, std::vector<double>& den_j,
                                bool recenter) {
  const size_t G = static_cast<size_t>(ctx.cm_points);
  std::fill(num_i.begin(), num_i.end(), 0.0);
  std::fill(den_i.begin(), den_i.end(), 0.0);
  std::fill(num_j.begin(), num_j.end(), 0.0);
  std::fill(den_j.begin(), den_j.end(), 0.0);
  int64_t total = 0;
  for (int s = 0; s < count_sampled; ++s) {
    int32_t row = ctx.cm_row[sampled[s]];
    if (row < 0) continue;
    const double* wi = &ctx.w_i[static_cast<size_t>(row) * G];
    const double* wyi = &ctx.wy_i[static_cast<size_t>(row) * G];
    const double* wj = &ctx.w_j[static_cast<size_t>(row) * G];
    const double* wyj = &ctx.wy_j[static_cast<size_t>(row) * G];
    for (size_t g = 0; g < G; ++g) {
      den_i[g] += wi[g];
      num_i[g] += wyi[g];
      den_j[g] += wj[g];
      num_j[g] += wyj[g];
    }
    ++total;
  }
  DrawStats out;
  if (total == 0) {
    out.ok = false;
    return out;
  }
  bool any = false;
  for (size_t g = 0; g < G; ++g) {
    if (den_i[g] < kDenominatorFloor || den_j[g] < kDenominatorFloor) continue;  // undefined in this draw
    double r = num_i[g] / den_i[g] - num_j[g] / den_j[g];
    if (recenter) r -= ctx.r0_cm[g];
    double w = ctx.cm_weights[g];
    out.delta_plus += w * std::max(r, 0.0);
    out.delta_minus += w * std::max(-r, 0.0);
    out.delta_zero += w * std::fabs(r);
    any = true;
  }
  if (!any) out.ok = false;
  return out;
}

PairContext build_context(const MarketPanel& panel, int i, int j, const IndexSpec& index,
                          const TestConfig& cfg) {
  if (i == j || i < 0 || j < 0 || i >= panel.n_agents() || j >= panel.n_agents())
    fail(ErrorCode::invalid_argument, "pair indices out of range");
  PairContext ctx;
  ctx.kind = index.kind;
  ctx.orientation = index.orientation;
  ctx.L = panel.n_markets();

  std::vector<int32_t> identity(ctx.L);
  for (int m = 0; m < ctx.L; ++m) identity[m] = m;

  switch (index.kind) {
    case IndexKind::cdf_dominance: {
      prepare_cdf(ctx, panel, i, j, cfg);
      const int G = static_cast<int>(ctx.grid.size());
      std::vector<int32_t> hist_i(G), hist_j(G);
      // First pass computes the raw r on the grid, second records it for
      // recentering and derives the original statistic.
      ctx.r0.assign(G, 0.0);
      std::fill(hist_i.begin(), hist_i.end(), 0);
      std::fill(hist_j.begin(), hist_j.end(), 0);
      int64_t total = 0;
      for (int m = 0; m < ctx.L; ++m) {
        if (ctx.pos_i[m] < 0) continue;
        hist_i[ctx.pos_i[m]] += 1;
        hist_j[ctx.pos_j[m]] += 1;
        ++total;
      }
      double sign = ctx.orientation == CdfOrientation::value ? 1.0 : -1.0;
      double inv = 1.0 / static_cast<double>(total);
      int64_t cum_i = 0, cum_j = 0;
      StatisticTriplet orig;
      for (int g = 0; g < G; ++g) {
        cum_i += hist_i[g];
        cum_j += hist_j[g];
        double r = sign * (static_cast<double>(cum_j) - static_cast<double>(cum_i)) * inv;
        ctx.r0[g] = r;
        double w = ctx.weights[g];
        orig.delta_plus += w * std::max(r, 0.0);
        orig.delta_minus += w * std::max(-r, 0.0);
        orig.delta_zero += w * std::fabs(r);
      }
      orig.n_joint = ctx.n_joint;
      ctx.original = orig;
      break;
    }
    case IndexKind::presence_mean: {
      prepare_presence(ctx, panel, i, j);
      DrawStats orig = eval_presence(ctx, identity.data(), ctx.L, /*recenter=*/false);
      double sum_i = 0.0, sum_j = 0.0;
      int64_t n_i = 0, n_j = 0;
      for (int m = 0; m < ctx.L; ++m) {
        if (ctx.side[m] == 1) {
          sum_i += ctx.side_value[m];
          ++n_i;
        } else if (ctx.side[m] == 2) {
          sum_j += ctx.side_value[m];
          ++n_j;
        }
      }
      ctx.r0_presence = sum_i / static_cast<double>(n_i) - sum_j / static_cast<double>(n_j);
      ctx.original = {orig.delta_plus, orig.delta_minus, orig.delta_zero, ctx.n_joint};
      break;
    }
    case IndexKind::conditional_mean: {
      prepare_conditional_mean(ctx, panel, i, j, cfg);
      const size_t G = static_cast<size_t>(ctx.cm_points);
      std::vector<double> num_i(G), den_i(G), num_j(G), den_j(G);
      // Original pass also freezes r0 on the retained grid.
      std::fill(num_i.begin(), num_i.end(), 0.0);
      std::fill(den_i.begin(), den_i.end(), 0.0);
      std::fill(num_j.begin(), num_j.end(), 0.0);
      std::fill(den_j.begin(), den_j.end(), 0.0);
      for (int m = 0; m < ctx.L; ++m) {
        int32_t row = ctx.cm_row[m];
        if (row < 0) continue;
        const double* wi = &ctx.w_i[static_cast<size_t>(row) * G];
        const double* wyi = &ctx.wy_i[static_cast<size_t>(row) * G];
        const double* wj = &ctx.w_j[static_cast<size_t>(row) * G];
        const double* wyj = &ctx.wy_j[static_cast<size_t>(row) * G];
        for (size_t g = 0; g < G; ++g) {
          den_i[g] += wi[g];
          num_i[g] += wyi[g];
          den_j[g] += wj[g];
          num_j[g] += wyj[g];
        }
      }
      ctx.r0_cm.assign(G, 0.0);
      StatisticTriplet orig;
      for (size_t g = 0; g < G; ++g) {
        double r = num_i[g] / den_i[g] - num_j[g] / den_j[g];
        ctx.r0_cm[g] = r;
        double w = ctx.cm_weights[g];
        orig.delta_plus += w * std::max(r, 0.0);
        orig.delta_minus += w * std::max(-r, 0.0);
        orig.delta_zero += w * std::fabs(r);
      }
      orig.n_joint = ctx.n_joint;
      ctx.original = orig;
      break;
    }
  }
  return ctx;
}

PairTestResult bootstrap_pair_canonical(const MarketPanel& panel, int a, int b,
                                        const IndexSpec& index, const TestConfig& cfg) {
  PairContext ctx = build_context(panel, a, b, index, cfg);
  const int B = cfg.draws;
  const int L = ctx.L;
  uint64_t key_lo = fnv1a64(panel.roster[a]);
  uint64_t key_hi = fnv1a64(panel.roster[b]);
  if (key_lo > key_hi) std::swap(key_lo, key_hi);

  std::vector<int32_t> sampled(L);
  const int G = index.kind == IndexKind::cdf_dominance ? static_cast<int>(ctx.grid.size()) : 0;
  std::vector<int32_t> hist_i(G), hist_j(G);
  const size_t Gc = index.kind == IndexKind::conditional_mean ? static_cast<size_t>(ctx.cm_points) : 0;
  std::vector<double> num_i(Gc), den_i(Gc), num_j(Gc), den_j(Gc);

  int count_plus = 0, count_minus = 0, count_zero = 0;
  int failed = 0;
  std::vector<double> draws_plus, draws_minus, draws_zero;
  draws_plus.reserve(B);
  draws_minus.reserve(B);
  draws_zero.reserve(B);
  const StatisticTriplet& orig = ctx.original;

  for (int bdraw = 0; bdraw < B; ++bdraw) {
    Rng rng(mix_seed({cfg.seed, seed_tag::pair_bootstrap, key_lo, key_hi,
                      static_cast<uint64_t>(bdraw)}));
    for (int m = 0; m < L; ++m)
      sampled[m] = static_cast<int32_t>(rng.next_below(static_cast<uint64_t>(L)));
    DrawStats ds;
    switch (index.kind) {
      case IndexKind::cdf_dominance:
        ds = eval_cdf(ctx, sampled.data(), L, hist_i, hist_j, /*recenter=*/true);
        break;
      case IndexKind::presence_mean:
        ds = eval_presence(ctx, sampled.data(), L, /*recenter=*/true);
        break;
      case IndexKind::conditional_mean:
        ds = eval_conditional_mean(ctx, sampled.data(), L, num_i, den_i, num_j, den_j,
                                   /*recenter=*/true);
        break;
    }
    if (!ds.ok) {
      // A draw that cannot be evaluated counts against rejection.
      ++failed;
      ++count_plus;
      ++count_minus;
      ++count_zero;
      continue;
    }
    if (ds.delta_plus >= orig.delta_plus) ++count_plus;
    if (ds.delta_minus >= orig.delta_minus) ++count_minus;
    if (ds.delta_zero >= orig.delta_zero) ++count_zero;
    draws_plus.push_back(ds.delta_plus);
    draws_minus.push_back(ds.delta_minus);
    draws_zero.push_back(ds.delta_zero);
  }

  auto p_value = [&](int count, std::vector<double>& draws, double observed) -> double {
    double base = static_cast<double>(1 + count) / static_cast<double>(B + 1);
    if (count >= 1 || draws.size() < 2) return base;
    // The observed statistic exceeds every bootstrap draw, where the count
    // saturates while the evidence keeps growing; the classifier needs log p
    // to keep falling in the statistic. Extend the tail by an exponential
    // fit to the top exceedances (peaks over threshold), which stays near
    // 1/(B+1) for marginal exceedances and only collapses when the observed
    // statistic clears the bootstrap support by many tail widths.
    std::sort(draws.begin(), draws.end());
    size_t k = std::max<size_t>(5, draws.size() / 10);
    k = std::min(k, draws.size() - 1);
    double threshold = draws[draws.size() - 1 - k];
    double beta = 0.0;
    for (size_t s = draws.size() - k; s < draws.size(); ++s) beta += draws[s] - threshold;
    beta /= static_cast<double>(k);
    // The exceedance-scale estimate carries ~1/sqrt(k) relative noise; use
    // its upper confidence value so the extrapolated tail errs flat.
    beta *= 1.0 + 2.0 / std::sqrt(static_cast<double>(k));
    double p;
    if (!(beta > 0.0)) {
      p = DBL_MIN;
    } else {
      double log_p = std::log(static_cast<double>(k) / static_cast<double>(B + 1)) -
                     (observed - threshold) / beta;
      p = std::exp(log_p);
      if (p < DBL_MIN) p = DBL_MIN;
    }
    return std::min(p, base);
  };

  PairTestResult res;
  res.delta_plus = orig.delta_plus;
  res.delta_minus = orig.delta_minus;
  res.delta_zero = orig.delta_zero;
  res.n_joint = orig.n_joint;
  res.p_plus = p_value(count_plus, draws_plus, orig.delta_plus);
  res.p_minus = p_value(count_minus, draws_minus, orig.delta_minus);
  res.p_zero = p_value(count_zero, draws_zero, orig.delta_zero);
  return res;
}

}  // namespace

std::vector<double> kernel_regression(const std::vector<std::vector<double>>& xs,
                                      const std::vector<double>& ys,
                                      const std::vector<std::vector<double>>& eval_grid,
                                      const std::vector<double>& h) {
  if (xs.empty() || xs.size() != ys.size())
    fail(ErrorCode::invalid_argument, "kernel regression needs a non-empty (x, y) sample");
  for (double hd : h)
    if (!(hd > 0.0)) fail(ErrorCode::invalid_argument, "bandwidth must be positive");
  const size_t d = h.size();
  for (const auto& x : xs)
    if (x.size() != d) fail(ErrorCode::invalid_argument, "covariate dimension mismatch");
  std::vector<double> out(eval_grid.size(), nan_value());
  for (size_t g = 0; g < eval_grid.size(); ++g) {
    if (eval_grid[g].size() != d) fail(ErrorCode::invalid_argument, "grid dimension mismatch");
    double num = 0.0, den = 0.0;
    for (size_t r = 0; r < xs.size(); ++r) {
      double k = epanechnikov_product(xs[r], eval_grid[g], h);
      num += k * ys[r];
      den += k;
    }
    if (den >= kDenominatorFloor) out[g] = num / den;
  }
  return out;
}

StatisticTriplet statistic_triplet(const MarketPanel& panel, int i, int j, const IndexSpec& index,
                                   const TestConfig& cfg) {
  cfg.validate();
  bool swapped = i > j;
  PairContext ctx = build_context(panel, swapped ? j : i, swapped ? i : j, index, cfg);
  StatisticTriplet t = ctx.original;
  if (swapped) std::swap(t.delta_plus, t.delta_minus);
  return t;
}

PairTestResult bootstrap_pvalues(const MarketPanel& panel, int i, int j, const IndexSpec& index,
                                 const TestConfig& cfg) {
  cfg.validate();
  bool swapped = i > j;
  PairTestResult res =
      bootstrap_pair_canonical(panel, swapped ? j : i, swapped ? i : j, index, cfg);
  if (swapped) {
    std::swap(res.delta_plus, res.delta_minus);
    std::swap(res.p_plus, res.p_minus);
  }
  return res;
}

PValueMatrices pvalue_matrices(const MarketPanel& panel, const ComparabilityGraph& graph,
                               const IndexSpec& index, const TestConfig& cfg) {
  cfg.validate();
  if (graph.n != panel.n_agents())
    fail(ErrorCode::invalid_argument, "graph and panel roster sizes differ");
  PValueMatrices out;
  out.init(panel.roster);
  out.markets = panel.n_markets();

  const auto& edges = graph.edges;
  std::vector<PairTestResult> results(edges.size());
  std::vector<std::string> failures(edges.size());
  parallel_for(edges.size(), cfg.threads, [&](size_t e) {
    auto [i, j] = edges[e];
    try {
      results[e] = bootstrap_pair_canonical(panel, i, j, index, cfg);
    } catch (const Error& err) {
      failures[e] = panel.roster[i] + "/" + panel.roster[j] + ": " + err.what();
    }
  });

  std::string failure_list;
  int n_failures = 0;
  for (size_t e = 0; e < edges.size(); ++e) {
    if (!failures[e].empty()) {
      ++n_failures;
      if (!failure_list.empty()) failure_list += "; ";
      failure_list += failures[e];
      continue;
    }
    auto [i, j] = edges[e];
    const PairTestResult& r = results[e];
    out.p_plus.at(i, j) = r.p_plus;
    out.p_plus.at(j, i) = r.p_minus;
    out.p_minus.at(i, j) = r.p_minus;
    out.p_minus.at(j, i) = r.p_plus;
    out.p_zero.at(i, j) = r.p_zero;
    out.p_zero.at(j, i) = r.p_zero;
    out.delta_plus.at(i, j) = r.delta_plus;
    out.delta_plus.at(j, i) = r.delta_minus;
    out.delta_zero.at(i, j) = r.delta_zero;
    out.delta_zero.at(j, i) = r.delta_zero;
    out.joint_counts.at(i, j) = r.n_joint;
    out.joint_counts.at(j, i) = r.n_joint;
  }
  if (n_failures > 0 && graph.complete()) {
    fail(ErrorCode::insufficient_data,
         "pairs failed under a complete-graph requirement: " + failure_list);
  }
  out.complete = graph.complete() && n_failures == 0;
  return out;
}

}  // namespace pairclass
