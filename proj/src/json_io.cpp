#include "pairclass/json_io.hpp"

#include <cmath>
#include <cstdio>

#include "pairclass/rng.hpp"
#include "pairclass/version.hpp"

namespace pairclass {

std::string version_string() { return PAIRCLASS_VERSION; }

std::string content_digest_hex(const std::string& bytes) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%016llx",
           static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string("fnv1a64:") + buf;
}

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["subcommand"] = subcommand;
  j["version"] = version_string();
  if (has_seed)
    j["seed"] = seed;
  else
    j["seed"] = nullptr;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  ordered_json in = ordered_json::object();
  for (const auto& [k, v] : inputs) in[k] = v;
  j["inputs"] = in;
  return j;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.n; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.n; ++j) {
      double v = m.at(i, j);
      if (std::isnan(v))
        row.push_back(nullptr);
      else
        row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const ordered_json& j) {
  if (!j.is_array()) fail(ErrorCode::parse, "matrix must be an array of rows");
  Matrix m(static_cast<int>(j.size()));
  for (int i = 0; i < m.n; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != m.n)
      fail(ErrorCode::parse, "matrix rows must be square");
    for (int k = 0; k < m.n; ++k) {
      if (row[k].is_null())
        m.at(i, k) = nan_value();
      else
        m.at(i, k) = row[k].get<double>();
    }
  }
  return m;
}

namespace {

ordered_json count_matrix_to_json(const CountMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.n; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.n; ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

CountMatrix count_matrix_from_json(const ordered_json& j) {
  CountMatrix m(static_cast<int>(j.size()));
  for (int i = 0; i < m.n; ++i)
    for (int k = 0; k < m.n; ++k) m.at(i, k) = j[i][k].get<int64_t>();
  return m;
}

std::string format_double(double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ordered_json pvalues_to_json(const PValueMatrices& pv, const IndexSpec& index,
                             const TestConfig& cfg, int64_t threshold) {
  ordered_json j;
  j["roster"] = pv.roster;
  j["markets"] = pv.markets;
  j["index"] = index_kind_name(index.kind);
  j["orientation"] = orientation_name(index.orientation);
  ordered_json c;
  c["draws"] = cfg.draws;
  c["grid"] = cfg.grid;
  c["trim_lo"] = cfg.trim_lo;
  c["trim_hi"] = cfg.trim_hi;
  c["bandwidth_c"] = cfg.bandwidth_c;
  c["bandwidth_exponent"] = cfg.bandwidth_exponent;
  c["kernel"] = "epanechnikov";
  c["seed"] = cfg.seed;
  c["threshold"] = threshold;
  j["config"] = c;
  j["complete"] = pv.complete;
  j["joint_counts"] = count_matrix_to_json(pv.joint_counts);
  j["p_plus"] = matrix_to_json(pv.p_plus);
  j["p_minus"] = matrix_to_json(pv.p_minus);
  j["p_zero"] = matrix_to_json(pv.p_zero);
  j["delta_plus"] = matrix_to_json(pv.delta_plus);
  j["delta_zero"] = matrix_to_json(pv.delta_zero);
  return j;
}

PValueMatrices pvalues_from_json(const ordered_json& j) {
  PValueMatrices pv;
  if (!j.contains("roster") || !j.contains("p_plus") || !j.contains("p_minus") ||
      !j.contains("p_zero"))
    fail(ErrorCode::schema, "p-value file must contain roster, p_plus, p_minus, p_zero");
  pv.roster = j.at("roster").get<std::vector<std::string>>();
  pv.n = static_cast<int>(pv.roster.size());
  pv.p_plus = matrix_from_json(j.at("p_plus"));
  pv.p_minus = matrix_from_json(j.at("p_minus"));
  pv.p_zero = matrix_from_json(j.at("p_zero"));
  if (pv.p_plus.n != pv.n || pv.p_minus.n != pv.n || pv.p_zero.n != pv.n)
    fail(ErrorCode::schema, "matrix sizes do not match the roster");
  pv.delta_plus = j.contains("delta_plus") ? matrix_from_json(j.at("delta_plus")) : Matrix(pv.n);
  pv.delta_zero = j.contains("delta_zero") ? matrix_from_json(j.at("delta_zero")) : Matrix(pv.n);
  pv.joint_counts =
      j.contains("joint_counts") ? count_matrix_from_json(j.at("joint_counts")) : CountMatrix(pv.n);
  pv.complete = j.value("complete", false);
  pv.markets = j.value("markets", 0);
  return pv;
}

ordered_json classification_to_json(const std::vector<std::string>& roster,
                                    const SelectKResult& result, int markets, int fixed_k,
                                    double r_value, double g_value) {
  ordered_json j;
  j["roster"] = roster;
  j["K_hat"] = result.k_hat;
  ordered_json groups = ordered_json::array();
  for (const auto& group : result.partition.groups) {
    ordered_json ids = ordered_json::array();
    for (int a : group) ids.push_back(roster[a]);
    groups.push_back(std::move(ids));
  }
  j["groups"] = groups;
  j["objective_trace"] = result.objective_trace;
  j["goodness_trace"] = result.goodness_trace;
  j["truncated"] = result.truncated;
  j["achieved_K"] = result.achieved_k;
  ordered_json c;
  c["markets"] = markets;
  if (fixed_k > 0)
    c["K"] = fixed_k;
  else
    c["K"] = nullptr;
  c["r_L"] = r_value;
  c["g_L"] = g_value;
  j["config"] = c;
  return j;
}

ordered_json identification_to_json(const std::vector<std::string>& vertices,
                                    const IdentificationReport& report) {
  ordered_json j;
  j["identified"] = report.identified;
  j["has_full_monotone_path"] = report.has_full_monotone_path;
  ordered_json ids = ordered_json::array();
  for (int v : report.n_star) ids.push_back(vertices[v]);
  j["n_star"] = ids;
  j["K0_used"] = report.k0_used;
  j["longest_monotone_path"] = report.longest_monotone_path;
  j["inferred_K0"] = report.inferred_k0;
  return j;
}

ComparabilityGraph graph_from_json(const ordered_json& j, std::vector<std::string>& vertices_out) {
  if (!j.contains("vertices") || !j.contains("edges"))
    fail(ErrorCode::schema, "graph file must contain vertices and edges");
  vertices_out = j.at("vertices").get<std::vector<std::string>>();
  auto index_of = [&](const std::string& id) {
    for (size_t v = 0; v < vertices_out.size(); ++v)
      if (vertices_out[v] == id) return static_cast<int>(v);
    fail(ErrorCode::schema, "edge endpoint '" + id + "' is not a vertex");
  };
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) fail(ErrorCode::schema, "edges must be pairs");
    edges.emplace_back(index_of(e[0].get<std::string>()), index_of(e[1].get<std::string>()));
  }
  return ComparabilityGraph::make(static_cast<int>(vertices_out.size()), std::move(edges));
}

std::vector<int> tau_from_json(const ordered_json& j, const std::vector<std::string>& vertices) {
  std::vector<int> tau(vertices.size(), 0);
  for (size_t v = 0; v < vertices.size(); ++v) {
    if (!j.contains(vertices[v]))
      fail(ErrorCode::schema, "tau file missing type for vertex '" + vertices[v] + "'");
    tau[v] = j.at(vertices[v]).get<int>();
    if (tau[v] < 1) fail(ErrorCode::schema, "types must be positive integers");
  }
  return tau;
}

ordered_json confidence_to_json(const std::vector<std::string>& roster,
                                const ConfidenceResult& result, const ConfidenceConfig& cfg) {
  ordered_json j;
  j["roster"] = roster;
  j["group_index"] = result.group_index;
  j["alpha"] = result.alpha;
  j["K_hat"] = result.k_hat;
  ordered_json groups = ordered_json::array();
  for (const auto& group : result.base_partition.groups) {
    ordered_json ids = ordered_json::array();
    for (int a : group) ids.push_back(roster[a]);
    groups.push_back(std::move(ids));
  }
  j["groups"] = groups;
  ordered_json base = ordered_json::array();
  for (int a : result.base_group) base.push_back(roster[a]);
  j["group"] = base;
  j["m_star"] = result.m_star;
  ordered_json set = ordered_json::array();
  for (int a : result.set) set.push_back(roster[a]);
  j["set"] = set;
  j["pi_curve"] = result.pi_curve;
  j["pi_raw"] = result.pi_raw;
  j["mismatched_draws"] = result.mismatched_draws;
  j["failed_draws"] = result.failed_draws;
  j["reached_level"] = result.reached_level;
  ordered_json c;
  c["draws"] = cfg.draws;
  c["inner_draws"] = cfg.test.draws;
  c["index"] = index_kind_name(cfg.index.kind);
  c["orientation"] = orientation_name(cfg.index.orientation);
  c["threshold"] = cfg.threshold;
  c["seed"] = cfg.seed;
  j["config"] = c;
  return j;
}

std::string montecarlo_to_csv(const MonteCarloResult& result) {
  std::string out = "n,L,D_mu,K0,mean_K,EAD";
  for (const auto& [lambda, _] : result.had) {
    char head[32];
    snprintf(head, sizeof(head), ",HAD_%02d", static_cast<int>(std::lround(lambda * 100)));
    out += head;
  }
  out += "\n";
  out += std::to_string(result.n) + "," + std::to_string(result.markets) + "," +
         format_double(result.d_mu) + "," + std::to_string(result.k0) + "," +
         format_double(result.mean_k) + "," + format_double(result.ead);
  for (const auto& [_, rate] : result.had) out += "," + format_double(rate);
  out += "\n";
  return out;
}

ordered_json twostep_to_json(const TwoStepReport& report, const TwoStepConfig& cfg) {
  ordered_json j;
  j["mu_true"] = report.mu_true;
  j["sigma_true"] = report.sigma_true;
  j["replications"] = report.replications;
  j["failed_replications"] = report.failed_replications;
  j["agreement_rate"] = report.agreement_rate;
  auto dump_vec = [](const std::vector<double>& v) {
    ordered_json arr = ordered_json::array();
    for (double x : v) {
      if (std::isnan(x))
        arr.push_back(nullptr);
      else
        arr.push_back(x);
    }
    return arr;
  };
  j["bias_estimated"] = dump_vec(report.bias_estimated);
  j["mse_estimated"] = dump_vec(report.mse_estimated);
  j["bias_true_groups"] = dump_vec(report.bias_true_groups);
  j["mse_true_groups"] = dump_vec(report.mse_true_groups);
  j["K_hat"] = report.k_hat;
  ordered_json hats = ordered_json::array();
  for (const auto& row : report.theta_hat) hats.push_back(dump_vec(row));
  j["theta_hat"] = hats;
  ordered_json tildes = ordered_json::array();
  for (const auto& row : report.theta_tilde) tildes.push_back(dump_vec(row));
  j["theta_tilde"] = tildes;
  ordered_json c;
  c["n"] = cfg.dgp.n;
  c["K0"] = cfg.dgp.k0;
  c["L"] = cfg.dgp.markets;
  c["reps"] = cfg.replications;
  c["draws"] = cfg.test.draws;
  c["seed"] = cfg.seed;
  j["config"] = c;
  return j;
}

}  // namespace pairclass
