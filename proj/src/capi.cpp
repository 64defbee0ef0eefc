#include "pairclass/pairclass.h"

#include <cstring>
#include <new>
#include <string>

#include "pairclass/classifier.hpp"
#include "pairclass/confidence.hpp"
#include "pairclass/engine.hpp"
#include "pairclass/json_io.hpp"
#include "pairclass/panel.hpp"
#include "pairclass/parallel.hpp"
#include "pairclass/simulation.hpp"
#include "pairclass/version.hpp"

using namespace pairclass;

struct pc_panel {
  MarketPanel panel;
};

struct pc_pvalues {
  PValueMatrices matrices;
  IndexSpec index;
  TestConfig config;
  int64_t threshold = 30;
};

namespace {

thread_local std::string t_last_error;

pc_status status_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::invalid_argument:
      return PC_ERR_INVALID;
    case ErrorCode::schema:
    case ErrorCode::duplicate_row:
    case ErrorCode::parse:
      return PC_ERR_DATA;
    case ErrorCode::io:
      return PC_ERR_IO;
    default:
      return PC_ERR_NUMERIC;
  }
}

template <typename Fn>
pc_status guarded(Fn&& fn) {
  try {
    fn();
    return PC_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return PC_ERR_NUMERIC;
  } catch (...) {
    t_last_error = "unknown failure";
    return PC_ERR_NUMERIC;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

TestConfig to_test_config(const pc_test_options& o) {
  TestConfig cfg;
  cfg.draws = o.draws;
  cfg.grid = o.grid;
  cfg.trim_lo = o.trim_lo;
  cfg.trim_hi = o.trim_hi;
  cfg.bandwidth_c = o.bandwidth_c;
  cfg.bandwidth_exponent = o.bandwidth_exponent;
  cfg.seed = o.seed;
  cfg.threads = o.threads <= 0 ? default_thread_count() : o.threads;
  return cfg;
}

IndexSpec to_index_spec(const pc_test_options& o) {
  IndexSpec spec;
  spec.kind = o.index == PC_INDEX_CONDITIONAL_MEAN ? IndexKind::conditional_mean
              : o.index == PC_INDEX_CDF_DOMINANCE  ? IndexKind::cdf_dominance
                                                   : IndexKind::presence_mean;
  spec.orientation =
      o.orientation == PC_ORIENT_PROCUREMENT ? CdfOrientation::procurement : CdfOrientation::value;
  return spec;
}

DgpNormalBids to_dgp(const pc_simulate_options& o) {
  DgpNormalBids dgp;
  if (o.design != nullptr && o.design[0] != '\0' && std::string(o.design) != "custom") {
    dgp = DgpNormalBids::design(o.design, o.markets, o.d_mu, o.mu1, o.sigma);
  } else {
    dgp.n = o.n;
    dgp.k0 = o.k0;
    if (o.k0 < 1 || o.n < 1 || o.n % o.k0 != 0)
      fail(ErrorCode::invalid_argument, "custom design needs K0 >= 1 dividing n");
    dgp.group_sizes.assign(o.k0, o.n / o.k0);
    for (int k = 0; k < o.k0; ++k) dgp.mu.push_back(o.mu1 + o.d_mu * static_cast<double>(k));
    dgp.sigma = o.sigma;
    dgp.markets = o.markets;
  }
  dgp.participation = o.random_pairs ? Participation::random_pairs : Participation::full;
  dgp.validate();
  return dgp;
}

ordered_json partition_to_json(const std::vector<std::string>& roster, const OrderedPartition& t) {
  ordered_json groups = ordered_json::array();
  for (const auto& group : t.groups) {
    ordered_json ids = ordered_json::array();
    for (int a : group) ids.push_back(roster[a]);
    groups.push_back(std::move(ids));
  }
  return groups;
}

}  // namespace

extern "C" {

const char* pc_version(void) { return PAIRCLASS_VERSION; }

const char* pc_last_error(void) { return t_last_error.c_str(); }

void pc_string_free(char* s) { delete[] s; }

void pc_test_options_defaults(pc_test_options* opts) {
  if (opts == nullptr) return;
  opts->index = PC_INDEX_CDF_DOMINANCE;
  opts->orientation = PC_ORIENT_VALUE;
  TestConfig cfg;
  opts->draws = cfg.draws;
  opts->grid = cfg.grid;
  opts->trim_lo = cfg.trim_lo;
  opts->trim_hi = cfg.trim_hi;
  opts->bandwidth_c = cfg.bandwidth_c;
  opts->bandwidth_exponent = cfg.bandwidth_exponent;
  opts->threshold = 30;
  opts->seed = 0;
  opts->threads = 0;
}

pc_status pc_panel_load_csv(const char* path, pc_panel** out) {
  return guarded([&] {
    if (path == nullptr || out == nullptr) fail(ErrorCode::invalid_argument, "null argument");
    auto* handle = new pc_panel{load_panel(path)};
    *out = handle;
  });
}

pc_status pc_panel_parse_csv(const char* csv_text, pc_panel** out) {
  return guarded([&] {
    if (csv_text == nullptr || out == nullptr) fail(ErrorCode::invalid_argument, "null argument");
    auto* handle = new pc_panel{load_panel_from_string(csv_text)};
    *out = handle;
  });
}

pc_status pc_panel_to_csv(const pc_panel* panel, char** out) {
  return guarded([&] {
    if (panel == nullptr || out == nullptr) fail(ErrorCode::invalid_argument, "null argument");
    *out = copy_string(panel_to_csv(panel->panel));
  });
}

int pc_panel_agent_count(const pc_panel* panel) {
  return panel == nullptr ? 0 : panel->panel.n_agents();
}

int pc_panel_market_count(const pc_panel* panel) {
  return panel == nullptr ? 0 : panel->panel.n_markets();
}

const char* pc_panel_agent_id(const pc_panel* panel, int index) {
  if (panel == nullptr || index < 0 || index >= panel->panel.n_agents()) return nullptr;
  return panel->panel.roster[index].c_str();
}

void pc_panel_free(pc_panel* panel) { delete panel; }

pc_status pc_pvalues_compute(const pc_panel* panel, const pc_test_options* opts, pc_pvalues** out) {
  return guarded([&] {
    if (panel == nullptr || opts == nullptr || out == nullptr)
      fail(ErrorCode::invalid_argument, "null argument");
    auto* handle = new pc_pvalues;
    try {
      handle->index = to_index_spec(*opts);
      handle->config = to_test_config(*opts);
      handle->threshold = opts->threshold;
      PairCoverage coverage = pair_coverage(panel->panel, opts->threshold);
      ComparabilityGraph graph = comparability_graph(coverage);
      handle->matrices = pvalue_matrices(panel->panel, graph, handle->index, handle->config);
    } catch (...) {
      delete handle;
      throw;
    }
    *out = handle;
  });
}

pc_status pc_pvalues_to_json(const pc_pvalues* pv, char** out) {
  return guarded([&] {
    if (pv == nullptr || out == nullptr) fail(ErrorCode::invalid_argument, "null argument");
    *out = copy_string(
        pvalues_to_json(pv->matrices, pv->index, pv->config, pv->threshold).dump(2));
  });
}

pc_status pc_pvalues_parse_json(const char* json_text, pc_pvalues** out) {
  return guarded([&] {
    if (json_text == nullptr || out == nullptr) fail(ErrorCode::invalid_argument, "null argument");
    ordered_json j = ordered_json::parse(json_text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::parse, "invalid JSON");
    auto* handle = new pc_pvalues;
    try {
      handle->matrices = pvalues_from_json(j);
    } catch (...) {
      delete handle;
      throw;
    }
    *out = handle;
  });
}

void pc_pvalues_free(pc_pvalues* pv) { delete pv; }

pc_status pc_classify(const pc_pvalues* pv, const pc_classify_options* opts, char** json_out) {
  return guarded([&] {
    if (pv == nullptr || opts == nullptr || json_out == nullptr)
      fail(ErrorCode::invalid_argument, "null argument");
    ClassifierConfig cfg;
    cfg.k_max = opts->k_max;
    std::vector<int> roster(pv->matrices.n);
    for (int a = 0; a < pv->matrices.n; ++a) roster[a] = a;
    SelectKResult result;
    if (opts->fixed_k > 0) {
      result.partition = classify_for_k(roster, pv->matrices, opts->fixed_k, cfg, opts->markets);
      result.k_hat = opts->fixed_k;
      result.achieved_k = opts->fixed_k;
      result.goodness_trace = {goodness(result.partition, pv->matrices)};
      result.objective_trace = {result.goodness_trace[0] +
                                opts->fixed_k * cfg.g_of(opts->markets)};
    } else {
      result = select_k(roster, pv->matrices, cfg, opts->markets);
    }
    *json_out = copy_string(classification_to_json(pv->matrices.roster, result, opts->markets,
                                                   opts->fixed_k, cfg.r_of(opts->markets),
                                                   cfg.g_of(opts->markets))
                                .dump(2));
  });
}

pc_status pc_identify(const char* graph_json, const char* tau_json, int k0, char** json_out) {
  return guarded([&] {
    if (graph_json == nullptr || tau_json == nullptr || json_out == nullptr)
      fail(ErrorCode::invalid_argument, "null argument");
    ordered_json gj = ordered_json::parse(graph_json, nullptr, false);
    ordered_json tj = ordered_json::parse(tau_json, nullptr, false);
    if (gj.is_discarded() || tj.is_discarded()) fail(ErrorCode::parse, "invalid JSON");
    std::vector<std::string> vertices;
    ComparabilityGraph graph = graph_from_json(gj, vertices);
    std::vector<int> tau = tau_from_json(tj, vertices);
    IdentificationReport report = check_identified(graph, tau, k0);
    *json_out = copy_string(identification_to_json(vertices, report).dump(2));
  });
}

pc_status pc_confidence(const pc_panel* panel, const pc_confidence_options* opts,
                        char** json_out) {
  return guarded([&] {
    if (panel == nullptr || opts == nullptr || json_out == nullptr)
      fail(ErrorCode::invalid_argument, "null argument");
    ConfidenceConfig cfg;
    cfg.index = to_index_spec(opts->test);
    cfg.test = to_test_config(opts->test);
    cfg.threshold = opts->test.threshold;
    cfg.alpha = opts->alpha;
    cfg.draws = opts->draws;
    cfg.seed = opts->seed;
    cfg.threads = cfg.test.threads;
    cfg.test.threads = 1;  // parallelism lives at the outer draw level
    ConfidenceResult result = confidence_set(panel->panel, opts->group_index, cfg);
    *json_out = copy_string(confidence_to_json(panel->panel.roster, result, cfg).dump(2));
  });
}

pc_status pc_simulate(const pc_simulate_options* opts, pc_panel** out,
                      char** true_groups_json_out) {
  return guarded([&] {
    if (opts == nullptr || out == nullptr) fail(ErrorCode::invalid_argument, "null argument");
    DgpNormalBids dgp = to_dgp(*opts);
    GeneratedPanel gen = generate(dgp, opts->seed);
    if (true_groups_json_out != nullptr) {
      *true_groups_json_out =
          copy_string(partition_to_json(gen.panel.roster, gen.true_partition).dump(2));
    }
    *out = new pc_panel{std::move(gen.panel)};
  });
}

pc_status pc_montecarlo(const pc_montecarlo_options* opts, char** csv_out) {
  return guarded([&] {
    if (opts == nullptr || csv_out == nullptr) fail(ErrorCode::invalid_argument, "null argument");
    MonteCarloConfig cfg;
    cfg.dgp = to_dgp(opts->dgp);
    cfg.replications = opts->replications;
    cfg.index = to_index_spec(opts->test);
    cfg.test = to_test_config(opts->test);
    cfg.threads = cfg.test.threads;
    cfg.test.threads = 1;
    cfg.threshold = opts->test.threshold;
    cfg.seed = opts->seed;
    MonteCarloResult result = run_montecarlo(cfg);
    *csv_out = copy_string(montecarlo_to_csv(result));
  });
}

pc_status pc_twostep(const pc_twostep_options* opts, char** json_out) {
  return guarded([&] {
    if (opts == nullptr || json_out == nullptr) fail(ErrorCode::invalid_argument, "null argument");
    TwoStepConfig cfg;
    pc_simulate_options dgp_opts = opts->dgp;
    dgp_opts.random_pairs = 1;
    cfg.dgp = to_dgp(dgp_opts);
    cfg.replications = opts->replications;
    cfg.index = to_index_spec(opts->test);
    cfg.test = to_test_config(opts->test);
    cfg.threads = cfg.test.threads;
    cfg.test.threads = 1;
    cfg.seed = opts->seed;
    TwoStepReport report = two_step_experiment(cfg);
    *json_out = copy_string(twostep_to_json(report, cfg).dump(2));
  });
}

}  // extern "C"
