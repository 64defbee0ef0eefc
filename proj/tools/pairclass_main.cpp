// pairclass command-line front end. Talks to the library exclusively through
// the C API in pairclass/pairclass.h; every output file carries a run
// manifest (config echo, seed, input digests) for reproducibility.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pairclass/pairclass.h"

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code_of(pc_status status) {
  switch (status) {
    case PC_OK: return 0;
    case PC_ERR_NUMERIC: return kExitNumeric;
    default: return kExitData;
  }
}

[[noreturn]] void die(pc_status status) {
  std::cerr << "pairclass: error: " << pc_last_error() << "\n";
  std::exit(exit_code_of(status));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "pairclass: error: cannot open " << path << "\n";
    std::exit(kExitData);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "pairclass: error: cannot write " << path << "\n";
    std::exit(kExitData);
  }
  out << bytes;
}

// Same digest format the library uses in its own metadata.
std::string digest_hex(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct ManifestBuilder {
  std::string subcommand;
  bool has_seed = false;
  uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> inputs;

  void set(const std::string& key, const std::string& value) { config.emplace_back(key, value); }
  void set(const std::string& key, int64_t value) { set(key, std::to_string(value)); }
  void set_real(const std::string& key, double value) {
    char buf[64];
    snprintf(buf, sizeof(buf), "%.17g", value);
    set(key, std::string(buf));
  }
  void input(const std::string& path, const std::string& bytes) {
    inputs.emplace_back(path, digest_hex(bytes));
  }

  ordered_json to_json() const {
    ordered_json j;
    j["subcommand"] = subcommand;
    j["version"] = pc_version();
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
};

// Wraps a payload JSON string under a manifest and writes it out (or prints
// to stdout when path is empty).
void emit_json(const std::string& path, const ManifestBuilder& manifest,
               const std::string& payload) {
  ordered_json root;
  root["manifest"] = manifest.to_json();
  ordered_json body = ordered_json::parse(payload);
  for (auto& [key, value] : body.items()) root[key] = value;
  std::string text = root.dump(2) + "\n";
  if (path.empty())
    std::cout << text;
  else
    write_file(path, text);
}

struct CommonTestFlags {
  std::string index = "cdf";
  std::string orientation = "value";
  int draws = 199;
  int grid = 100;
  double trim_lo = 0.05, trim_hi = 0.95;
  double bandwidth_c = 1.06;
  double bandwidth_exponent = -0.2;
  int64_t threshold = 30;
  uint64_t seed = 0;
  int threads = 0;

  void attach(CLI::App* cmd, bool with_index = true) {
    if (with_index) {
      cmd->add_option("--index", index, "pairwise index: mean|cdf|presence")
          ->check(CLI::IsMember({"mean", "cdf", "presence"}));
      cmd->add_option("--orientation", orientation,
                      "cdf orientation: value|procurement (default value)")
          ->check(CLI::IsMember({"value", "procurement"}));
    }
    cmd->add_option("--draws", draws, "bootstrap draws B")->check(CLI::PositiveNumber);
    cmd->add_option("--grid", grid, "quadrature grid size");
    cmd->add_option("--trim-lo", trim_lo, "lower trim quantile");
    cmd->add_option("--trim-hi", trim_hi, "upper trim quantile");
    cmd->add_option("--bandwidth-c", bandwidth_c, "bandwidth rule constant");
    cmd->add_option("--bandwidth-exp", bandwidth_exponent, "bandwidth rule exponent");
    cmd->add_option("--threshold", threshold, "pair comparability threshold");
    cmd->add_option("--threads", threads, "worker threads (0 = machine parallelism)");
  }

  pc_test_options to_options() const {
    pc_test_options o;
    pc_test_options_defaults(&o);
    o.index = index == "mean"  ? PC_INDEX_CONDITIONAL_MEAN
              : index == "cdf" ? PC_INDEX_CDF_DOMINANCE
                               : PC_INDEX_PRESENCE_MEAN;
    o.orientation = orientation == "procurement" ? PC_ORIENT_PROCUREMENT : PC_ORIENT_VALUE;
    o.draws = draws;
    o.grid = grid;
    o.trim_lo = trim_lo;
    o.trim_hi = trim_hi;
    o.bandwidth_c = bandwidth_c;
    o.bandwidth_exponent = bandwidth_exponent;
    o.threshold = threshold;
    o.seed = seed;
    o.threads = threads;
    return o;
  }

  void echo(ManifestBuilder& m) const {
    m.set("index", index);
    m.set("orientation", orientation);
    m.set("draws", draws);
    m.set("grid", grid);
    m.set_real("trim_lo", trim_lo);
    m.set_real("trim_hi", trim_hi);
    m.set_real("bandwidth_c", bandwidth_c);
    m.set_real("bandwidth_exp", bandwidth_exponent);
    m.set("threshold", threshold);
    m.set("threads", threads);
  }
};

struct DesignFlags {
  std::string design = "custom";
  int n = 12;
  int k0 = 2;
  int markets = 400;
  double d_mu = 0.6;
  double mu1 = 2.0;
  double sigma = 0.5;
  bool random_pairs = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--design", design, "S1|S2|S3|S4|custom")
        ->check(CLI::IsMember({"S1", "S2", "S3", "S4", "custom"}));
    cmd->add_option("--n", n, "custom design: number of agents");
    cmd->add_option("--K0", k0, "custom design: number of groups");
    cmd->add_option("--L", markets, "number of markets")->check(CLI::PositiveNumber);
    cmd->add_option("--Dmu", d_mu, "difference between adjacent group means");
    cmd->add_option("--mu1", mu1, "lowest group mean");
    cmd->add_option("--sigma", sigma, "outcome standard deviation");
    cmd->add_flag("--random-pairs", random_pairs,
                  "two agents per market drawn from two random groups");
  }

  pc_simulate_options to_options(uint64_t seed) const {
    pc_simulate_options o{};
    o.design = design == "custom" ? nullptr : design.c_str();
    o.n = n;
    o.k0 = k0;
    o.markets = markets;
    o.d_mu = d_mu;
    o.mu1 = mu1;
    o.sigma = sigma;
    o.random_pairs = random_pairs ? 1 : 0;
    o.seed = seed;
    return o;
  }

  void echo(ManifestBuilder& m) const {
    m.set("design", design);
    if (design == "custom") {
      m.set("n", n);
      m.set("K0", k0);
    }
    m.set("L", markets);
    m.set_real("Dmu", d_mu);
    m.set_real("mu1", mu1);
    m.set_real("sigma", sigma);
    m.set("random_pairs", random_pairs ? "true" : "false");
  }
};

void enable_config_file(CLI::App* cmd) {
  cmd->set_config("--config", "", "flat key=value config file (flags take precedence)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ordered group classification from pairwise comparisons"};
  app.set_version_flag("--version", pc_version());
  app.require_subcommand(1);

  // ---- pvalues ----
  auto* cmd_pvalues = app.add_subcommand("pvalues", "pairwise bootstrap p-value matrices");
  CommonTestFlags pv_flags;
  std::string pv_input, pv_out;
  cmd_pvalues->add_option("--input", pv_input, "panel CSV")->required();
  cmd_pvalues->add_option("--out", pv_out, "output JSON path")->required();
  cmd_pvalues->add_option("--seed", pv_flags.seed, "RNG seed")->required();
  pv_flags.attach(cmd_pvalues);
  enable_config_file(cmd_pvalues);

  // ---- classify ----
  auto* cmd_classify = app.add_subcommand("classify", "recover the ordered group structure");
  std::string cl_pvalues, cl_out;
  int cl_markets = 0, cl_fixed_k = 0, cl_k_max = 0;
  cmd_classify->add_option("--pvalues", cl_pvalues, "p-value JSON from `pvalues`")->required();
  cmd_classify->add_option("--markets", cl_markets, "number of markets L")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd_classify->add_option("--K", cl_fixed_k, "classify into exactly K groups");
  cmd_classify->add_option("--K-max", cl_k_max, "largest K scanned when selecting K");
  cmd_classify->add_option("--out", cl_out, "output JSON path")->required();
  enable_config_file(cmd_classify);

  // ---- identify ----
  auto* cmd_identify = app.add_subcommand("identify", "identification diagnostics");
  std::string id_graph, id_tau, id_out;
  int id_k0 = 0;
  cmd_identify->add_option("--graph", id_graph, "comparability graph JSON")->required();
  cmd_identify->add_option("--tau", id_tau, "agent type map JSON")->required();
  cmd_identify->add_option("--K0", id_k0, "number of types (0 = infer from longest path)");
  cmd_identify->add_option("--out", id_out, "output JSON path (default: stdout)");
  enable_config_file(cmd_identify);

  // ---- confidence ----
  auto* cmd_conf = app.add_subcommand("confidence", "bootstrap confidence set for one group");
  CommonTestFlags conf_flags;
  std::string conf_input, conf_out;
  int conf_group = 1, conf_draws = 99;
  double conf_alpha = 0.05;
  uint64_t conf_seed = 0;
  cmd_conf->add_option("--input", conf_input, "panel CSV")->required();
  cmd_conf->add_option("--group-index", conf_group, "1-based group index k")->required();
  cmd_conf->add_option("--alpha", conf_alpha, "level: coverage target is 1 - alpha");
  cmd_conf->add_option("--draws", conf_draws, "outer bootstrap draws B2")->required();
  cmd_conf->add_option("--seed", conf_seed, "RNG seed")->required();
  cmd_conf->add_option("--inner-draws", conf_flags.draws, "inner p-value bootstrap draws");
  cmd_conf->add_option("--out", conf_out, "output JSON path")->required();
  conf_flags.attach(cmd_conf);
  enable_config_file(cmd_conf);

  // ---- simulate ----
  auto* cmd_sim = app.add_subcommand("simulate", "generate a synthetic market panel");
  DesignFlags sim_design;
  std::string sim_out;
  uint64_t sim_seed = 0;
  cmd_sim->add_option("--seed", sim_seed, "RNG seed")->required();
  cmd_sim->add_option("--out", sim_out, "output CSV path")->required();
  sim_design.attach(cmd_sim);
  enable_config_file(cmd_sim);

  // ---- montecarlo ----
  auto* cmd_mc = app.add_subcommand("montecarlo", "replicated classification study");
  DesignFlags mc_design;
  CommonTestFlags mc_flags;
  std::string mc_out;
  int mc_reps = 200;
  uint64_t mc_seed = 0;
  cmd_mc->add_option("--reps", mc_reps, "replications")->check(CLI::PositiveNumber);
  cmd_mc->add_option("--seed", mc_seed, "RNG seed")->required();
  cmd_mc->add_option("--out", mc_out, "output CSV path")->required();
  mc_design.attach(cmd_mc);
  mc_flags.attach(cmd_mc);
  enable_config_file(cmd_mc);

  // ---- twostep ----
  auto* cmd_ts = app.add_subcommand("twostep", "classification-then-estimation experiment");
  DesignFlags ts_design;
  ts_design.design = "custom";
  ts_design.n = 16;
  ts_design.k0 = 4;
  ts_design.d_mu = 0.4;
  CommonTestFlags ts_flags;
  ts_flags.index = "presence";
  std::string ts_out;
  int ts_reps = 200;
  uint64_t ts_seed = 0;
  cmd_ts->add_option("--reps", ts_reps, "replications")->check(CLI::PositiveNumber);
  cmd_ts->add_option("--seed", ts_seed, "RNG seed")->required();
  cmd_ts->add_option("--out", ts_out, "output JSON path")->required();
  ts_design.attach(cmd_ts);
  ts_flags.attach(cmd_ts);
  enable_config_file(cmd_ts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << pc_version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "pairclass: " << e.what() << "\n";
    return kExitUsage;
  }

  if (cmd_pvalues->parsed()) {
    std::string csv = read_file(pv_input);
    pc_panel* panel = nullptr;
    pc_status st = pc_panel_parse_csv(csv.c_str(), &panel);
    if (st != PC_OK) die(st);
    pc_pvalues* pv = nullptr;
    pc_test_options opts = pv_flags.to_options();
    st = pc_pvalues_compute(panel, &opts, &pv);
    if (st != PC_OK) die(st);
    char* payload = nullptr;
    st = pc_pvalues_to_json(pv, &payload);
    if (st != PC_OK) die(st);
    ManifestBuilder m;
    m.subcommand = "pvalues";
    m.has_seed = true;
    m.seed = pv_flags.seed;
    pv_flags.echo(m);
    m.input(pv_input, csv);
    emit_json(pv_out, m, payload);
    pc_string_free(payload);
    pc_pvalues_free(pv);
    pc_panel_free(panel);
    return 0;
  }

  if (cmd_classify->parsed()) {
    std::string text = read_file(cl_pvalues);
    pc_pvalues* pv = nullptr;
    pc_status st = pc_pvalues_parse_json(text.c_str(), &pv);
    if (st != PC_OK) die(st);
    pc_classify_options opts{};
    opts.fixed_k = cl_fixed_k;
    opts.k_max = cl_k_max;
    opts.markets = cl_markets;
    char* payload = nullptr;
    st = pc_classify(pv, &opts, &payload);
    if (st != PC_OK) die(st);
    ManifestBuilder m;
    m.subcommand = "classify";
    m.set("markets", cl_markets);
    m.set("K", cl_fixed_k);
    m.set("K_max", cl_k_max);
    m.input(cl_pvalues, text);
    emit_json(cl_out, m, payload);
    pc_string_free(payload);
    pc_pvalues_free(pv);
    return 0;
  }

  if (cmd_identify->parsed()) {
    std::string graph_text = read_file(id_graph);
    std::string tau_text = read_file(id_tau);
    char* payload = nullptr;
    pc_status st = pc_identify(graph_text.c_str(), tau_text.c_str(), id_k0, &payload);
    if (st != PC_OK) die(st);
    ManifestBuilder m;
    m.subcommand = "identify";
    m.set("K0", id_k0);
    m.input(id_graph, graph_text);
    m.input(id_tau, tau_text);
    emit_json(id_out, m, payload);
    pc_string_free(payload);
    return 0;
  }

  if (cmd_conf->parsed()) {
    std::string csv = read_file(conf_input);
    pc_panel* panel = nullptr;
    pc_status st = pc_panel_parse_csv(csv.c_str(), &panel);
    if (st != PC_OK) die(st);
    pc_confidence_options opts{};
    opts.test = conf_flags.to_options();
    opts.test.seed = conf_seed;  // p-value streams derive from the run seed
    opts.group_index = conf_group;
    opts.alpha = conf_alpha;
    opts.draws = conf_draws;
    opts.seed = conf_seed;
    char* payload = nullptr;
    st = pc_confidence(panel, &opts, &payload);
    if (st != PC_OK) die(st);
    ManifestBuilder m;
    m.subcommand = "confidence";
    m.has_seed = true;
    m.seed = conf_seed;
    m.set("group_index", conf_group);
    m.set_real("alpha", conf_alpha);
    m.set("outer_draws", conf_draws);
    conf_flags.echo(m);
    m.input(conf_input, csv);
    emit_json(conf_out, m, payload);
    pc_string_free(payload);
    pc_panel_free(panel);
    return 0;
  }

  if (cmd_sim->parsed()) {
    pc_panel* panel = nullptr;
    char* groups = nullptr;
    pc_simulate_options opts = sim_design.to_options(sim_seed);
    pc_status st = pc_simulate(&opts, &panel, &groups);
    if (st != PC_OK) die(st);
    char* csv = nullptr;
    st = pc_panel_to_csv(panel, &csv);
    if (st != PC_OK) die(st);
    write_file(sim_out, csv);
    ManifestBuilder m;
    m.subcommand = "simulate";
    m.has_seed = true;
    m.seed = sim_seed;
    sim_design.echo(m);
    ordered_json sidecar;
    sidecar["manifest"] = m.to_json();
    sidecar["output"] = sim_out;
    sidecar["true_groups"] = ordered_json::parse(groups);
    write_file(sim_out + ".manifest.json", sidecar.dump(2) + "\n");
    pc_string_free(csv);
    pc_string_free(groups);
    pc_panel_free(panel);
    return 0;
  }

  if (cmd_mc->parsed()) {
    pc_montecarlo_options opts{};
    opts.dgp = mc_design.to_options(mc_seed);
    opts.test = mc_flags.to_options();
    opts.replications = mc_reps;
    opts.seed = mc_seed;
    opts.threads = mc_flags.threads;
    char* csv = nullptr;
    pc_status st = pc_montecarlo(&opts, &csv);
    if (st != PC_OK) die(st);
    write_file(mc_out, csv);
    ManifestBuilder m;
    m.subcommand = "montecarlo";
    m.has_seed = true;
    m.seed = mc_seed;
    m.set("reps", mc_reps);
    mc_design.echo(m);
    mc_flags.echo(m);
    ordered_json sidecar;
    sidecar["manifest"] = m.to_json();
    sidecar["output"] = mc_out;
    write_file(mc_out + ".manifest.json", sidecar.dump(2) + "\n");
    pc_string_free(csv);
    return 0;
  }

  if (cmd_ts->parsed()) {
    pc_twostep_options opts{};
    opts.dgp = ts_design.to_options(ts_seed);
    opts.dgp.random_pairs = 1;
    opts.test = ts_flags.to_options();
    opts.replications = ts_reps;
    opts.seed = ts_seed;
    opts.threads = ts_flags.threads;
    char* payload = nullptr;
    pc_status st = pc_twostep(&opts, &payload);
    if (st != PC_OK) die(st);
    ManifestBuilder m;
    m.subcommand = "twostep";
    m.has_seed = true;
    m.seed = ts_seed;
    m.set("reps", ts_reps);
    ts_design.echo(m);
    ts_flags.echo(m);
    emit_json(ts_out, m, payload);
    pc_string_free(payload);
    return 0;
  }

  std::cerr << app.help();
  return kExitUsage;
}
