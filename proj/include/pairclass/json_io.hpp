#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pairclass/classifier.hpp"
#include "pairclass/confidence.hpp"
#include "pairclass/engine.hpp"
#include "pairclass/graph.hpp"
#include "pairclass/simulation.hpp"

namespace pairclass {

using ordered_json = nlohmann::ordered_json;

std::string version_string();

// Run provenance attached to every output file.
struct RunManifest {
  std::string subcommand;
  bool has_seed = false;
  uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // flat echo, insertion order kept
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> content digest (fnv1a-64 hex)

  ordered_json to_json() const;
};

std::string content_digest_hex(const std::string& bytes);

ordered_json pvalues_to_json(const PValueMatrices& pv, const IndexSpec& index,
                             const TestConfig& cfg, int64_t threshold);
PValueMatrices pvalues_from_json(const ordered_json& j);

ordered_json classification_to_json(const std::vector<std::string>& roster,
                                    const SelectKResult& result, int markets, int fixed_k,
                                    double r_value, double g_value);

ordered_json identification_to_json(const std::vector<std::string>& vertices,
                                    const IdentificationReport& report);

// graph JSON: {"vertices": [...], "edges": [["a","b"], ...]}
ComparabilityGraph graph_from_json(const ordered_json& j, std::vector<std::string>& vertices_out);
// tau JSON: {"a": 1, "b": 2, ...}
std::vector<int> tau_from_json(const ordered_json& j, const std::vector<std::string>& vertices);

ordered_json confidence_to_json(const std::vector<std::string>& roster,
                                const ConfidenceResult& result, const ConfidenceConfig& cfg);

std::string montecarlo_to_csv(const MonteCarloResult& result);

ordered_json twostep_to_json(const TwoStepReport& report, const TwoStepConfig& cfg);

ordered_json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const ordered_json& j);

}  // namespace pairclass
