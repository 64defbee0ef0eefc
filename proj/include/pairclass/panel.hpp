#pragma once

#include <string>
#include <vector>

#include "pairclass/common.hpp"
#include "pairclass/graph.hpp"

namespace pairclass {

// One market: the agents present, their scalar outcomes and covariates.
// Agents are stored as dense roster indices.
struct MarketObservation {
  std::string market_id;
  std::vector<int> agents;                     // dense roster indices, row order preserved
  std::vector<double> outcomes;                // parallel to agents
  std::vector<std::vector<double>> covariates; // parallel to agents, each of dimension d
};

struct MarketPanel {
  std::vector<std::string> roster;  // sorted lexicographically, no duplicates
  std::vector<std::string> covariate_names;
  std::vector<MarketObservation> markets;

  int n_agents() const { return static_cast<int>(roster.size()); }
  int n_markets() const { return static_cast<int>(markets.size()); }
  int covariate_dim() const { return static_cast<int>(covariate_names.size()); }

  int agent_index(const std::string& id) const;  // -1 if absent
  void validate() const;
};

struct PairCoverage {
  CountMatrix counts;  // counts.at(i,i) = markets containing i
  int64_t threshold = 0;

  bool comparable(int i, int j) const {
    return i != j && counts.at(i, j) >= threshold;
  }
};

// CSV long format: header `market_id,agent_id,outcome,x1,...,xd`.
MarketPanel load_panel(const std::string& path);
MarketPanel load_panel_from_string(const std::string& csv_text);
std::string panel_to_csv(const MarketPanel& panel);

PairCoverage pair_coverage(const MarketPanel& panel, int64_t threshold);
ComparabilityGraph comparability_graph(const PairCoverage& coverage);

}  // namespace pairclass
