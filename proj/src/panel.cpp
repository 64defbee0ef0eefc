#include "pairclass/panel.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pairclass {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

double parse_number(const std::string& text, size_t row, const std::string& column) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  double value = 0.0;
  auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end || text.empty()) {
    fail(ErrorCode::parse,
         "row " + std::to_string(row) + ": non-numeric value '" + text + "' in column " + column);
  }
  return value;
}

}  // namespace

int MarketPanel::agent_index(const std::string& id) const {
  auto it = std::lower_bound(roster.begin(), roster.end(), id);
  if (it == roster.end() || *it != id) return -1;
  return static_cast<int>(it - roster.begin());
}

void MarketPanel::validate() const {
  for (size_t k = 1; k < roster.size(); ++k) {
    if (!(roster[k - 1] < roster[k]))
      fail(ErrorCode::invalid_argument, "roster not sorted or has duplicates");
  }
  const int n = n_agents();
  const size_t d = covariate_names.size();
  for (const auto& m : markets) {
    if (m.agents.empty()) fail(ErrorCode::invalid_argument, "market " + m.market_id + " is empty");
    std::set<int> seen;
    for (size_t r = 0; r < m.agents.size(); ++r) {
      int a = m.agents[r];
      if (a < 0 || a >= n) fail(ErrorCode::invalid_argument, "agent index out of roster range");
      if (!seen.insert(a).second)
        fail(ErrorCode::duplicate_row, "agent " + roster[a] + " repeated in market " + m.market_id);
      if (m.covariates[r].size() != d)
        fail(ErrorCode::invalid_argument, "covariate arity mismatch in market " + m.market_id);
    }
    if (m.outcomes.size() != m.agents.size() || m.covariates.size() != m.agents.size())
      fail(ErrorCode::invalid_argument, "ragged market " + m.market_id);
  }
}

MarketPanel load_panel_from_string(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) || line.empty())
    fail(ErrorCode::schema, "empty input: missing header row");
  auto header = split_line(line);
  if (header.size() < 3 || header[0] != "market_id" || header[1] != "agent_id" ||
      header[2] != "outcome") {
    fail(ErrorCode::schema, "header must start with market_id,agent_id,outcome");
  }
  std::vector<std::string> covariate_names(header.begin() + 3, header.end());
  const size_t d = covariate_names.size();

  struct RawRow {
    std::string market;
    std::string agent;
    double outcome;
    std::vector<double> x;
  };
  std::vector<RawRow> rows;
  std::set<std::string> agent_ids;
  size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() != header.size())
      fail(ErrorCode::schema, "row " + std::to_string(row_number) + ": expected " +
                                  std::to_string(header.size()) + " columns, got " +
                                  std::to_string(fields.size()));
    RawRow row;
    row.market = fields[0];
    row.agent = fields[1];
    if (row.market.empty() || row.agent.empty())
      fail(ErrorCode::schema, "row " + std::to_string(row_number) + ": empty identifier");
    row.outcome = parse_number(fields[2], row_number, "outcome");
    row.x.reserve(d);
    for (size_t k = 0; k < d; ++k)
      row.x.push_back(parse_number(fields[3 + k], row_number, covariate_names[k]));
    agent_ids.insert(row.agent);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::schema, "no data rows");

  MarketPanel panel;
  panel.covariate_names = std::move(covariate_names);
  panel.roster.assign(agent_ids.begin(), agent_ids.end());

  std::map<std::string, size_t> market_slot;  // market id -> index in panel.markets
  for (auto& row : rows) {
    auto [it, inserted] = market_slot.try_emplace(row.market, panel.markets.size());
    if (inserted) {
      MarketObservation obs;
      obs.market_id = row.market;
      panel.markets.push_back(std::move(obs));
    }
    MarketObservation& obs = panel.markets[it->second];
    int a = panel.agent_index(row.agent);
    for (int existing : obs.agents) {
      if (existing == a)
        fail(ErrorCode::duplicate_row,
             "duplicate row for agent " + row.agent + " in market " + row.market);
    }
    obs.agents.push_back(a);
    obs.outcomes.push_back(row.outcome);
    obs.covariates.push_back(std::move(row.x));
  }
  panel.validate();
  return panel;
}

MarketPanel load_panel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_panel_from_string(buffer.str());
}

std::string panel_to_csv(const MarketPanel& panel) {
  std::ostringstream out;
  out << "market_id,agent_id,outcome";
  for (const auto& name : panel.covariate_names) out << ',' << name;
  out << '\n';
  char num[64];
  auto put_number = [&](double value) {
    snprintf(num, sizeof(num), "%.17g", value);
    out << num;
  };
  for (const auto& m : panel.markets) {
    for (size_t r = 0; r < m.agents.size(); ++r) {
      out << m.market_id << ',' << panel.roster[m.agents[r]] << ',';
      put_number(m.outcomes[r]);
      for (double x : m.covariates[r]) {
        out << ',';
        put_number(x);
      }
      out << '\n';
    }
  }
  return out.str();
}

PairCoverage pair_coverage(const MarketPanel& panel, int64_t threshold) {
  if (threshold < 2) fail(ErrorCode::invalid_argument, "comparability threshold must be >= 2");
  PairCoverage cov;
  cov.threshold = threshold;
  cov.counts = CountMatrix(panel.n_agents());
  for (const auto& m : panel.markets) {
    for (size_t a = 0; a < m.agents.size(); ++a) {
      cov.counts.at(m.agents[a], m.agents[a]) += 1;
      for (size_t b = a + 1; b < m.agents.size(); ++b) {
        cov.counts.at(m.agents[a], m.agents[b]) += 1;
        cov.counts.at(m.agents[b], m.agents[a]) += 1;
      }
    }
  }
  return cov;
}

ComparabilityGraph comparability_graph(const PairCoverage& coverage) {
  std::vector<std::pair<int, int>> edges;
  const int n = coverage.counts.n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coverage.comparable(i, j)) edges.emplace_back(i, j);
  return ComparabilityGraph::make(n, std::move(edges));
}

ComparabilityGraph ComparabilityGraph::make(int n, std::vector<std::pair<int, int>> edges) {
  ComparabilityGraph g;
  g.n = n;
  for (auto& e : edges) {
    if (e.first == e.second) fail(ErrorCode::invalid_argument, "self-loop in comparability graph");
    if (e.first > e.second) std::swap(e.first, e.second);
    if (e.first < 0 || e.second >= n) fail(ErrorCode::invalid_argument, "edge endpoint out of range");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  g.adjacency.assign(n, {});
  for (auto [i, j] : g.edges) {
    g.adjacency[i].push_back(j);
    g.adjacency[j].push_back(i);
  }
  for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
  return g;
}

bool ComparabilityGraph::has_edge(int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

bool ComparabilityGraph::complete() const {
  return static_cast<int64_t>(edges.size()) == static_cast<int64_t>(n) * (n - 1) / 2;
}

}  // namespace pairclass
