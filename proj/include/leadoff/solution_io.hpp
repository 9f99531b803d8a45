#pragma once

// Solution serialization: per-state values, the runner's lead choice, the
// pitcher's response per lead (run-length compressed), and the solve report,
// all ordered by the canonical state index so files diff cleanly. The solve
// wall time stays out of the file to keep reruns byte-identical.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "leadoff/errors.hpp"
#include "leadoff/kernel.hpp"
#include "leadoff/solver.hpp"

namespace leadoff {

struct Solution {
  std::string method;  // "vi" or "pi"
  KernelMode mode = KernelMode::generic;
  std::optional<LeadGrid> grid;
  std::string state_order_hash;
  std::map<std::string, std::string> provenance;  // kernel provenance + CLI additions
  ValueFunction values;
  PolicyPair policy;
  SolveReport report;
};

inline Solution make_solution(const TransitionKernel& k, const ValueFunction& v,
                              const PolicyPair& pol, const SolveReport& rep) {
  Solution s;
  s.method = rep.method;
  s.mode = k.mode;
  s.grid = k.grid;
  s.state_order_hash = k.state_order_hash;
  s.provenance = k.provenance;
  s.values = v;
  s.policy = pol;
  s.report = rep;
  return s;
}

namespace detail {

inline nlohmann::json rle_encode(const std::vector<int>& xs) {
  nlohmann::json runs = nlohmann::json::array();
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    runs.push_back({j - i, xs[i]});
    i = j;
  }
  return runs;
}

inline std::vector<int> rle_decode(const nlohmann::json& runs) {
  std::vector<int> xs;
  for (const auto& r : runs) {
    if (!r.is_array() || r.size() != 2)
      throw data_error("solution: malformed run-length pair");
    long long n = r.at(0).get<long long>();
    int v = r.at(1).get<int>();
    if (n <= 0) throw data_error("solution: run length must be positive");
    xs.insert(xs.end(), static_cast<std::size_t>(n), v);
  }
  return xs;
}

}  // namespace detail

inline nlohmann::json solution_to_json(const Solution& s) {
  nlohmann::json j;
  j["format"] = "leadoff-solution/1";
  j["method"] = s.method;
  j["mode"] = to_string(s.mode);
  if (s.grid)
    j["grid"] = {{"min_ft", s.grid->min_ft},
                 {"max_ft", s.grid->max_ft},
                 {"step_ft", s.grid->step_ft}};
  if (!s.state_order_hash.empty()) j["state_order_hash"] = s.state_order_hash;
  j["provenance"] = s.provenance;

  nlohmann::json rep;
  rep["method"] = s.report.method;
  rep["iterations"] = s.report.iterations;
  rep["tolerance"] = s.report.tolerance;
  rep["final_residual"] = s.report.final_residual;
  rep["converged"] = s.report.converged;
  rep["halting_m"] = s.report.halting_m;
  rep["rho_hat"] = s.report.rho_hat;
  rep["certified_bound"] = s.report.certified_bound;
  rep["residual_history"] = s.report.residual_history;
  j["report"] = rep;

  j["values"] = s.values;
  j["runner_action"] = detail::rle_encode(s.policy.runner);
  nlohmann::json pitcher = nlohmann::json::object();
  for (std::size_t st = 0; st < s.policy.pitcher.size(); ++st) {
    const std::vector<int>& row = s.policy.pitcher[st];
    bool all_zero = true;
    for (int a : row) all_zero = all_zero && a == 0;
    if (row.size() == 1 && all_zero) continue;  // the no-choice default
    pitcher[std::to_string(st)] = detail::rle_encode(row);
  }
  j["pitcher_action"] = pitcher;
  return j;
}

inline Solution solution_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j.at("format").get<std::string>() != "leadoff-solution/1")
    throw data_error("solution: missing or unsupported format marker");
  Solution s;
  s.method = j.at("method").get<std::string>();
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "two-player")
    s.mode = KernelMode::two_player;
  else if (mode == "one-player")
    s.mode = KernelMode::one_player;
  else if (mode == "generic")
    s.mode = KernelMode::generic;
  else
    throw data_error("solution: unknown mode '" + mode + "'");
  if (j.contains("grid")) {
    LeadGrid g;
    g.min_ft = j.at("grid").at("min_ft").get<double>();
    g.max_ft = j.at("grid").at("max_ft").get<double>();
    g.step_ft = j.at("grid").at("step_ft").get<double>();
    g.validate();
    s.grid = g;
  }
  if (j.contains("state_order_hash"))
    s.state_order_hash = j.at("state_order_hash").get<std::string>();
  if (j.contains("provenance"))
    s.provenance = j.at("provenance").get<std::map<std::string, std::string>>();

  const auto& rep = j.at("report");
  s.report.method = rep.at("method").get<std::string>();
  s.report.iterations = rep.at("iterations").get<long long>();
  s.report.tolerance = rep.at("tolerance").get<double>();
  s.report.final_residual = rep.at("final_residual").get<double>();
  s.report.converged = rep.at("converged").get<bool>();
  s.report.halting_m = rep.at("halting_m").get<int>();
  s.report.rho_hat = rep.at("rho_hat").get<double>();
  s.report.certified_bound = rep.at("certified_bound").get<double>();
  s.report.residual_history = rep.at("residual_history").get<std::vector<double>>();

  s.values = j.at("values").get<std::vector<double>>();
  s.policy.runner = detail::rle_decode(j.at("runner_action"));
  if (s.policy.runner.size() != s.values.size())
    throw data_error("solution: runner policy length does not match values");
  s.policy.pitcher.assign(s.values.size(), std::vector<int>{0});
  for (auto it = j.at("pitcher_action").begin(); it != j.at("pitcher_action").end(); ++it) {
    std::size_t st = 0;
    try {
      st = static_cast<std::size_t>(std::stoll(it.key()));
    } catch (const std::exception&) {
      throw data_error("solution: bad pitcher state key '" + it.key() + "'");
    }
    if (st >= s.values.size())
      throw data_error("solution: pitcher state key out of range");
    s.policy.pitcher[st] = detail::rle_decode(it.value());
  }
  return s;
}

inline void save_solution(const std::string& path, const Solution& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open solution file for writing: " + path);
  out << solution_to_json(s).dump(1) << '\n';
  if (!out) throw data_error("failed writing solution file: " + path);
}

inline Solution load_solution(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open solution file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("solution " + path + ": " + e.what());
  }
  try {
    return solution_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw data_error("solution " + path + ": " + e.what());
  }
}

// Check a loaded solution against the kernel it is to be used with and return
// its policy in the kernel's shape.
inline PolicyPair policy_for_kernel(const Solution& s, const TransitionKernel& k) {
  if (static_cast<int>(s.values.size()) != k.n_states)
    throw data_error("solution does not match kernel: state count differs");
  if (!s.state_order_hash.empty() && !k.state_order_hash.empty() &&
      s.state_order_hash != k.state_order_hash)
    throw data_error("solution does not match kernel: state order hash differs");
  for (int st = 0; st < k.n_states; ++st) {
    if (s.policy.runner[st] < 0 || s.policy.runner[st] >= k.n_runner_actions[st])
      throw data_error("solution does not match kernel: runner action out of range at state " +
                       std::to_string(st));
    if (static_cast<int>(s.policy.pitcher[st].size()) != k.n_runner_actions[st])
      throw data_error("solution does not match kernel: pitcher row shape at state " +
                       std::to_string(st));
    for (int a : s.policy.pitcher[st])
      if (a < 0 || a >= k.n_pitcher_actions[st])
        throw data_error("solution does not match kernel: pitcher action out of range at state " +
                         std::to_string(st));
  }
  return s.policy;
}

}  // namespace leadoff
