// leadoff: estimate the runner-pitcher transition kernel from play-by-play
// data, solve the disengagement game, and inspect the resulting policies.
//
// Subcommands: generate, build-transitions, solve, tables, simulate.
// Exit codes: 0 success, 2 usage, 3 non-convergence, 4 invalid kernel,
// 5 data error. Given identical inputs and seeds, every output file and
// every stdout report is byte-identical; timing goes to stderr.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "leadoff/errors.hpp"
#include "leadoff/game_state.hpp"
#include "leadoff/halting.hpp"
#include "leadoff/kernel.hpp"
#include "leadoff/kernel_builder.hpp"
#include "leadoff/logistic_models.hpp"
#include "leadoff/model_io.hpp"
#include "leadoff/play_records.hpp"
#include "leadoff/pooled_table.hpp"
#include "leadoff/reports.hpp"
#include "leadoff/simulator.hpp"
#include "leadoff/solution_io.hpp"
#include "leadoff/solver.hpp"
#include "leadoff/synthetic.hpp"
#include "leadoff/util.hpp"

namespace {

using namespace leadoff;

constexpr const char* kToolVersion = "1.0.0";

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitInvalidKernel = 4;
constexpr int kExitDataError = 5;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// Everything that determines a command's outputs. The manifest file is a
// sibling of each output file; outputs embed the manifest hash where their
// format has a provenance slot. Wall time is reported on stderr only and the
// output path is not part of the manifest, so a rerun produces identical
// bytes wherever they land.
struct Manifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;  // label -> content hash
};

std::string manifest_body(const Manifest& m) {
  nlohmann::json j;
  j["format"] = "leadoff-manifest/1";
  j["tool_version"] = kToolVersion;
  j["command"] = m.command;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  return j.dump(1) + "\n";
}

// Writes <out_path>.manifest.json and returns the manifest hash.
std::string write_manifest(const std::string& out_path, const Manifest& m) {
  const std::string body = manifest_body(m);
  const std::string hash = hex64(fnv1a64(body));
  const std::string path = out_path + ".manifest.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot write manifest: " + path);
  f << body;
  if (!f) throw data_error("failed writing manifest: " + path);
  return hash;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open output file: " + path);
  f << body;
  if (!f) throw data_error("failed writing output file: " + path);
}

std::string fmt_int(long long v) { return std::to_string(v); }

// ---------------------------------------------------------------------------
// generate: roll innings under the configured behavioral policies and the
// ground-truth outcome models, writing a play-by-play corpus.

struct GenerateArgs {
  std::string config, coeffs, out;
  long long innings = 0;  // 0 keeps the config value
  long long seed = -1;    // <0 keeps the config value
};

int cmd_generate(const GenerateArgs& a) {
  Timer timer;
  GeneratorConfig cfg = load_generator_config(a.config);
  if (a.innings > 0) cfg.innings = a.innings;
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  cfg.validate();
  ModelSet ms = load_model_set(a.coeffs);

  Manifest man;
  man.command = "generate";
  man.config["innings"] = fmt_int(cfg.innings);
  man.config["seed"] = fmt_int(static_cast<long long>(cfg.seed));
  man.inputs["config"] = file_hash_hex(a.config);
  man.inputs["coeffs"] = file_hash_hex(a.coeffs);

  GenerationReport rep;
  std::vector<PlayRecord> records = generate_synthetic_plays(cfg, ms, &rep);
  write_play_records(a.out, records);
  const std::string mh = write_manifest(a.out, man);

  std::cout << "generate: wrote " << records.size() << " plays to " << a.out << '\n';
  std::cout << "innings " << rep.innings << ", truncated " << rep.truncated_innings << '\n';
  std::cout << "agency plays " << rep.agency_plays << ", pickoff attempts "
            << rep.pickoff_attempts << ", steal attempts " << rep.steal_attempts << '\n';
  std::cout << "mean runs/inning " << format_value(static_cast<double>(rep.reward_runs) /
                                                   static_cast<double>(rep.innings))
            << '\n';
  std::cout << "manifest " << mh << '\n';
  std::cerr << "wall time " << timer.seconds() << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// build-transitions: ingest a corpus, pool frequencies, evaluate the outcome
// models on the lead grid, and assemble the full kernel.

struct BuildArgs {
  std::string plays, coeffs, out;
  std::string mode = "two-player";
  std::string missing_lead = "drop";
  double grid_min = 0.0, grid_max = 20.0, grid_step = 0.1;
  std::string runner_id, pitcher_id, catcher_id;
  double sprint_speed = -1, arm_strength = -1;  // <0 means league mean
};

int cmd_build_transitions(const BuildArgs& a) {
  Timer timer;
  IngestOptions iopt;
  if (a.missing_lead == "drop")
    iopt.missing_lead = MissingLeadPolicy::drop;
  else if (a.missing_lead == "impute")
    iopt.missing_lead = MissingLeadPolicy::impute_league_mean;
  else
    throw data_error("--missing-lead must be drop or impute");

  IngestReport irep;
  std::vector<PlayRecord> records = ingest_play_records(a.plays, iopt, &irep);
  PooledFrequencyTable pf = estimate_pooled_frequencies(records);
  ModelSet ms = load_model_set(a.coeffs);

  AssemblyOptions opts;
  opts.mode = a.mode == "one-player" ? KernelMode::one_player : KernelMode::two_player;
  opts.grid = LeadGrid{a.grid_min, a.grid_max, a.grid_step};
  opts.grid.validate();
  opts.runner_id = a.runner_id;
  opts.pitcher_id = a.pitcher_id;
  opts.catcher_id = a.catcher_id;
  if (a.sprint_speed >= 0) opts.sprint_speed = a.sprint_speed;
  if (a.arm_strength >= 0) opts.arm_strength = a.arm_strength;

  Manifest man;
  man.command = "build-transitions";
  man.config["mode"] = a.mode;
  man.config["grid"] = fmt_double(a.grid_min) + ":" + fmt_double(a.grid_max) + ":" +
                       fmt_double(a.grid_step);
  man.config["missing_lead"] = a.missing_lead;
  man.config["runner_id"] = a.runner_id;
  man.config["pitcher_id"] = a.pitcher_id;
  man.config["catcher_id"] = a.catcher_id;
  if (opts.sprint_speed) man.config["sprint_speed"] = fmt_double(*opts.sprint_speed);
  if (opts.arm_strength) man.config["arm_strength"] = fmt_double(*opts.arm_strength);
  man.inputs["plays"] = file_hash_hex(a.plays);
  man.inputs["coeffs"] = file_hash_hex(a.coeffs);
  const std::string mh = hex64(fnv1a64(manifest_body(man)));

  opts.provenance["manifest_hash"] = mh;
  opts.provenance["plays_hash"] = man.inputs["plays"];
  opts.provenance["coeffs_hash"] = man.inputs["coeffs"];
  opts.provenance["tool_version"] = kToolVersion;

  AssemblyReport arep;
  TransitionKernel k = assemble_kernel(pf, ms, opts, &arep);
  HaltingReport halt = compute_halting(k);

  save_kernel(a.out, k);
  write_manifest(a.out, man);

  std::cout << "build-transitions: wrote kernel to " << a.out << '\n';
  std::cout << "rows read " << irep.rows_read << ", kept " << irep.rows_kept
            << ", leads dropped " << irep.missing_lead_dropped << ", imputed "
            << irep.missing_lead_imputed << '\n';
  std::cout << "mode " << to_string(k.mode) << ", states " << k.n_states << ", lead grid "
            << k.grid->size() << " points\n";
  std::cout << "agency cells: exact " << arep.agency_exact << ", pooled(count) "
            << arep.agency_bases_outs << ", pooled(count,outs) " << arep.agency_bases
            << ", league " << arep.agency_league << ", synthesized " << arep.agency_synthesized
            << ", reset-rule " << arep.agency_hardcoded << '\n';
  std::cout << "halting m " << halt.m << ", rho_hat " << fmt_double(halt.rho_hat)
            << (halt.contraction() ? "" : "  [NOT HALTING]") << '\n';
  std::cout << "manifest " << mh << '\n';
  std::cerr << "wall time " << timer.seconds() << " s\n";
  if (!halt.contraction())
    throw invalid_kernel_error("assembled kernel admits indefinite play (rho_hat " +
                               fmt_double(halt.rho_hat) + ")");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve: run value or policy iteration on a kernel file.

struct SolveArgs {
  std::string kernel, out;
  std::string method = "vi";
  double tol = 1e-10;
  long long max_iters = 100000;
  int threads = 1;
};

int cmd_solve(const SolveArgs& a) {
  Timer timer;
  if (a.method != "vi" && a.method != "pi") throw data_error("--method must be vi or pi");
  TransitionKernel k = load_kernel(a.kernel);

  Manifest man;
  man.command = "solve";
  man.config["method"] = a.method;
  man.config["tol"] = fmt_double(a.tol);
  man.config["max_iters"] = fmt_int(a.max_iters);
  man.inputs["kernel"] = file_hash_hex(a.kernel);
  const std::string mh = hex64(fnv1a64(manifest_body(man)));

  SolveReport rep;
  ValueFunction v;
  bool converged = true;
  std::string diagnostic;
  try {
    if (a.method == "vi") {
      v = value_iteration(k, a.tol, a.max_iters, &rep);
      converged = rep.converged;
      if (!converged) diagnostic = "value iteration hit the iteration cap";
    } else {
      v = policy_iteration(k, a.tol, std::min<long long>(a.max_iters, 500), &rep);
    }
  } catch (const convergence_error& e) {
    // the report is already filled in; ship what we have
    converged = false;
    diagnostic = e.what();
    if (v.empty()) v.assign(k.n_states, 0.0);
  }

  PolicyPair pol = extract_policies(k, v);
  Solution sol = make_solution(k, v, pol, rep);
  if (auto it = sol.provenance.find("manifest_hash"); it != sol.provenance.end())
    sol.provenance["kernel_manifest_hash"] = it->second;
  sol.provenance["manifest_hash"] = mh;
  sol.provenance["kernel_hash"] = man.inputs["kernel"];
  save_solution(a.out, sol);
  write_manifest(a.out, man);

  std::cout << "solve: method " << rep.method << ", iterations " << rep.iterations
            << ", final residual " << fmt_double(rep.final_residual) << '\n';
  std::cout << "rho_hat " << fmt_double(rep.rho_hat) << " (m=" << rep.halting_m
            << "), certified bound " << fmt_double(rep.certified_bound) << '\n';
  std::cout << "start-state value " << format_value(v[0]) << '\n';
  std::cout << "wrote solution to " << a.out << '\n';
  std::cout << "manifest " << mh << '\n';
  std::cerr << "wall time " << timer.seconds() << " s\n";
  if (!converged) {
    std::cout << "NOT CONVERGED: " << diagnostic << '\n';
    return kExitNoConvergence;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// tables: lead grids from a solution file.

struct TablesArgs {
  std::string solution, by = "count", out;
  std::string plays, coeffs;        // players mode re-assembles kernels
  std::vector<std::string> players; // battery:runner quantile pairs
  double tol = 1e-10;
  int threads = 1;
};

LeadGrid require_grid(const Solution& sol) {
  if (!sol.grid) throw data_error("solution has no lead grid");
  return *sol.grid;
}

LeadTable players_table(const TablesArgs& a, const Solution& sol) {
  if (a.plays.empty() || a.coeffs.empty())
    throw data_error("--by players needs --plays and --coeffs to re-assemble the kernel");
  if (sol.mode == KernelMode::generic)
    throw data_error("--by players needs a solution for a baseball kernel");
  std::vector<std::pair<double, double>> pairs;
  if (a.players.empty()) {
    for (double qb : {0.1, 0.5, 0.9})
      for (double qr : {0.1, 0.5, 0.9}) pairs.emplace_back(qb, qr);
  } else {
    for (const std::string& p : a.players) {
      auto colon = p.find(':');
      double qb = 0, qr = 0;
      if (colon == std::string::npos || !try_parse_double(p.substr(0, colon), qb) ||
          !try_parse_double(p.substr(colon + 1), qr))
        throw data_error("--players expects battery:runner quantile pairs, got '" + p + "'");
      pairs.emplace_back(qb, qr);
    }
  }

  std::vector<PlayRecord> records = ingest_play_records(a.plays);
  PooledFrequencyTable pf = estimate_pooled_frequencies(records);
  ModelSet base = load_model_set(a.coeffs);
  LeadGrid grid = require_grid(sol);

  LeadTable t;
  t.title = "optimal lead (ft) by battery/runner skill and disengagements, count=0-0, outs=0";
  t.row_header = "battery/runner";
  for (auto [qb, qr] : pairs) {
    ModelSet ms = apply_profile(base, percentile_profile(base, ProfileRole::battery, qb));
    ms = apply_profile(ms, percentile_profile(ms, ProfileRole::runner, qr));
    AssemblyOptions opts;
    opts.mode = sol.mode;
    opts.grid = grid;
    TransitionKernel k = assemble_kernel(pf, ms, opts);
    ValueFunction v = value_iteration(k, a.tol, 100000, nullptr, 40, a.threads);
    PolicyPair pol = extract_policies(k, v);
    std::ostringstream label;
    label << "b" << format_value(qb).substr(0, 4) << "/r" << format_value(qr).substr(0, 4);
    t.rows.push_back(lead_row(label.str(), pol.runner, grid));
  }
  return t;
}

int cmd_tables(const TablesArgs& a) {
  Timer timer;
  Solution sol = load_solution(a.solution);
  LeadGrid grid = require_grid(sol);

  std::string text, csv;
  if (a.by == "count") {
    LeadTable t = table_by_count(sol.policy.runner, grid);
    text = render_text(t);
    csv = render_csv(t);
  } else if (a.by == "outs") {
    LeadTable t = table_by_outs(sol.policy.runner, grid);
    text = render_text(t);
    csv = render_csv(t);
  } else if (a.by == "players") {
    LeadTable t = players_table(a, sol);
    text = render_text(t);
    csv = render_csv(t);
  } else if (a.by == "two-foot") {
    TwoFootRuleReport rep = two_foot_rule_report(sol.policy.runner, grid);
    text = render_text(rep);
    csv = render_csv(rep);
  } else {
    throw usage_error("unknown axis '" + a.by + "'");
  }

  std::cout << text << '\n' << csv;
  if (!a.out.empty()) {
    Manifest man;
    man.command = "tables";
    man.config["by"] = a.by;
    man.inputs["solution"] = file_hash_hex(a.solution);
    if (!a.plays.empty()) man.inputs["plays"] = file_hash_hex(a.plays);
    if (!a.coeffs.empty()) man.inputs["coeffs"] = file_hash_hex(a.coeffs);
    const std::string mh = hex64(fnv1a64(manifest_body(man)));
    write_text_file(a.out, "# manifest " + mh + "\n" + csv);
    write_manifest(a.out, man);
    std::cout << "wrote " << a.out << " (manifest " << mh << ")\n";
  }
  std::cerr << "wall time " << timer.seconds() << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate: Monte Carlo rollouts of a policy on a kernel, checked against the
// dynamic-programming value of the same policy.

struct SimulateArgs {
  std::string kernel, solution, policy, plays;
  long long innings = 100000;
  long long seed = 1;
  int threads = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  Timer timer;
  TransitionKernel k = load_kernel(a.kernel);

  PolicyPair pol;
  std::string policy_desc;
  if (!a.solution.empty()) {
    Solution sol = load_solution(a.solution);
    pol = policy_for_kernel(sol, k);
    policy_desc = "solution " + sol.method;
  } else if (a.policy == "empirical") {
    if (a.plays.empty()) throw data_error("--policy empirical needs --plays");
    if (!k.grid) throw data_error("--policy empirical needs a baseball kernel");
    for (int s = 0; s < k.n_states; ++s)
      if (k.n_pitcher_actions[s] != 1)
        throw data_error("--policy empirical needs a one-player kernel");
    std::vector<PlayRecord> records = ingest_play_records(a.plays);
    pol.runner = empirical_lead_policy(records, *k.grid);
    pol.pitcher.assign(k.n_states, std::vector<int>{0});
    for (int s = 0; s < k.n_states; ++s) {
      pol.pitcher[s].assign(k.n_runner_actions[s], 0);
      if (pol.runner[s] >= k.n_runner_actions[s]) pol.runner[s] = 0;
    }
    policy_desc = "empirical";
  } else {
    throw data_error("simulate needs --solution or --policy empirical");
  }

  RolloutResult mc = monte_carlo_value(k, pol, a.innings, static_cast<std::uint64_t>(a.seed),
                                       a.threads);
  ValueFunction dp = evaluate_policy_iterative(k, pol, 1e-12, 500000, a.threads);

  std::cout << "simulate: " << policy_desc << " policy, " << mc.innings << " innings, seed "
            << a.seed << '\n';
  std::cout << "mc mean " << format_value(mc.mean_runs) << " +- " << format_value(mc.std_error)
            << " runs/inning\n";
  std::cout << "dp value " << format_value(dp[0]) << " runs/inning\n";
  const double diff = std::abs(mc.mean_runs - dp[0]);
  const bool within = mc.std_error == 0 ? diff == 0 : diff <= 3.0 * mc.std_error;
  std::cout << "dp-mc gap " << format_value(diff) << " (3 SE = "
            << format_value(3.0 * mc.std_error) << "): " << (within ? "ok" : "DISAGREEMENT")
            << '\n';
  std::cout << "truncated innings " << mc.truncated << ", max plays " << mc.max_plays << '\n';
  if (static_cast<double>(mc.truncated) >
      1e-6 * static_cast<double>(mc.innings))
    std::cout << "WARNING: truncation rate exceeds 1e-6; kernel may admit indefinite play\n";
  std::cerr << "wall time " << timer.seconds() << " s\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"runner-pitcher disengagement game toolkit"};
  app.set_version_flag("--version", std::string("leadoff ") + kToolVersion);
  app.require_subcommand(1);
  const int default_threads = default_thread_count();

  GenerateArgs gen;
  CLI::App* g = app.add_subcommand("generate", "write a synthetic play-by-play corpus");
  g->add_option("--config", gen.config, "generator config json")->required();
  g->add_option("--coeffs", gen.coeffs, "outcome model coefficients json")->required();
  g->add_option("--out", gen.out, "output corpus csv")->required();
  g->add_option("--innings", gen.innings, "override config innings");
  g->add_option("--seed", gen.seed, "override config seed");

  BuildArgs bld;
  CLI::App* b = app.add_subcommand("build-transitions", "assemble a transition kernel");
  b->add_option("--plays", bld.plays, "play-by-play corpus csv")->required();
  b->add_option("--coeffs", bld.coeffs, "outcome model coefficients json")->required();
  b->add_option("--mode", bld.mode, "two-player or one-player")
      ->check(CLI::IsMember({"two-player", "one-player"}))
      ->capture_default_str();
  b->add_option("--out", bld.out, "output kernel file")->required();
  b->add_option("--grid-min", bld.grid_min, "lead grid start, ft")->capture_default_str();
  b->add_option("--grid-max", bld.grid_max, "lead grid end, ft")->capture_default_str();
  b->add_option("--grid-step", bld.grid_step, "lead grid step, ft")->capture_default_str();
  b->add_option("--missing-lead", bld.missing_lead, "drop or impute")
      ->check(CLI::IsMember({"drop", "impute"}))
      ->capture_default_str();
  b->add_option("--runner-id", bld.runner_id, "representative runner id");
  b->add_option("--pitcher-id", bld.pitcher_id, "representative pitcher id");
  b->add_option("--catcher-id", bld.catcher_id, "representative catcher id");
  b->add_option("--sprint-speed", bld.sprint_speed, "runner sprint speed, ft/s");
  b->add_option("--arm-strength", bld.arm_strength, "catcher arm strength, mph");

  SolveArgs slv;
  slv.threads = default_threads;
  CLI::App* s = app.add_subcommand("solve", "solve a kernel to a policy and values");
  s->add_option("--kernel", slv.kernel, "kernel file")->required();
  s->add_option("--out", slv.out, "output solution json")->required();
  s->add_option("--method", slv.method, "vi or pi")
      ->check(CLI::IsMember({"vi", "pi"}))
      ->capture_default_str();
  s->add_option("--tol", slv.tol, "sup-norm stopping tolerance")->capture_default_str();
  s->add_option("--max-iters", slv.max_iters, "iteration cap")->capture_default_str();
  s->add_option("--threads", slv.threads, "worker threads")->capture_default_str();

  TablesArgs tab;
  tab.threads = default_threads;
  CLI::App* t = app.add_subcommand("tables", "lead tables from a solution");
  t->add_option("--solution", tab.solution, "solution json")->required();
  t->add_option("--by", tab.by, "count, outs, players, or two-foot")
      ->check(CLI::IsMember({"count", "outs", "players", "two-foot"}))
      ->capture_default_str();
  t->add_option("--out", tab.out, "also write the csv form here");
  t->add_option("--plays", tab.plays, "corpus csv (players mode)");
  t->add_option("--coeffs", tab.coeffs, "coefficients json (players mode)");
  t->add_option("--players", tab.players, "battery:runner quantile pairs (players mode)");
  t->add_option("--tol", tab.tol, "solve tolerance (players mode)")->capture_default_str();
  t->add_option("--threads", tab.threads, "worker threads")->capture_default_str();

  SimulateArgs sim;
  sim.threads = default_threads;
  CLI::App* m = app.add_subcommand("simulate", "Monte Carlo rollouts of a policy");
  m->add_option("--kernel", sim.kernel, "kernel file")->required();
  m->add_option("--solution", sim.solution, "solution json holding the policy");
  m->add_option("--policy", sim.policy, "'empirical' to use corpus behavior");
  m->add_option("--plays", sim.plays, "corpus csv (empirical policy)");
  m->add_option("--innings", sim.innings, "innings to roll")->capture_default_str();
  m->add_option("--seed", sim.seed, "rng seed")->capture_default_str();
  m->add_option("--threads", sim.threads, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen);
    if (b->parsed()) return cmd_build_transitions(bld);
    if (s->parsed()) return cmd_solve(slv);
    if (t->parsed()) return cmd_tables(tab);
    if (m->parsed()) return cmd_simulate(sim);
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const invalid_kernel_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidKernel;
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const assembly_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
