#pragma once

// Synthetic play-by-play world: deterministic baserunning mechanics, a
// behavioral generator that emits corpora in the ingestion schema, and the
// exact kernel implied by the same ingredients. The generator and the kernel
// share every mechanical rule, so estimation from generated data converges to
// the exact kernel in the large-sample limit.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "leadoff/errors.hpp"
#include "leadoff/game_state.hpp"
#include "leadoff/kernel.hpp"
#include "leadoff/logistic_models.hpp"
#include "leadoff/play_records.hpp"
#include "leadoff/rng.hpp"

namespace leadoff {

// ---------------------------------------------------------------------------
// Plate-appearance outcomes and deterministic advancement

enum class PaOutcome : int {
  ball = 0,
  strike,
  foul,
  out_in_play,
  single,
  double_hit,
  triple,
  home_run,
};
inline constexpr int kNumPaOutcomes = 8;

inline const char* to_string(PaOutcome o) {
  switch (o) {
    case PaOutcome::ball: return "ball";
    case PaOutcome::strike: return "strike";
    case PaOutcome::foul: return "foul";
    case PaOutcome::out_in_play: return "out_in_play";
    case PaOutcome::single: return "single";
    case PaOutcome::double_hit: return "double";
    case PaOutcome::triple: return "triple";
    case PaOutcome::home_run: return "home_run";
  }
  throw contract_error("to_string: unknown plate-appearance outcome");
}

struct PlayTransition {
  bool inning_end = false;
  int runs = 0;         // runs scored on this play
  PlayState post{};     // meaningful iff !inning_end
};

// Advancement is deterministic: singles move every runner one base, doubles
// two, walks force, outs hold runners. That keeps the play-level state machine
// closed over the 864 live states.
inline PlayTransition apply_pa_outcome(const PlayState& s, PaOutcome oc) {
  PlayState t = s;
  auto end_pa = [&t] {
    t.count = Count{0, 0};
    t.disengagements = 0;
  };
  switch (oc) {
    case PaOutcome::ball: {
      if (s.count.balls < 3) {
        ++t.count.balls;
        return PlayTransition{false, 0, t};
      }
      bool f = s.bases.first, sec = s.bases.second, thr = s.bases.third;
      int runs = (f && sec && thr) ? 1 : 0;
      t.bases.first = true;
      t.bases.second = f ? true : sec;
      t.bases.third = (f && sec) ? true : thr;
      end_pa();
      return PlayTransition{false, runs, t};
    }
    case PaOutcome::strike:
      if (s.count.strikes < 2) {
        ++t.count.strikes;
        return PlayTransition{false, 0, t};
      }
      if (++t.outs == 3) return PlayTransition{true, 0, {}};
      end_pa();
      return PlayTransition{false, 0, t};
    case PaOutcome::foul:
      if (s.count.strikes < 2) ++t.count.strikes;  // else the state repeats
      return PlayTransition{false, 0, t};
    case PaOutcome::out_in_play:
      if (++t.outs == 3) return PlayTransition{true, 0, {}};
      end_pa();
      return PlayTransition{false, 0, t};
    case PaOutcome::single: {
      int runs = s.bases.third ? 1 : 0;
      t.bases = BaseState{true, s.bases.first, s.bases.second};
      end_pa();
      return PlayTransition{false, runs, t};
    }
    case PaOutcome::double_hit: {
      int runs = int(s.bases.second) + int(s.bases.third);
      t.bases = BaseState{false, true, s.bases.first};
      end_pa();
      return PlayTransition{false, runs, t};
    }
    case PaOutcome::triple: {
      int runs = runners_on_base(s.bases);
      t.bases = BaseState{false, false, true};
      end_pa();
      return PlayTransition{false, runs, t};
    }
    case PaOutcome::home_run: {
      int runs = runners_on_base(s.bases) + 1;
      t.bases = BaseState{};
      end_pa();
      return PlayTransition{false, runs, t};
    }
  }
  throw contract_error("apply_pa_outcome: unknown outcome");
}

// Pickoff throw to first. A success records the out; a failure is a
// disengagement, and the third unsuccessful disengagement advances the runner.
inline PlayTransition apply_pickoff(const PlayState& s, bool success) {
  if (s.bases != BaseState{true, false, false})
    throw contract_error("apply_pickoff: requires a runner on first only");
  PlayState t = s;
  if (success) {
    t.bases = BaseState{};
    t.disengagements = std::min(s.disengagements + 1, 2);
    if (++t.outs == 3) return PlayTransition{true, 0, {}};
    return PlayTransition{false, 0, t};
  }
  if (s.disengagements == 2) {
    t.bases = BaseState{false, true, false};
    t.disengagements = 0;  // the runner advanced
    return PlayTransition{false, 0, t};
  }
  ++t.disengagements;
  return PlayTransition{false, 0, t};
}

// Steal of second, resolved on a taken pitch. The caller chooses the pitch
// call; a ball at a 3-ball count is excluded upstream so a steal never rides
// on a walk.
inline PlayTransition apply_steal(const PlayState& s, bool success, bool strike) {
  if (s.bases != BaseState{true, false, false})
    throw contract_error("apply_steal: requires a runner on first only");
  if (!strike && s.count.balls >= 3)
    throw contract_error("apply_steal: ball four cannot carry a steal attempt");
  PlayState t = s;
  bool pa_ends = false;
  if (strike) {
    if (s.count.strikes == 2) {
      pa_ends = true;  // strikeout on the pitch
      ++t.outs;
    } else {
      ++t.count.strikes;
    }
  } else {
    ++t.count.balls;
  }
  if (success) {
    t.bases = BaseState{false, true, false};
    t.disengagements = 0;  // the runner advanced
  } else {
    t.bases = BaseState{};
    ++t.outs;
  }
  if (t.outs >= 3) return PlayTransition{true, 0, {}};
  if (pa_ends) {
    t.count = Count{0, 0};
    t.disengagements = 0;
  }
  return PlayTransition{false, 0, t};
}

// ---------------------------------------------------------------------------
// Generator configuration

struct GeneratorBehavior {
  // Lead distance is Normal(mean[d], sd) clamped to the grid span and snapped
  // to the nearest grid point; sd = 0 collapses to the snapped mean.
  std::array<double, 3> lead_mean_by_disengagements{9.5, 10.5, 11.5};
  double lead_sd = 1.0;
  std::string runner_id = "R1", pitcher_id = "P1", catcher_id = "C1";
  std::optional<double> sprint_speed, arm_strength;
};

struct GeneratorConfig {
  long long innings = 1000;
  std::uint64_t seed = 1;
  LeadGrid grid{};
  GeneratorBehavior behavior{};
  // [count_index][outcome] plate-appearance outcome probabilities
  std::array<std::array<double, kNumPaOutcomes>, kNumCounts> pa_outcomes{};

  void validate() const {
    if (innings < 1) throw data_error("generator config: innings must be >= 1");
    grid.validate();
    if (!(behavior.lead_sd >= 0))
      throw data_error("generator config: lead_sd must be >= 0");
    for (int c = 0; c < kNumCounts; ++c) {
      double sum = 0;
      for (double p : pa_outcomes[c]) {
        if (!(p >= 0) || !std::isfinite(p))
          throw data_error("generator config: outcome probabilities must be >= 0");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw data_error("generator config: outcome distribution for count " +
                         std::to_string(count_at(c).balls) + "-" +
                         std::to_string(count_at(c).strikes) +
                         " does not sum to 1");
      if (pa_outcomes[c][0] + pa_outcomes[c][1] <= 0)
        throw data_error(
            "generator config: each count needs positive ball or strike mass "
            "to resolve steal attempts");
    }
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> known,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw data_error("generator config: unknown key '" + it.key() +
                              "' in " + where);
  }
}

}  // namespace detail

inline GeneratorConfig parse_generator_config(const nlohmann::json& j) {
  GeneratorConfig cfg;
  detail::reject_unknown_keys(j, {"innings", "seed", "grid", "behavior", "pa_outcomes"},
                              "top level");
  if (j.contains("innings")) cfg.innings = j.at("innings").get<long long>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::reject_unknown_keys(g, {"min_ft", "max_ft", "step_ft"}, "grid");
    if (g.contains("min_ft")) cfg.grid.min_ft = g.at("min_ft").get<double>();
    if (g.contains("max_ft")) cfg.grid.max_ft = g.at("max_ft").get<double>();
    if (g.contains("step_ft")) cfg.grid.step_ft = g.at("step_ft").get<double>();
  }
  if (j.contains("behavior")) {
    const auto& b = j.at("behavior");
    detail::reject_unknown_keys(
        b,
        {"lead_mean_by_disengagements", "lead_sd", "runner_id", "pitcher_id",
         "catcher_id", "sprint_speed", "arm_strength"},
        "behavior");
    if (b.contains("lead_mean_by_disengagements")) {
      const auto& m = b.at("lead_mean_by_disengagements");
      if (!m.is_array() || m.size() != 3)
        throw data_error(
            "generator config: lead_mean_by_disengagements needs 3 entries");
      for (int d = 0; d < 3; ++d)
        cfg.behavior.lead_mean_by_disengagements[d] = m.at(d).get<double>();
    }
    if (b.contains("lead_sd")) cfg.behavior.lead_sd = b.at("lead_sd").get<double>();
    if (b.contains("runner_id")) cfg.behavior.runner_id = b.at("runner_id").get<std::string>();
    if (b.contains("pitcher_id")) cfg.behavior.pitcher_id = b.at("pitcher_id").get<std::string>();
    if (b.contains("catcher_id")) cfg.behavior.catcher_id = b.at("catcher_id").get<std::string>();
    if (b.contains("sprint_speed") && !b.at("sprint_speed").is_null())
      cfg.behavior.sprint_speed = b.at("sprint_speed").get<double>();
    if (b.contains("arm_strength") && !b.at("arm_strength").is_null())
      cfg.behavior.arm_strength = b.at("arm_strength").get<double>();
  }
  if (!j.contains("pa_outcomes"))
    throw data_error("generator config: pa_outcomes is required");
  const auto& pa = j.at("pa_outcomes");
  std::array<bool, kNumCounts> seen{};
  for (auto it = pa.begin(); it != pa.end(); ++it) {
    int balls, strikes;
    char dash;
    std::istringstream key(it.key());
    if (!(key >> balls >> dash >> strikes) || dash != '-' || !key.eof() ||
        balls < 0 || balls > 3 || strikes < 0 || strikes > 2)
      throw data_error("generator config: bad count key '" + it.key() + "'");
    int c = count_index(Count{balls, strikes});
    if (seen[c]) throw data_error("generator config: duplicate count key '" + it.key() + "'");
    seen[c] = true;
    detail::reject_unknown_keys(it.value(),
                                {"ball", "strike", "foul", "out_in_play", "single",
                                 "double", "triple", "home_run"},
                                "pa_outcomes['" + it.key() + "']");
    for (int o = 0; o < kNumPaOutcomes; ++o) {
      const char* name = to_string(static_cast<PaOutcome>(o));
      if (!it.value().contains(name))
        throw data_error("generator config: count '" + it.key() + "' is missing '" +
                         name + "'");
      cfg.pa_outcomes[c][o] = it.value().at(name).get<double>();
    }
  }
  for (int c = 0; c < kNumCounts; ++c)
    if (!seen[c])
      throw data_error("generator config: missing count " +
                       std::to_string(count_at(c).balls) + "-" +
                       std::to_string(count_at(c).strikes));
  cfg.validate();
  return cfg;
}

inline GeneratorConfig load_generator_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open generator config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("generator config " + path + ": " + e.what());
  }
  try {
    return parse_generator_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw data_error("generator config " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Behavioral lead distribution on the grid

// Probability mass the clamped-and-snapped Normal puts on each grid point:
// interior points own [lead - step/2, lead + step/2); the edge points absorb
// the tails.
inline std::vector<double> lead_weights(const LeadGrid& grid, double mean, double sd) {
  int n = grid.size();
  std::vector<double> w(n, 0.0);
  if (sd == 0) {
    double c = std::min(std::max(mean, grid.min_ft), grid.max_ft);
    int i = static_cast<int>(std::llround((c - grid.min_ft) / grid.step_ft));
    w[std::min(std::max(i, 0), n - 1)] = 1.0;
    return w;
  }
  auto cdf = [&](double x) { return 0.5 * std::erfc((mean - x) / (sd * std::sqrt(2.0))); };
  double lo = 0.0;
  for (int i = 0; i < n; ++i) {
    double hi = i + 1 < n ? cdf(grid.lead(i) + grid.step_ft / 2) : 1.0;
    w[i] = hi - lo;
    lo = hi;
  }
  return w;
}

// Ball share of a taken pitch during a steal attempt; ball four is excluded.
inline double taken_ball_prob(const GeneratorConfig& cfg, const Count& c) {
  if (c.balls >= 3) return 0.0;
  const auto& pa = cfg.pa_outcomes[count_index(c)];
  return pa[0] / (pa[0] + pa[1]);
}

// ---------------------------------------------------------------------------
// Corpus generation

struct GenerationReport {
  long long innings = 0;
  long long plays = 0;
  long long truncated_innings = 0;
  long long agency_plays = 0;
  long long pickoff_attempts = 0;
  long long steal_attempts = 0;
  long long reward_runs = 0;  // reward-identity runs over all generated plays
};

// Simulate half-innings under the behavioral lead policy and the model-set
// event probabilities, emitting one PlayRecord per play. Inning i draws from
// counter stream (seed, i), so the corpus is a pure function of (config,
// model set).
inline std::vector<PlayRecord> generate_synthetic_plays(const GeneratorConfig& cfg,
                                                        const ModelSet& ms,
                                                        GenerationReport* report = nullptr,
                                                        int play_cap = 10000) {
  cfg.validate();
  std::vector<PlayRecord> out;
  GenerationReport rep;
  rep.innings = cfg.innings;

  std::array<std::vector<double>, 3> lead_w;
  for (int d = 0; d < 3; ++d)
    lead_w[d] = lead_weights(cfg.grid, cfg.behavior.lead_mean_by_disengagements[d],
                             cfg.behavior.lead_sd);

  for (long long inning = 0; inning < cfg.innings; ++inning) {
    Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(inning));
    PlayState s{};  // bases empty, 0-0, no disengagements, no outs
    for (int play = 0;; ++play) {
      if (play >= play_cap) {
        ++rep.truncated_innings;
        break;
      }
      PlayRecord r;
      r.pre = s;
      r.runner_id = cfg.behavior.runner_id;
      r.pitcher_id = cfg.behavior.pitcher_id;
      r.catcher_id = cfg.behavior.catcher_id;
      r.sprint_speed = cfg.behavior.sprint_speed;
      r.arm_strength = cfg.behavior.arm_strength;

      PlayTransition tr;
      if (s.bases == BaseState{true, false, false}) {
        ++rep.agency_plays;
        int li = rng.categorical(lead_w[s.disengagements]);
        double lead = cfg.grid.lead(li);
        PlayContext ctx = make_context(s, cfg.behavior.runner_id,
                                       cfg.behavior.pitcher_id, cfg.behavior.catcher_id);
        ctx.sprint_speed = cfg.behavior.sprint_speed;
        ctx.arm_strength = cfg.behavior.arm_strength;
        r.lead_ft = lead;
        if (rng.bernoulli(ms.pickoff_attempt_prob(ctx, lead))) {
          ++rep.pickoff_attempts;
          bool success = rng.bernoulli(ms.pickoff_success_prob(ctx, lead));
          tr = apply_pickoff(s, success);
          r.outcome = success ? RunnerOutcome::pickoff_success : RunnerOutcome::pickoff_fail;
          r.pickoff_attempt = true;
        } else if (rng.bernoulli(ms.steal_attempt_prob(ctx))) {
          ++rep.steal_attempts;
          bool success = rng.bernoulli(ms.steal_success_prob(ctx, lead));
          bool strike = !rng.bernoulli(taken_ball_prob(cfg, s.count));
          tr = apply_steal(s, success, strike);
          r.outcome = success ? RunnerOutcome::steal_success : RunnerOutcome::steal_fail;
          r.pickoff_attempt = false;
        } else {
          int oc = rng.categorical(cfg.pa_outcomes[count_index(s.count)]);
          tr = apply_pa_outcome(s, static_cast<PaOutcome>(oc));
          r.outcome = RunnerOutcome::none;
          r.pickoff_attempt = false;
        }
      } else {
        int oc = rng.categorical(cfg.pa_outcomes[count_index(s.count)]);
        tr = apply_pa_outcome(s, static_cast<PaOutcome>(oc));
      }

      r.inning_end = tr.inning_end;
      if (tr.inning_end)
        r.runs_on_play = tr.runs;
      else
        r.post = tr.post;
      rep.reward_runs += reward(r.pre_state(), r.post_state());
      ++rep.plays;
      out.push_back(std::move(r));
      if (tr.inning_end) break;
      s = tr.post;
    }
  }
  if (report) *report = rep;
  return out;
}

// ---------------------------------------------------------------------------
// Exact kernel of the synthetic world

// Assemble the decision kernel directly from the generator's ingredients:
// model-set probabilities per lead and the configured plate-appearance
// distributions, with targets produced by the shared mechanics. Estimation
// from a generated corpus converges to this kernel as innings grow.
inline TransitionKernel build_true_kernel(const GeneratorConfig& cfg, const ModelSet& ms,
                                          KernelMode mode) {
  cfg.validate();
  if (mode == KernelMode::generic)
    throw contract_error("build_true_kernel: mode must be one- or two-player");
  const LeadGrid& grid = cfg.grid;
  int n_leads = grid.size();

  KernelBuilder b(kNumStates, kTerminalIndex, mode);
  b.set_grid(grid);

  auto target_of = [](const PlayState& pre, const PlayTransition& tr) {
    (void)pre;
    return tr.inning_end ? kNumPlayStates + tr.runs
                         : state_index(GameState::make_play(tr.post));
  };

  using Mix = std::map<int, double>;
  auto add_mixed_row = [&](const PlayState& pre, const Mix& mix) {
    GameState pre_state = GameState::make_play(pre);
    std::vector<std::pair<int, std::pair<double, double>>> entries;
    for (const auto& [col, p] : mix)
      if (p > 0)
        entries.push_back(
            {col, {p, static_cast<double>(reward(pre_state, state_at(col)))}});
    b.add_row(entries);
  };

  for (int i = 0; i < kNumStates; ++i) {
    GameState g = state_at(i);
    if (!g.is_play()) {
      // Penultimate states and the terminal itself resolve to the terminal.
      b.begin_state(i, 1, 1);
      b.add_row({{kTerminalIndex, {1.0, 0.0}}});
      continue;
    }
    const PlayState& s = g.play;
    const auto& pa = cfg.pa_outcomes[count_index(s.count)];

    if (s.bases != BaseState{true, false, false}) {
      b.begin_state(i, 1, 1);
      Mix mix;
      for (int o = 0; o < kNumPaOutcomes; ++o) {
        if (pa[o] <= 0) continue;
        mix[target_of(s, apply_pa_outcome(s, static_cast<PaOutcome>(o)))] += pa[o];
      }
      add_mixed_row(s, mix);
      continue;
    }

    // Agency state: one row per lead (and per pitcher action in two-player
    // mode), mixing the five event branches analytically.
    b.begin_state(i, n_leads, mode == KernelMode::two_player ? 2 : 1);
    PlayContext ctx = make_context(s, cfg.behavior.runner_id, cfg.behavior.pitcher_id,
                                   cfg.behavior.catcher_id);
    ctx.sprint_speed = cfg.behavior.sprint_speed;
    ctx.arm_strength = cfg.behavior.arm_strength;

    int po_succ = target_of(s, apply_pickoff(s, true));
    int po_fail = target_of(s, apply_pickoff(s, false));
    double pb = taken_ball_prob(cfg, s.count);
    int sb_succ_ball = pb > 0 ? target_of(s, apply_steal(s, true, false)) : -1;
    int sb_succ_strike = target_of(s, apply_steal(s, true, true));
    int sb_fail_ball = pb > 0 ? target_of(s, apply_steal(s, false, false)) : -1;
    int sb_fail_strike = target_of(s, apply_steal(s, false, true));

    for (int li = 0; li < n_leads; ++li) {
      double lead = grid.lead(li);
      double phi = ms.pickoff_attempt_prob(ctx, lead);
      double phi_plus = ms.pickoff_success_prob(ctx, lead);
      double psi = ms.steal_attempt_prob(ctx);
      double psi_plus = ms.steal_success_prob(ctx, lead);

      Mix pickoff;
      pickoff[po_succ] += phi_plus;
      pickoff[po_fail] += 1.0 - phi_plus;

      Mix pitch;
      if (pb > 0) {
        pitch[sb_succ_ball] += psi * psi_plus * pb;
        pitch[sb_fail_ball] += psi * (1.0 - psi_plus) * pb;
      }
      pitch[sb_succ_strike] += psi * psi_plus * (1.0 - pb);
      pitch[sb_fail_strike] += psi * (1.0 - psi_plus) * (1.0 - pb);
      for (int o = 0; o < kNumPaOutcomes; ++o) {
        if (pa[o] <= 0) continue;
        pitch[target_of(s, apply_pa_outcome(s, static_cast<PaOutcome>(o)))] +=
            (1.0 - psi) * pa[o];
      }

      if (mode == KernelMode::two_player) {
        add_mixed_row(s, pickoff);
        add_mixed_row(s, pitch);
      } else {
        Mix one;
        for (const auto& [col, p] : pickoff) one[col] += phi * p;
        for (const auto& [col, p] : pitch) one[col] += (1.0 - phi) * p;
        add_mixed_row(s, one);
      }
    }
  }

  TransitionKernel k = b.finish();
  k.provenance["source"] = "synthetic ground truth";
  validate_kernel(k);
  return k;
}

// Nearest grid index to a raw lead, clamped to the grid's range.
inline int snap_lead(const LeadGrid& grid, double lead_ft) {
  int i = static_cast<int>(std::llround((lead_ft - grid.min_ft) / grid.step_ft));
  return std::clamp(i, 0, grid.size() - 1);
}

// The behavioral runner policy observed in a corpus: mean lead per
// disengagement count among agency plays, snapped to the grid. States the
// corpus cannot speak to keep action 0.
inline std::vector<int> empirical_lead_policy(const std::vector<PlayRecord>& records,
                                              const LeadGrid& grid) {
  std::array<double, 3> sum{};
  std::array<long long, 3> n{};
  double all_sum = 0;
  long long all_n = 0;
  for (const PlayRecord& r : records) {
    if (!r.agency() || !r.lead_ft) continue;
    sum[r.pre.disengagements] += *r.lead_ft;
    ++n[r.pre.disengagements];
    all_sum += *r.lead_ft;
    ++all_n;
  }
  if (all_n == 0)
    throw data_error("empirical_lead_policy: corpus has no agency plays with a lead");
  std::vector<int> runner(kNumStates, 0);
  for (int s = 0; s < kNumPlayStates; ++s) {
    PlayState ps = state_at(s).play;
    if (!(ps.bases.first && !ps.bases.second && !ps.bases.third)) continue;
    int d = ps.disengagements;
    double mean = n[d] > 0 ? sum[d] / n[d] : all_sum / all_n;
    runner[s] = snap_lead(grid, mean);
  }
  return runner;
}

}  // namespace leadoff
