#pragma once

// Assembles the full transition kernel from the pooled frequency tables and
// the runner outcome models.
//
// Rows for the lone-runner-on-first states factor as
//   p(s'|s, lead, action) = sum_r P(r | s, lead, action) Q(s' | s, r),
// where the first factor comes from the fitted outcome models and Q from the
// empirical tables. For every other live state the row is the plain empirical
// next-state distribution. Penultimate states step to the terminal state with
// probability one.
//
// Replaying a pooled cell at a query state needs care with the disengagement
// component: cells are pooled over d (and, at fallback levels, over count and
// outs), so the recorded d' belongs to the source play, not the query. The
// post-play count is rebuilt from the event semantics instead: pickoff
// attempts increment it, a runner advance or a plate appearance end resets it
// to zero, and anything else keeps the recorded shift, clamped to [0, 2].
// Outs are replayed as deltas for the same reason. Every such override is
// tallied as a redirect.
//
// The third-disengagement penalty never comes from data. A failed pickoff
// with two disengagements already spent advances every runner one base by
// rule, so that row is hard-coded and the matching plays are excluded from
// the pooled estimates upstream.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/game_state.hpp"
#include "leadoff/kernel.hpp"
#include "leadoff/logistic_models.hpp"
#include "leadoff/pooled_table.hpp"

namespace leadoff {

struct AssemblyOptions {
  KernelMode mode = KernelMode::two_player;
  LeadGrid grid{};
  // representative matchup the outcome models are evaluated for
  std::string runner_id, pitcher_id, catcher_id;
  std::optional<double> sprint_speed, arm_strength;
  std::map<std::string, std::string> provenance;
};

// How each conditional next-state distribution was resolved, by pooling level.
struct AssemblyReport {
  long long redirected = 0;  // replayed targets overridden by the reset rules
  // runner-agency cells, per (state, outcome) pair
  long long agency_exact = 0;       // keyed by (bases, count, outs) and outcome
  long long agency_bases_outs = 0;  // pooled over count
  long long agency_bases = 0;       // pooled over count and outs
  long long agency_league = 0;      // league-wide no-event distribution
  long long agency_synthesized = 0; // deterministic consequence of the outcome
  long long agency_hardcoded = 0;   // third-disengagement penalty rows
  // no-agency states, per state
  long long no_agency_full = 0;     // exact full-state row
  long long no_agency_reduced = 0;  // pooled over d
  long long no_agency_bases_outs = 0;
  long long no_agency_bases = 0;
};

namespace detail {

// d' when replaying a pooled target at disengagement count d.
inline int replay_disengagements(std::optional<RunnerOutcome> r, int d,
                                 const ReducedTarget& t, bool pa_end) {
  if (r) {
    switch (*r) {
      case RunnerOutcome::pickoff_success: return std::min(d + 1, 2);
      case RunnerOutcome::pickoff_fail: return d + 1;  // d = 2 never reaches here
      case RunnerOutcome::steal_success: return 0;     // advance resets
      case RunnerOutcome::steal_fail: return pa_end ? 0 : d;
      case RunnerOutcome::none: break;
    }
  }
  if (pa_end) return 0;
  // a negative recorded shift means the source play reset the count
  // (mid-play advance), which replays as a reset
  if (t.delta < 0) return 0;
  return std::min(d + t.delta, 2);
}

// Replay one pooled cell at the query state, accumulating probability by
// destination. Outs beyond two fold into the zero-run penultimate state.
inline void replay_cell(std::map<int, double>& acc, const PooledCell& cell,
                        std::optional<RunnerOutcome> r, const PlayState& pre,
                        long long& redirected) {
  for (const auto& [t, p] : cell.dist) {
    int idx;
    if (t.inning_end) {
      idx = kNumPlayStates + t.runs;
    } else {
      ReducedState rs = reduced_at(t.reduced);
      int outs = pre.outs + t.outs_delta;
      bool pa_end = rs.count.balls == 0 && rs.count.strikes == 0;
      int dp = replay_disengagements(r, pre.disengagements, t, pa_end);
      if (dp != pre.disengagements + t.delta) ++redirected;
      if (outs > 2) {
        idx = kNumPlayStates;  // the replayed play makes the third out
        ++redirected;
      } else {
        idx = state_index(GameState::make_play(rs.bases, rs.count, dp, outs));
      }
    }
    acc[idx] += p;
  }
}

inline std::vector<std::pair<int, double>> to_sorted_row(const std::map<int, double>& acc) {
  return {acc.begin(), acc.end()};
}

// Deterministic single-target row used when no data covers an outcome.
inline std::vector<std::pair<int, double>> synthesized_row(RunnerOutcome r,
                                                           const PlayState& pre) {
  const Count c = pre.count;
  const int d = pre.disengagements, o = pre.outs;
  auto play = [&](BaseState b, int dp, int outs) {
    return state_index(GameState::make_play(b, c, dp, outs));
  };
  int idx;
  switch (r) {
    case RunnerOutcome::pickoff_success:
      idx = o == 2 ? kNumPlayStates : play(BaseState{false, false, false}, std::min(d + 1, 2), o + 1);
      break;
    case RunnerOutcome::pickoff_fail:
      idx = play(BaseState{true, false, false}, d + 1, o);
      break;
    case RunnerOutcome::steal_success:
      idx = play(BaseState{false, true, false}, 0, o);
      break;
    case RunnerOutcome::steal_fail:
      idx = o == 2 ? kNumPlayStates : play(BaseState{false, false, false}, d, o + 1);
      break;
    case RunnerOutcome::none:
      throw assembly_error("no data for a no-event play from state " +
                           state_to_string(GameState::make_play(pre.bases, c, d, o)));
  }
  return {{idx, 1.0}};
}

}  // namespace detail

// Next-state distribution for one (agency state, runner outcome) pair,
// walking the pooling hierarchy from most to least specific.
inline std::vector<std::pair<int, double>> resolve_agency_outcome(
    const PooledFrequencyTable& pf, const PlayState& pre, RunnerOutcome r,
    AssemblyReport& rep) {
  if (r == RunnerOutcome::pickoff_fail && pre.disengagements == 2) {
    // third disengagement without a successful pickoff: the runner takes
    // second base by rule, and the advance resets the disengagement count
    ++rep.agency_hardcoded;
    return {{state_index(GameState::make_play(BaseState{false, true, false}, pre.count, 0,
                                              pre.outs)),
             1.0}};
  }

  const int rcode = static_cast<int>(r);
  const int bases = base_state_index(pre.bases);
  const PooledCell* cell = pf.find_agency(reduced_index(pre), r);
  if (cell) {
    ++rep.agency_exact;
  } else {
    auto bo = pf.agency_by_bases_outs.find({bases * 3 + pre.outs, rcode});
    if (bo != pf.agency_by_bases_outs.end()) {
      cell = &bo->second;
      ++rep.agency_bases_outs;
    }
  }
  if (!cell) {
    auto b = pf.agency_by_bases.find({bases, rcode});
    if (b != pf.agency_by_bases.end()) {
      cell = &b->second;
      ++rep.agency_bases;
    }
  }
  if (!cell && r == RunnerOutcome::none && pf.agency_league_none.count > 0) {
    cell = &pf.agency_league_none;
    ++rep.agency_league;
  }
  if (!cell) {
    ++rep.agency_synthesized;
    return detail::synthesized_row(r, pre);
  }
  std::map<int, double> acc;
  detail::replay_cell(acc, *cell, r, pre, rep.redirected);
  return detail::to_sorted_row(acc);
}

// Next-state distribution for a state with no runner agency.
inline std::vector<std::pair<int, double>> resolve_no_agency(
    const PooledFrequencyTable& pf, const PlayState& pre, AssemblyReport& rep) {
  const int si = state_index(GameState::make_play(pre.bases, pre.count, pre.disengagements,
                                                  pre.outs));
  if (const FullCell* full = pf.find_no_agency(si)) {
    ++rep.no_agency_full;
    return full->dist;
  }
  const int bases = base_state_index(pre.bases);
  const PooledCell* cell = nullptr;
  if (auto it = pf.no_agency_by_reduced.find(reduced_index(pre));
      it != pf.no_agency_by_reduced.end()) {
    cell = &it->second;
    ++rep.no_agency_reduced;
  } else if (auto bo = pf.no_agency_by_bases_outs.find(bases * 3 + pre.outs);
             bo != pf.no_agency_by_bases_outs.end()) {
    cell = &bo->second;
    ++rep.no_agency_bases_outs;
  } else if (auto b = pf.no_agency_by_bases.find(bases);
             b != pf.no_agency_by_bases.end()) {
    cell = &b->second;
    ++rep.no_agency_bases;
  }
  if (!cell)
    throw assembly_error(
        "no data for plays from base state " + std::to_string(bases) +
        " (state " + state_to_string(GameState::make_play(pre.bases, pre.count,
                                                          pre.disengagements, pre.outs)) +
        ")");
  std::map<int, double> acc;
  detail::replay_cell(acc, *cell, std::nullopt, pre, rep.redirected);
  return detail::to_sorted_row(acc);
}

inline TransitionKernel assemble_kernel(const PooledFrequencyTable& pf, const ModelSet& ms,
                                        const AssemblyOptions& opts,
                                        AssemblyReport* report = nullptr) {
  if (opts.mode == KernelMode::generic)
    throw contract_error("assemble_kernel: mode must be two-player or one-player");
  opts.grid.validate();

  AssemblyReport local;
  AssemblyReport& rep = report ? *report : local;
  const int leads = opts.grid.size();
  const int n_pitcher = opts.mode == KernelMode::two_player ? 2 : 1;

  KernelBuilder kb(kNumStates, kTerminalIndex, opts.mode);
  kb.set_grid(opts.grid);

  using Row = std::vector<std::pair<int, std::pair<double, double>>>;
  auto with_rewards = [](const GameState& pre,
                         const std::vector<std::pair<int, double>>& dist) {
    Row row;
    row.reserve(dist.size());
    for (const auto& [col, p] : dist)
      row.push_back({col, {p, static_cast<double>(reward(pre, state_at(col)))}});
    return row;
  };
  // weighted mixture of per-outcome rows, merged by destination
  auto mix = [](const GameState& pre,
                const std::vector<std::pair<double, const std::vector<std::pair<int, double>>*>>&
                    parts) {
    std::map<int, double> acc;
    for (const auto& [w, dist] : parts)
      for (const auto& [col, p] : *dist) acc[col] += w * p;
    Row row;
    row.reserve(acc.size());
    for (const auto& [col, p] : acc)
      row.push_back({col, {p, static_cast<double>(reward(pre, state_at(col)))}});
    return row;
  };

  for (int s = 0; s < kNumStates; ++s) {
    const GameState st = state_at(s);
    if (st.is_terminal()) {
      kb.begin_state(s, 1, 1);
      kb.add_row({{kTerminalIndex, {1.0, 0.0}}});
      continue;
    }
    if (st.is_penultimate()) {
      kb.begin_state(s, 1, 1);
      kb.add_row({{kTerminalIndex, {1.0, 0.0}}});
      continue;
    }
    const PlayState& pre = st.play;
    if (!has_runner_agency(st)) {
      kb.begin_state(s, 1, 1);
      kb.add_row(with_rewards(st, resolve_no_agency(pf, pre, rep)));
      continue;
    }

    // resolve the five outcome rows once; they do not depend on the lead
    std::array<std::vector<std::pair<int, double>>, kNumRunnerOutcomes> q;
    for (int rc = 0; rc < kNumRunnerOutcomes; ++rc)
      q[rc] = resolve_agency_outcome(pf, pre, static_cast<RunnerOutcome>(rc), rep);
    auto qp = [&](RunnerOutcome r) { return &q[static_cast<int>(r)]; };

    PlayContext ctx = make_context(pre, opts.runner_id, opts.pitcher_id, opts.catcher_id);
    ctx.sprint_speed = opts.sprint_speed;
    ctx.arm_strength = opts.arm_strength;

    kb.begin_state(s, leads, n_pitcher);
    for (int li = 0; li < leads; ++li) {
      const double lead = opts.grid.lead(li);
      if (opts.mode == KernelMode::two_player) {
        OutcomeDistribution po =
            outcome_distribution_two_player(ms, ctx, lead, PitcherActionKind::pickoff);
        kb.add_row(mix(st, {{po[RunnerOutcome::pickoff_success], qp(RunnerOutcome::pickoff_success)},
                            {po[RunnerOutcome::pickoff_fail], qp(RunnerOutcome::pickoff_fail)}}));
        OutcomeDistribution pi =
            outcome_distribution_two_player(ms, ctx, lead, PitcherActionKind::pitch);
        kb.add_row(mix(st, {{pi[RunnerOutcome::steal_success], qp(RunnerOutcome::steal_success)},
                            {pi[RunnerOutcome::steal_fail], qp(RunnerOutcome::steal_fail)},
                            {pi[RunnerOutcome::none], qp(RunnerOutcome::none)}}));
      } else {
        OutcomeDistribution od = outcome_distribution_one_player(ms, ctx, lead);
        kb.add_row(mix(st, {{od[RunnerOutcome::pickoff_success], qp(RunnerOutcome::pickoff_success)},
                            {od[RunnerOutcome::pickoff_fail], qp(RunnerOutcome::pickoff_fail)},
                            {od[RunnerOutcome::steal_success], qp(RunnerOutcome::steal_success)},
                            {od[RunnerOutcome::steal_fail], qp(RunnerOutcome::steal_fail)},
                            {od[RunnerOutcome::none], qp(RunnerOutcome::none)}}));
      }
    }
  }

  TransitionKernel k = kb.finish();
  k.redirects = rep.redirected;
  k.provenance = opts.provenance;
  validate_kernel(k);
  return k;
}

}  // namespace leadoff
