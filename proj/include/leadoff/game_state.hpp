#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "leadoff/errors.hpp"

namespace leadoff {

// Occupancy of first, second, third base.
struct BaseState {
  bool first = false, second = false, third = false;
  friend auto operator<=>(const BaseState&, const BaseState&) = default;
};

inline int runners_on_base(const BaseState& b) {
  return int(b.first) + int(b.second) + int(b.third);
}

// Ball-strike count. balls in [0,3], strikes in [0,2].
struct Count {
  int balls = 0, strikes = 0;
  friend auto operator<=>(const Count&, const Count&) = default;
};

struct PlayState {
  BaseState bases;
  Count count;
  int disengagements = 0;  // pitcher disengagements this plate appearance, 0..2
  int outs = 0;            // 0..2
  friend auto operator<=>(const PlayState&, const PlayState&) = default;
};

// A half-inning state: a live play state, one of four penultimate states that
// carry the runs scored on the inning-ending play, or the absorbing terminal.
struct GameState {
  enum class Kind : std::uint8_t { play, penultimate, terminal };

  Kind kind = Kind::terminal;
  PlayState play{};          // meaningful iff kind == play
  int penultimate_runs = 0;  // meaningful iff kind == penultimate, 0..3

  static GameState make_play(BaseState b, Count c, int d, int o) {
    GameState s;
    s.kind = Kind::play;
    s.play = PlayState{b, c, d, o};
    return s;
  }
  static GameState make_play(PlayState p) {
    GameState s;
    s.kind = Kind::play;
    s.play = p;
    return s;
  }
  static GameState make_penultimate(int runs) {
    GameState s;
    s.kind = Kind::penultimate;
    s.penultimate_runs = runs;
    return s;
  }
  static GameState make_terminal() { return GameState{}; }

  bool is_play() const { return kind == Kind::play; }
  bool is_penultimate() const { return kind == Kind::penultimate; }
  bool is_terminal() const { return kind == Kind::terminal; }

  friend bool operator==(const GameState& a, const GameState& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::play) return a.play == b.play;
    if (a.kind == Kind::penultimate) return a.penultimate_runs == b.penultimate_runs;
    return true;
  }
};

// State space sizes. Play states factor as 8 base configurations x 12 counts
// x 3 disengagement counts x 3 out counts.
inline constexpr int kNumBaseStates = 8;
inline constexpr int kNumCounts = 12;
inline constexpr int kNumPlayStates = 864;
inline constexpr int kNumPenultimate = 4;
inline constexpr int kNumStates = kNumPlayStates + kNumPenultimate + 1;  // 869
inline constexpr int kTerminalIndex = kNumStates - 1;
inline constexpr int kNumReducedStates = kNumBaseStates * kNumCounts * 3;  // 288

inline int base_state_index(const BaseState& b) {
  return int(b.first) * 4 + int(b.second) * 2 + int(b.third);
}

inline BaseState base_state_at(int i) {
  return BaseState{(i & 4) != 0, (i & 2) != 0, (i & 1) != 0};
}

inline int count_index(const Count& c) { return c.balls * 3 + c.strikes; }

inline Count count_at(int i) { return Count{i / 3, i % 3}; }

inline void check_play_fields(const PlayState& p, const char* what) {
  if (p.count.balls < 0 || p.count.balls > 3 || p.count.strikes < 0 || p.count.strikes > 2 ||
      p.disengagements < 0 || p.disengagements > 2 || p.outs < 0 || p.outs > 2)
    throw contract_error(std::string(what) + ": play state field out of range");
}

// Canonical index. Play states come first, ordered lexicographically by
// (bases, balls, strikes, disengagements, outs); then the four penultimate
// states by run count; terminal is last.
inline int state_index(const GameState& s) {
  switch (s.kind) {
    case GameState::Kind::play:
      check_play_fields(s.play, "state_index");
      return base_state_index(s.play.bases) * 108 + count_index(s.play.count) * 9 +
             s.play.disengagements * 3 + s.play.outs;
    case GameState::Kind::penultimate:
      if (s.penultimate_runs < 0 || s.penultimate_runs > 3)
        throw contract_error("state_index: penultimate runs out of range");
      return kNumPlayStates + s.penultimate_runs;
    case GameState::Kind::terminal:
      return kTerminalIndex;
  }
  throw contract_error("state_index: bad kind");
}

inline GameState state_at(int i) {
  if (i < 0 || i >= kNumStates) throw contract_error("state_at: index out of range");
  if (i == kTerminalIndex) return GameState::make_terminal();
  if (i >= kNumPlayStates) return GameState::make_penultimate(i - kNumPlayStates);
  int o = i % 3;
  int d = (i / 3) % 3;
  int c = (i / 9) % 12;
  int b = i / 108;
  return GameState::make_play(base_state_at(b), count_at(c), d, o);
}

inline std::vector<GameState> enumerate_states() {
  std::vector<GameState> states;
  states.reserve(kNumStates);
  for (int i = 0; i < kNumStates; ++i) states.push_back(state_at(i));
  return states;
}

// Index over (bases, count, outs), ignoring disengagements. Used by the
// pooled transition tables.
inline int reduced_index(const BaseState& b, const Count& c, int outs) {
  return base_state_index(b) * 36 + count_index(c) * 3 + outs;
}

inline int reduced_index(const PlayState& p) { return reduced_index(p.bases, p.count, p.outs); }

struct ReducedState {
  BaseState bases;
  Count count;
  int outs = 0;
};

inline ReducedState reduced_at(int i) {
  return ReducedState{base_state_at(i / 36), count_at((i / 3) % 12), i % 3};
}

// The runner chooses a lead only with a runner on first and no other runner.
inline bool has_runner_agency(const GameState& s) {
  return s.is_play() && s.play.bases == BaseState{true, false, false};
}

// Discretized lead distances in feet: min + i*step for i in [0, size).
struct LeadGrid {
  double min_ft = 0.0, max_ft = 20.0, step_ft = 0.1;

  void validate() const {
    if (!(step_ft > 0) || !(max_ft > min_ft) || min_ft < 0)
      throw contract_error("LeadGrid: need max > min >= 0 and step > 0");
    double k = (max_ft - min_ft) / step_ft;
    if (std::abs(k - std::round(k)) > 1e-9)
      throw contract_error("LeadGrid: span must be an integral number of steps");
  }
  int size() const {
    return static_cast<int>(std::llround((max_ft - min_ft) / step_ft)) + 1;
  }
  // Multiplication keeps grid points exact multiples of the step; repeated
  // addition would accumulate drift across 200 points.
  double lead(int i) const { return min_ft + i * step_ft; }
  int index_of(double lead_ft) const {
    int i = static_cast<int>(std::llround((lead_ft - min_ft) / step_ft));
    if (i < 0 || i >= size() || std::abs(lead(i) - lead_ft) > 1e-6)
      throw contract_error("LeadGrid: lead is not a grid point");
    return i;
  }
  friend bool operator==(const LeadGrid& a, const LeadGrid& b) {
    return a.min_ft == b.min_ft && a.max_ft == b.max_ft && a.step_ft == b.step_ft;
  }
};

struct RunnerAction {
  bool agency = false;    // false: the dummy action in states without a lead choice
  int lead_index = -1;    // grid index when agency
  double lead_ft = 0.0;   // grid value when agency
};

enum class PitcherActionKind : std::uint8_t { pickoff, pitch, none };

inline std::vector<RunnerAction> runner_actions(const GameState& s, const LeadGrid& grid) {
  std::vector<RunnerAction> acts;
  if (!has_runner_agency(s)) {
    acts.push_back(RunnerAction{});
    return acts;
  }
  acts.reserve(grid.size());
  for (int i = 0; i < grid.size(); ++i) acts.push_back(RunnerAction{true, i, grid.lead(i)});
  return acts;
}

// The pitcher moves second and only has a real choice when the runner led off.
inline std::vector<PitcherActionKind> pitcher_actions(const GameState& s,
                                                      const RunnerAction& a) {
  if (has_runner_agency(s) != a.agency)
    throw contract_error("pitcher_actions: runner action does not match state agency");
  if (a.agency)
    return {PitcherActionKind::pickoff, PitcherActionKind::pitch};
  return {PitcherActionKind::none};
}

// Runs scored on the transition s -> s_next. With bases and outs both
// conserved quantities plus one for a completed plate appearance, runs are
// (runners+outs before) - (runners+outs after) + [new batter], where a new
// batter is marked by a fresh 0-0 count with zero disengagements.
inline int reward(const GameState& s, const GameState& s_next) {
  if (s.is_terminal()) throw contract_error("reward: no transitions leave the terminal state");
  if (s_next.is_terminal()) return 0;
  if (s.is_penultimate())
    throw contract_error("reward: penultimate states only transition to terminal");
  if (s_next.is_penultimate()) {
    if (s_next.penultimate_runs < 0 || s_next.penultimate_runs > 3)
      throw contract_error("reward: penultimate runs out of range");
    return s_next.penultimate_runs;
  }
  check_play_fields(s.play, "reward");
  check_play_fields(s_next.play, "reward");
  int before = runners_on_base(s.play.bases) + s.play.outs;
  int after = runners_on_base(s_next.play.bases) + s_next.play.outs;
  int new_batter =
      (s_next.play.count == Count{0, 0} && s_next.play.disengagements == 0) ? 1 : 0;
  int runs = before - after + new_batter;
  if (runs < 0 || runs > 4)
    throw contract_error("reward: implied runs outside [0,4], state pair is inadmissible");
  return runs;
}

// Observed runner outcomes on a play from a state with runner agency.
enum class RunnerOutcome : std::uint8_t {
  pickoff_success,  // runner picked off
  pickoff_fail,     // pickoff attempt, runner safe
  steal_success,
  steal_fail,
  none,  // plain pitch, no steal attempt
};

inline constexpr int kNumRunnerOutcomes = 5;

inline const char* to_string(RunnerOutcome r) {
  switch (r) {
    case RunnerOutcome::pickoff_success: return "PO_SUCCESS";
    case RunnerOutcome::pickoff_fail: return "PO_FAIL";
    case RunnerOutcome::steal_success: return "SB_SUCCESS";
    case RunnerOutcome::steal_fail: return "SB_FAIL";
    case RunnerOutcome::none: return "NONE";
  }
  return "?";
}

inline std::string state_to_string(const GameState& s) {
  if (s.is_terminal()) return "terminal";
  if (s.is_penultimate()) return "penultimate(" + std::to_string(s.penultimate_runs) + ")";
  const PlayState& p = s.play;
  char buf[48];
  std::snprintf(buf, sizeof buf, "b%d%d%d c%d-%d d%d o%d", int(p.bases.first),
                int(p.bases.second), int(p.bases.third), p.count.balls, p.count.strikes,
                p.disengagements, p.outs);
  return buf;
}

}  // namespace leadoff
