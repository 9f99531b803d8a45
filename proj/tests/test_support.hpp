#pragma once

// Shared fixtures: a small coefficient set with hand-pickable logits and a
// hand-rolled play corpus that touches every bases configuration, all five
// runner events, and the third-disengagement penalty.

#include <optional>
#include <vector>

#include "leadoff/game_state.hpp"
#include "leadoff/logistic_models.hpp"
#include "leadoff/play_records.hpp"

namespace testsup {

using namespace leadoff;

inline ModelSet simple_model_set() {
  ModelSet ms;
  ms.po_attempt.kind = ModelKind::po_attempt;
  ms.po_attempt.intercept = -3.0;
  ms.po_attempt.b_lead = 0.2;
  ms.po_attempt.b_diseng1 = -0.6;
  ms.po_attempt.b_diseng2 = -1.2;
  ms.po_success.kind = ModelKind::po_success;
  ms.po_success.intercept = -5.0;
  ms.po_success.b_lead = 0.3;
  ms.sb_attempt.kind = ModelKind::sb_attempt;
  ms.sb_attempt.intercept = -2.2;
  ms.sb_attempt.b_diseng1 = 0.3;
  ms.sb_attempt.b_diseng2 = 0.6;
  ms.sb_success.kind = ModelKind::sb_success;
  ms.sb_success.intercept = 0.9;
  ms.sb_success.b_lead = 0.12;
  return ms;
}

inline PlayRecord play_row(const PlayState& pre, const PlayState& post,
                           std::optional<RunnerOutcome> oc = std::nullopt,
                           std::optional<double> lead = std::nullopt) {
  PlayRecord r;
  r.pre = pre;
  r.post = post;
  r.inning_end = false;
  if (oc) {
    r.outcome = oc;
    r.pickoff_attempt = *oc == RunnerOutcome::pickoff_success ||
                        *oc == RunnerOutcome::pickoff_fail;
    r.lead_ft = lead ? lead : std::optional<double>(9.0);
  }
  return r;
}

inline PlayRecord end_row(const PlayState& pre, int runs,
                          std::optional<RunnerOutcome> oc = std::nullopt,
                          std::optional<double> lead = std::nullopt) {
  PlayRecord r;
  r.pre = pre;
  r.inning_end = true;
  r.runs_on_play = runs;
  if (oc) {
    r.outcome = oc;
    r.pickoff_attempt = *oc == RunnerOutcome::pickoff_success ||
                        *oc == RunnerOutcome::pickoff_fail;
    r.lead_ft = lead ? lead : std::optional<double>(9.0);
  }
  return r;
}

inline PlayState ps(BaseState b, int balls, int strikes, int d, int o) {
  return PlayState{b, Count{balls, strikes}, d, o};
}

// Corpus covering agency events across a few counts and disengagement levels
// plus at least two plays from every other bases configuration. Enough for an
// assembled kernel whose gaps exercise the pooled fallbacks.
inline std::vector<PlayRecord> mini_corpus() {
  const BaseState first{true, false, false};
  std::vector<PlayRecord> rows;

  auto emit_agency = [&](int balls, int strikes, int d, int o) {
    PlayState pre = ps(first, balls, strikes, d, o);
    // taken ball or walk
    if (balls < 3) {
      rows.push_back(play_row(pre, ps(first, balls + 1, strikes, d, o),
                              RunnerOutcome::none, 8.5));
    } else {
      rows.push_back(play_row(pre, ps(BaseState{true, true, false}, 0, 0, 0, o),
                              RunnerOutcome::none, 8.5));
    }
    // called strike or strikeout
    if (strikes < 2) {
      rows.push_back(play_row(pre, ps(first, balls, strikes + 1, d, o),
                              RunnerOutcome::none, 9.0));
    } else if (o < 2) {
      rows.push_back(play_row(pre, ps(first, 0, 0, 0, o + 1), RunnerOutcome::none, 9.0));
    } else {
      rows.push_back(end_row(pre, 0, RunnerOutcome::none, 9.0));
    }
    // ball in play: single, runner to second
    rows.push_back(play_row(pre, ps(BaseState{true, true, false}, 0, 0, 0, o),
                            RunnerOutcome::none, 9.5));
    // two-run homer
    rows.push_back(play_row(pre, ps(BaseState{false, false, false}, 0, 0, 0, o),
                            RunnerOutcome::none, 10.0));
    // pickoff attempts; at two disengagements the failure is the penalty play
    if (o < 2)
      rows.push_back(play_row(pre, ps(BaseState{false, false, false}, balls, strikes,
                                      std::min(d + 1, 2), o + 1),
                              RunnerOutcome::pickoff_success, 11.0));
    else
      rows.push_back(end_row(pre, 0, RunnerOutcome::pickoff_success, 11.0));
    if (d < 2)
      rows.push_back(play_row(pre, ps(first, balls, strikes, d + 1, o),
                              RunnerOutcome::pickoff_fail, 11.5));
    else
      rows.push_back(play_row(pre, ps(BaseState{false, true, false}, balls, strikes, 0, o),
                              RunnerOutcome::pickoff_fail, 11.5));
    // steal resolved on a taken pitch; a full count forces a strikeout
    int nb = balls < 3 ? balls + 1 : balls;
    int ns = balls < 3 ? strikes : strikes + 1;
    if (ns > 2) {  // the taken pitch strikes the batter out
      if (o < 2)
        rows.push_back(play_row(pre, ps(BaseState{false, true, false}, 0, 0, 0, o + 1),
                                RunnerOutcome::steal_success, 12.0));
      else
        rows.push_back(end_row(pre, 0, RunnerOutcome::steal_success, 12.0));
      if (o == 0)
        rows.push_back(play_row(pre, ps(BaseState{false, false, false}, 0, 0, 0, 2),
                                RunnerOutcome::steal_fail, 12.5));
      else
        rows.push_back(end_row(pre, 0, RunnerOutcome::steal_fail, 12.5));
    } else {
      rows.push_back(play_row(pre, ps(BaseState{false, true, false}, nb, ns, 0, o),
                              RunnerOutcome::steal_success, 12.0));
      if (o < 2)
        rows.push_back(play_row(pre, ps(BaseState{false, false, false}, nb, ns, d, o + 1),
                                RunnerOutcome::steal_fail, 12.5));
      else
        rows.push_back(end_row(pre, 0, RunnerOutcome::steal_fail, 12.5));
    }
  };

  for (int o = 0; o < 3; ++o) {
    emit_agency(0, 0, 0, o);
    emit_agency(0, 0, 1, o);
    emit_agency(0, 0, 2, o);
  }
  emit_agency(1, 0, 0, 0);
  emit_agency(2, 1, 1, 0);
  emit_agency(3, 1, 0, 1);
  emit_agency(1, 2, 0, 0);
  emit_agency(3, 2, 2, 1);

  auto emit_no_agency = [&](BaseState b, int balls, int strikes, int d, int o) {
    PlayState pre = ps(b, balls, strikes, d, o);
    if (balls < 3)
      rows.push_back(play_row(pre, ps(b, balls + 1, strikes, d, o)));
    // plate appearance ends: everybody holds, batter out
    if (o < 2)
      rows.push_back(play_row(pre, ps(b, 0, 0, 0, o + 1)));
    else
      rows.push_back(end_row(pre, 0));
    // bases-loaded walk scores one
    if (b.first && b.second && b.third)
      rows.push_back(play_row(pre, ps(b, 0, 0, 0, o)));
  };

  const BaseState others[] = {
      BaseState{false, false, false}, BaseState{false, true, false},
      BaseState{false, false, true},  BaseState{true, true, false},
      BaseState{true, false, true},   BaseState{false, true, true},
      BaseState{true, true, true}};
  for (const BaseState& b : others) {
    for (int o = 0; o < 3; ++o) {
      emit_no_agency(b, 0, 0, 0, o);
      emit_no_agency(b, 1, 1, 0, o);
    }
    emit_no_agency(b, 3, 0, 0, 0);
    emit_no_agency(b, 0, 2, 0, 1);
  }
  // a couple of scoring inning-enders for the penultimate bookkeeping
  rows.push_back(end_row(ps(BaseState{false, true, true}, 1, 1, 0, 2), 2));
  rows.push_back(end_row(ps(BaseState{true, true, true}, 2, 2, 0, 2), 3));
  return rows;
}

}  // namespace testsup
