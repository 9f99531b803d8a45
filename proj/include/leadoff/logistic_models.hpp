#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "leadoff/errors.hpp"
#include "leadoff/game_state.hpp"
#include "leadoff/util.hpp"

namespace leadoff {

enum class ModelKind : std::uint8_t { po_attempt, po_success, sb_attempt, sb_success };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::po_attempt: return "po_attempt";
    case ModelKind::po_success: return "po_success";
    case ModelKind::sb_attempt: return "sb_attempt";
    case ModelKind::sb_success: return "sb_success";
  }
  return "?";
}

enum class Role : std::uint8_t { runner, pitcher, catcher };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::runner: return "runner";
    case Role::pitcher: return "pitcher";
    case Role::catcher: return "catcher";
  }
  return "?";
}

// Which terms each model kind carries. Pickoff models see the game situation
// and the lead; the steal-attempt model deliberately has no lead term, and the
// steal-success model no situation terms.
inline bool kind_has_situation(ModelKind k) {
  return k == ModelKind::po_attempt || k == ModelKind::sb_attempt;
}
inline bool kind_has_lead(ModelKind k) { return k != ModelKind::sb_attempt; }
inline bool kind_has_covariates(ModelKind k) {
  return k == ModelKind::sb_attempt || k == ModelKind::sb_success;
}
inline bool kind_has_role(ModelKind k, Role r) {
  if (r == Role::pitcher) return true;
  return kind_has_covariates(k);  // runner and catcher enter the steal models only
}

// Everything about the current play the models can condition on. Empty player
// ids mean "not in the fitted pool" and contribute no random effect.
struct PlayContext {
  int balls = 0, strikes = 0, outs = 0, disengagements = 0;
  std::string runner_id, pitcher_id, catcher_id;
  std::optional<double> sprint_speed;  // ft/s
  std::optional<double> arm_strength;  // mph
};

inline PlayContext make_context(const PlayState& p, std::string runner_id = "",
                                std::string pitcher_id = "", std::string catcher_id = "") {
  PlayContext c;
  c.balls = p.count.balls;
  c.strikes = p.count.strikes;
  c.outs = p.outs;
  c.disengagements = p.disengagements;
  c.runner_id = std::move(runner_id);
  c.pitcher_id = std::move(pitcher_id);
  c.catcher_id = std::move(catcher_id);
  return c;
}

// One fitted mixed-effects logistic model. Fixed-effect slots are populated
// per kind at load time; conventions (covariate centering, the fallback means
// for missing covariates) are copied in so evaluation is self-contained.
struct LogisticModel {
  ModelKind kind = ModelKind::po_attempt;
  double intercept = 0;
  double b_balls = 0, b_strikes = 0, b_outs = 0;
  double b_diseng1 = 0, b_diseng2 = 0;  // categorical in d, baseline d = 0
  double b_lead = 0;
  double b_speed = 0, b_arm = 0;
  std::map<Role, double> re_sd;
  std::map<Role, std::map<std::string, double>> re;

  bool centered_covariates = false;
  double mean_speed = 0, mean_arm = 0;
  // 2022-style encoding: disengagement counts were recorded as zero, so the
  // categorical terms never fire.
  bool zero_disengagements = false;
  // additive shift from synthetic percentile profiles
  double gamma_offset = 0;

  double player_effect(Role role, const std::string& id) const {
    if (id.empty()) return 0.0;
    auto t = re.find(role);
    if (t == re.end()) return 0.0;
    auto e = t->second.find(id);
    return e == t->second.end() ? 0.0 : e->second;
  }
};

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline constexpr double kProbFloor = 1e-9;

inline double clamp_probability(double p) {
  if (p < kProbFloor) return kProbFloor;
  if (p > 1.0 - kProbFloor) return 1.0 - kProbFloor;
  return p;
}

// Evaluate one model at a play context. `lead` must be supplied exactly when
// the model kind has a lead term. The returned probability is clamped away
// from 0 and 1 so downstream log-space work and halting arguments stay finite.
inline double eval_logistic(const LogisticModel& m, const PlayContext& ctx,
                            std::optional<double> lead = std::nullopt) {
  if (kind_has_lead(m.kind) != lead.has_value())
    throw contract_error(std::string("eval_logistic: ") + to_string(m.kind) +
                         (lead ? " takes no lead" : " requires a lead"));
  if (lead && (*lead < 0 || !std::isfinite(*lead)))
    throw contract_error("eval_logistic: lead must be finite and non-negative");

  double x = m.intercept + m.gamma_offset;
  if (kind_has_situation(m.kind)) {
    if (ctx.balls < 0 || ctx.balls > 3 || ctx.strikes < 0 || ctx.strikes > 2 ||
        ctx.outs < 0 || ctx.outs > 2 || ctx.disengagements < 0 || ctx.disengagements > 2)
      throw contract_error("eval_logistic: context fields out of range");
    x += m.b_balls * ctx.balls + m.b_strikes * ctx.strikes + m.b_outs * ctx.outs;
    int d = m.zero_disengagements ? 0 : ctx.disengagements;
    if (d == 1) x += m.b_diseng1;
    if (d == 2) x += m.b_diseng2;
  }
  if (lead) x += m.b_lead * *lead;
  if (kind_has_covariates(m.kind)) {
    auto covariate = [&](const std::optional<double>& z, double mean, const char* name) {
      if (z && (*z < 0 || !std::isfinite(*z)))
        throw data_error(std::string("eval_logistic: negative or non-finite ") + name);
      double v = z ? *z : mean;
      return m.centered_covariates ? v - mean : v;
    };
    x += m.b_speed * covariate(ctx.sprint_speed, m.mean_speed, "sprint_speed");
    x += m.b_arm * covariate(ctx.arm_strength, m.mean_arm, "arm_strength");
  }
  x += m.player_effect(Role::runner, ctx.runner_id);
  x += m.player_effect(Role::pitcher, ctx.pitcher_id);
  x += m.player_effect(Role::catcher, ctx.catcher_id);
  return clamp_probability(sigmoid(x));
}

// The four models plus the shared conventions they were loaded with.
struct ModelSet {
  LogisticModel po_attempt, po_success, sb_attempt, sb_success;
  double mean_sprint_speed = 0, mean_arm_strength = 0;
  bool centered_covariates = false;

  const LogisticModel& model(ModelKind k) const {
    switch (k) {
      case ModelKind::po_attempt: return po_attempt;
      case ModelKind::po_success: return po_success;
      case ModelKind::sb_attempt: return sb_attempt;
      case ModelKind::sb_success: return sb_success;
    }
    throw contract_error("ModelSet::model: bad kind");
  }
  LogisticModel& model(ModelKind k) {
    return const_cast<LogisticModel&>(static_cast<const ModelSet*>(this)->model(k));
  }

  void set_zero_disengagements(bool v) {
    po_attempt.zero_disengagements = v;
    po_success.zero_disengagements = v;
    sb_attempt.zero_disengagements = v;
    sb_success.zero_disengagements = v;
  }

  double pickoff_attempt_prob(const PlayContext& ctx, double lead) const {
    return eval_logistic(po_attempt, ctx, lead);
  }
  double pickoff_success_prob(const PlayContext& ctx, double lead) const {
    return eval_logistic(po_success, ctx, lead);
  }
  double steal_attempt_prob(const PlayContext& ctx) const {
    return eval_logistic(sb_attempt, ctx);
  }
  double steal_success_prob(const PlayContext& ctx, double lead) const {
    return eval_logistic(sb_success, ctx, lead);
  }
};

// Distribution over the five runner outcomes of a single play from a state
// with runner agency. The component probabilities that produced it ride along
// for diagnostics and tests.
struct OutcomeDistribution {
  std::array<double, kNumRunnerOutcomes> p{};
  double phi = std::numeric_limits<double>::quiet_NaN();  // pickoff attempt
  double phi_plus = std::numeric_limits<double>::quiet_NaN();
  double psi = std::numeric_limits<double>::quiet_NaN();  // steal attempt
  double psi_plus = std::numeric_limits<double>::quiet_NaN();

  double operator[](RunnerOutcome r) const { return p[static_cast<int>(r)]; }
  double& operator[](RunnerOutcome r) { return p[static_cast<int>(r)]; }
  double sum() const {
    double s = 0;
    for (double v : p) s += v;
    return s;
  }
};

// Pitcher committed to a pickoff throw or a pitch.
inline OutcomeDistribution compose_two_player(double phi_plus, double psi, double psi_plus,
                                              PitcherActionKind action) {
  OutcomeDistribution d;
  d.phi_plus = phi_plus;
  d.psi = psi;
  d.psi_plus = psi_plus;
  if (action == PitcherActionKind::pickoff) {
    d[RunnerOutcome::pickoff_success] = phi_plus;
    d[RunnerOutcome::pickoff_fail] = 1.0 - phi_plus;
  } else if (action == PitcherActionKind::pitch) {
    d[RunnerOutcome::steal_success] = psi * psi_plus;
    d[RunnerOutcome::steal_fail] = psi * (1.0 - psi_plus);
    d[RunnerOutcome::none] = 1.0 - psi;
  } else {
    throw contract_error("compose_two_player: pitcher action has no agency");
  }
  return d;
}

// Pitcher behaves like the data: picks off with probability phi.
inline OutcomeDistribution compose_one_player(double phi, double phi_plus, double psi,
                                              double psi_plus) {
  OutcomeDistribution d;
  d.phi = phi;
  d.phi_plus = phi_plus;
  d.psi = psi;
  d.psi_plus = psi_plus;
  d[RunnerOutcome::pickoff_success] = phi * phi_plus;
  d[RunnerOutcome::pickoff_fail] = phi * (1.0 - phi_plus);
  d[RunnerOutcome::steal_success] = (1.0 - phi) * psi * psi_plus;
  d[RunnerOutcome::steal_fail] = (1.0 - phi) * psi * (1.0 - psi_plus);
  d[RunnerOutcome::none] = (1.0 - phi) * (1.0 - psi);
  return d;
}

inline OutcomeDistribution outcome_distribution_two_player(const ModelSet& ms,
                                                           const PlayContext& ctx,
                                                           double lead,
                                                           PitcherActionKind action) {
  OutcomeDistribution d = compose_two_player(ms.pickoff_success_prob(ctx, lead),
                                             ms.steal_attempt_prob(ctx),
                                             ms.steal_success_prob(ctx, lead), action);
  return d;
}

inline OutcomeDistribution outcome_distribution_one_player(const ModelSet& ms,
                                                           const PlayContext& ctx,
                                                           double lead) {
  return compose_one_player(ms.pickoff_attempt_prob(ctx, lead),
                            ms.pickoff_success_prob(ctx, lead), ms.steal_attempt_prob(ctx),
                            ms.steal_success_prob(ctx, lead));
}

enum class ProfileRole : std::uint8_t { runner, pitcher, catcher, battery };

// Additive linear-predictor shifts, one per model, that stand in for a player
// at the q-th skill percentile of the fitted random-effect distribution.
struct PercentileProfile {
  double po_attempt = 0, po_success = 0, sb_attempt = 0, sb_success = 0;
  double& for_kind(ModelKind k) {
    switch (k) {
      case ModelKind::po_attempt: return po_attempt;
      case ModelKind::po_success: return po_success;
      case ModelKind::sb_attempt: return sb_attempt;
      case ModelKind::sb_success: return sb_success;
    }
    throw contract_error("PercentileProfile: bad kind");
  }
};

// gamma at the q-quantile of N(0, sd^2), signed so that a higher q always
// favors the profiled role: a strong battery attempts and completes more
// pickoffs and suppresses steal attempts and steal success; a strong runner
// runs more and succeeds more.
inline PercentileProfile percentile_profile(const ModelSet& ms, ProfileRole role, double q) {
  if (!(q > 0.0 && q < 1.0))
    throw contract_error("percentile_profile: q must be inside (0,1)");
  double z = normal_quantile(q);
  PercentileProfile prof;
  auto add = [&](Role r, double sign) {
    for (ModelKind k : {ModelKind::po_attempt, ModelKind::po_success, ModelKind::sb_attempt,
                        ModelKind::sb_success}) {
      if (!kind_has_role(k, r)) continue;
      const auto& sds = ms.model(k).re_sd;
      auto it = sds.find(r);
      if (it == sds.end()) continue;
      prof.for_kind(k) += sign * z * it->second;
    }
  };
  switch (role) {
    case ProfileRole::runner:
      add(Role::runner, +1.0);
      break;
    case ProfileRole::pitcher:
      // favoring the pitcher means more and better pickoffs, fewer and worse steals
      prof.po_attempt += z * (ms.po_attempt.re_sd.count(Role::pitcher)
                                  ? ms.po_attempt.re_sd.at(Role::pitcher)
                                  : 0.0);
      prof.po_success += z * (ms.po_success.re_sd.count(Role::pitcher)
                                  ? ms.po_success.re_sd.at(Role::pitcher)
                                  : 0.0);
      prof.sb_attempt -= z * (ms.sb_attempt.re_sd.count(Role::pitcher)
                                  ? ms.sb_attempt.re_sd.at(Role::pitcher)
                                  : 0.0);
      prof.sb_success -= z * (ms.sb_success.re_sd.count(Role::pitcher)
                                  ? ms.sb_success.re_sd.at(Role::pitcher)
                                  : 0.0);
      break;
    case ProfileRole::catcher:
      add(Role::catcher, -1.0);  // catcher only appears on the steal models
      break;
    case ProfileRole::battery: {
      PercentileProfile p = percentile_profile(ms, ProfileRole::pitcher, q);
      PercentileProfile c = percentile_profile(ms, ProfileRole::catcher, q);
      prof.po_attempt = p.po_attempt + c.po_attempt;
      prof.po_success = p.po_success + c.po_success;
      prof.sb_attempt = p.sb_attempt + c.sb_attempt;
      prof.sb_success = p.sb_success + c.sb_success;
      break;
    }
  }
  return prof;
}

inline ModelSet apply_profile(const ModelSet& ms, const PercentileProfile& prof) {
  ModelSet out = ms;
  out.po_attempt.gamma_offset += prof.po_attempt;
  out.po_success.gamma_offset += prof.po_success;
  out.sb_attempt.gamma_offset += prof.sb_attempt;
  out.sb_success.gamma_offset += prof.sb_success;
  return out;
}

}  // namespace leadoff
