#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "leadoff/kernel_builder.hpp"
#include "leadoff/policy_eval_direct.hpp"
#include "leadoff/pooled_table.hpp"
#include "leadoff/solver.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

using namespace leadoff;

namespace {

// Brute-force enumeration oracle shared with the acceptance gate.
using oracle::DenseRow;
using oracle::dense_row;
using oracle::evaluate_pair_dense;
using oracle::next_policy;
using oracle::oracle_maximin;
using oracle::random_game;
using oracle::solve_chain;

TransitionKernel coarse_baseball_kernel(KernelMode mode) {
  PooledFrequencyTable pf = estimate_pooled_frequencies(testsup::mini_corpus());
  ModelSet ms = testsup::simple_model_set();
  AssemblyOptions opts;
  opts.mode = mode;
  opts.grid = LeadGrid{0.0, 20.0, 1.0};
  return assemble_kernel(pf, ms, opts);
}

}  // namespace

TEST_CASE("value iteration solves a closed-form chain") {
  // Single state, single action: self-loop w.p. 1/2 paying 1, exit w.p. 1/2.
  // V = 1/2 * (1 + V) -> V = 1.
  KernelBuilder b(2, 1, KernelMode::generic);
  b.begin_state(0, 1, 1);
  b.add_row({{0, {0.5, 1.0}}, {1, {0.5, 0.0}}});
  b.begin_state(1, 1, 1);
  b.add_row({{1, {1.0, 0.0}}});
  TransitionKernel k = b.finish();

  SolveReport rep;
  ValueFunction v = value_iteration(k, 1e-12, 100000, &rep);
  REQUIRE(rep.converged);
  REQUIRE(v[0] == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(v[1] == 0.0);
  REQUIRE(rep.final_residual <= 1e-12);
  REQUIRE(rep.rho_hat < 1.0);
  REQUIRE(std::isfinite(rep.certified_bound));
  // Certified error bound must actually contain the truth.
  REQUIRE(std::abs(v[0] - 1.0) <= rep.certified_bound);
}

TEST_CASE("maximin picks the saddle of a one-shot matrix") {
  // Runner rows x pitcher cols of instant payoffs:
  //   a0: 3 1     pitcher answers a0 with 1
  //   a1: 2 2     pitcher is indifferent; value 2
  // Runner therefore plays a1 for value 2.
  KernelBuilder b(2, 1, KernelMode::generic);
  b.begin_state(0, 2, 2);
  b.add_row({{1, {1.0, 3.0}}});
  b.add_row({{1, {1.0, 1.0}}});
  b.add_row({{1, {1.0, 2.0}}});
  b.add_row({{1, {1.0, 2.0}}});
  b.begin_state(1, 1, 1);
  b.add_row({{1, {1.0, 0.0}}});
  TransitionKernel k = b.finish();

  ValueFunction v = value_iteration(k, 1e-12);
  REQUIRE(v[0] == Catch::Approx(2.0).margin(1e-12));

  PolicyPair pol = extract_policies(k, v);
  REQUIRE(pol.runner[0] == 1);
  // Pitcher responses: against a0 strictly prefers action 1; against a1 the
  // actions tie and the tie goes to the highest index.
  REQUIRE(pol.pitcher[0][0] == 1);
  REQUIRE(pol.pitcher[0][1] == 1);
}

TEST_CASE("runner ties break toward the lowest action index") {
  KernelBuilder b(2, 1, KernelMode::generic);
  b.begin_state(0, 3, 1);
  b.add_row({{1, {1.0, 1.5}}});
  b.add_row({{1, {1.0, 1.5}}});
  b.add_row({{1, {1.0, 1.5}}});
  b.begin_state(1, 1, 1);
  b.add_row({{1, {1.0, 0.0}}});
  TransitionKernel k = b.finish();
  ValueFunction v = value_iteration(k, 1e-12);
  PolicyPair pol = extract_policies(k, v);
  REQUIRE(pol.runner[0] == 0);
}

TEST_CASE("value iteration matches exhaustive policy enumeration") {
  std::mt19937 gen(20260817);
  for (int trial = 0; trial < 12; ++trial) {
    int n_play = 3 + static_cast<int>(gen() % 3);  // 3..5 play states
    TransitionKernel k = random_game(gen, n_play);
    validate_kernel(k);

    std::vector<double> truth = oracle_maximin(k);
    SolveReport rep;
    ValueFunction v = value_iteration(k, 1e-13, 200000, &rep);
    REQUIRE(rep.converged);
    for (int s = 0; s < k.n_states; ++s) {
      INFO("trial " << trial << " state " << s);
      REQUIRE(v[s] == Catch::Approx(truth[s]).margin(1e-9));
    }
  }
}

TEST_CASE("policy iteration agrees with value iteration on random games") {
  std::mt19937 gen(7111);
  for (int trial = 0; trial < 8; ++trial) {
    TransitionKernel k = random_game(gen, 4 + static_cast<int>(gen() % 2));
    ValueFunction vi = value_iteration(k, 1e-12);
    SolveReport rep;
    ValueFunction pi = policy_iteration(k, 1e-10, 500, &rep);
    REQUIRE(rep.converged);
    REQUIRE(rep.method == "pi");
    for (int s = 0; s < k.n_states; ++s) {
      INFO("trial " << trial << " state " << s);
      REQUIRE(pi[s] == Catch::Approx(vi[s]).margin(1e-8));
    }
  }
}

TEST_CASE("both policy evaluation routes agree on random games") {
  std::mt19937 gen(99);
  for (int trial = 0; trial < 8; ++trial) {
    TransitionKernel k = random_game(gen, 5);
    ValueFunction v = value_iteration(k, 1e-12);
    PolicyPair pol = extract_policies(k, v);

    ValueFunction it = evaluate_policy_iterative(k, pol, 1e-13);
    ValueFunction di = evaluate_policy_direct(k, pol);
    for (int s = 0; s < k.n_states; ++s) {
      INFO("trial " << trial << " state " << s);
      REQUIRE(it[s] == Catch::Approx(di[s]).margin(1e-9));
    }

    // Both routes must reproduce the dense-elimination oracle for the pair
    // (runner fixed, pitcher fixed at the runner's chosen action).
    std::vector<int> pitcher_slice(k.n_states, 0);
    for (int s = 0; s < k.n_states; ++s)
      if (s != k.terminal) pitcher_slice[s] = pol.pitcher[s][pol.runner[s]];
    std::vector<double> dense = evaluate_pair_dense(k, pol.runner, pitcher_slice);
    for (int s = 0; s < k.n_states; ++s)
      REQUIRE(di[s] == Catch::Approx(dense[s]).margin(1e-9));
  }
}

TEST_CASE("fixed-policy value never exceeds the game value for the pitcher") {
  // Value of the runner policy extracted at the fixed point, against a perfect
  // pitcher, equals the game value; any other runner policy does worse.
  std::mt19937 gen(4242);
  TransitionKernel k = random_game(gen, 5);
  ValueFunction v = value_iteration(k, 1e-12);
  PolicyPair pol = extract_policies(k, v);
  ValueFunction br = pitcher_best_response_value(k, pol.runner);
  for (int s = 0; s < k.n_states; ++s)
    REQUIRE(br[s] == Catch::Approx(v[s]).margin(1e-8));

  std::vector<int> other = pol.runner;
  bool changed = false;
  for (int s = 0; s < k.n_states && !changed; ++s) {
    if (s == k.terminal || k.n_runner_actions[s] < 2) continue;
    other[s] = (pol.runner[s] + 1) % k.n_runner_actions[s];
    changed = true;
  }
  if (changed) {
    ValueFunction br2 = pitcher_best_response_value(k, other);
    for (int s = 0; s < k.n_states; ++s)
      REQUIRE(br2[s] <= v[s] + 1e-8);
  }
}

TEST_CASE("fitted residual rate recovers a geometric decay") {
  std::vector<double> hist;
  for (int i = 0; i < 30; ++i) hist.push_back(3.7 * std::pow(0.82, i));
  REQUIRE(fitted_residual_rate(hist, 20) == Catch::Approx(0.82).margin(1e-9));
  REQUIRE(fitted_residual_rate(hist, 1000) == Catch::Approx(0.82).margin(1e-9));
  REQUIRE(fitted_residual_rate({1.0}, 10) == 0.0);
  REQUIRE(fitted_residual_rate({}, 10) == 0.0);
}

TEST_CASE("bellman sweep rejects malformed inputs") {
  std::mt19937 gen(5);
  TransitionKernel k = random_game(gen, 3);
  ValueFunction v(k.n_states, 0.0), out(k.n_states, 0.0);
  ValueFunction short_v(k.n_states - 1, 0.0);
  REQUIRE_THROWS_AS(bellman_sweep(k, short_v, out), contract_error);
  v[k.terminal] = 0.5;
  REQUIRE_THROWS_AS(bellman_sweep(k, v, out), contract_error);
  REQUIRE_THROWS_AS(value_iteration(k, -1.0), contract_error);
}

TEST_CASE("solver refuses a kernel that admits indefinite play") {
  // Two states that shuttle mass between each other under one action choice.
  KernelBuilder b(3, 2, KernelMode::generic);
  b.begin_state(0, 1, 1);
  b.add_row({{1, {1.0, 0.1}}});
  b.begin_state(1, 2, 1);
  b.add_row({{0, {1.0, 0.1}}});
  b.add_row({{2, {1.0, 0.0}}});
  b.begin_state(2, 1, 1);
  b.add_row({{2, {1.0, 0.0}}});
  TransitionKernel k = b.finish();
  REQUIRE_THROWS_AS(value_iteration(k), invalid_kernel_error);
  REQUIRE_THROWS_AS(policy_iteration(k), invalid_kernel_error);
}

TEST_CASE("full game kernel solves and both methods agree") {
  TransitionKernel k = coarse_baseball_kernel(KernelMode::two_player);

  SolveReport vi_rep, pi_rep;
  ValueFunction vi = value_iteration(k, 1e-10, 100000, &vi_rep);
  REQUIRE(vi_rep.converged);
  REQUIRE(vi_rep.rho_hat < 1.0);
  REQUIRE(std::isfinite(vi_rep.certified_bound));
  REQUIRE(vi[k.terminal] == 0.0);

  // Expected runs are nonnegative and bounded by the one-play reward cap
  // divided through the halting margin; sanity band only.
  for (int s = 0; s < k.n_states; ++s) {
    REQUIRE(vi[s] >= -1e-12);
    REQUIRE(vi[s] <= vi_rep.halting_m * 4.0 / (1.0 - vi_rep.rho_hat) + 1.0);
  }
  // Runs are paid on entry into the penultimate states, so the states
  // themselves are worth nothing.
  for (int runs = 0; runs <= 3; ++runs)
    REQUIRE(vi[kNumPlayStates + runs] == Catch::Approx(0.0).margin(1e-12));

  ValueFunction pi = policy_iteration(k, 1e-10, 500, &pi_rep);
  REQUIRE(pi_rep.converged);
  double worst = 0;
  for (int s = 0; s < k.n_states; ++s)
    worst = std::max(worst, std::abs(pi[s] - vi[s]));
  REQUIRE(worst <= 1e-8);

  PolicyPair pol = extract_policies(k, vi);
  ValueFunction it = evaluate_policy_iterative(k, pol, 1e-13);
  ValueFunction di = evaluate_policy_direct(k, pol);
  double gap = 0;
  for (int s = 0; s < k.n_states; ++s)
    gap = std::max(gap, std::abs(it[s] - di[s]));
  REQUIRE(gap <= 1e-9);

  // Residual history should contract at roughly the halting rate.
  double rate = fitted_residual_rate(vi_rep.residual_history, 20);
  REQUIRE(rate > 0.0);
  REQUIRE(rate < 1.0);
}

namespace {

std::vector<std::pair<int, std::pair<double, double>>> row_entries(
    const TransitionKernel& k, std::int64_t rid) {
  std::vector<std::pair<int, std::pair<double, double>>> out;
  for (std::int64_t e = k.row_begin[rid]; e < k.row_begin[rid + 1]; ++e)
    out.push_back({k.col[e], {k.prob[e], k.rew[e]}});
  return out;
}

// Strip the pitcher's choice: keep only the pitch column of every row.
TransitionKernel freeze_pitcher_to_pitch(const TransitionKernel& k) {
  KernelBuilder b(k.n_states, k.terminal, KernelMode::generic);
  for (int s = 0; s < k.n_states; ++s) {
    int np = k.n_pitcher_actions[s];
    b.begin_state(s, k.n_runner_actions[s], 1);
    for (int a = 0; a < k.n_runner_actions[s]; ++a)
      b.add_row(row_entries(k, k.row_id(s, a, np - 1)));
  }
  return b.finish();
}

}  // namespace

TEST_CASE("converged value has a small Bellman residual and a unique limit") {
  TransitionKernel k = coarse_baseball_kernel(KernelMode::two_player);
  const double tol = 1e-10;
  ValueFunction v = value_iteration(k, tol);

  ValueFunction next(k.n_states, 0.0);
  REQUIRE(bellman_sweep(k, v, next) < 10 * tol);

  // Same limit from a constant upper-bound start. With the
  // successive-difference stopping rule each run is certified to sit within
  // its own bound of the fixed point, so the runs agree within the sum.
  HaltingReport halt = compute_halting(k);
  ValueFunction high(k.n_states, halt.value_upper_bound);
  high[k.terminal] = 0.0;
  SolveReport r1, r2;
  value_iteration(k, tol, 100000, &r1);
  ValueFunction v2 = value_iteration(k, tol, 100000, &r2, 40, 1, &high);
  for (int s = 0; s < k.n_states; ++s)
    REQUIRE(std::abs(v[s] - v2[s]) <= r1.certified_bound + r2.certified_bound);

  ValueFunction bad(k.n_states, 1.0);
  REQUIRE_THROWS_AS(value_iteration(k, tol, 100000, nullptr, 40, 1, &bad),
                    contract_error);
}

TEST_CASE("fast-mixing games reach the same limit from any start") {
  // Every row dumps at least 60% of its mass on the terminal state, so each
  // sweep contracts by 0.4 and the stopping rule pins the limit within tol.
  KernelBuilder b(3, 2, KernelMode::generic);
  b.begin_state(0, 2, 1);
  b.add_row({{1, {0.4, 0.7}}, {2, {0.6, 0.2}}});
  b.add_row({{0, {0.3, 0.1}}, {2, {0.7, 0.9}}});
  b.begin_state(1, 1, 2);
  b.add_row({{0, {0.25, 0.0}}, {2, {0.75, 1.1}}});
  b.add_row({{1, {0.35, 0.6}}, {2, {0.65, 0.0}}});
  b.begin_state(2, 1, 1);
  b.add_row({{2, {1.0, 0.0}}});
  TransitionKernel k = b.finish();

  const double tol = 1e-10;
  ValueFunction v = value_iteration(k, tol);
  ValueFunction high(k.n_states, compute_halting(k).value_upper_bound);
  high[k.terminal] = 0.0;
  ValueFunction v2 = value_iteration(k, tol, 100000, nullptr, 40, 1, &high);
  for (int s = 0; s < k.n_states; ++s)
    REQUIRE(std::abs(v[s] - v2[s]) <= 2 * tol);
}

TEST_CASE("pitcher deviations cannot reduce the maximin runner's value") {
  TransitionKernel k = coarse_baseball_kernel(KernelMode::two_player);
  ValueFunction vstar = value_iteration(k, 1e-11);
  PolicyPair eq = extract_policies(k, vstar);

  std::mt19937 gen(31337);
  for (int trial = 0; trial < 3; ++trial) {
    PolicyPair dev = eq;
    for (int s = 0; s < k.n_states; ++s)
      for (int a = 0; a < k.n_runner_actions[s]; ++a)
        dev.pitcher[s][a] = static_cast<int>(gen() % k.n_pitcher_actions[s]);
    ValueFunction v = evaluate_policy_pair(k, dev, 1e-12);
    for (int s = 0; s < k.n_states; ++s) {
      INFO("trial " << trial << " state " << s);
      REQUIRE(v[s] >= vstar[s] - 1e-8);
    }
  }
}

TEST_CASE("one-player solve dominates and degenerates correctly") {
  TransitionKernel two = coarse_baseball_kernel(KernelMode::two_player);
  TransitionKernel one = coarse_baseball_kernel(KernelMode::one_player);

  ValueFunction v2 = value_iteration(two, 1e-11);
  OnePlayerSolution sol = solve_one_player(one, 1e-11);
  REQUIRE(sol.report.converged);
  for (int s = 0; s < one.n_states; ++s)
    REQUIRE(sol.value[s] >= v2[s] - 1e-9);

  REQUIRE_THROWS_AS(solve_one_player(two), contract_error);

  // With the pickoff model silenced, the one-player game is the two-player
  // game with the pitcher frozen to pitching.
  PooledFrequencyTable pf = estimate_pooled_frequencies(testsup::mini_corpus());
  ModelSet ms = testsup::simple_model_set();
  ms.po_attempt.intercept = -40.0;
  AssemblyOptions opts;
  opts.grid = LeadGrid{0.0, 20.0, 1.0};
  opts.mode = KernelMode::one_player;
  TransitionKernel quiet_one = assemble_kernel(pf, ms, opts);
  opts.mode = KernelMode::two_player;
  TransitionKernel quiet_two = assemble_kernel(pf, ms, opts);

  OnePlayerSolution a = solve_one_player(quiet_one, 1e-12);
  OnePlayerSolution b = solve_one_player(freeze_pitcher_to_pitch(quiet_two), 1e-12);
  for (int s = 0; s < quiet_one.n_states; ++s)
    REQUIRE(a.value[s] == Catch::Approx(b.value[s]).margin(1e-6));
}

TEST_CASE("refining the lead grid never hurts the runner") {
  PooledFrequencyTable pf = estimate_pooled_frequencies(testsup::mini_corpus());
  ModelSet ms = testsup::simple_model_set();
  AssemblyOptions opts;
  opts.mode = KernelMode::one_player;
  opts.grid = LeadGrid{0.0, 20.0, 2.0};
  TransitionKernel coarse = assemble_kernel(pf, ms, opts);
  opts.grid = LeadGrid{0.0, 20.0, 1.0};
  TransitionKernel fine = assemble_kernel(pf, ms, opts);

  ValueFunction vc = solve_one_player(coarse, 1e-11).value;
  ValueFunction vf = solve_one_player(fine, 1e-11).value;
  for (int s = 0; s < fine.n_states; ++s)
    REQUIRE(vf[s] >= vc[s] - 1e-10);
}

TEST_CASE("evaluating an all-absorbing kernel returns the one-step reward") {
  KernelBuilder b(3, 2, KernelMode::generic);
  b.begin_state(0, 1, 1);
  b.add_row({{2, {1.0, 1.25}}});
  b.begin_state(1, 1, 1);
  b.add_row({{2, {1.0, 0.5}}});
  b.begin_state(2, 1, 1);
  b.add_row({{2, {1.0, 0.0}}});
  TransitionKernel k = b.finish();
  PolicyPair pol = extract_policies(k, ValueFunction(3, 0.0));
  ValueFunction v = evaluate_policy_pair(k, pol);
  REQUIRE(v[0] == Catch::Approx(1.25).margin(1e-12));
  REQUIRE(v[1] == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(v[2] == 0.0);
}

TEST_CASE("policy shapes follow the kernel action counts") {
  TransitionKernel k = coarse_baseball_kernel(KernelMode::one_player);
  ValueFunction v = value_iteration(k, 1e-10);
  PolicyPair pol = extract_policies(k, v);
  REQUIRE(static_cast<int>(pol.runner.size()) == k.n_states);
  for (int s = 0; s < k.n_states; ++s) {
    REQUIRE(pol.runner[s] >= 0);
    REQUIRE(pol.runner[s] < k.n_runner_actions[s]);
    REQUIRE(static_cast<int>(pol.pitcher[s].size()) == k.n_runner_actions[s]);
    for (int a = 0; a < k.n_runner_actions[s]; ++a)
      REQUIRE(pol.pitcher[s][a] == 0);  // one-player rows have a single column
  }
}
