#pragma once

// Undiscounted maximin solvers over an absorbing kernel. The Bellman operator
//   (T v)(s) = max_a min_p [ r(s,a,p) + sum_s' p(s'|s,a,p) v(s') ]
// is a sup-norm contraction in m steps with modulus rho (the m-step escape
// probability), so value iteration from zero converges geometrically and the
// residual certifies a distance bound m * residual / (1 - rho).
//
// Tie-breaking is pinned so extracted policies are reproducible: the runner
// keeps the lowest action index among maximizers (the shortest lead on the
// grid), the pitcher keeps the highest among minimizers (the pitch, for the
// two-player baseball layout where the pickoff is action 0).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/halting.hpp"
#include "leadoff/kernel.hpp"

namespace leadoff {

using ValueFunction = std::vector<double>;

struct SolveReport {
  std::string method;
  long long iterations = 0;
  double tolerance = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  double wall_time_s = 0;
  std::vector<double> residual_history;  // sup-norm change per sweep
  int halting_m = 0;
  double rho_hat = 1.0;
  double certified_bound = std::numeric_limits<double>::infinity();
};

inline double row_value(const TransitionKernel& k, std::int64_t row,
                        const ValueFunction& v) {
  double x = k.row_reward[row];
  for (std::int64_t e = k.row_begin[row]; e < k.row_begin[row + 1]; ++e)
    x += k.prob[e] * v[k.col[e]];
  return x;
}

// max over runner actions of min over pitcher actions
inline double state_maximin(const TransitionKernel& k, int s, const ValueFunction& v) {
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < k.n_runner_actions[s]; ++a) {
    double worst = std::numeric_limits<double>::infinity();
    for (int p = 0; p < k.n_pitcher_actions[s]; ++p)
      worst = std::min(worst, row_value(k, k.row_id(s, a, p), v));
    best = std::max(best, worst);
  }
  return best;
}

// One Jacobi sweep out = T v. Workers write disjoint slots, so the result is
// identical for any worker count. Returns the sup-norm change.
inline double bellman_sweep(const TransitionKernel& k, const ValueFunction& v,
                            ValueFunction& out, int threads = 1) {
  if (static_cast<int>(v.size()) != k.n_states ||
      static_cast<int>(out.size()) != k.n_states)
    throw contract_error("bellman_sweep: value vector has the wrong length");
  if (v[k.terminal] != 0.0)
    throw contract_error("bellman_sweep: terminal value must stay pinned at zero");
  parallel_for(k.n_states, threads, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t s = b; s < e; ++s)
      out[s] = s == k.terminal ? 0.0 : state_maximin(k, static_cast<int>(s), v);
  });
  double res = 0;
  for (int s = 0; s < k.n_states; ++s) res = std::max(res, std::abs(out[s] - v[s]));
  return res;
}

// Geometric decay rate fitted to the trailing residuals by least squares on
// the log scale; the rate per sweep, or 0 when the tail is too short.
inline double fitted_residual_rate(const std::vector<double>& history, int window) {
  std::vector<double> ys;
  int start = std::max(0, static_cast<int>(history.size()) - window);
  for (int i = start; i < static_cast<int>(history.size()); ++i)
    if (history[i] > 0) ys.push_back(std::log(history[i]));
  int n = static_cast<int>(ys.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += i;
    sy += ys[i];
    sxx += static_cast<double>(i) * i;
    sxy += i * ys[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) return 0.0;
  return std::exp((n * sxy - sx * sy) / denom);
}

inline ValueFunction value_iteration(const TransitionKernel& k, double tol = 1e-10,
                                     long long max_iters = 100000,
                                     SolveReport* report = nullptr, int halting_m = 40,
                                     int threads = 1,
                                     const ValueFunction* init = nullptr) {
  if (tol <= 0) throw contract_error("value_iteration: tolerance must be positive");
  auto t0 = std::chrono::steady_clock::now();
  HaltingReport halt = require_halting(k, halting_m);

  ValueFunction v(k.n_states, 0.0), next(k.n_states, 0.0);
  if (init) {
    if (static_cast<int>(init->size()) != k.n_states)
      throw contract_error("value_iteration: initial value has wrong length");
    if ((*init)[k.terminal] != 0.0)
      throw contract_error("value_iteration: initial value must be 0 at the terminal state");
    v = *init;
  }
  SolveReport rep;
  rep.method = "vi";
  rep.tolerance = tol;
  rep.halting_m = halt.m;
  rep.rho_hat = halt.rho_hat;
  for (long long it = 0; it < max_iters; ++it) {
    double res = bellman_sweep(k, v, next, threads);
    v.swap(next);
    rep.residual_history.push_back(res);
    ++rep.iterations;
    rep.final_residual = res;
    if (res < tol) {
      rep.converged = true;
      break;
    }
  }
  // T is non-expansive, so future residuals never exceed the last one and
  // ||v - v*|| <= m * residual / (1 - rho)
  rep.certified_bound = halt.m * rep.final_residual / (1.0 - halt.rho_hat);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (report) *report = rep;
  return v;
}

// Deterministic stationary policies. The pitcher entry exists for every
// (state, runner action) pair because the pitcher moves second.
struct PolicyPair {
  std::vector<int> runner;                // action index per state
  std::vector<std::vector<int>> pitcher;  // [state][runner action] -> action index
};

inline int greedy_pitcher(const TransitionKernel& k, int s, int a, const ValueFunction& v,
                          double* value = nullptr) {
  int choice = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int p = 0; p < k.n_pitcher_actions[s]; ++p) {
    double x = row_value(k, k.row_id(s, a, p), v);
    if (x <= worst) {  // ties keep the highest index (the pitch)
      worst = x;
      choice = p;
    }
  }
  if (value) *value = worst;
  return choice;
}

inline int greedy_runner(const TransitionKernel& k, int s, const ValueFunction& v,
                         double* value = nullptr) {
  int choice = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < k.n_runner_actions[s]; ++a) {
    double x;
    greedy_pitcher(k, s, a, v, &x);
    if (x > best) {  // strict: ties keep the lowest index (the shortest lead)
      best = x;
      choice = a;
    }
  }
  if (value) *value = best;
  return choice;
}

inline PolicyPair extract_policies(const TransitionKernel& k, const ValueFunction& v) {
  if (static_cast<int>(v.size()) != k.n_states)
    throw contract_error("extract_policies: value vector has the wrong length");
  PolicyPair pol;
  pol.runner.resize(k.n_states);
  pol.pitcher.resize(k.n_states);
  for (int s = 0; s < k.n_states; ++s) {
    pol.runner[s] = greedy_runner(k, s, v);
    pol.pitcher[s].resize(k.n_runner_actions[s]);
    for (int a = 0; a < k.n_runner_actions[s]; ++a)
      pol.pitcher[s][a] = greedy_pitcher(k, s, a, v);
  }
  return pol;
}

// Value of the minimizing MDP the pitcher faces when the runner's policy is
// fixed. Plain value iteration on the reduced row set.
inline ValueFunction pitcher_best_response_value(const TransitionKernel& k,
                                                 const std::vector<int>& runner,
                                                 double tol = 1e-12,
                                                 long long max_iters = 200000,
                                                 int threads = 1) {
  ValueFunction v(k.n_states, 0.0), next(k.n_states, 0.0);
  for (long long it = 0; it < max_iters; ++it) {
    parallel_for(k.n_states, threads, [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t s = b; s < e; ++s) {
        if (s == k.terminal) {
          next[s] = 0.0;
          continue;
        }
        double worst = std::numeric_limits<double>::infinity();
        for (int p = 0; p < k.n_pitcher_actions[s]; ++p)
          worst = std::min(worst,
                           row_value(k, k.row_id(static_cast<int>(s), runner[s], p), v));
        next[s] = worst;
      }
    });
    double res = 0;
    for (int s = 0; s < k.n_states; ++s) res = std::max(res, std::abs(next[s] - v[s]));
    v.swap(next);
    if (res < tol) return v;
  }
  throw convergence_error("pitcher best-response evaluation did not converge");
}

// Policy iteration: evaluate the pitcher's best response to the current
// runner policy, then improve the runner greedily. The value sequence must be
// monotone nondecreasing up to evaluation error; a drop means a bug.
inline ValueFunction policy_iteration(const TransitionKernel& k, double tol = 1e-10,
                                      long long max_outer = 500,
                                      SolveReport* report = nullptr, int halting_m = 40,
                                      int threads = 1) {
  auto t0 = std::chrono::steady_clock::now();
  HaltingReport halt = require_halting(k, halting_m);

  std::vector<int> runner(k.n_states, 0);
  ValueFunction v;
  SolveReport rep;
  rep.method = "pi";
  rep.tolerance = tol;
  rep.halting_m = halt.m;
  rep.rho_hat = halt.rho_hat;

  double prev_sup = -std::numeric_limits<double>::infinity();
  for (long long it = 0; it < max_outer; ++it) {
    v = pitcher_best_response_value(k, runner, tol * 1e-2, 200000, threads);

    double sup = *std::max_element(v.begin(), v.end());
    if (sup < prev_sup - 1e-9)
      throw convergence_error("policy iteration: value decreased between rounds");
    prev_sup = sup;

    bool changed = false;
    std::vector<int> improved(k.n_states, 0);
    parallel_for(k.n_states, threads, [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t s = b; s < e; ++s)
        improved[s] = greedy_runner(k, static_cast<int>(s), v);
    });
    for (int s = 0; s < k.n_states; ++s)
      if (improved[s] != runner[s]) {
        changed = true;
        break;
      }
    ++rep.iterations;
    if (!changed) {
      rep.converged = true;
      break;
    }
    runner.swap(improved);
  }
  rep.final_residual = 0.0;
  rep.certified_bound = halt.m * (tol * 1e-2) / (1.0 - halt.rho_hat);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (report) *report = rep;
  if (!rep.converged) throw convergence_error("policy iteration: no stable policy found");
  return v;
}

// Fixed-policy evaluation, iterative route: repeated application of the
// linear operator induced by the policy pair.
inline ValueFunction evaluate_policy_iterative(const TransitionKernel& k,
                                               const PolicyPair& pol, double tol = 1e-12,
                                               long long max_iters = 500000,
                                               int threads = 1) {
  ValueFunction v(k.n_states, 0.0), next(k.n_states, 0.0);
  for (long long it = 0; it < max_iters; ++it) {
    parallel_for(k.n_states, threads, [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t s = b; s < e; ++s) {
        if (s == k.terminal) {
          next[s] = 0.0;
          continue;
        }
        int a = pol.runner[s];
        next[s] = row_value(k, k.row_id(static_cast<int>(s), a, pol.pitcher[s][a]), v);
      }
    });
    double res = 0;
    for (int s = 0; s < k.n_states; ++s) res = std::max(res, std::abs(next[s] - v[s]));
    v.swap(next);
    if (res < tol) return v;
  }
  throw convergence_error("policy evaluation did not converge");
}

// Default evaluation entry point. A direct sparse linear solve lives in a
// separate header as an independent cross-check of this route.
inline ValueFunction evaluate_policy_pair(const TransitionKernel& k,
                                          const PolicyPair& pol, double tol = 1e-12,
                                          int threads = 1) {
  return evaluate_policy_iterative(k, pol, tol, 500000, threads);
}

struct OnePlayerSolution {
  ValueFunction value;
  std::vector<int> runner;  // greedy lead choice per state
  SolveReport report;
};

// Single-decision-maker solve. On a one-player kernel every row has one
// pitcher column, so the maximin operator reduces to a plain max.
inline OnePlayerSolution solve_one_player(const TransitionKernel& k, double tol = 1e-10,
                                          long long max_iters = 100000, int halting_m = 40,
                                          int threads = 1) {
  for (int s = 0; s < k.n_states; ++s)
    if (k.n_pitcher_actions[s] != 1)
      throw contract_error("solve_one_player: kernel has pitcher choices");
  OnePlayerSolution out;
  out.value = value_iteration(k, tol, max_iters, &out.report, halting_m, threads);
  out.runner = extract_policies(k, out.value).runner;
  return out;
}

}  // namespace leadoff
