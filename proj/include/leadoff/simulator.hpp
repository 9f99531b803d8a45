#pragma once

// Monte Carlo rollouts over a transition kernel: an oracle for solved values
// that shares nothing with the dynamic-programming routes except the kernel.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/kernel.hpp"
#include "leadoff/rng.hpp"
#include "leadoff/solver.hpp"
#include "leadoff/util.hpp"

namespace leadoff {

struct InningRollout {
  int runs = 0;
  int plays = 0;
  bool truncated = false;
};

struct RolloutResult {
  long long innings = 0;
  double mean_runs = 0;
  double std_error = 0;
  long long truncated = 0;
  int max_plays = 0;
  long long total_plays = 0;
};

// Walk one trajectory from the start-of-inning state to the terminal state,
// summing edge rewards. Edge rewards are integer run counts, so the sum is
// exact. A hard play cap guards against defective kernels; the partial sum
// still counts.
inline InningRollout simulate_inning(const TransitionKernel& k,
                                     const std::vector<int>& runner,
                                     const std::vector<std::vector<int>>& pitcher,
                                     Philox4x32& rng, int play_cap = 10000) {
  InningRollout out;
  int s = 0;  // bases empty, 0-0 count, no disengagements, no outs
  while (s != k.terminal) {
    if (out.plays >= play_cap) {
      out.truncated = true;
      return out;
    }
    int a = runner[s];
    std::int64_t rid = k.row_id(s, a, pitcher[s][a]);
    double u = rng.uniform();
    double acc = 0;
    std::int64_t hit = k.row_begin[rid + 1] - 1;
    for (std::int64_t e = k.row_begin[rid]; e < k.row_begin[rid + 1]; ++e) {
      acc += k.prob[e];
      if (u < acc) {
        hit = e;
        break;
      }
    }
    out.runs += static_cast<int>(std::llround(k.rew[hit]));
    s = k.col[hit];
    ++out.plays;
  }
  return out;
}

inline InningRollout simulate_inning(const TransitionKernel& k, const PolicyPair& pol,
                                     Philox4x32& rng, int play_cap = 10000) {
  return simulate_inning(k, pol.runner, pol.pitcher, rng, play_cap);
}

// Aggregate n independent innings. Inning i draws from its own counter stream
// (seed, i), and the accumulators are exact integer sums, so the result is
// identical for every thread count and scheduling order.
inline RolloutResult monte_carlo_value(const TransitionKernel& k, const PolicyPair& pol,
                                       long long n, std::uint64_t seed, int threads = 1,
                                       int play_cap = 10000) {
  if (n <= 0) throw contract_error("monte_carlo_value: inning count must be positive");
  for (int s = 0; s < k.n_states; ++s) {
    if (s == k.terminal) continue;
    if (pol.runner[s] < 0 || pol.runner[s] >= k.n_runner_actions[s])
      throw contract_error("monte_carlo_value: runner policy out of range");
    int p = pol.pitcher[s][pol.runner[s]];
    if (p < 0 || p >= k.n_pitcher_actions[s])
      throw contract_error("monte_carlo_value: pitcher policy out of range");
  }

  long long sum = 0, sum_sq = 0, truncated = 0, total_plays = 0;
  int max_plays = 0;
  std::mutex merge;
  parallel_for(n, threads, [&](std::int64_t b, std::int64_t e) {
    long long c_sum = 0, c_sq = 0, c_trunc = 0, c_plays = 0;
    int c_max = 0;
    for (std::int64_t i = b; i < e; ++i) {
      Philox4x32 rng(seed, static_cast<std::uint64_t>(i));
      InningRollout r = simulate_inning(k, pol, rng, play_cap);
      c_sum += r.runs;
      c_sq += static_cast<long long>(r.runs) * r.runs;
      c_trunc += r.truncated ? 1 : 0;
      c_plays += r.plays;
      c_max = std::max(c_max, r.plays);
    }
    std::lock_guard<std::mutex> lock(merge);
    sum += c_sum;
    sum_sq += c_sq;
    truncated += c_trunc;
    total_plays += c_plays;
    max_plays = std::max(max_plays, c_max);
  });

  RolloutResult out;
  out.innings = n;
  out.truncated = truncated;
  out.max_plays = max_plays;
  out.total_plays = total_plays;
  out.mean_runs = static_cast<double>(sum) / static_cast<double>(n);
  if (n > 1) {
    double var = (static_cast<double>(sum_sq) -
                  static_cast<double>(n) * out.mean_runs * out.mean_runs) /
                 static_cast<double>(n - 1);
    out.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
  return out;
}

}  // namespace leadoff
