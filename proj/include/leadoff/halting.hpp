#pragma once

// Absorption check. rho_j(s) is the worst-case probability, over any play of
// both sides, of still being un-absorbed after j steps from s; it obeys
//   rho_0(s) = [s != terminal],
//   rho_j(s) = max over rows of sum_{s' != terminal} p(s'|row) rho_{j-1}(s').
// If rho_hat = max_s rho_m(s) < 1 the m-step operator is a sup-norm
// contraction with modulus rho_hat, and total reward from any state is at
// most m * max_edge_reward / (1 - rho_hat). Kernels with rho_hat at 1 admit
// reward-free evasion forever, so downstream consumers refuse them.

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/kernel.hpp"
#include "leadoff/util.hpp"

namespace leadoff {

struct HaltingReport {
  int m = 0;
  double rho_hat = 1.0;
  int worst_state = -1;       // argmax of rho_m
  double max_edge_reward = 0;
  double value_upper_bound = 0;  // m * max_edge_reward / (1 - rho_hat)
  bool contraction() const { return rho_hat < 1.0 - 1e-12; }
};

inline HaltingReport compute_halting(const TransitionKernel& k, int m = 40) {
  if (m < 1) throw contract_error("halting horizon must be positive");
  std::vector<double> rho(k.n_states, 1.0), next(k.n_states, 0.0);
  rho[k.terminal] = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int s = 0; s < k.n_states; ++s) {
      if (s == k.terminal) {
        next[s] = 0.0;
        continue;
      }
      double worst = 0.0;
      for (int a = 0; a < k.n_runner_actions[s]; ++a)
        for (int p = 0; p < k.n_pitcher_actions[s]; ++p) {
          std::int64_t row = k.row_id(s, a, p);
          double alive = 0.0;
          for (std::int64_t e = k.row_begin[row]; e < k.row_begin[row + 1]; ++e)
            alive += k.prob[e] * rho[k.col[e]];
          worst = std::max(worst, alive);
        }
      next[s] = std::min(worst, 1.0);
    }
    rho.swap(next);
  }

  HaltingReport rep;
  rep.m = m;
  rep.worst_state = 0;
  for (int s = 0; s < k.n_states; ++s)
    if (rho[s] > rho[rep.worst_state]) rep.worst_state = s;
  rep.rho_hat = rho[rep.worst_state];
  for (double r : k.rew) rep.max_edge_reward = std::max(rep.max_edge_reward, std::abs(r));
  rep.value_upper_bound = rep.contraction()
                              ? m * rep.max_edge_reward / (1.0 - rep.rho_hat)
                              : std::numeric_limits<double>::infinity();
  return rep;
}

inline HaltingReport require_halting(const TransitionKernel& k, int m = 40) {
  HaltingReport rep = compute_halting(k, m);
  if (!rep.contraction())
    throw invalid_kernel_error(
        "kernel admits indefinite play: " + std::to_string(m) +
        "-step escape probability " + fmt_double(rep.rho_hat) + " at state " +
        std::to_string(rep.worst_state));
  return rep;
}

}  // namespace leadoff
