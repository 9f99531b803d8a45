#pragma once

// Independent oracle for small games, shared by the unit and acceptance
// suites. Deliberately self-contained: dense Gaussian elimination for
// fixed-policy evaluation and brute-force enumeration of all deterministic
// policy pairs. It shares no code with the production solver beyond the
// kernel container itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "leadoff/kernel.hpp"

namespace oracle {

using leadoff::KernelBuilder;
using leadoff::KernelMode;
using leadoff::TransitionKernel;

// Dense row of a policy-induced chain.
struct DenseRow {
  std::vector<double> p;  // over all states
  double r = 0;
};

inline DenseRow dense_row(const TransitionKernel& k, int s, int a, int p) {
  DenseRow d;
  d.p.assign(k.n_states, 0.0);
  std::int64_t rid = k.row_id(s, a, p);
  for (std::int64_t e = k.row_begin[rid]; e < k.row_begin[rid + 1]; ++e) {
    d.p[k.col[e]] += k.prob[e];
    d.r += k.prob[e] * k.rew[e];
  }
  return d;
}

// Solve (I - P) v = r over non-terminal states with partial pivoting.
inline std::vector<double> solve_chain(const TransitionKernel& k,
                                       const std::vector<DenseRow>& rows) {
  int n = k.n_states;
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int s = 0; s < n; ++s)
    if (s != k.terminal) idx[s] = m++;
  std::vector<std::vector<double>> A(m, std::vector<double>(m + 1, 0.0));
  for (int s = 0; s < n; ++s) {
    if (s == k.terminal) continue;
    int i = idx[s];
    A[i][i] = 1.0;
    for (int t = 0; t < n; ++t)
      if (t != k.terminal) A[i][idx[t]] -= rows[s].p[t];
    A[i][m] = rows[s].r;
  }
  for (int c = 0; c < m; ++c) {
    int piv = c;
    for (int r = c + 1; r < m; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    if (std::abs(A[c][c]) <= 1e-12)
      throw std::runtime_error("oracle: singular policy-evaluation system");
    for (int r = 0; r < m; ++r) {
      if (r == c) continue;
      double f = A[r][c] / A[c][c];
      for (int j = c; j <= m; ++j) A[r][j] -= f * A[c][j];
    }
  }
  std::vector<double> v(n, 0.0);
  for (int s = 0; s < n; ++s)
    if (s != k.terminal) v[s] = A[idx[s]][m] / A[idx[s]][idx[s]];
  return v;
}

inline std::vector<double> evaluate_pair_dense(const TransitionKernel& k,
                                               const std::vector<int>& runner,
                                               const std::vector<int>& pitcher) {
  std::vector<DenseRow> rows(k.n_states);
  for (int s = 0; s < k.n_states; ++s) {
    if (s == k.terminal) continue;
    rows[s] = dense_row(k, s, runner[s], pitcher[s]);
  }
  return solve_chain(k, rows);
}

// Enumerate every deterministic policy per player. For a fixed runner policy
// only the pitcher's choice at the runner's chosen action matters, so a map
// state -> pitcher action covers the full response space.
inline bool next_policy(std::vector<int>& pol, const std::vector<int>& arity,
                        int terminal) {
  for (std::size_t s = 0; s < pol.size(); ++s) {
    if (static_cast<int>(s) == terminal) continue;
    if (++pol[s] < arity[s]) return true;
    pol[s] = 0;
  }
  return false;
}

inline std::vector<double> oracle_maximin(const TransitionKernel& k) {
  int n = k.n_states;
  std::vector<int> r_arity(k.n_runner_actions.begin(), k.n_runner_actions.end());
  std::vector<int> p_arity(k.n_pitcher_actions.begin(), k.n_pitcher_actions.end());
  std::vector<double> best(n, -std::numeric_limits<double>::infinity());
  best[k.terminal] = 0.0;
  std::vector<int> runner(n, 0);
  do {
    std::vector<double> worst(n, std::numeric_limits<double>::infinity());
    std::vector<int> pitcher(n, 0);
    do {
      std::vector<double> v = evaluate_pair_dense(k, runner, pitcher);
      for (int s = 0; s < n; ++s) worst[s] = std::min(worst[s], v[s]);
    } while (next_policy(pitcher, p_arity, k.terminal));
    for (int s = 0; s < n; ++s)
      if (s != k.terminal) best[s] = std::max(best[s], worst[s]);
  } while (next_policy(runner, r_arity, k.terminal));
  return best;
}

// Random halting game. Every row keeps at least 10% mass on the terminal
// state, so every policy pair absorbs and the oracle's linear systems are
// well conditioned.
inline TransitionKernel random_game(std::mt19937& gen, int n_play, int min_pitcher = 1) {
  int n = n_play + 1;
  int terminal = n_play;
  std::uniform_int_distribution<int> ra(1, 3), pa(min_pitcher, 2), nsup(0, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  KernelBuilder b(n, terminal, KernelMode::generic);
  for (int s = 0; s < n_play; ++s) {
    int nr = ra(gen), np = pa(gen);
    b.begin_state(s, nr, np);
    for (int row = 0; row < nr * np; ++row) {
      std::vector<int> support;
      int want = nsup(gen);
      double term_mass = want == 0 ? 1.0 : 0.1 + 0.8 * unif(gen);
      std::vector<int> pool;
      for (int t = 0; t < n_play; ++t) pool.push_back(t);
      std::shuffle(pool.begin(), pool.end(), gen);
      for (int i = 0; i < want && i < n_play; ++i) support.push_back(pool[i]);
      std::vector<double> w(support.size());
      double tot = 0;
      for (auto& x : w) tot += (x = 0.05 + unif(gen));
      std::vector<std::pair<int, std::pair<double, double>>> entries;
      entries.push_back({terminal, {term_mass, 2.0 * unif(gen)}});
      for (std::size_t i = 0; i < support.size(); ++i)
        entries.push_back(
            {support[i], {(1.0 - term_mass) * w[i] / tot, 2.0 * unif(gen)}});
      b.add_row(entries);
    }
  }
  b.begin_state(terminal, 1, 1);
  b.add_row({{terminal, {1.0, 0.0}}});
  return b.finish();
}

}  // namespace oracle
