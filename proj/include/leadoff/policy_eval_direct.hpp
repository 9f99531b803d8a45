#pragma once

// Direct fixed-policy evaluation: solve the sparse linear system
//   (I - P_pi) v = r_pi   over the non-terminal states, v(terminal) = 0,
// with a sparse LU factorization. Deliberately separate from the iterative
// route in solver.hpp; agreement between the two is a standing cross-check,
// so they must not share machinery beyond the kernel itself.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/kernel.hpp"
#include "leadoff/solver.hpp"

namespace leadoff {

inline ValueFunction evaluate_policy_direct(const TransitionKernel& k,
                                            const PolicyPair& pol) {
  const int n = k.n_states;
  // compact index over non-terminal states
  std::vector<int> compact(n, -1);
  int m = 0;
  for (int s = 0; s < n; ++s)
    if (s != k.terminal) compact[s] = m++;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(m) * 8);
  Eigen::VectorXd rhs(m);
  for (int s = 0; s < n; ++s) {
    if (s == k.terminal) continue;
    int row = compact[s];
    int a = pol.runner[s];
    std::int64_t rid = k.row_id(s, a, pol.pitcher[s][a]);
    rhs(row) = k.row_reward[rid];
    double diag = 1.0;
    for (std::int64_t e = k.row_begin[rid]; e < k.row_begin[rid + 1]; ++e) {
      int c = k.col[e];
      if (c == k.terminal) continue;  // v(terminal) = 0 drops out
      if (c == s)
        diag -= k.prob[e];
      else
        trips.emplace_back(row, compact[c], -k.prob[e]);
    }
    trips.emplace_back(row, row, diag);
  }

  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw convergence_error("direct policy evaluation: factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success)
    throw convergence_error("direct policy evaluation: solve failed");

  ValueFunction v(n, 0.0);
  for (int s = 0; s < n; ++s)
    if (s != k.terminal) v[s] = x(compact[s]);
  return v;
}

}  // namespace leadoff
