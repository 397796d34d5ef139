#include <cmath>

#include "switchaff/conic.hpp"

namespace sa {

namespace {

// Full-tableau primal simplex, minimization, Bland's rule throughout.
// D is (m+1)x(ncols+1): constraint rows [B^-1 A | B^-1 b], last row reduced
// costs with the negated objective in the corner.
enum class PivotOutcome { optimal, unbounded, stalled };

void pivot(Mat& D, std::vector<int>& basis, int row, int col) {
  D.row(row) /= D(row, col);
  for (int i = 0; i < D.rows(); ++i) {
    if (i == row) continue;
    const double f = D(i, col);
    if (f != 0.0) D.row(i) -= f * D.row(row);
  }
  basis[row] = col;
}

PivotOutcome run_simplex(Mat& D, std::vector<int>& basis, int usable_cols,
                         double tol) {
  const int m = static_cast<int>(D.rows()) - 1;
  const int rhs = static_cast<int>(D.cols()) - 1;
  const long cap = 2000 + 200L * (m + usable_cols);
  for (long it = 0; it < cap; ++it) {
    int enter = -1;
    for (int j = 0; j < usable_cols; ++j) {
      if (D(m, j) < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return PivotOutcome::optimal;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (D(i, enter) <= tol) continue;
      const double ratio = D(i, rhs) / D(i, enter);
      if (leave < 0 || ratio < best - 1e-12 ||
          (ratio < best + 1e-12 && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) return PivotOutcome::unbounded;
    pivot(D, basis, leave, enter);
  }
  return PivotOutcome::stalled;
}

}  // namespace

ConicSolution solve_lp(const LpProblem& problem, double tol) {
  const int nv = problem.num_vars;
  const int me = static_cast<int>(problem.A_eq.rows());
  const int mu = static_cast<int>(problem.A_ub.rows());
  const int m = me + mu;
  const int n = 2 * nv + mu; // split signs, then slacks

  ConicSolution sol;
  sol.values = Vec::Zero(nv);

  Mat A = Mat::Zero(m, n);
  Vec b = Vec::Zero(m);
  if (me > 0) {
    A.block(0, 0, me, nv) = problem.A_eq;
    A.block(0, nv, me, nv) = -problem.A_eq;
    b.head(me) = problem.b_eq;
  }
  if (mu > 0) {
    A.block(me, 0, mu, nv) = problem.A_ub;
    A.block(me, nv, mu, nv) = -problem.A_ub;
    A.block(me, 2 * nv, mu, mu).setIdentity();
    b.tail(mu) = problem.b_ub;
  }
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0.0) {
      A.row(i) = -A.row(i);
      b(i) = -b(i);
    }
  }

  // Phase 1 tableau with one artificial per row.
  Mat D = Mat::Zero(m + 1, n + m + 1);
  D.topLeftCorner(m, n) = A;
  D.block(0, n, m, m).setIdentity();
  D.col(n + m).head(m) = b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  for (int j = 0; j <= n + m; ++j) {
    if (j >= n && j < n + m) continue;
    D(m, j) = -D.col(j).head(m).sum();
  }

  PivotOutcome out = run_simplex(D, basis, n, tol);
  const double phase1 = -D(m, n + m);
  if (out == PivotOutcome::stalled || phase1 > 1e-7 * (1.0 + b.lpNorm<1>())) {
    sol.status = out == PivotOutcome::stalled ? SolveStatus::iteration_limit
                                              : SolveStatus::infeasible;
    return sol;
  }

  // Drive leftover artificials out of the basis or drop redundant rows.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) {
      keep.push_back(i);
      continue;
    }
    int enter = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(D(i, j)) > tol) {
        enter = j;
        break;
      }
    }
    if (enter >= 0) {
      pivot(D, basis, i, enter);
      keep.push_back(i);
    }
  }
  if (static_cast<int>(keep.size()) < m) {
    Mat D2(keep.size() + 1, n + 1);
    std::vector<int> basis2;
    for (size_t r = 0; r < keep.size(); ++r) {
      D2.row(r).head(n) = D.row(keep[r]).head(n);
      D2(r, n) = D(keep[r], n + m);
      basis2.push_back(basis[keep[r]]);
    }
    D2.row(keep.size()).setZero();
    D = D2;
    basis = basis2;
  } else {
    Mat D2(m + 1, n + 1);
    D2.topLeftCorner(m + 1, n) = D.topLeftCorner(m + 1, n);
    D2.col(n) = D.col(n + m);
    D = D2;
  }

  // Phase 2 reduced costs for minimize -c'(xp - xm).
  const int rows = static_cast<int>(D.rows()) - 1;
  Vec cost = Vec::Zero(n);
  cost.head(nv) = -problem.c;
  cost.segment(nv, nv) = problem.c;
  D.row(rows).setZero();
  for (int j = 0; j < n; ++j) {
    double r = cost(j);
    for (int i = 0; i < rows; ++i) r -= cost(basis[i]) * D(i, j);
    D(rows, j) = r;
  }
  double corner = 0.0;
  for (int i = 0; i < rows; ++i) corner -= cost(basis[i]) * D(i, n);
  D(rows, n) = corner;

  out = run_simplex(D, basis, n, tol);
  if (out == PivotOutcome::unbounded) {
    sol.status = SolveStatus::iteration_limit;
    sol.unbounded = true;
    return sol;
  }
  if (out == PivotOutcome::stalled) {
    sol.status = SolveStatus::iteration_limit;
    return sol;
  }

  Vec z = Vec::Zero(n);
  for (int i = 0; i < rows; ++i) z(basis[i]) = D(i, n);
  sol.values = z.head(nv) - z.segment(nv, nv);
  sol.objective_value = problem.c.dot(sol.values);
  sol.status = SolveStatus::optimal;
  return sol;
}

}  // namespace sa
