#pragma once

#include "switchaff/types.hpp"

namespace sa {

// Orthonormal bases of the nullspace (V_perp, n x m) and row space
// (V_bar, n x p, p = n - m) of a singular matrix.
struct NullspaceDecomposition {
  Mat V_perp;
  Mat V_bar;
  int m = 0;
  int p = 0;
  double rank_tol = 0.0;
};

// SVD-based splitting with a deterministic sign convention: each column's
// largest-magnitude entry is made positive, ties broken by lowest row index.
// rank_tol <= 0 selects the default n * 1e-9 * s_max threshold.
// Throws std::invalid_argument when the matrix is full rank at tolerance.
NullspaceDecomposition nullspace_decomposition(const Mat& A_lambda,
                                               double rank_tol = -1.0);

// Accepts externally chosen bases (for replaying published certificates whose
// coordinates assume a specific V_bar). Checks orthonormality and that V_perp
// spans the nullspace; no sign convention is applied.
NullspaceDecomposition decomposition_from_bases(const Mat& A_lambda,
                                                const Mat& V_bar,
                                                const Mat& V_perp);

// True when zero is a defective eigenvalue of A_lambda, i.e. the projected
// block V_bar' A_lambda V_bar is singular.
bool check_zero_defective(const Mat& A_lambda,
                          const NullspaceDecomposition& d);

struct EquilibriumSpec {
  SimplexVector lambda;
  Vec x_e;
  Vec x_bar_e;
  Vec x_e_perp;
  double residual = 0.0;
};

// Solves A_lambda V_bar x_bar_e = -b_lambda by least squares and accepts the
// result only when the residual vanishes at tolerance; x_e_perp is free.
EquilibriumSpec solve_equilibrium(const SwitchedAffineSystem& sys,
                                  const SimplexVector& lambda,
                                  const Vec& x_e_perp);

// M = V_perp' - V_perp' A V_bar (V_bar' A V_bar)^{-1} V_bar'. Satisfies
// M V_perp = I and M A V_bar = 0.
Mat compute_M(const Mat& A_lambda, const NullspaceDecomposition& d);

// ell_i = A_i x_e + b_i, the drift each mode applies at the equilibrium.
std::vector<Vec> residual_terms(const SwitchedAffineSystem& sys,
                                const Vec& x_e);

// Indices i with A_i V_perp = 0 at tolerance (modes sharing the nullspace).
std::vector<int> detect_shared_subset(const SwitchedAffineSystem& sys,
                                      const NullspaceDecomposition& d,
                                      double tol = 1e-9);

struct InteriorCertificate {
  bool valid = false;
  std::optional<SimplexVector> mu;
  double margin = 0.0; // LP optimum: min_i mu_i over the subset
  int rank_ML = 0;
  std::vector<int> subset;
};

// Tests 0 in Int(conv{M ell_i : i in subset}) as an LP: maximize t subject to
// sum mu_i M ell_i = 0, sum mu_i = 1, mu_i >= t (mu_i = 0 off the subset).
// Valid iff t >= kInteriorStrictness and rank([M ell_i]) = m.
InteriorCertificate check_interior_condition(const Mat& M,
                                             const std::vector<Vec>& ell,
                                             const std::vector<int>& subset);

inline constexpr double kInteriorStrictness = 1e-7;

struct NoGlobalExponentialDiagnostic {
  bool triggered = false;  // every ell_i lies in the nullspace
  double ell_bar = 0.0;    // max_i ||ell_i||, the resulting speed bound
};

// When all ell_i live inside the shared nullspace, trajectories started there
// move no faster than ell_bar, which rules out a global exponential envelope.
NoGlobalExponentialDiagnostic diagnose_no_global_exponential(
    const std::vector<Vec>& ell, const NullspaceDecomposition& d,
    double tol = 1e-8);

}  // namespace sa
