#pragma once

#include <functional>
#include <memory>

#include "switchaff/types.hpp"

namespace sa {

// constant + sum_j terms[j].second * y[terms[j].first], constrained PSD
// (after negation when sense is NegSemidef). Feasibility-mode solves maximize
// a shared margin t with each LMI block >= t I.
struct LinearMatrixExpression {
  Mat constant;
  std::vector<std::pair<int, Mat>> terms;
  enum class Sense { PosSemidef, NegSemidef } sense = Sense::PosSemidef;
  // Blocks excluded from the shared margin (normalization caps like P <= I).
  bool margined = true;

  int dim() const { return static_cast<int>(constant.rows()); }
  Mat evaluate(const Vec& y) const;
};

struct LinearConstraint {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;
  bool equality = false; // false: sum coeffs'y <= rhs
};

struct ConicProblem {
  int num_vars = 0;
  std::vector<LinearMatrixExpression> lmis;
  std::vector<LinearConstraint> linear;
  // Empty objective selects feasibility-with-margin mode (maximize the
  // minimum LMI eigenvalue slack); otherwise maximize objective'y subject to
  // every margined LMI >= margin_floor * I.
  Vec objective;
  double margin_floor = 0.0;
};

enum class SolveStatus {
  optimal,
  infeasible,
  margin_below_threshold,
  iteration_limit,
};

const char* to_string(SolveStatus s);

struct ConicSolution {
  SolveStatus status = SolveStatus::iteration_limit;
  Vec values;
  double achieved_margin = 0.0; // smallest eigenvalue slack across LMIs
  double objective_value = 0.0;
  bool unbounded = false;
  int newton_iterations = 0;
};

struct SolveOptions {
  double tol = 1e-9;
  int max_iter = 200;           // Newton iteration budget
  double margin_threshold = 1e-6; // feasibility mode: required margin
  double psd_shift = 0.0;       // relax blocks to >= -psd_shift * I
  double margin_cap = 1e8;
  bool verify = true;           // independent eigenvalue re-check
};

// Interface kept minimal so an external solver can be swapped in for
// cross-checks; the in-house barrier method below is the default.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual ConicSolution solve(const ConicProblem& problem,
                              const SolveOptions& options) = 0;
};

// Logarithmic-barrier Newton method on the margin-maximization
// reformulation. Equalities are eliminated through an SVD nullspace basis;
// line search is backtracking with Cholesky domain checks.
class BarrierBackend final : public ConicBackend {
 public:
  ConicSolution solve(const ConicProblem& problem,
                      const SolveOptions& options) override;
};

ConicSolution solve(const ConicProblem& problem,
                    const SolveOptions& options = {});

// Dense LP: maximize c'x subject to A_eq x = b_eq, A_ub x <= b_ub, x free.
struct LpProblem {
  int num_vars = 0;
  Vec c;
  Mat A_eq;
  Vec b_eq;
  Mat A_ub;
  Vec b_ub;
};

// Two-phase simplex with Bland's rule; free variables are split internally.
ConicSolution solve_lp(const LpProblem& problem, double tol = 1e-10);

// Minimizes s subject to floor*I <= P(y) <= s*floor*I plus the caller's
// constraints; P_expr gives P as an affine function of y. The variable s is
// appended after problem.num_vars. Returns the solution with cond(P) <= s.
ConicSolution min_condition_number(const ConicProblem& base_constraints,
                                   const LinearMatrixExpression& P_expr,
                                   double floor,
                                   const SolveOptions& options = {});

}  // namespace sa
