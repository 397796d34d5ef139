#pragma once

#include "switchaff/conic.hpp"
#include "switchaff/equilibria.hpp"
#include "switchaff/types.hpp"

namespace sa {

// Quadratic certificate v(xi) = xi' [V_bar V_perp] P [V_bar V_perp]' xi with
// P = [[P_bar, P_cross], [P_cross', P_perp]] and the cross block pinned to
// P_cross' = -P_perp V_perp' A V_bar (V_bar' A V_bar)^{-1}.
struct LyapunovCertificate {
  Mat P_bar;
  Mat P_perp;
  Mat P_cross;
  Mat P; // assembled block matrix, basis order [xi_bar; xi_perp]
  NullspaceDecomposition decomp;
  SimplexVector lambda;
  Vec x_e;
  double margin_decrease = 0.0; // eigenvalue slack of the decrease LMI
  double margin_positivity = 0.0;
};

struct SwitchingLaw {
  LyapunovCertificate cert;
  std::vector<Vec> ell;
  Mat S_bar;              // P_bar V_bar' + P_cross V_perp'
  Mat S_perp;             // P_perp V_perp' + P_cross' V_bar'
  std::vector<Mat> U;     // V_bar' A_i' S_perp' + S_bar A_i V_perp
  Mat M;
  InteriorCertificate interior;
  SwitchedAffineSystem sys;

  // Same certificate retargeted to a new nullspace coordinate of the
  // equilibrium; x_bar_e is kept, residual terms are rebuilt.
  SwitchingLaw with_reference(const Vec& x_e_perp) const;
};

enum class DesignFailure {
  AssumptionViolated,
  NoEquilibrium,
  InteriorConditionFailed,
  LmiInfeasible,
  ParticularNullspaceUnsupported,
};

const char* to_string(DesignFailure f);

class DesignError : public std::runtime_error {
 public:
  DesignError(DesignFailure kind, const std::string& msg)
      : std::runtime_error(msg), kind(kind) {}
  DesignFailure kind;
};

struct DesignOptions {
  enum class Objective { max_margin, min_condition_number } objective =
      Objective::max_margin;
  double cond_floor = 1e-3; // floor for the min-cond objective
  ConicBackend* backend = nullptr;
  SolveOptions solve;
};

// Full synthesis pipeline: decomposition, defectiveness gate, equilibrium
// solve, shared-subset detection, interior condition, LMI solve, assembly.
// Throws DesignError naming the first violated hypothesis.
SwitchingLaw design_switching(const SwitchedAffineSystem& sys,
                              const SimplexVector& lambda, const Vec& x_e_perp,
                              const DesignOptions& options = {});

// Builds the law from externally supplied P_bar, P_perp (replaying published
// certificates). The decomposition must match the bases those blocks assume.
SwitchingLaw assemble_law(const SwitchedAffineSystem& sys,
                          const SimplexVector& lambda, const Vec& x_e,
                          const NullspaceDecomposition& decomp,
                          const Mat& P_bar, const Mat& P_perp);

double lyapunov_value(const SwitchingLaw& law, const Vec& x);

// f_i(xi) per mode: the directional derivative of v along mode i's field.
Vec f_values(const SwitchingLaw& law, const Vec& x);

// argmin_i f_i with hysteresis: the previous mode wins ties within
// 1e-12 * (1 + max|f_i|), otherwise the lowest index does.
int select_mode(const SwitchingLaw& law, const Vec& x, int prev_mode = -1);

struct CertificateCheck {
  std::string name;
  bool passed = false;
  double margin = 0.0;
};

struct CertificateReport {
  bool all_passed = false;
  std::vector<CertificateCheck> checks;
  Mat decrease_block; // He(S_bar A_lambda V_bar)
  Vec P_eigenvalues;
};

CertificateReport verify_certificate(const SwitchingLaw& law);

}  // namespace sa
