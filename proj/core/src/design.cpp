#include <Eigen/Eigenvalues>
#include <cmath>

#include "switchaff/design.hpp"
#include "switchaff/sysmodel.hpp"

namespace sa {

const char* to_string(DesignFailure f) {
  switch (f) {
    case DesignFailure::AssumptionViolated: return "AssumptionViolated";
    case DesignFailure::NoEquilibrium: return "NoEquilibrium";
    case DesignFailure::InteriorConditionFailed:
      return "InteriorConditionFailed";
    case DesignFailure::LmiInfeasible: return "LmiInfeasible";
    case DesignFailure::ParticularNullspaceUnsupported:
      return "ParticularNullspaceUnsupported";
  }
  return "unknown";
}

namespace {

Mat he(const Mat& X) { return X + X.transpose(); }

double max_eig(const Mat& S) {
  if (S.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eig(const Mat& S) { return -max_eig(-S); }

// Packing of a symmetric dim x dim matrix variable into upper-triangle order.
int tri_count(int dim) { return dim * (dim + 1) / 2; }

int tri_index(int a, int b, int dim) {
  if (a > b) std::swap(a, b);
  return a * (2 * dim - a + 1) / 2 + (b - a);
}

Mat tri_basis(int a, int b, int dim) {
  Mat E = Mat::Zero(dim, dim);
  E(a, b) = 1.0;
  E(b, a) = 1.0;
  return E;
}

Mat unpack_tri(const Vec& y, int offset, int dim) {
  Mat S(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b)
      S(a, b) = S(b, a) = y(offset + tri_index(a, b, dim));
  return S;
}

struct LmiData {
  Mat B;  // V_bar' A_lambda V_bar
  Mat Cm; // V_perp' A_lambda V_bar
  Mat K;  // Cm B^{-1}
};

LmiData lmi_data(const Mat& A_lambda, const NullspaceDecomposition& d) {
  LmiData ld;
  ld.B = d.V_bar.transpose() * A_lambda * d.V_bar;
  ld.Cm = d.V_perp.transpose() * A_lambda * d.V_bar;
  ld.K = d.p > 0 ? Mat(ld.B.transpose()
                           .partialPivLu()
                           .solve(ld.Cm.transpose())
                           .transpose())
                 : Mat::Zero(d.m, 0);
  return ld;
}

// He((P_bar V_bar' + P_cross V_perp') A_lambda V_bar) as an affine map of the
// packed (P_bar, P_perp) variables. P_cross = -K' P_perp is substituted.
LinearMatrixExpression decrease_expression(const LmiData& ld, int p, int m) {
  LinearMatrixExpression e;
  e.constant = Mat::Zero(p, p);
  e.sense = LinearMatrixExpression::Sense::NegSemidef;
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b)
      e.terms.push_back({tri_index(a, b, p), he(tri_basis(a, b, p) * ld.B)});
  const int off = tri_count(p);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b)
      e.terms.push_back(
          {off + tri_index(a, b, m),
           he(-ld.K.transpose() * tri_basis(a, b, m) * ld.Cm)});
  return e;
}

// Full P = [[P_bar, -K'P_perp], [-P_perp K, P_perp]] over the packed vars.
LinearMatrixExpression p_expression(const LmiData& ld, int p, int m) {
  const int n = p + m;
  LinearMatrixExpression e;
  e.constant = Mat::Zero(n, n);
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b) {
      Mat G = Mat::Zero(n, n);
      G.topLeftCorner(p, p) = tri_basis(a, b, p);
      e.terms.push_back({tri_index(a, b, p), G});
    }
  const int off = tri_count(p);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      const Mat Eab = tri_basis(a, b, m);
      Mat G = Mat::Zero(n, n);
      G.bottomRightCorner(m, m) = Eab;
      G.topRightCorner(p, m) = -ld.K.transpose() * Eab;
      G.bottomLeftCorner(m, p) = -Eab * ld.K;
      e.terms.push_back({off + tri_index(a, b, m), G});
    }
  return e;
}

SwitchingLaw assemble_internal(const SwitchedAffineSystem& sys,
                               const SimplexVector& lambda, const Vec& x_e,
                               const NullspaceDecomposition& decomp,
                               const Mat& P_bar, const Mat& P_perp,
                               const Mat& A_lambda, const Vec& b_lambda) {
  const int p = decomp.p;
  const int m = decomp.m;
  const LmiData ld = lmi_data(A_lambda, decomp);

  SwitchingLaw law;
  law.sys = sys;
  law.cert.P_bar = P_bar;
  law.cert.P_perp = P_perp;
  law.cert.P_cross = -ld.K.transpose() * P_perp;
  law.cert.decomp = decomp;
  law.cert.lambda = lambda;
  law.cert.x_e = x_e;
  Mat P(p + m, p + m);
  P.topLeftCorner(p, p) = P_bar;
  P.topRightCorner(p, m) = law.cert.P_cross;
  P.bottomLeftCorner(m, p) = law.cert.P_cross.transpose();
  P.bottomRightCorner(m, m) = P_perp;
  law.cert.P = P;

  law.S_bar = P_bar * decomp.V_bar.transpose() +
              law.cert.P_cross * decomp.V_perp.transpose();
  law.S_perp = P_perp * decomp.V_perp.transpose() +
               law.cert.P_cross.transpose() * decomp.V_bar.transpose();
  law.cert.margin_decrease =
      p > 0 ? -max_eig(he(law.S_bar * A_lambda * decomp.V_bar)) : 0.0;
  law.cert.margin_positivity = min_eig(P);

  law.ell = residual_terms(sys, x_e);
  Vec ell_lambda = Vec::Zero(sys.n);
  for (int i = 0; i < sys.N; ++i) ell_lambda += lambda[i] * law.ell[i];
  if (ell_lambda.cwiseAbs().maxCoeff() >
      1e-8 * (1.0 + b_lambda.cwiseAbs().maxCoeff()))
    throw DesignError(DesignFailure::NoEquilibrium,
                      "blend drift does not vanish at the target point");

  law.U.resize(sys.N);
  for (int i = 0; i < sys.N; ++i)
    law.U[i] = decomp.V_bar.transpose() * sys.A[i].transpose() *
                   law.S_perp.transpose() +
               law.S_bar * sys.A[i] * decomp.V_perp;

  law.M = compute_M(A_lambda, decomp);
  std::vector<int> subset = detect_shared_subset(sys, decomp);
  law.interior = check_interior_condition(law.M, law.ell, subset);
  return law;
}

}  // namespace

SwitchingLaw assemble_law(const SwitchedAffineSystem& sys,
                          const SimplexVector& lambda, const Vec& x_e,
                          const NullspaceDecomposition& decomp,
                          const Mat& P_bar, const Mat& P_perp) {
  if (P_bar.rows() != decomp.p || P_perp.rows() != decomp.m ||
      x_e.size() != sys.n)
    throw std::invalid_argument("certificate block dimensions inconsistent");
  auto [A_l, b_l] = convex_combination(sys, lambda);
  return assemble_internal(sys, lambda, x_e, decomp, P_bar, P_perp, A_l, b_l);
}

SwitchingLaw design_switching(const SwitchedAffineSystem& sys,
                              const SimplexVector& lambda, const Vec& x_e_perp,
                              const DesignOptions& options) {
  ValidationReport rep = validate_system(sys);
  if (!rep.valid)
    throw std::invalid_argument("malformed system: " + rep.issues[0].what);

  auto [A_l, b_l] = convex_combination(sys, lambda);
  NullspaceDecomposition decomp;
  try {
    decomp = nullspace_decomposition(A_l);
  } catch (const std::invalid_argument& e) {
    throw DesignError(DesignFailure::AssumptionViolated, e.what());
  }
  if (check_zero_defective(A_l, decomp))
    throw DesignError(DesignFailure::AssumptionViolated,
                      "zero eigenvalue of the blend is defective");

  EquilibriumSpec eq;
  try {
    eq = solve_equilibrium(sys, lambda, x_e_perp);
  } catch (const std::runtime_error& e) {
    throw DesignError(DesignFailure::NoEquilibrium, e.what());
  }

  const Mat M = compute_M(A_l, decomp);
  const std::vector<Vec> ell = residual_terms(sys, eq.x_e);
  const std::vector<int> subset = detect_shared_subset(sys, decomp);
  if (subset.empty())
    throw DesignError(DesignFailure::ParticularNullspaceUnsupported,
                      "no mode preserves the equilibrium nullspace");
  InteriorCertificate interior = check_interior_condition(M, ell, subset);
  if (!interior.valid) {
    const std::string detail =
        " (margin " + std::to_string(interior.margin) + ", rank " +
        std::to_string(interior.rank_ML) + " of " + std::to_string(decomp.m) +
        ")";
    if (static_cast<int>(subset.size()) < sys.N)
      throw DesignError(DesignFailure::ParticularNullspaceUnsupported,
                        "drift hull test failed on the nullspace-preserving "
                        "subset" +
                            detail);
    throw DesignError(DesignFailure::InteriorConditionFailed,
                      "origin not interior to the drift hull" + detail);
  }

  const int p = decomp.p;
  const int m = decomp.m;
  const LmiData ld = lmi_data(A_l, decomp);
  ConicProblem prob;
  prob.num_vars = tri_count(p) + tri_count(m);
  if (p > 0) prob.lmis.push_back(decrease_expression(ld, p, m));
  LinearMatrixExpression P_expr = p_expression(ld, p, m);

  ConicSolution cs;
  if (options.objective == DesignOptions::Objective::max_margin) {
    prob.lmis.push_back(P_expr);
    LinearMatrixExpression cap; // pins the scale of the homogeneous problem
    cap.constant = Mat::Identity(sys.n, sys.n);
    for (const auto& [k, G] : P_expr.terms) cap.terms.push_back({k, -G});
    prob.lmis.push_back(cap);
    cs = options.backend ? options.backend->solve(prob, options.solve)
                         : solve(prob, options.solve);
  } else {
    prob.margin_floor = 1e-6;
    cs = min_condition_number(prob, P_expr, options.cond_floor, options.solve);
  }
  if (cs.status != SolveStatus::optimal)
    throw DesignError(DesignFailure::LmiInfeasible,
                      std::string("certificate search failed: ") +
                          to_string(cs.status));

  const Mat P_bar = unpack_tri(cs.values, 0, p);
  const Mat P_perp = unpack_tri(cs.values, tri_count(p), m);
  return assemble_internal(sys, lambda, eq.x_e, decomp, P_bar, P_perp, A_l,
                           b_l);
}

SwitchingLaw SwitchingLaw::with_reference(const Vec& x_e_perp) const {
  if (x_e_perp.size() != cert.decomp.m)
    throw std::invalid_argument("reference coordinate has wrong dimension");
  SwitchingLaw law = *this;
  const Vec x_bar = cert.decomp.V_bar.transpose() * cert.x_e;
  law.cert.x_e = cert.decomp.V_bar * x_bar + cert.decomp.V_perp * x_e_perp;
  law.ell = residual_terms(law.sys, law.cert.x_e);
  law.interior =
      check_interior_condition(law.M, law.ell, law.interior.subset);
  return law;
}

double lyapunov_value(const SwitchingLaw& law, const Vec& x) {
  const Vec xi = x - law.cert.x_e;
  Vec z(law.cert.decomp.p + law.cert.decomp.m);
  z << law.cert.decomp.V_bar.transpose() * xi,
      law.cert.decomp.V_perp.transpose() * xi;
  return z.dot(law.cert.P * z);
}

Vec f_values(const SwitchingLaw& law, const Vec& x) {
  const Vec xi = x - law.cert.x_e;
  const Vec xb = law.cert.decomp.V_bar.transpose() * xi;
  const Vec xp = law.cert.decomp.V_perp.transpose() * xi;
  Vec f(law.sys.N);
  for (int i = 0; i < law.sys.N; ++i) {
    const Mat& Ai = law.sys.A[i];
    const Vec& li = law.ell[i];
    double v = 0.0;
    if (law.cert.decomp.p > 0) {
      v += xb.dot(he(law.S_bar * Ai * law.cert.decomp.V_bar) * xb);
      v += 2.0 * xb.dot(law.U[i] * xp);
      v += 2.0 * (law.S_bar * li).dot(xb);
    }
    v += xp.dot(he(law.S_perp * Ai * law.cert.decomp.V_perp) * xp);
    v += 2.0 * (law.S_perp * li).dot(xp);
    f(i) = v;
  }
  return f;
}

int select_mode(const SwitchingLaw& law, const Vec& x, int prev_mode) {
  const Vec f = f_values(law, x);
  int best = 0;
  for (int i = 1; i < f.size(); ++i)
    if (f(i) < f(best)) best = i;
  const double tol = 1e-12 * (1.0 + f.cwiseAbs().maxCoeff());
  if (prev_mode >= 0 && prev_mode < f.size() &&
      f(prev_mode) <= f(best) + tol)
    return prev_mode;
  for (int i = 0; i < best; ++i)
    if (f(i) <= f(best) + tol) return i;
  return best;
}

CertificateReport verify_certificate(const SwitchingLaw& law) {
  CertificateReport rep;
  const NullspaceDecomposition& d = law.cert.decomp;
  const int n = law.sys.n;
  auto [A_l, b_l] = convex_combination(law.sys, law.cert.lambda);
  auto add = [&rep](const std::string& name, bool passed, double margin) {
    rep.checks.push_back({name, passed, margin});
  };

  Mat basis(n, n);
  basis << d.V_bar, d.V_perp;
  const double ortho =
      (basis.transpose() * basis - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  add("bases_orthonormal", ortho <= 1e-10, 1e-10 - ortho);

  const double scale = std::max(1.0, A_l.cwiseAbs().maxCoeff());
  const double null_res = (A_l * d.V_perp).cwiseAbs().maxCoeff();
  add("nullspace_basis", null_res <= 1e-9 * scale, 1e-9 * scale - null_res);

  add("nondefective_zero", !check_zero_defective(A_l, d), 0.0);

  const double eq_res = (A_l * law.cert.x_e + b_l).cwiseAbs().maxCoeff();
  const double eq_tol = 1e-8 * (1.0 + b_l.cwiseAbs().maxCoeff());
  add("equilibrium_residual", eq_res <= eq_tol, eq_tol - eq_res);

  const LmiData ld = lmi_data(A_l, d);
  const double cross_res =
      d.p > 0 ? (law.cert.P_cross.transpose() + law.cert.P_perp * ld.K)
                    .cwiseAbs()
                    .maxCoeff()
              : 0.0;
  add("cross_block_identity", cross_res <= 1e-9, 1e-9 - cross_res);

  rep.decrease_block = d.p > 0 ? Mat(he(law.S_bar * A_l * d.V_bar))
                               : Mat::Zero(0, 0);
  const double dec_margin = d.p > 0 ? -max_eig(rep.decrease_block) : 1.0;
  add("decrease_lmi", dec_margin > 0.0, dec_margin);

  Eigen::SelfAdjointEigenSolver<Mat> es(law.cert.P, Eigen::EigenvaluesOnly);
  rep.P_eigenvalues = es.eigenvalues();
  add("positivity_lmi", rep.P_eigenvalues.minCoeff() > 0.0,
      rep.P_eigenvalues.minCoeff());

  Mat U_lambda = Mat::Zero(d.p, d.m);
  Vec ell_lambda = Vec::Zero(n);
  for (int i = 0; i < law.sys.N; ++i) {
    U_lambda += law.cert.lambda[i] * law.U[i];
    ell_lambda += law.cert.lambda[i] * law.ell[i];
  }
  const double u_res =
      d.p > 0 ? U_lambda.cwiseAbs().maxCoeff() : 0.0;
  add("u_lambda_zero", u_res <= 1e-8, 1e-8 - u_res);
  const double l_res = ell_lambda.cwiseAbs().maxCoeff();
  add("ell_lambda_zero", l_res <= eq_tol, eq_tol - l_res);

  add("interior_condition", law.interior.valid, law.interior.margin);

  rep.all_passed = true;
  for (const CertificateCheck& c : rep.checks) rep.all_passed &= c.passed;
  return rep;
}

}  // namespace sa
