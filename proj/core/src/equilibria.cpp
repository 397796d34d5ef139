#include "switchaff/equilibria.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "switchaff/conic.hpp"
#include "switchaff/sysmodel.hpp"

namespace sa {

namespace {

// Largest-|entry| of each column made positive, ties broken by lowest row.
void normalize_signs(Mat& V) {
  for (int j = 0; j < V.cols(); ++j) {
    int row = 0;
    double best = -1.0;
    for (int i = 0; i < V.rows(); ++i) {
      const double a = std::abs(V(i, j));
      if (a > best + 1e-14) {
        best = a;
        row = i;
      }
    }
    if (V(row, j) < 0.0) V.col(j) = -V.col(j);
  }
}

}  // namespace

NullspaceDecomposition nullspace_decomposition(const Mat& A_lambda,
                                               double rank_tol) {
  const int n = static_cast<int>(A_lambda.rows());
  if (A_lambda.cols() != n) throw std::invalid_argument("matrix not square");
  Eigen::JacobiSVD<Mat> svd(A_lambda, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s(0) : 0.0;
  const double tol = rank_tol > 0.0 ? rank_tol * s_max : n * 1e-9 * s_max;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  const int m = n - rank;
  if (m == 0)
    throw std::invalid_argument("not a singular combination at tolerance");
  NullspaceDecomposition d;
  d.m = m;
  d.p = rank;
  d.rank_tol = rank_tol > 0.0 ? rank_tol : n * 1e-9;
  d.V_bar = svd.matrixV().leftCols(rank);
  d.V_perp = svd.matrixV().rightCols(m);
  normalize_signs(d.V_bar);
  normalize_signs(d.V_perp);
  return d;
}

NullspaceDecomposition decomposition_from_bases(const Mat& A_lambda,
                                                const Mat& V_bar,
                                                const Mat& V_perp) {
  const int n = static_cast<int>(A_lambda.rows());
  const int m = static_cast<int>(V_perp.cols());
  const int p = static_cast<int>(V_bar.cols());
  if (V_perp.rows() != n || V_bar.rows() != n || p + m != n || m < 1)
    throw std::invalid_argument("basis dimensions inconsistent");
  Mat B(n, n);
  B << V_bar, V_perp;
  if ((B.transpose() * B - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("bases not orthonormal");
  const double scale = std::max(1.0, A_lambda.cwiseAbs().maxCoeff());
  if ((A_lambda * V_perp).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("right block does not span the nullspace");
  NullspaceDecomposition d;
  d.V_bar = V_bar;
  d.V_perp = V_perp;
  d.m = m;
  d.p = p;
  d.rank_tol = n * 1e-9;
  return d;
}

bool check_zero_defective(const Mat& A_lambda,
                          const NullspaceDecomposition& d) {
  if (d.p == 0) return false;
  const Mat B = d.V_bar.transpose() * A_lambda * d.V_bar;
  Eigen::JacobiSVD<Mat> svd(B);
  const Vec& s = svd.singularValues();
  return s(s.size() - 1) <= 1e-9 * std::max(1.0, s(0));
}

EquilibriumSpec solve_equilibrium(const SwitchedAffineSystem& sys,
                                  const SimplexVector& lambda,
                                  const Vec& x_e_perp) {
  auto [A_l, b_l] = convex_combination(sys, lambda);
  NullspaceDecomposition d = nullspace_decomposition(A_l);
  Vec xp = x_e_perp;
  if (xp.size() == 0) xp = Vec::Zero(d.m);
  if (xp.size() != d.m)
    throw std::invalid_argument("free coordinate has wrong dimension");
  const Mat AV = A_l * d.V_bar;
  Vec x_bar = d.p > 0 ? Vec(AV.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                                .solve(-b_l))
                      : Vec::Zero(0);
  const double residual =
      d.p > 0 ? (AV * x_bar + b_l).cwiseAbs().maxCoeff()
              : b_l.cwiseAbs().maxCoeff();
  if (residual > 1e-7 * (1.0 + b_l.norm()))
    throw std::runtime_error("blend admits no equilibrium (residual " +
                             std::to_string(residual) + ")");
  EquilibriumSpec spec{lambda, d.V_bar * x_bar + d.V_perp * xp, x_bar, xp,
                       residual};
  return spec;
}

Mat compute_M(const Mat& A_lambda, const NullspaceDecomposition& d) {
  if (d.p == 0) return d.V_perp.transpose();
  const Mat B = d.V_bar.transpose() * A_lambda * d.V_bar;
  Eigen::JacobiSVD<Mat> svd(B);
  const Vec& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0)))
    throw std::invalid_argument("projected block singular (defective zero)");
  return d.V_perp.transpose() -
         d.V_perp.transpose() * A_lambda * d.V_bar *
             B.partialPivLu().solve(d.V_bar.transpose());
}

std::vector<Vec> residual_terms(const SwitchedAffineSystem& sys,
                                const Vec& x_e) {
  std::vector<Vec> ell(sys.N);
  for (int i = 0; i < sys.N; ++i) ell[i] = sys.A[i] * x_e + sys.b[i];
  return ell;
}

std::vector<int> detect_shared_subset(const SwitchedAffineSystem& sys,
                                      const NullspaceDecomposition& d,
                                      double tol) {
  std::vector<int> subset;
  for (int i = 0; i < sys.N; ++i) {
    const double scale = std::max(1.0, sys.A[i].cwiseAbs().maxCoeff());
    if ((sys.A[i] * d.V_perp).cwiseAbs().maxCoeff() <= tol * scale)
      subset.push_back(i);
  }
  return subset;
}

InteriorCertificate check_interior_condition(const Mat& M,
                                             const std::vector<Vec>& ell,
                                             const std::vector<int>& subset) {
  InteriorCertificate cert;
  cert.subset = subset;
  const int m = static_cast<int>(M.rows());
  const int k = static_cast<int>(subset.size());
  if (k == 0) return cert;

  Mat ML(m, k);
  for (int j = 0; j < k; ++j) ML.col(j) = M * ell[subset[j]];
  Eigen::JacobiSVD<Mat> svd(ML);
  const Vec& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s(0) : 0.0;
  cert.rank_ML = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > std::max(m, k) * 1e-9 * std::max(1.0, s_max)) ++cert.rank_ML;

  // maximize t  s.t.  ML mu = 0, sum mu = 1, mu_j >= t
  LpProblem lp;
  lp.num_vars = k + 1;
  lp.c = Vec::Zero(k + 1);
  lp.c(k) = 1.0;
  lp.A_eq = Mat::Zero(m + 1, k + 1);
  lp.A_eq.topLeftCorner(m, k) = ML;
  lp.A_eq.row(m).head(k).setOnes();
  lp.b_eq = Vec::Zero(m + 1);
  lp.b_eq(m) = 1.0;
  lp.A_ub = Mat::Zero(k, k + 1);
  for (int j = 0; j < k; ++j) {
    lp.A_ub(j, j) = -1.0;
    lp.A_ub(j, k) = 1.0;
  }
  lp.b_ub = Vec::Zero(k);
  ConicSolution sol = solve_lp(lp);
  if (sol.status != SolveStatus::optimal) return cert;

  cert.margin = sol.objective_value;
  if (cert.margin >= kInteriorStrictness && cert.rank_ML == m) {
    Vec mu_full = Vec::Zero(ell.size());
    for (int j = 0; j < k; ++j)
      mu_full(subset[j]) = std::max(0.0, sol.values(j));
    cert.mu = SimplexVector(mu_full / mu_full.sum());
    cert.valid = true;
  }
  return cert;
}

NoGlobalExponentialDiagnostic diagnose_no_global_exponential(
    const std::vector<Vec>& ell, const NullspaceDecomposition& d, double tol) {
  NoGlobalExponentialDiagnostic diag;
  diag.triggered = true;
  for (const Vec& l : ell) {
    diag.ell_bar = std::max(diag.ell_bar, l.norm());
    if (d.p > 0 &&
        (d.V_bar.transpose() * l).cwiseAbs().maxCoeff() > tol * (1.0 + l.norm()))
      diag.triggered = false;
  }
  return diag;
}

}  // namespace sa
