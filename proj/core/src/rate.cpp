#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "switchaff/conic.hpp"
#include "switchaff/rate.hpp"

namespace sa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_eig(const Mat& S) {
  if (S.rows() == 0) return -kInf;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_max_P(const SwitchingLaw& law) {
  Eigen::SelfAdjointEigenSolver<Mat> es(law.cert.P, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Mat active_residual_matrix(const SwitchingLaw& law,
                           const std::vector<int>& act) {
  Mat L(law.sys.n, static_cast<int>(act.size()));
  for (size_t a = 0; a < act.size(); ++a) L.col(a) = law.ell[act[a]];
  return L;
}

Vec active_weights(const RateOptions& options, int k) {
  Vec mu = Vec::Constant(k, 1.0 / k);
  if (options.mode_weights) {
    if (options.mode_weights->size() != k)
      throw std::invalid_argument("mode_weights length must match |K_a|");
    if (options.mode_weights->minCoeff() < 0.0)
      throw std::invalid_argument("mode_weights must be nonnegative");
    const double s = options.mode_weights->sum();
    if (!(s > 0.0)) throw std::invalid_argument("mode_weights sum to zero");
    mu = *options.mode_weights / s;
  }
  return mu;
}

struct EpsPoint {
  bool valid = false;
  double alpha = 0.0;
  double rho = 0.0;
  Mat Q;
};

// rho I variant: Q = blkdiag(rho I_p, 0) + eps*beta * sum_a mu_a w_a w_a'.
EpsPoint eval_eps(const SwitchingLaw& law, const Mat& W, const Vec& mu,
                  double beta, double eps, double smax_P) {
  EpsPoint out;
  const int p = law.cert.decomp.p;
  const int n = law.sys.n;
  const double rho = find_rho(law, eps);
  if (p > 0 && !(rho > 0.0)) return out;
  Mat Q = Mat::Zero(n, n);
  if (p > 0) Q.topLeftCorner(p, p) = rho * Mat::Identity(p, p);
  for (int a = 0; a < W.cols(); ++a)
    Q += (eps * beta * mu(a)) * W.col(a) * W.col(a).transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(Q, Eigen::EigenvaluesOnly);
  out.valid = true;
  out.rho = rho;
  out.Q = Q;
  out.alpha = es.eigenvalues().minCoeff() / smax_P;
  return out;
}

// One small SDP per eps: maximize t with He(S_bar A_gamma V_bar) <= -G for
// every perturbed blend and blkdiag(G, 0) + eps*beta*sum mu w w' >= t I.
EpsPoint eval_eps_general(const SwitchingLaw& law, const Mat& W, const Vec& mu,
                          double beta, double eps, double smax_P,
                          const SolveOptions& so) {
  EpsPoint out;
  const int p = law.cert.decomp.p;
  const int n = law.sys.n;
  if (p == 0) return eval_eps(law, W, mu, beta, eps, smax_P);

  const int ng = p * (p + 1) / 2;
  auto tri_index = [p](int a, int b) {
    return a * (2 * p - a + 1) / 2 + (b - a);
  };
  ConicProblem prob;
  prob.num_vars = ng + 1;
  Mat WQ = Mat::Zero(n, n);
  for (int a = 0; a < W.cols(); ++a)
    WQ += (eps * beta * mu(a)) * W.col(a) * W.col(a).transpose();

  LinearMatrixExpression qexpr;
  qexpr.constant = WQ;
  qexpr.margined = false;
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b) {
      Mat G = Mat::Zero(n, n);
      G(a, b) = G(b, a) = 1.0;
      qexpr.terms.push_back({tri_index(a, b), G});
    }
  qexpr.terms.push_back({ng, -Mat::Identity(n, n)});
  prob.lmis.push_back(qexpr);

  LinearMatrixExpression gpos;
  gpos.constant = Mat::Zero(p, p);
  gpos.margined = false;
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b) {
      Mat G = Mat::Zero(p, p);
      G(a, b) = G(b, a) = 1.0;
      gpos.terms.push_back({tri_index(a, b), G});
    }
  prob.lmis.push_back(gpos);

  for (int i : active_set(law.cert.lambda))
    for (double sgn : {1.0, -1.0}) {
      const Vec gam = gamma_blend(law.cert.lambda, sgn * eps, i);
      Mat Ag = Mat::Zero(n, n);
      for (int j = 0; j < law.sys.N; ++j) Ag += gam(j) * law.sys.A[j];
      const Mat Hb = law.S_bar * Ag * law.cert.decomp.V_bar;
      LinearMatrixExpression dec;
      dec.constant = -(Hb + Hb.transpose());
      dec.margined = false;
      for (int a = 0; a < p; ++a)
        for (int b = a; b < p; ++b) {
          Mat G = Mat::Zero(p, p);
          G(a, b) = G(b, a) = -1.0;
          dec.terms.push_back({tri_index(a, b), G});
        }
      prob.lmis.push_back(dec);
    }

  prob.objective = Vec::Zero(ng + 1);
  prob.objective(ng) = 1.0;
  ConicSolution cs = solve(prob, so);
  if (cs.status != SolveStatus::optimal) return out;

  Mat G(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b)
      G(a, b) = G(b, a) = cs.values(tri_index(a, b));
  Mat Q = WQ;
  Q.topLeftCorner(p, p) += G;
  Eigen::SelfAdjointEigenSolver<Mat> esq(Q, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat> esg(G, Eigen::EigenvaluesOnly);
  out.valid = true;
  out.Q = Q;
  out.rho = esg.eigenvalues().minCoeff();
  out.alpha = esq.eigenvalues().minCoeff() / smax_P;
  return out;
}

struct Sweep {
  bool found = false;
  double alpha = 0.0;
  double eps = 0.0;
  double rho = 0.0;
  Mat Q;
};

Sweep sweep_alpha(const SwitchingLaw& law, double beta,
                  const RateOptions& options) {
  Sweep best;
  if (!(beta > 0.0)) return best;
  const std::vector<int> act = active_set(law.cert.lambda);
  const Mat L = active_residual_matrix(law, act);
  Mat W(law.sys.n, static_cast<int>(act.size()));
  W.topRows(law.cert.decomp.p) = law.S_bar * L;
  W.bottomRows(law.cert.decomp.m) = law.S_perp * L;
  const Vec mu = active_weights(options, static_cast<int>(act.size()));
  const double smax_P = lambda_max_P(law);
  const double emax = eps_max(law.cert.lambda);
  const int grid = std::max(2, options.eps_grid);

  auto consider = [&](double eps) {
    if (!(eps > 0.0) || eps > emax) return;
    const EpsPoint pt =
        options.general_G
            ? eval_eps_general(law, W, mu, beta, eps, smax_P, options.solve)
            : eval_eps(law, W, mu, beta, eps, smax_P);
    if (pt.valid && pt.alpha > best.alpha) {
      best.found = true;
      best.alpha = pt.alpha;
      best.eps = eps;
      best.rho = pt.rho;
      best.Q = pt.Q;
    }
  };

  for (int k = 1; k <= grid; ++k) consider(emax * k / grid);
  if (best.found) {
    const double step = emax / grid;
    const double lo = std::max(best.eps - step, 0.0);
    const double hi = std::min(best.eps + step, emax);
    for (int k = 0; k <= grid; ++k) consider(lo + (hi - lo) * k / grid);
  }
  return best;
}

}  // namespace

Vec gamma_blend(const SimplexVector& lambda, double eps, int i) {
  const int N = static_cast<int>(lambda.size());
  if (i < 0 || i >= N) throw std::invalid_argument("mode index out of range");
  Vec g = (1.0 - eps) * lambda.weights();
  g(i) += eps;
  if (g.minCoeff() < -1e-12)
    throw std::domain_error("perturbed combination leaves the simplex");
  return g;
}

std::vector<int> active_set(const SimplexVector& lambda) {
  std::vector<int> act;
  for (int i = 0; i < static_cast<int>(lambda.size()); ++i)
    if (std::abs(lambda[i]) > 1e-12) act.push_back(i);
  return act;
}

double eps_max(const SimplexVector& lambda) {
  const std::vector<int> act = active_set(lambda);
  double e = 1.0;
  for (int i : act) {
    const double li = lambda[i];
    const double own = li < 1.0 - 1e-15 ? li / (1.0 - li) : kInf;
    double others = kInf;
    for (int j : act)
      if (j != i) others = std::min(others, (1.0 - lambda[j]) / lambda[j]);
    e = std::min(e, std::min(own, others));
  }
  return e;
}

double find_rho(const SwitchingLaw& law, double eps) {
  const NullspaceDecomposition& d = law.cert.decomp;
  if (d.p == 0) return kInf;
  const int n = law.sys.n;
  double worst = -kInf;
  for (int i : active_set(law.cert.lambda))
    for (double sgn : {1.0, -1.0}) {
      const Vec gam = gamma_blend(law.cert.lambda, sgn * eps, i);
      Mat Ag = Mat::Zero(n, n);
      for (int j = 0; j < law.sys.N; ++j) Ag += gam(j) * law.sys.A[j];
      const Mat Hb = law.S_bar * Ag * d.V_bar;
      worst = std::max(worst, max_eig(Hb + Hb.transpose()));
    }
  return -worst;
}

double g_value(const SwitchingLaw& law, int i, const Vec& xi) {
  const Vec xb = law.cert.decomp.V_bar.transpose() * xi;
  const Vec xp = law.cert.decomp.V_perp.transpose() * xi;
  double v = (law.S_perp * law.ell[i]).dot(xp);
  if (law.cert.decomp.p > 0)
    v += xb.dot(law.U[i] * xp) + (law.S_bar * law.ell[i]).dot(xb);
  return v;
}

double h_value(const SwitchingLaw& law, int i, const Vec& xi) {
  const Vec xb = law.cert.decomp.V_bar.transpose() * xi;
  const Vec xp = law.cert.decomp.V_perp.transpose() * xi;
  double lin = (law.S_perp * law.ell[i]).dot(xp);
  if (law.cert.decomp.p > 0) lin += (law.S_bar * law.ell[i]).dot(xb);
  return 0.5 * lin * lin;
}

RateCertificate certify_rate(const SwitchingLaw& law, double r,
                             const RateOptions& options) {
  if (!(r > 0.0)) throw std::invalid_argument("level r must be positive");
  const std::vector<int> act = active_set(law.cert.lambda);
  const Mat L = active_residual_matrix(law, act);
  const Mat ML = law.M * L;
  Eigen::JacobiSVD<Mat> svd(ML);
  const double smax = svd.singularValues().size() > 0
                          ? svd.singularValues()(0)
                          : 0.0;
  const double rank_tol =
      std::max(ML.rows(), ML.cols()) * 1e-9 * std::max(1.0, smax);
  const int rank =
      static_cast<int>((svd.singularValues().array() > rank_tol).count());
  if (rank < law.cert.decomp.m)
    throw DesignError(
        DesignFailure::AssumptionViolated,
        "residual directions span rank " + std::to_string(rank) + " of " +
            std::to_string(law.cert.decomp.m) +
            "; the local rate construction needs full rank");

  RateCertificate cert;
  cert.r = r;
  double beta = 0.0;
  if (options.fixed_beta) {
    beta = *options.fixed_beta;
  } else {
    const SosResult sos = sos_find_beta(law, r, options);
    if (!sos.feasible) return cert;
    beta = sos.beta;
  }
  cert.beta = beta;

  const Sweep best = sweep_alpha(law, beta, options);
  if (!best.found) return cert;
  cert.alpha = best.alpha;
  cert.eps = best.eps;
  cert.rho = best.rho;
  cert.Q = best.Q;
  cert.certified = best.alpha > 0.0;
  return cert;
}

std::vector<RateCurveRow> rate_curve(const SwitchingLaw& law,
                                     const std::vector<double>& radii,
                                     const RateOptions& options) {
  std::vector<RateCurveRow> rows;
  double prev_beta = kInf;
  for (double r : radii) {
    RateCurveRow row;
    row.r = r;
    double beta = 0.0;
    bool have_beta = false;
    if (options.fixed_beta) {
      beta = *options.fixed_beta;
      have_beta = beta > 0.0;
    } else {
      SosResult sos = sos_find_beta(law, r, options);
      if (sos.feasible) {
        if (sos.beta > prev_beta) lower_beta(sos, prev_beta);
        prev_beta = sos.beta;
        beta = sos.beta;
        have_beta = true;
      }
    }
    if (have_beta) {
      row.beta = beta;
      const Sweep best = sweep_alpha(law, beta, options);
      if (best.found) {
        row.alpha = best.alpha;
        row.eps = best.eps;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sa
