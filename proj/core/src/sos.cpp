#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "switchaff/conic.hpp"
#include "switchaff/rate.hpp"

namespace sa {

namespace {

constexpr double kBhatCap = 1e8;

using Expo = std::vector<int>;

struct Poly {
  int n = 0;
  std::map<Expo, double> t;
  explicit Poly(int vars) : n(vars) {}

  void add(const Expo& e, double c) {
    if (c == 0.0) return;
    t[e] += c;
  }
  Poly times(const Poly& o) const {
    Poly r(n);
    for (const auto& [e1, c1] : t)
      for (const auto& [e2, c2] : o.t) {
        Expo e(n);
        for (int k = 0; k < n; ++k) e[k] = e1[k] + e2[k];
        r.t[e] += c1 * c2;
      }
    return r;
  }
  Poly scaled(double s) const {
    Poly r(n);
    if (s == 0.0) return r;
    for (const auto& [e, c] : t) r.t[e] = c * s;
    return r;
  }
  Poly plus(const Poly& o) const {
    Poly r = *this;
    for (const auto& [e, c] : o.t) r.t[e] += c;
    return r;
  }
  double coeff(const Expo& e) const {
    auto it = t.find(e);
    return it == t.end() ? 0.0 : it->second;
  }
  double max_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : t) m = std::max(m, std::abs(c));
    return m;
  }
};

void combos(int n, int total, int start, Expo& cur, std::vector<Expo>& out) {
  if (total == 0) {
    out.push_back(cur);
    return;
  }
  for (int k = start; k < n; ++k) {
    ++cur[k];
    combos(n, total - 1, k, cur, out);
    --cur[k];
  }
}

std::vector<Expo> monomials(int n, const std::vector<int>& degs) {
  std::vector<Expo> out;
  for (int d : degs) {
    Expo cur(n, 0);
    combos(n, d, 0, cur, out);
  }
  return out;
}

Poly mono_poly(int n, const Expo& e, double c = 1.0) {
  Poly p(n);
  p.add(e, c);
  return p;
}

Poly quad_poly(int n, const Mat& Q, const Vec* w) {
  Poly p(n);
  if (Q.size() > 0)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (Q(i, j) != 0.0) {
          Expo e(n, 0);
          ++e[i];
          ++e[j];
          p.add(e, Q(i, j));
        }
  if (w)
    for (int i = 0; i < n; ++i)
      if ((*w)(i) != 0.0) {
        Expo e(n, 0);
        e[i] = 1;
        p.add(e, (*w)(i));
      }
  return p;
}

Poly lin_poly(const Vec& L) {
  const int n = static_cast<int>(L.size());
  Poly p(n);
  for (int k = 0; k < n; ++k)
    if (L(k) != 0.0) {
      Expo e(n, 0);
      e[k] = 1;
      p.add(e, L(k));
    }
  return p;
}

std::string mono_label(const Expo& e) {
  std::string s;
  for (size_t k = 0; k < e.size(); ++k) {
    if (!e[k]) continue;
    if (!s.empty()) s += "*";
    s += "z" + std::to_string(k + 1);
    if (e[k] > 1) s += "^" + std::to_string(e[k]);
  }
  return s.empty() ? "1" : s;
}

int tri_count(int d) { return d * (d + 1) / 2; }

Mat tri_basis(int a, int b, int dim) {
  Mat E = Mat::Zero(dim, dim);
  E(a, b) = 1.0;
  E(b, a) = 1.0;
  return E;
}

Mat unpack_tri(const Vec& y, int off, int d) {
  Mat S(d, d);
  int idx = 0;
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b, ++idx) S(a, b) = S(b, a) = y(off + idx);
  return S;
}

double min_eig(const Mat& S) {
  if (S.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Normalized problem data: zeta = z / z_scale maps the level set into the
// unit ball, ghat/hhat are g, h in zeta with coefficients scaled by s_g so
// that bhat = (beta s_g)^2 is the decision variable.
struct Assembly {
  int n = 0;
  int p = 0;
  std::vector<int> active;
  double z_scale = 1.0;
  double s_g = 0.0;
  std::vector<Poly> ghat, hhat, ghat2, hhat2;
  std::vector<Vec> L;
  std::vector<char> has_lin;
  std::vector<Poly> phiw; // (L'zeta)^2 * w, the facial multiplier column
  Poly wpoly{0};
  std::vector<Expo> M2, M26, Mlin;
  std::vector<std::vector<Poly>> bases25;
  std::vector<Poly> basis26;
  std::vector<Poly> psi_pair_w; // packed Mlin pair products times w
  int nv = 0;
  std::vector<int> off_X, off_c, off_Y, off_Psi, dX;
  std::vector<std::map<int, double>> eq_rows;
  std::vector<double> eq_rhs;
};

Assembly assemble(const SwitchingLaw& law, double r) {
  Assembly A;
  A.p = law.cert.decomp.p;
  const int m = law.cert.decomp.m;
  const int n = A.p + m;
  A.n = n;
  A.active = active_set(law.cert.lambda);
  Eigen::SelfAdjointEigenSolver<Mat> es(law.cert.P, Eigen::EigenvaluesOnly);
  const double smin = es.eigenvalues().minCoeff();
  if (!(smin > 0.0))
    throw std::invalid_argument("certificate matrix is not positive definite");
  A.z_scale = std::sqrt(r / smin);

  std::vector<Poly> gz, hz;
  for (int i : A.active) {
    Mat Qi = Mat::Zero(n, n);
    if (A.p > 0) {
      Mat half = Mat::Zero(n, n);
      half.topRightCorner(A.p, m) = 0.5 * law.U[i];
      Qi = half + half.transpose();
    }
    Vec w(n);
    if (A.p > 0)
      w << law.S_bar * law.ell[i], law.S_perp * law.ell[i];
    else
      w = law.S_perp * law.ell[i];
    const Mat Qz = (A.z_scale * A.z_scale) * Qi;
    const Vec wz = A.z_scale * w;
    gz.push_back(quad_poly(n, Qz, &wz));
    const Mat Hz = 0.5 * (A.z_scale * A.z_scale) * w * w.transpose();
    hz.push_back(quad_poly(n, Hz, nullptr));
    A.L.push_back(wz);
  }
  for (const Poly& g : gz) A.s_g = std::max(A.s_g, g.max_coeff());
  if (A.s_g == 0.0) return A;

  for (size_t a = 0; a < gz.size(); ++a) {
    A.ghat.push_back(gz[a].scaled(1.0 / A.s_g));
    A.hhat.push_back(hz[a].scaled(1.0 / (A.s_g * A.s_g)));
    A.L[a] /= A.s_g;
    A.has_lin.push_back(A.L[a].cwiseAbs().maxCoeff() > 0.0 ? 1 : 0);
    A.ghat2.push_back(A.ghat[a].times(A.ghat[a]));
    A.hhat2.push_back(A.hhat[a].times(A.hhat[a]));
  }
  const Mat Pw = -(A.z_scale * A.z_scale / r) * law.cert.P;
  A.wpoly = quad_poly(n, Pw, nullptr);
  A.wpoly.add(Expo(n, 0), 1.0);

  A.M2 = monomials(n, {2});
  A.M26 = monomials(n, {0, 1, 2});
  A.Mlin = monomials(n, {0, 1});
  for (const Expo& e : A.M26) A.basis26.push_back(mono_poly(n, e));
  for (size_t a = 0; a < A.Mlin.size(); ++a)
    for (size_t b = a; b < A.Mlin.size(); ++b) {
      Poly pr = mono_poly(n, A.Mlin[a]).times(mono_poly(n, A.Mlin[b]));
      A.psi_pair_w.push_back(pr.scaled(a == b ? 1.0 : 2.0).times(A.wpoly));
    }

  A.nv = 1;
  for (size_t a = 0; a < A.active.size(); ++a) {
    std::vector<Poly> basis;
    if (A.has_lin[a]) {
      basis.push_back(lin_poly(A.L[a]));
      Poly lp2 = basis[0].times(basis[0]);
      A.phiw.push_back(lp2.times(A.wpoly));
    } else {
      A.phiw.push_back(Poly(n));
    }
    for (const Expo& e : A.M2) basis.push_back(mono_poly(n, e));
    A.bases25.push_back(basis);
    const int d25 = static_cast<int>(basis.size());
    A.dX.push_back(d25);
    A.off_X.push_back(A.nv);
    A.nv += tri_count(d25);
    if (A.has_lin[a]) {
      A.off_c.push_back(A.nv);
      A.nv += 1;
    } else {
      A.off_c.push_back(-1);
    }
    A.off_Y.push_back(A.nv);
    A.nv += tri_count(static_cast<int>(A.M26.size()));
    A.off_Psi.push_back(A.nv);
    A.nv += tri_count(static_cast<int>(A.Mlin.size()));
  }

  for (size_t a = 0; a < A.active.size(); ++a) {
    // steepness side: gram(X) + bhat hhat^2 + c phiw = ghat^2
    std::map<Expo, std::map<int, double>> rows;
    const auto& basis = A.bases25[a];
    int idx = 0;
    for (size_t u = 0; u < basis.size(); ++u)
      for (size_t v = u; v < basis.size(); ++v, ++idx) {
        Poly pr = basis[u].times(basis[v]);
        const double mult = u == v ? 1.0 : 2.0;
        for (const auto& [e, c] : pr.t) rows[e][A.off_X[a] + idx] += mult * c;
      }
    std::set<Expo> alphas;
    for (const auto& [e, unused] : rows) alphas.insert(e);
    for (const auto& [e, c] : A.ghat2[a].t) alphas.insert(e);
    for (const auto& [e, c] : A.hhat2[a].t) alphas.insert(e);
    for (const auto& [e, c] : A.phiw[a].t) alphas.insert(e);
    for (const Expo& al : alphas) {
      std::map<int, double> row = rows.count(al) ? rows[al]
                                                 : std::map<int, double>{};
      const double hc = A.hhat2[a].coeff(al);
      if (hc != 0.0) row[0] += hc;
      if (A.has_lin[a]) {
        const double pc = A.phiw[a].coeff(al);
        if (pc != 0.0) row[A.off_c[a]] += pc;
      }
      A.eq_rows.push_back(std::move(row));
      A.eq_rhs.push_back(A.ghat2[a].coeff(al));
    }
    // boundedness side: gram(Y) + bhat ghat^2 + psi w = 1
    rows.clear();
    idx = 0;
    for (size_t u = 0; u < A.basis26.size(); ++u)
      for (size_t v = u; v < A.basis26.size(); ++v, ++idx) {
        Poly pr = A.basis26[u].times(A.basis26[v]);
        const double mult = u == v ? 1.0 : 2.0;
        for (const auto& [e, c] : pr.t) rows[e][A.off_Y[a] + idx] += mult * c;
      }
    alphas.clear();
    for (const auto& [e, unused] : rows) alphas.insert(e);
    for (const auto& [e, c] : A.ghat2[a].t) alphas.insert(e);
    for (const Poly& pp : A.psi_pair_w)
      for (const auto& [e, c] : pp.t) alphas.insert(e);
    alphas.insert(Expo(n, 0));
    for (const Expo& al : alphas) {
      std::map<int, double> row = rows.count(al) ? rows[al]
                                                 : std::map<int, double>{};
      const double gc = A.ghat2[a].coeff(al);
      if (gc != 0.0) row[0] += gc;
      for (size_t j = 0; j < A.psi_pair_w.size(); ++j) {
        const double pc = A.psi_pair_w[j].coeff(al);
        if (pc != 0.0) row[A.off_Psi[a] + static_cast<int>(j)] += pc;
      }
      A.eq_rows.push_back(std::move(row));
      A.eq_rhs.push_back(al == Expo(n, 0) ? 1.0 : 0.0);
    }
  }
  return A;
}

// fixed_bhat pins the objective variable, dropping it (and its bound blocks)
// from the program; margined_all turns every block into a margin participant
// for the feasibility-probe fallback.
ConicProblem make_problem(const Assembly& A, std::optional<double> fixed_bhat,
                          bool margined_all) {
  ConicProblem prob;
  const bool fix = fixed_bhat.has_value();
  auto vmap = [&](int j) { return fix ? j - 1 : j; };
  prob.num_vars = fix ? A.nv - 1 : A.nv;
  auto sym_block = [&](int off, int d0) {
    LinearMatrixExpression e;
    e.constant = Mat::Zero(d0, d0);
    e.margined = margined_all;
    int idx = 0;
    for (int u = 0; u < d0; ++u)
      for (int v = u; v < d0; ++v, ++idx)
        e.terms.push_back({vmap(off + idx), tri_basis(u, v, d0)});
    return e;
  };
  if (!fix) {
    LinearMatrixExpression bb;
    bb.constant = Mat::Zero(1, 1);
    bb.terms.push_back({0, Mat::Identity(1, 1)});
    bb.margined = margined_all;
    prob.lmis.push_back(bb);
  }
  for (size_t a = 0; a < A.active.size(); ++a) {
    prob.lmis.push_back(sym_block(A.off_X[a], A.dX[a]));
    if (A.off_c[a] >= 0) {
      LinearMatrixExpression cb;
      cb.constant = Mat::Zero(1, 1);
      cb.terms.push_back({vmap(A.off_c[a]), Mat::Identity(1, 1)});
      cb.margined = margined_all;
      prob.lmis.push_back(cb);
    }
    prob.lmis.push_back(
        sym_block(A.off_Y[a], static_cast<int>(A.M26.size())));
    prob.lmis.push_back(
        sym_block(A.off_Psi[a], static_cast<int>(A.Mlin.size())));
  }
  if (!fix) {
    LinearMatrixExpression cap;
    cap.constant = Mat::Constant(1, 1, kBhatCap);
    cap.terms.push_back({0, -Mat::Identity(1, 1)});
    cap.margined = margined_all;
    prob.lmis.push_back(cap);
  }
  for (size_t k = 0; k < A.eq_rows.size(); ++k) {
    LinearConstraint lc;
    lc.equality = true;
    lc.rhs = A.eq_rhs[k];
    for (const auto& [j, c] : A.eq_rows[k]) {
      if (fix && j == 0)
        lc.rhs -= c * *fixed_bhat;
      else
        lc.coeffs.push_back({vmap(j), c});
    }
    prob.linear.push_back(std::move(lc));
  }
  if (!fix) {
    prob.objective = Vec::Zero(A.nv);
    prob.objective(0) = 1.0;
  }
  prob.margin_floor = 0.0;
  return prob;
}

}  // namespace

SosResult sos_find_beta(const SwitchingLaw& law, double r,
                        const RateOptions& options) {
  if (!(r > 0.0)) throw std::invalid_argument("level r must be positive");
  Assembly A = assemble(law, r);
  SosResult out;
  if (A.active.empty()) return out;
  if (A.s_g == 0.0) {
    // every g_i vanishes identically; any beta is a witness, report the cap
    out.beta = std::sqrt(kBhatCap);
    out.bhat = kBhatCap;
    out.coeff_scale = 1.0;
    out.feasible = true;
    return out;
  }
  out.coeff_scale = A.s_g;

  SolveOptions so = options.solve;
  so.tol = std::min(so.tol, 1e-12);
  so.psd_shift = options.delta_shift;
  ConicSolution sol = solve(make_problem(A, std::nullopt, false), so);
  Vec y;
  bool ok = sol.status == SolveStatus::optimal;
  if (ok) {
    y = sol.values;
  } else if (options.bisection_fallback) {
    SolveOptions sf = so;
    sf.margin_threshold = 0.0;
    auto feasible_at = [&](double bh, Vec* yout) {
      ConicSolution fs = solve(make_problem(A, bh, true), sf);
      if (fs.status != SolveStatus::optimal) return false;
      if (yout) {
        yout->resize(A.nv);
        (*yout)(0) = bh;
        yout->tail(A.nv - 1) = fs.values;
      }
      return true;
    };
    double lo = -1.0, hi = kBhatCap;
    for (double probe = kBhatCap; probe >= 1e-14; probe /= 10.0) {
      if (feasible_at(probe, nullptr)) {
        lo = probe;
        break;
      }
      hi = probe;
    }
    if (lo > 0.0) {
      Vec ybest;
      feasible_at(lo, &ybest);
      for (int it = 0; it < 30 && hi - lo > 1e-3 * lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        Vec ytry;
        if (feasible_at(mid, &ytry)) {
          lo = mid;
          ybest = ytry;
        } else {
          hi = mid;
        }
      }
      if (ybest.size() > 0) {
        y = ybest;
        ok = true;
      }
    }
  }
  if (!ok) return out;

  out.bhat = std::max(0.0, y(0));
  out.beta = std::sqrt(out.bhat) / A.s_g;
  out.feasible = out.bhat > 0.0;

  const std::vector<Expo> std25 = monomials(A.n, {1, 2});
  std::map<Expo, int> idx25, idx26;
  for (size_t k = 0; k < std25.size(); ++k) idx25[std25[k]] = k;
  for (size_t k = 0; k < A.M26.size(); ++k) idx26[A.M26[k]] = k;
  std::vector<std::string> lab25, lab26, lablin, labz;
  for (const Expo& e : std25) lab25.push_back(mono_label(e));
  for (const Expo& e : A.M26) lab26.push_back(mono_label(e));
  for (const Expo& e : A.Mlin) lablin.push_back(mono_label(e));
  for (int k = 0; k < A.n; ++k) labz.push_back("z" + std::to_string(k + 1));

  auto recon_vs = [](const Poly& got, const Poly& want) {
    double worst = 0.0;
    std::set<Expo> alphas;
    for (const auto& [e, c] : got.t) alphas.insert(e);
    for (const auto& [e, c] : want.t) alphas.insert(e);
    for (const Expo& e : alphas)
      worst = std::max(worst, std::abs(got.coeff(e) - want.coeff(e)));
    return worst;
  };
  auto gram_poly = [&](const std::vector<Poly>& basis, const Mat& X) {
    Poly g(A.n);
    for (int u = 0; u < X.rows(); ++u)
      for (int v = u; v < X.cols(); ++v) {
        const double mult = u == v ? 1.0 : 2.0;
        g = g.plus(basis[u].times(basis[v]).scaled(mult * X(u, v)));
      }
    return g;
  };

  double margin = std::min(y(0), kBhatCap - y(0));
  for (size_t a = 0; a < A.active.size(); ++a) {
    const Mat X = unpack_tri(y, A.off_X[a], A.dX[a]);
    const double ci = A.off_c[a] >= 0 ? y(A.off_c[a]) : 0.0;
    const Mat Ygram = unpack_tri(y, A.off_Y[a],
                                 static_cast<int>(A.M26.size()));
    const Mat Psi = unpack_tri(y, A.off_Psi[a],
                               static_cast<int>(A.Mlin.size()));
    margin = std::min({margin, min_eig(X), min_eig(Ygram), min_eig(Psi)});
    if (A.off_c[a] >= 0) margin = std::min(margin, ci);

    const int dstd = static_cast<int>(std25.size());
    Mat R = Mat::Zero(dstd, A.dX[a]);
    int col = 0;
    if (A.has_lin[a]) {
      R.block(0, 0, A.n, 1) = A.L[a];
      col = 1;
    }
    for (size_t j = 0; j < A.M2.size(); ++j)
      R(A.n + static_cast<int>(j), col + static_cast<int>(j)) = 1.0;
    const Mat Xstd = R * X * R.transpose();

    Poly target25 = A.ghat2[a].plus(A.hhat2[a].scaled(-out.bhat));
    if (A.has_lin[a]) target25 = target25.plus(A.phiw[a].scaled(-ci));
    QuarticGram gl;
    gl.basis = lab25;
    gl.gram = Xstd;
    gl.min_eig = min_eig(Xstd);
    gl.recon_residual = recon_vs(gram_poly(A.bases25[a], X), target25);
    out.grams_lower.push_back(std::move(gl));

    Poly psi_poly(A.n);
    {
      int j = 0;
      for (int u = 0; u < static_cast<int>(A.Mlin.size()); ++u)
        for (int v = u; v < static_cast<int>(A.Mlin.size()); ++v, ++j)
          psi_poly = psi_poly.plus(A.psi_pair_w[j].scaled(Psi(u, v)));
    }
    const Poly one = mono_poly(A.n, Expo(A.n, 0));
    const Poly target26 =
        one.plus(A.ghat2[a].scaled(-out.bhat)).plus(psi_poly.scaled(-1.0));
    QuarticGram gu;
    gu.basis = lab26;
    gu.gram = Ygram;
    gu.min_eig = min_eig(Ygram);
    gu.recon_residual = recon_vs(gram_poly(A.basis26, Ygram), target26);
    out.grams_upper.push_back(std::move(gu));

    QuarticGram mp;
    mp.basis = labz;
    mp.gram = ci * A.L[a] * A.L[a].transpose();
    mp.min_eig = min_eig(mp.gram);
    Poly phi_target(A.n);
    if (A.has_lin[a]) {
      Poly lp = lin_poly(A.L[a]);
      phi_target = lp.times(lp).scaled(ci);
    }
    mp.recon_residual = recon_vs(
        gram_poly({lin_poly(A.L[a])}, Mat::Constant(1, 1, ci)), phi_target);
    out.multipliers_lower.push_back(std::move(mp));

    QuarticGram mq;
    mq.basis = lablin;
    mq.gram = Psi;
    mq.min_eig = min_eig(Psi);
    mq.recon_residual = 0.0;
    out.multipliers_upper.push_back(std::move(mq));

    Vec nu = Vec::Zero(dstd);
    if (A.has_lin[a]) {
      Poly lp = lin_poly(A.L[a]);
      for (const auto& [e, c] : lp.times(lp).t) nu(idx25.at(e)) = c;
    }
    out.patch_lower.push_back(nu);
    Vec kappa = Vec::Zero(static_cast<int>(A.M26.size()));
    for (const auto& [e, c] : A.ghat[a].t) kappa(idx26.at(e)) = c;
    out.patch_upper.push_back(kappa);
  }
  out.solver_margin = margin;

  if (out.feasible) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const Mat Pinv =
        law.cert.P.llt().solve(Mat::Identity(A.n, A.n));
    const Eigen::LLT<Mat> lltp(0.5 * (Pinv + Pinv.transpose()));
    const Mat Lp = lltp.matrixL();
    const int p = law.cert.decomp.p;
    int viol = 0;
    for (int s = 0; s < 1000; ++s) {
      Vec u(A.n);
      for (int k = 0; k < A.n; ++k) u(k) = nd(rng);
      const double un = u.norm();
      if (un < 1e-300) continue;
      u /= un;
      const double rad = std::pow(ud(rng), 1.0 / A.n);
      const Vec z = std::sqrt(r) * (Lp * u) * rad;
      const Vec xi = law.cert.decomp.V_bar * z.head(p) +
                     law.cert.decomp.V_perp * z.tail(A.n - p);
      for (int i : A.active) {
        const double gv = g_value(law, i, xi);
        const double hv = h_value(law, i, xi);
        if (std::abs(gv) < out.beta * hv - 1e-6) ++viol;
        if (std::abs(gv) > 1.0 / out.beta + 1e-6) ++viol;
      }
    }
    out.soundness_violations = viol;
  }
  return out;
}

void lower_beta(SosResult& sos, double new_beta) {
  if (!(new_beta >= 0.0) || new_beta >= sos.beta || !sos.feasible) return;
  const double new_bhat =
      new_beta * new_beta * sos.coeff_scale * sos.coeff_scale;
  const double delta = sos.bhat - new_bhat;
  for (size_t a = 0; a < sos.grams_lower.size(); ++a) {
    if (a < sos.patch_lower.size() && sos.patch_lower[a].size() > 0)
      sos.grams_lower[a].gram += 0.25 * delta * sos.patch_lower[a] *
                                 sos.patch_lower[a].transpose();
    sos.grams_lower[a].min_eig = min_eig(sos.grams_lower[a].gram);
  }
  for (size_t a = 0; a < sos.grams_upper.size(); ++a) {
    if (a < sos.patch_upper.size() && sos.patch_upper[a].size() > 0)
      sos.grams_upper[a].gram +=
          delta * sos.patch_upper[a] * sos.patch_upper[a].transpose();
    sos.grams_upper[a].min_eig = min_eig(sos.grams_upper[a].gram);
  }
  sos.bhat = new_bhat;
  sos.beta = new_beta;
}

}  // namespace sa
