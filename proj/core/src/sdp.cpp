#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <limits>

#include "switchaff/conic.hpp"

namespace sa {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::margin_below_threshold: return "margin_below_threshold";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

Mat LinearMatrixExpression::evaluate(const Vec& y) const {
  Mat F = constant;
  for (const auto& [k, G] : terms) F += y(k) * G;
  return F;
}

ConicSolution solve(const ConicProblem& problem, const SolveOptions& options) {
  BarrierBackend backend;
  return backend.solve(problem, options);
}

namespace {

constexpr double kNewtonTol = 1e-11; // half squared Newton decrement

struct YBlock {
  Mat C;
  std::vector<std::pair<int, Mat>> terms; // PSD-normalized
  bool margined = true;
  bool cap = false; // synthetic bound on the margin variable itself
};

double sym_mineig(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Mat evaluate_block(const YBlock& b, const Vec& y) {
  Mat F = b.C;
  for (const auto& [k, G] : b.terms) F += y(k) * G;
  return F;
}

struct Eliminated {
  Vec y_p;
  Mat Z;
  bool consistent = true;
};

Eliminated eliminate(const Mat& E, const Vec& d, int ny) {
  if (E.rows() == 0)
    return {Vec::Zero(ny), Mat::Identity(ny, ny), true};
  // JacobiSVD, not BDCSVD: the bidiagonal path loses 8 digits on the wide
  // rank-deficient systems the Gram equalities produce.
  Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeThinU | Eigen::ComputeFullV);
  Eliminated el;
  el.y_p = svd.solve(d);
  el.consistent = (E * el.y_p - d).lpNorm<Eigen::Infinity>() <=
                  1e-7 * (1.0 + d.lpNorm<Eigen::Infinity>());
  const Vec& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > 1e-11 * std::max(s_max, 1e-30)) ++rank;
  el.Z = svd.matrixV().rightCols(ny - rank);
  return el;
}

// Blocks re-expressed over the eliminated coordinates y = y_p + Z w.
struct WProblem {
  int nw = 0;
  int total_dim = 0;
  std::vector<Mat> C;
  std::vector<std::vector<Mat>> G;
  std::vector<std::vector<char>> nz;
};

WProblem project_blocks(const std::vector<YBlock>& blocks, const Vec& y_p,
                        const Mat& Z) {
  WProblem P;
  P.nw = static_cast<int>(Z.cols());
  for (const YBlock& b : blocks) {
    const int dim = static_cast<int>(b.C.rows());
    P.total_dim += dim;
    Mat C = b.C;
    std::vector<Mat> G(P.nw, Mat::Zero(dim, dim));
    for (const auto& [k, Gk] : b.terms) {
      C += y_p(k) * Gk;
      for (int j = 0; j < P.nw; ++j) {
        const double z = Z(k, j);
        if (z != 0.0) G[j] += z * Gk;
      }
    }
    std::vector<char> nz(P.nw, 0);
    for (int j = 0; j < P.nw; ++j)
      nz[j] = G[j].cwiseAbs().maxCoeff() > 0.0 ? 1 : 0;
    P.C.push_back(std::move(C));
    P.G.push_back(std::move(G));
    P.nz.push_back(std::move(nz));
  }
  return P;
}

bool factor_all(const WProblem& P, const Vec& w,
                std::vector<Eigen::LLT<Mat>>& llts, double* logdet) {
  llts.clear();
  double ld = 0.0;
  for (size_t b = 0; b < P.C.size(); ++b) {
    Mat F = P.C[b];
    for (int j = 0; j < P.nw; ++j)
      if (P.nz[b][j]) F += w(j) * P.G[b][j];
    Eigen::LLT<Mat> llt(0.5 * (F + F.transpose()));
    if (llt.info() != Eigen::Success) return false;
    ld += 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
    llts.push_back(std::move(llt));
  }
  if (logdet) *logdet = ld;
  return true;
}

struct BarrierRun {
  Vec w;
  int newton_iters = 0;
  bool hit_cap = false;
  bool started = false; // initial point was strictly feasible
};

// Maximizes c'w over the strictly feasible region traced by the barrier,
// tightening eta until total_dim/eta < gap_tol. stop() is polled between
// centerings for early exits.
BarrierRun run_barrier(const WProblem& P, const Vec& c_w, Vec w,
                       double gap_tol, const SolveOptions& options,
                       const std::function<bool(const Vec&)>& stop) {
  BarrierRun run;
  run.w = std::move(w);
  const int total_cap = 40 * options.max_iter;
  std::vector<Eigen::LLT<Mat>> llts, llts_trial;
  double logdet = 0.0;
  if (!factor_all(P, run.w, llts, &logdet)) return run;
  run.started = true;
  if (P.nw == 0) return run;

  Mat FT(P.nw, 1);
  double eta = 1.0;
  for (int round = 0; round < 80; ++round) {
    for (int it = 0; it < options.max_iter; ++it) {
      if (run.newton_iters >= total_cap) {
        run.hit_cap = true;
        return run;
      }
      Vec grad = eta * c_w;
      Mat H = Mat::Zero(P.nw, P.nw);
      for (size_t b = 0; b < P.C.size(); ++b) {
        const int dim = static_cast<int>(P.C[b].rows());
        const auto L = llts[b].matrixL();
        FT.resize(P.nw, dim * dim);
        FT.setZero();
        for (int j = 0; j < P.nw; ++j) {
          if (!P.nz[b][j]) continue;
          Mat Y = L.solve(P.G[b][j]);
          Mat Ft = L.solve(Mat(Y.transpose()));
          Ft = 0.5 * (Ft + Ft.transpose());
          grad(j) += Ft.trace();
          FT.row(j) = Eigen::Map<const Vec>(Ft.data(), Ft.size());
        }
        H.noalias() += FT * FT.transpose();
      }
      H.diagonal().array() += 1e-13 * (H.trace() / P.nw + 1.0);
      Vec dw = H.ldlt().solve(grad);
      const double dec = grad.dot(dw);
      ++run.newton_iters;
      if (!(dec > 0.0) || dec / 2.0 < kNewtonTol) break;

      const double psi0 = eta * c_w.dot(run.w) + logdet;
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        Vec wt = run.w + t * dw;
        double logdet_t = 0.0;
        if (factor_all(P, wt, llts_trial, &logdet_t)) {
          const double psi_t = eta * c_w.dot(wt) + logdet_t;
          if (psi_t >= psi0 + 0.25 * t * dec) {
            run.w = std::move(wt);
            llts.swap(llts_trial);
            logdet = logdet_t;
            accepted = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!accepted) break; // numerical floor reached
    }
    if (stop && stop(run.w)) break;
    if (P.total_dim / eta < gap_tol) break;
    eta *= 10.0;
  }
  return run;
}

struct MarginRun {
  Vec y;             // base variables only
  double t = 0.0;    // margin variable at exit
  bool ok = false;
  int newton_iters = 0;
  bool hit_cap = false;
};

// Appends a margin variable t, turns every selected block into F - tI >= 0,
// and maximizes t (capped). early_exit > -inf stops once t clears it.
MarginRun solve_margin(const std::vector<YBlock>& blocks, bool margin_all,
                       const Mat& E, const Vec& d, const Vec& y0, int nv,
                       double gap_tol, double early_exit,
                       const SolveOptions& options) {
  const int t_idx = nv;
  std::vector<YBlock> mblocks;
  for (const YBlock& b : blocks) {
    YBlock nb = b;
    if (!b.cap && (margin_all || b.margined))
      nb.terms.push_back({t_idx, -Mat::Identity(b.C.rows(), b.C.rows())});
    mblocks.push_back(std::move(nb));
  }
  YBlock cap;
  cap.C = Mat::Constant(1, 1, options.margin_cap);
  cap.terms.push_back({t_idx, -Mat::Identity(1, 1)});
  cap.margined = false;
  cap.cap = true;
  mblocks.push_back(cap);

  Mat E_ext(E.rows(), nv + 1);
  if (E.rows() > 0) {
    E_ext.leftCols(nv) = E;
    E_ext.col(nv).setZero();
  }
  Eliminated el = eliminate(E_ext, d, nv + 1);
  MarginRun mr;
  if (!el.consistent) return mr;

  double t0 = options.margin_cap - 1.0;
  for (const YBlock& b : mblocks) {
    if (b.cap || b.terms.empty()) continue;
    bool has_margin = false;
    for (const auto& [k, G] : b.terms) has_margin |= (k == t_idx);
    if (has_margin)
      t0 = std::min(t0, sym_mineig(evaluate_block(b, (Vec(nv + 1) << y0, 0.0)
                                                          .finished())) -
                            1.0);
  }
  Vec y0_ext(nv + 1);
  y0_ext << y0, t0;
  Vec w0 = el.Z.transpose() * (y0_ext - el.y_p);

  WProblem P = project_blocks(mblocks, el.y_p, el.Z);
  Vec c_w = el.Z.row(t_idx).transpose();
  auto stop = [&](const Vec& w) {
    const double t = el.y_p(t_idx) + el.Z.row(t_idx).dot(w);
    return t > early_exit;
  };
  BarrierRun run =
      run_barrier(P, c_w, w0, gap_tol, options,
                  std::isfinite(early_exit)
                      ? std::function<bool(const Vec&)>(stop)
                      : std::function<bool(const Vec&)>());
  mr.newton_iters = run.newton_iters;
  mr.hit_cap = run.hit_cap;
  if (!run.started) return mr;
  Vec y_ext = el.y_p + el.Z * run.w;
  mr.y = y_ext.head(nv);
  mr.t = y_ext(t_idx);
  mr.ok = true;
  return mr;
}

}  // namespace

ConicSolution BarrierBackend::solve(const ConicProblem& problem,
                                    const SolveOptions& options) {
  ConicSolution sol;
  const int nv = problem.num_vars;

  std::vector<YBlock> blocks;
  for (const LinearMatrixExpression& e : problem.lmis) {
    YBlock b;
    const double s =
        e.sense == LinearMatrixExpression::Sense::PosSemidef ? 1.0 : -1.0;
    b.C = s * 0.5 * (e.constant + e.constant.transpose());
    b.C += options.psd_shift * Mat::Identity(e.dim(), e.dim());
    for (const auto& [k, G] : e.terms)
      b.terms.push_back({k, s * 0.5 * (G + G.transpose())});
    b.margined = e.margined;
    blocks.push_back(std::move(b));
  }
  int num_eq = 0;
  for (const LinearConstraint& lc : problem.linear) num_eq += lc.equality;
  Mat E = Mat::Zero(num_eq, nv);
  Vec d = Vec::Zero(num_eq);
  int row = 0;
  for (const LinearConstraint& lc : problem.linear) {
    if (lc.equality) {
      for (const auto& [k, a] : lc.coeffs) E(row, k) += a;
      d(row) = lc.rhs;
      ++row;
    } else {
      YBlock b;
      b.C = Mat::Constant(1, 1, lc.rhs);
      for (const auto& [k, a] : lc.coeffs)
        b.terms.push_back({k, Mat::Constant(1, 1, -a)});
      b.margined = false;
      blocks.push_back(std::move(b));
    }
  }

  Eliminated el0 = eliminate(E, d, nv);
  if (!el0.consistent) {
    sol.status = SolveStatus::infeasible;
    return sol;
  }
  Vec y0 = el0.y_p;

  // A strictly feasible start for the unmargined blocks, via a joint margin
  // pass when the least-squares point does not already provide one.
  const bool objective_mode = problem.objective.size() > 0;
  bool need_interior = false;
  for (const YBlock& b : blocks)
    if (!b.margined && sym_mineig(evaluate_block(
                           b, (Vec(nv + 1) << y0, 0.0).finished())) <= 1e-12)
      need_interior = true;

  double interior_t = 0.0;
  if (need_interior || objective_mode) {
    MarginRun mr = solve_margin(blocks, true, E, d, y0, nv, 10.0 * options.tol,
                                objective_mode
                                    ? problem.margin_floor + 1e-4
                                    : 1e-4,
                                options);
    sol.newton_iterations += mr.newton_iters;
    if (!mr.ok) {
      sol.status = SolveStatus::infeasible;
      return sol;
    }
    y0 = mr.y;
    interior_t = mr.t;
    if (!objective_mode && need_interior && interior_t <= 0.0) {
      sol.status = SolveStatus::infeasible;
      sol.values = y0;
      sol.achieved_margin = interior_t;
      return sol;
    }
    if (objective_mode && interior_t <= problem.margin_floor) {
      sol.status = SolveStatus::infeasible;
      sol.values = y0;
      sol.achieved_margin = interior_t;
      return sol;
    }
  }

  Vec y;
  if (!objective_mode) {
    MarginRun mr = solve_margin(blocks, false, E, d, y0, nv, options.tol,
                                std::numeric_limits<double>::infinity(),
                                options);
    sol.newton_iterations += mr.newton_iters;
    if (!mr.ok) {
      sol.status = SolveStatus::infeasible;
      return sol;
    }
    y = mr.y;
    if (mr.hit_cap) {
      sol.status = SolveStatus::iteration_limit;
      sol.values = y;
      return sol;
    }
  } else {
    std::vector<YBlock> floored = blocks;
    if (problem.margin_floor != 0.0)
      for (YBlock& b : floored)
        if (b.margined)
          b.C -= problem.margin_floor * Mat::Identity(b.C.rows(), b.C.rows());
    Eliminated el = eliminate(E, d, nv);
    WProblem P = project_blocks(floored, el.y_p, el.Z);
    Vec w0 = el.Z.transpose() * (y0 - el.y_p);
    Vec c_w = el.Z.transpose() * problem.objective;
    auto runaway = [&](const Vec& w) {
      return std::abs(c_w.dot(w)) > 1e13;
    };
    BarrierRun run = run_barrier(P, c_w, w0, options.tol, options, runaway);
    sol.newton_iterations += run.newton_iters;
    if (!run.started) {
      sol.status = SolveStatus::infeasible;
      return sol;
    }
    y = el.y_p + el.Z * run.w;
    if (std::abs(problem.objective.dot(y)) > 1e12) {
      sol.unbounded = true;
      sol.status = SolveStatus::iteration_limit;
      sol.values = y;
      return sol;
    }
    if (run.hit_cap) {
      sol.status = SolveStatus::iteration_limit;
      sol.values = y;
      return sol;
    }
  }

  sol.values = y;
  if (problem.objective.size() > 0)
    sol.objective_value = problem.objective.dot(y);

  double margin = std::numeric_limits<double>::infinity();
  bool any_margined = false;
  Vec y_ext(nv + 1);
  y_ext << y, 0.0;
  for (const YBlock& b : blocks) {
    if (!b.margined) continue;
    any_margined = true;
    margin = std::min(margin, sym_mineig(evaluate_block(b, y_ext)));
  }
  if (!any_margined) {
    margin = 0.0;
    for (const YBlock& b : blocks)
      margin = std::min(margin, sym_mineig(evaluate_block(b, y_ext)));
  }
  sol.achieved_margin = margin;
  if (!objective_mode)
    sol.objective_value = margin;

  if (options.verify) {
    bool pass = (E * y - d).lpNorm<Eigen::Infinity>() <=
                1e-8 * (1.0 + d.lpNorm<Eigen::Infinity>());
    for (const YBlock& b : blocks) {
      // In feasibility mode the margined blocks' smallest eigenvalue is the
      // reported answer, so only hard constraints get gated here.
      if (!objective_mode && b.margined) continue;
      const double floor_b =
          (objective_mode && b.margined) ? problem.margin_floor : 0.0;
      if (sym_mineig(evaluate_block(b, y_ext)) < floor_b - 1e-8) pass = false;
    }
    if (!pass) {
      sol.status = SolveStatus::iteration_limit;
      return sol;
    }
  }

  if (!objective_mode && margin < options.margin_threshold) {
    sol.status = margin < 0.0 ? SolveStatus::infeasible
                              : SolveStatus::margin_below_threshold;
    return sol;
  }
  sol.status = SolveStatus::optimal;
  return sol;
}

ConicSolution min_condition_number(const ConicProblem& base_constraints,
                                   const LinearMatrixExpression& P_expr,
                                   double floor, const SolveOptions& options) {
  ConicProblem prob = base_constraints;
  prob.num_vars = base_constraints.num_vars + 1;
  const int s_idx = base_constraints.num_vars;
  const int dim = P_expr.dim();
  const double sgn =
      P_expr.sense == LinearMatrixExpression::Sense::PosSemidef ? 1.0 : -1.0;

  LinearMatrixExpression lower;
  lower.constant = sgn * P_expr.constant - floor * Mat::Identity(dim, dim);
  for (const auto& [k, G] : P_expr.terms) lower.terms.push_back({k, sgn * G});
  prob.lmis.push_back(lower);

  LinearMatrixExpression upper;
  upper.constant = -sgn * P_expr.constant;
  for (const auto& [k, G] : P_expr.terms) upper.terms.push_back({k, -sgn * G});
  upper.terms.push_back({s_idx, floor * Mat::Identity(dim, dim)});
  prob.lmis.push_back(upper);

  prob.objective = Vec::Zero(prob.num_vars);
  prob.objective(s_idx) = -1.0;
  return solve(prob, options);
}

}  // namespace sa
