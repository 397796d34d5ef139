#include <random>

#include "doctest.h"
#include "switchaff/conic.hpp"

using namespace sa;

namespace {

Mat sym(std::mt19937& rng, int n, double scale) {
  std::uniform_real_distribution<double> unit(-scale, scale);
  Mat R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = unit(rng);
  return R + R.transpose();
}

}  // namespace

TEST_CASE("solve_lp maximizes the interior margin of a symmetric hull") {
  // Variables (mu0, mu1, t): maximize t with mu0 = mu1, mu0 + mu1 = 1,
  // mu_i >= t. Optimum is the midpoint with t = 1/2.
  LpProblem lp;
  lp.num_vars = 3;
  lp.c = Vec::Zero(3);
  lp.c(2) = 1.0;
  lp.A_eq = Mat::Zero(2, 3);
  lp.A_eq << -1, 1, 0, 1, 1, 0;
  lp.b_eq = Vec::Zero(2);
  lp.b_eq(1) = 1.0;
  lp.A_ub = Mat::Zero(2, 3);
  lp.A_ub << -1, 0, 1, 0, -1, 1;
  lp.b_ub = Vec::Zero(2);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective_value == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sol.values(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sol.values(1) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("solve_lp flags inconsistent equalities") {
  LpProblem lp;
  lp.num_vars = 1;
  lp.c = Vec::Ones(1);
  lp.A_eq = Mat::Ones(2, 1);
  lp.b_eq = Vec(2);
  lp.b_eq << 1.0, 2.0;
  auto sol = solve_lp(lp);
  CHECK(sol.status == SolveStatus::infeasible);
}

TEST_CASE("solve_lp respects an upper bound") {
  LpProblem lp;
  lp.num_vars = 1;
  lp.c = Vec::Ones(1);
  lp.A_ub = Mat::Ones(1, 1);
  lp.b_ub = Vec::Ones(1);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.values(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("solve_lp handles negative optima through the free-variable split") {
  // maximize -x subject to -x <= 3, so x* = -3.
  LpProblem lp;
  lp.num_vars = 1;
  lp.c = -Vec::Ones(1);
  lp.A_ub = -Mat::Ones(1, 1);
  lp.b_ub = 3.0 * Vec::Ones(1);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.values(0) == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("solve_lp optimum is invariant under row rescaling") {
  LpProblem lp;
  lp.num_vars = 3;
  lp.c = Vec::Zero(3);
  lp.c(2) = 1.0;
  lp.A_eq = Mat::Zero(2, 3);
  lp.A_eq << -100, 100, 0, 100, 100, 0;
  lp.b_eq = Vec::Zero(2);
  lp.b_eq(1) = 100.0;
  lp.A_ub = Mat::Zero(2, 3);
  lp.A_ub << -1, 0, 1, 0, -1, 1;
  lp.b_ub = Vec::Zero(2);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective_value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("feasibility mode maximizes the smallest eigenvalue slack") {
  // Block [[y, 1], [1, y]] with y <= 2: eigenvalues y -+ 1, so the best
  // shared margin is 1 at y = 2.
  ConicProblem prob;
  prob.num_vars = 1;
  LinearMatrixExpression lmi;
  lmi.constant = Mat::Zero(2, 2);
  lmi.constant(0, 1) = lmi.constant(1, 0) = 1.0;
  lmi.terms = {{0, Mat::Identity(2, 2)}};
  prob.lmis = {lmi};
  prob.linear = {{{{0, 1.0}}, 2.0, false}};
  auto sol = solve(prob);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.values(0) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(sol.achieved_margin == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("feasibility mode reports an infeasible block") {
  // max margin of diag(y - 1, -1 - y) is -1 at y = 0
  ConicProblem prob;
  prob.num_vars = 1;
  LinearMatrixExpression lmi;
  lmi.constant = -Mat::Identity(2, 2);
  Mat dir = Mat::Zero(2, 2);
  dir(0, 0) = 1.0;
  dir(1, 1) = -1.0;
  lmi.terms = {{0, dir}};
  prob.lmis = {lmi};
  auto sol = solve(prob);
  CHECK(sol.status == SolveStatus::infeasible);
  CHECK(sol.achieved_margin == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("tiny positive margin lands below the threshold") {
  ConicProblem prob;
  prob.num_vars = 1;
  LinearMatrixExpression lmi;
  lmi.constant = 1e-8 * Mat::Identity(2, 2);
  Mat dir = Mat::Zero(2, 2);
  dir(0, 0) = 1.0;
  dir(1, 1) = -1.0;
  lmi.terms = {{0, dir}};
  prob.lmis = {lmi};
  auto sol = solve(prob);
  CHECK(sol.status == SolveStatus::margin_below_threshold);
  CHECK(sol.achieved_margin == doctest::Approx(1e-8).epsilon(0.2));
}

TEST_CASE("tightening a constraint shrinks the margin") {
  ConicProblem prob;
  prob.num_vars = 1;
  LinearMatrixExpression lmi;
  lmi.constant = Mat::Zero(2, 2);
  lmi.constant(0, 1) = lmi.constant(1, 0) = 1.0;
  lmi.terms = {{0, Mat::Identity(2, 2)}};
  prob.lmis = {lmi};
  prob.linear = {{{{0, 1.0}}, 1.5, false}};
  auto sol = solve(prob);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.achieved_margin == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("unmargined blocks cap the variables without joining the margin") {
  // y itself is margined, 1 - y only caps. The margin climbs to 1 instead of
  // stalling at the 1/2 a shared margin would allow.
  ConicProblem prob;
  prob.num_vars = 1;
  LinearMatrixExpression grow;
  grow.constant = Mat::Zero(1, 1);
  grow.terms = {{0, Mat::Identity(1, 1)}};
  LinearMatrixExpression cap;
  cap.constant = Mat::Ones(1, 1);
  cap.terms = {{0, -Mat::Identity(1, 1)}};
  cap.margined = false;
  prob.lmis = {grow, cap};
  auto sol = solve(prob);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.achieved_margin == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.values(0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("negative-semidefinite sense flips the block") {
  // [[y]] <= 0 with y >= -2 gives margin 2 at y = -2.
  ConicProblem prob;
  prob.num_vars = 1;
  LinearMatrixExpression lmi;
  lmi.constant = Mat::Zero(1, 1);
  lmi.terms = {{0, Mat::Identity(1, 1)}};
  lmi.sense = LinearMatrixExpression::Sense::NegSemidef;
  prob.lmis = {lmi};
  prob.linear = {{{{0, -1.0}}, 2.0, false}};
  auto sol = solve(prob);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.achieved_margin == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(sol.values(0) == doctest::Approx(-2.0).epsilon(1e-5));
}

TEST_CASE("random feasible problems reach the planted margin") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3;
    Vec planted(d);
    for (int j = 0; j < d; ++j) planted(j) = unit(rng);

    ConicProblem prob;
    prob.num_vars = d;
    for (int k = 0; k < 2; ++k) {
      LinearMatrixExpression lmi;
      lmi.constant = Mat::Identity(3, 3);
      for (int j = 0; j < d; ++j) {
        Mat T = sym(rng, 3, 0.5);
        lmi.terms.push_back({j, T});
        lmi.constant -= planted(j) * T;
      }
      prob.lmis.push_back(lmi);
    }
    for (int j = 0; j < d; ++j) {
      prob.linear.push_back({{{j, 1.0}}, 2.0, false});
      prob.linear.push_back({{{j, -1.0}}, 2.0, false});
    }

    auto sol = solve(prob);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.achieved_margin >= 1.0 - 1e-6);
    for (const auto& lmi : prob.lmis) {
      Eigen::SelfAdjointEigenSolver<Mat> es(lmi.evaluate(sol.values));
      CHECK(es.eigenvalues().minCoeff() >= sol.achieved_margin - 1e-8);
    }
  }
}

TEST_CASE("min_condition_number finds the isotropic certificate") {
  ConicProblem base;
  base.num_vars = 3;
  LinearMatrixExpression P_expr;
  P_expr.constant = Mat::Zero(2, 2);
  Mat E00 = Mat::Zero(2, 2), E01 = Mat::Zero(2, 2), E11 = Mat::Zero(2, 2);
  E00(0, 0) = 1.0;
  E01(0, 1) = E01(1, 0) = 1.0;
  E11(1, 1) = 1.0;
  P_expr.terms = {{0, E00}, {1, E01}, {2, E11}};
  auto sol = min_condition_number(base, P_expr, 0.5);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.values(3) == doctest::Approx(1.0).epsilon(1e-3));
  Mat P = P_expr.evaluate(sol.values.head(3));
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-6);
  CHECK(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() <=
        1.0 + 1e-3);
}

TEST_CASE("min_condition_number honors competing constraints") {
  // Forcing P_00 >= 1 against floor 0.5 leaves cond(P) = 2 as the best case.
  ConicProblem base;
  base.num_vars = 3;
  base.linear = {{{{0, -1.0}}, -1.0, false}};
  LinearMatrixExpression P_expr;
  P_expr.constant = Mat::Zero(2, 2);
  Mat E00 = Mat::Zero(2, 2), E01 = Mat::Zero(2, 2), E11 = Mat::Zero(2, 2);
  E00(0, 0) = 1.0;
  E01(0, 1) = E01(1, 0) = 1.0;
  E11(1, 1) = 1.0;
  P_expr.terms = {{0, E00}, {1, E01}, {2, E11}};
  auto sol = min_condition_number(base, P_expr, 0.5);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.values(3) == doctest::Approx(2.0).epsilon(1e-3));
  Mat P = P_expr.evaluate(sol.values.head(3));
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-6);
  CHECK(es.eigenvalues().maxCoeff() <= 0.5 * sol.values(3) + 1e-6);
}

TEST_CASE("linear matrix expressions evaluate affinely") {
  LinearMatrixExpression lmi;
  lmi.constant = 2.0 * Mat::Identity(2, 2);
  Mat T = Mat::Zero(2, 2);
  T(0, 1) = T(1, 0) = 1.0;
  lmi.terms = {{1, T}};
  Vec y(2);
  y << 5.0, 0.25;
  Mat got = lmi.evaluate(y);
  CHECK(got(0, 0) == 2.0);
  CHECK(got(0, 1) == 0.25);
  CHECK(got(1, 0) == 0.25);
}

TEST_CASE("solver statuses print by name") {
  CHECK(std::string(to_string(SolveStatus::optimal)) == "optimal");
  CHECK(std::string(to_string(SolveStatus::infeasible)) == "infeasible");
}
