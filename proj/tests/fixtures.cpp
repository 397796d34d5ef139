#include "fixtures.hpp"

#include <cmath>

#include "switchaff/equilibria.hpp"
#include "switchaff/sysmodel.hpp"

namespace fx {

NullspaceDecomposition axis_decomposition(const Mat& A_lambda, int null_col) {
  const int n = static_cast<int>(A_lambda.rows());
  Mat V_perp = Mat::Zero(n, 1);
  V_perp(null_col, 0) = 1.0;
  Mat V_bar = Mat::Zero(n, n - 1);
  int c = 0;
  for (int j = 0; j < n; ++j)
    if (j != null_col) V_bar(j, c++) = 1.0;
  return decomposition_from_bases(A_lambda, V_bar, V_perp);
}

SwitchingLaw example1_published() {
  Demo d = demo("example1");
  Mat Al = convex_combination(d.sys, d.lambda).first;
  auto dec = axis_decomposition(Al, 0);
  return assemble_law(d.sys, d.lambda, Vec::Zero(2), dec,
                      Mat::Constant(1, 1, 1.5), Mat::Identity(1, 1));
}

SwitchingLaw example2_published() {
  Demo d = demo("example2");
  Mat Al = convex_combination(d.sys, d.lambda).first;
  auto dec = axis_decomposition(Al, 2);
  Mat P_bar(2, 2);
  P_bar << 1.1989, -0.0046, -0.0046, 1.2087;
  P_bar *= 1e-3;
  return assemble_law(d.sys, d.lambda, Vec::Zero(3), dec, P_bar,
                      Mat::Constant(1, 1, 1.1542e-3));
}

Mat example2_published_P() { return example2_published().cert.P; }

SwitchingLaw motor_position_published() {
  Demo d = demo("motor-position");
  Mat Al = convex_combination(d.sys, d.lambda).first;
  auto dec = axis_decomposition(Al, 3);
  auto eq = solve_equilibrium(d.sys, d.lambda, Vec::Zero(1));
  Mat P_bar(3, 3);
  P_bar << 1.4953, 1.1691, 0, 1.1691, 3.7599, 0, 0, 0, 1.2560;
  P_bar *= 1e-3;
  return assemble_law(d.sys, d.lambda, eq.x_e, dec, P_bar,
                      Mat::Constant(1, 1, 2.0007));
}

SwitchingLaw motor_velocity_published() {
  Demo d = demo("motor-velocity");
  Mat Al = convex_combination(d.sys, d.lambda).first;
  auto dec = axis_decomposition(Al, 3);
  auto eq = solve_equilibrium(d.sys, d.lambda, Vec::Zero(1));
  Mat P_bar(3, 3);
  P_bar << 0.0142, 0.0057, 0.0068, 0.0057, 0.0108, 0.0027, 0.0068, 0.0027,
      0.0048;
  return assemble_law(d.sys, d.lambda, eq.x_e, dec, P_bar,
                      Mat::Constant(1, 1, 18.7476));
}

Mat random_singular(std::mt19937& rng, int n, bool defective) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> extra_zeros(0, n >= 4 ? 1 : 0);

  // Eigenvalue diagonal: at least one zero, optionally one more semisimple
  // zero, the rest bounded away from zero.
  Mat J = Mat::Zero(n, n);
  int zeros = 1 + (defective ? 1 : extra_zeros(rng));
  for (int i = zeros; i < n; ++i) {
    double v = unit(rng);
    J(i, i) = (v < 0 ? -1.0 : 1.0) * (0.5 + std::abs(v));
  }
  if (defective) J(0, 1) = 1.0;

  // Similarity transform, redrawn until comfortably invertible.
  Mat S(n, n);
  for (;;) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) S(i, j) = unit(rng);
    Eigen::JacobiSVD<Mat> svd(S);
    if (svd.singularValues()(n - 1) > 0.05 * svd.singularValues()(0)) break;
  }
  return S * J * S.partialPivLu().solve(Mat::Identity(n, n));
}

int svd_rank(const Mat& A, double scale) {
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double cut =
      double(std::max(A.rows(), A.cols())) * 1e-9 * std::max(s(0), scale);
  int r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

}  // namespace fx
