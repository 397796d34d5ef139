#include "switchaff/sysmodel.hpp"

#include <algorithm>
#include <cmath>

namespace sa {

SwitchedAffineSystem SwitchedAffineSystem::make(std::vector<Mat> A,
                                                std::vector<Vec> b,
                                                std::vector<std::string> labels) {
  SwitchedAffineSystem sys;
  sys.N = static_cast<int>(A.size());
  sys.n = sys.N > 0 ? static_cast<int>(A[0].rows()) : 0;
  sys.A = std::move(A);
  sys.b = std::move(b);
  sys.labels = std::move(labels);
  return sys;
}

SimplexVector::SimplexVector(Vec weights) : w_(std::move(weights)) {
  if (w_.size() == 0) throw std::invalid_argument("empty weight vector");
  for (int i = 0; i < w_.size(); ++i) {
    if (!std::isfinite(w_(i)) || w_(i) < -kSumTol)
      throw std::invalid_argument("weights must be nonnegative");
    if (w_(i) < 0.0) w_(i) = 0.0;
  }
  raw_sum_ = w_.sum();
  if (std::abs(raw_sum_ - 1.0) > kSumTol)
    throw std::invalid_argument("weights must sum to one");
  w_ /= raw_sum_;
}

double DisturbanceProfile::evaluate(double t) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  return values[static_cast<size_t>(it - breakpoints.begin())];
}

void DisturbanceProfile::validate() const {
  if (values.size() != breakpoints.size() + 1)
    throw std::invalid_argument("need one value per interval");
  for (size_t k = 1; k < breakpoints.size(); ++k)
    if (!(breakpoints[k] > breakpoints[k - 1]))
      throw std::invalid_argument("breakpoints must be strictly increasing");
  if (!E.allFinite()) throw std::invalid_argument("non-finite channel");
}

ValidationReport validate_system(const SwitchedAffineSystem& sys) {
  ValidationReport rep;
  auto flag = [&rep](const std::string& msg) {
    rep.valid = false;
    rep.issues.push_back({msg});
  };
  if (sys.N < 2) flag("need at least two modes");
  if (static_cast<int>(sys.A.size()) != sys.N ||
      static_cast<int>(sys.b.size()) != sys.N) {
    flag("mode count does not match matrix lists");
    return rep;
  }
  for (int i = 0; i < sys.N; ++i) {
    const std::string tag = " in mode " + std::to_string(i + 1);
    if (sys.A[i].rows() != sys.n || sys.A[i].cols() != sys.n)
      flag("dimension mismatch" + tag);
    if (sys.b[i].size() != sys.n) flag("affine term size mismatch" + tag);
    if (!sys.A[i].allFinite() || !sys.b[i].allFinite())
      flag("non-finite entry" + tag);
  }
  if (!sys.labels.empty() && static_cast<int>(sys.labels.size()) != sys.N)
    flag("label count does not match mode count");
  return rep;
}

std::pair<Mat, Vec> convex_combination(const SwitchedAffineSystem& sys,
                                       const SimplexVector& lambda) {
  if (lambda.size() != sys.N)
    throw std::invalid_argument("weight length does not match mode count");
  Mat A = Mat::Zero(sys.n, sys.n);
  Vec b = Vec::Zero(sys.n);
  for (int i = 0; i < sys.N; ++i) {
    A += lambda[i] * sys.A[i];
    b += lambda[i] * sys.b[i];
  }
  return {A, b};
}

SwitchedAffineSystem augment_with_integrator(const SwitchedAffineSystem& sys,
                                             const Mat& C, const Vec& y_ref) {
  if (C.cols() != sys.n || y_ref.size() != C.rows())
    throw std::invalid_argument("integrator output map dimension mismatch");
  const int q = static_cast<int>(C.rows());
  std::vector<Mat> A(sys.N);
  std::vector<Vec> b(sys.N);
  for (int i = 0; i < sys.N; ++i) {
    A[i] = Mat::Zero(sys.n + q, sys.n + q);
    A[i].topLeftCorner(sys.n, sys.n) = sys.A[i];
    A[i].block(sys.n, 0, q, sys.n) = C;
    b[i] = Vec::Zero(sys.n + q);
    b[i].head(sys.n) = sys.b[i];
    b[i].tail(q) = -y_ref;
  }
  return SwitchedAffineSystem::make(std::move(A), std::move(b), sys.labels);
}

SwitchedAffineSystem build_dc_motor(const MotorParams& params, MotorMode mode,
                                    double omega_e) {
  if (!params.all_positive())
    throw std::invalid_argument("motor parameters must be positive");
  const int u1[8] = {0, 1, 0, 1, 0, 1, 0, 1};
  const int u2[8] = {0, 0, 1, 1, 0, 0, 1, 1};
  const int u3[8] = {0, 0, 0, 0, 1, 1, 1, 1};
  std::vector<Mat> A(8);
  std::vector<Vec> b(8);
  std::vector<std::string> labels(8);
  for (int i = 0; i < 8; ++i) {
    const double h = 2 * u2[i] - 1; // h-bridge polarity
    Mat Ai = Mat::Zero(4, 4);
    Ai(0, 0) = -params.R_L / params.L;
    Ai(0, 1) = -u1[i] / params.L;
    Ai(1, 0) = u1[i] / params.C;
    Ai(1, 1) = -u3[i] / (params.R_m * params.C);
    Ai(1, 2) = h * u3[i] * params.K_e / (params.R_m * params.C);
    Ai(2, 1) = h * u3[i] * params.K_e / (params.J * params.R_m);
    Ai(2, 2) = -(params.K_e * params.K_e + params.c * params.R_m) /
               (params.J * params.R_m);
    Ai(3, 2) = 1.0;
    A[i] = Ai;
    b[i] = Vec::Zero(4);
    b[i](0) = params.nu_dc / params.L;
    if (mode == MotorMode::velocity) b[i](3) = -omega_e;
    labels[i] = std::string("u=") + std::to_string(u1[i]) +
                std::to_string(u2[i]) + std::to_string(u3[i]);
  }
  return SwitchedAffineSystem::make(std::move(A), std::move(b),
                                    std::move(labels));
}

}  // namespace sa
