#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sa {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// A plant with N affine modes xdot = A[i] x + b[i].
struct SwitchedAffineSystem {
  int n = 0;
  int N = 0;
  std::vector<Mat> A;
  std::vector<Vec> b;
  std::vector<std::string> labels;

  static SwitchedAffineSystem make(std::vector<Mat> A, std::vector<Vec> b,
                                   std::vector<std::string> labels = {});
};

struct ValidationIssue {
  std::string what;
};

struct ValidationReport {
  bool valid = true;
  std::vector<ValidationIssue> issues;
};

// Nonnegative weights summing to one. Construction renormalizes and keeps
// the raw sum around so callers can inspect drift; downstream math always
// sees an exact simplex point.
class SimplexVector {
 public:
  SimplexVector() = default; // empty placeholder, assign before use
  explicit SimplexVector(Vec weights);

  const Vec& weights() const { return w_; }
  double raw_sum() const { return raw_sum_; }
  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_(i); }

  static constexpr double kSumTol = 1e-9;

 private:
  Vec w_;
  double raw_sum_ = 1.0;
};

struct MotorParams {
  double R_L;   // inductor series resistance, ohm
  double L;     // inductance, H
  double C;     // capacitance, F
  double K_e;   // motor electric constant, V s/rad
  double R_m;   // winding resistance, ohm
  double J;     // shaft inertia, kg m^2
  double c;     // viscous friction, kg s m^2
  double nu_dc; // supply voltage, V

  bool all_positive() const {
    return R_L > 0 && L > 0 && C > 0 && K_e > 0 && R_m > 0 && J > 0 && c > 0 &&
           nu_dc > 0;
  }
};

// Piecewise-constant scalar signal d(t) injected through a fixed channel E,
// so the plant sees xdot = A x + b + E d(t). Right-continuous lookups.
struct DisturbanceProfile {
  Vec E;
  std::vector<double> breakpoints; // strictly increasing
  std::vector<double> values;      // size = breakpoints.size() + 1

  double evaluate(double t) const;
  void validate() const;
};

}  // namespace sa
