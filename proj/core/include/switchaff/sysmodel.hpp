#pragma once

#include "switchaff/types.hpp"

namespace sa {

ValidationReport validate_system(const SwitchedAffineSystem& sys);

// (A_lambda, b_lambda) = (sum_i lambda_i A_i, sum_i lambda_i b_i).
std::pair<Mat, Vec> convex_combination(const SwitchedAffineSystem& sys,
                                       const SimplexVector& lambda);

// Appends integrator states z with zdot = C x - y_ref. The new mode matrices
// are [[A_i, 0], [C, 0]] and the new affine terms get -y_ref stacked below.
SwitchedAffineSystem augment_with_integrator(const SwitchedAffineSystem& sys,
                                             const Mat& C, const Vec& y_ref);

enum class MotorMode { position, velocity };

// Boost converter plus h-bridge feeding a dc motor, 8 switch configurations.
// State (i_L, nu_C, omega, theta) in position mode; in velocity mode the 4th
// state integrates omega - omega_e instead of theta.
SwitchedAffineSystem build_dc_motor(const MotorParams& params, MotorMode mode,
                                    double omega_e = 0.0);

}  // namespace sa
