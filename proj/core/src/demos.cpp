#include <cmath>
#include <stdexcept>

#include "switchaff/demos.hpp"

namespace sa {

MotorParams demo_motor_params() {
  MotorParams p;
  p.R_L = 0.5;
  p.L = 1e-3;
  p.C = 2e-3;
  p.K_e = 5e-3;
  p.R_m = 1.0;
  p.J = 1e-6;
  p.c = 1e-4;
  p.nu_dc = 12.0;
  return p;
}

MotorParams demo_motor_velocity_params() {
  MotorParams p = demo_motor_params();
  p.R_L = 0.0998054513;
  p.K_e = 0.0069990604;
  p.R_m = 9.9987101388;
  return p;
}

namespace {

Demo example1() {
  Demo d;
  d.name = "example1";
  const Mat Z = Mat::Zero(2, 2);
  Mat A3 = Z;
  A3(1, 1) = -1.0;
  Vec b1(2), b2(2);
  b1 << -1, 0;
  b2 << 1, 0;
  d.sys = SwitchedAffineSystem::make({Z, Z, A3}, {b1, b2, Vec::Zero(2)},
                                     {"push-", "push+", "leak"});
  d.lambda = SimplexVector(Vec::Constant(3, 1.0 / 3.0));
  d.x_e_perp = Vec::Zero(1);
  d.sim.h = 1e-4;
  d.sim.T = 15.0;
  d.sim.x0 = (Vec(2) << -4.0, 5.0).finished();
  return d;
}

Demo example2() {
  Demo d;
  d.name = "example2";
  Mat A1(3, 3), A2(3, 3), A3(3, 3);
  A1 << -6, 5, 0, 2, -7, 0, -2, 0, 0;
  A2 << -6, 2, 0, 2, -7, 0, 2, 3, 0;
  A3 << -3, -1, 0, -1, -1, 0, 2, -3, 0;
  Vec b1(3), b2(3), b3(3);
  b1 << 1, -1, 0;
  b2 << -1, 1, 2;
  b3 << 0, 0, -2;
  d.sys = SwitchedAffineSystem::make({A1, A2, A3}, {b1, b2, b3});
  d.lambda = SimplexVector(Vec::Constant(3, 1.0 / 3.0));
  d.x_e_perp = Vec::Zero(1);
  d.sim.h = 1e-4;
  d.sim.T = 5.0;
  d.sim.x0 = (Vec(3) << 1.0, -1.0, 1.0).finished();
  return d;
}

Demo motor_position() {
  Demo d;
  d.name = "motor-position";
  d.sys = build_dc_motor(demo_motor_params(), MotorMode::position);
  Vec lam = Vec::Zero(8);
  lam.head(4).setConstant(0.25);
  d.lambda = SimplexVector(lam);
  d.x_e_perp = Vec::Constant(1, M_PI);
  d.sim.h = 1e-5;
  d.sim.T = 4.0;
  d.sim.x0 = Vec::Zero(4);
  d.sim.reference_schedule = {{1.0, Vec::Constant(1, 2.0 * M_PI)},
                              {2.0, Vec::Constant(1, -M_PI)},
                              {3.0, Vec::Constant(1, 0.0)}};
  return d;
}

Demo motor_velocity() {
  Demo d;
  d.name = "motor-velocity";
  d.sys = build_dc_motor(demo_motor_velocity_params(), MotorMode::velocity,
                         kDemoOmegaRef);
  Vec lam = Vec::Zero(8);
  lam(6) = 0.625;
  lam(7) = 0.375;
  d.lambda = SimplexVector(lam);
  d.x_e_perp = Vec::Zero(1);
  d.sim.h = 1e-5;
  d.sim.T = 1.0;
  d.sim.x0 = Vec::Zero(4);
  return d;
}

}  // namespace

Demo demo(const std::string& name) {
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  if (name == "motor-position") return motor_position();
  if (name == "motor-velocity") return motor_velocity();
  throw std::invalid_argument("unknown demo: " + name);
}

}  // namespace sa
