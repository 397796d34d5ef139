#pragma once

#include <string>

#include "switchaff/simulate.hpp"
#include "switchaff/sysmodel.hpp"

namespace sa {

// A packaged demonstration problem: plant, target combination, nullspace
// coordinate of the equilibrium, and a simulation setup that exercises it.
struct Demo {
  std::string name;
  SwitchedAffineSystem sys;
  SimplexVector lambda;
  Vec x_e_perp;
  SimulationConfig sim;
};

// Parameter set used by the position demo.
MotorParams demo_motor_params();

// Parameter set for the velocity demo: R_L, K_e, R_m chosen so that the
// 5/8-3/8 duty split between the last two configurations puts the
// equilibrium at [7.6202, 29.9719, 200.0034, 0].
MotorParams demo_motor_velocity_params();
inline constexpr double kDemoOmegaRef = 200.0034;

// Builders for "example1", "example2", "motor-position", "motor-velocity".
// Throws std::invalid_argument for unknown names.
Demo demo(const std::string& name);

}  // namespace sa
