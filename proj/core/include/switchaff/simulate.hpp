#pragma once

#include <iosfwd>
#include <optional>

#include "switchaff/design.hpp"

namespace sa {

struct ReferenceEvent {
  double time = 0.0;
  Vec x_e_perp; // new nullspace coordinate of the target equilibrium
};

struct SimulationConfig {
  double h = 1e-3;
  double T = 1.0;
  Vec x0;
  enum class Integrator { rk4, euler } integrator = Integrator::rk4;
  std::vector<ReferenceEvent> reference_schedule;
  std::optional<DisturbanceProfile> disturbance;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<int> modes;
  std::vector<double> lyapunov;
  std::vector<Vec> references; // active x_e at each sample
  int switch_count = 0;
};

// Sampled switching: sigma is chosen by select_mode at each sample instant
// and held for the whole step.
Trajectory simulate_closed_loop(const SwitchingLaw& law,
                                const SimulationConfig& config);

struct Metrics {
  double final_error = 0.0;
  double settling_time = -1.0; // first entry into the band without leaving
  double max_v_jump = 0.0;     // over consecutive samples, events excluded
  int switch_count = 0;
};

Metrics compute_metrics(const Trajectory& traj, double band);

enum class SpeedBoundStatus { ok, violated, not_applicable };

struct SpeedBoundResult {
  SpeedBoundStatus status = SpeedBoundStatus::not_applicable;
  double worst_excess = 0.0;
  int worst_index = -1;
};

// Per-sample check of the nullspace-coordinate speed limit; applies only
// when the trajectory starts on the equilibrium set of the fast dynamics.
SpeedBoundResult speed_bound_check(const SwitchingLaw& law,
                                   const Trajectory& traj, double h);

// CSV columns: t,x1,...,xn,sigma,v
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace sa
