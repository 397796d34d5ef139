#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "fixtures.hpp"
#include "switchaff/demos.hpp"
#include "switchaff/design.hpp"
#include "switchaff/simulate.hpp"

using namespace sa;

namespace {

double tracking_error(const Trajectory& traj, size_t k) {
  return (traj.states[k] - traj.references[k]).norm();
}

}  // namespace

TEST_CASE("planar demo converges from far away") {
  Demo d = demo("example1");
  auto law = design_switching(d.sys, d.lambda, d.x_e_perp);
  auto traj = simulate_closed_loop(law, d.sim);
  REQUIRE(traj.states.size() == size_t(std::lround(d.sim.T / d.sim.h)) + 1);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == doctest::Approx(d.sim.T).epsilon(1e-12));
  CHECK(traj.states.back().norm() <= 0.05);

  auto m = compute_metrics(traj, 0.05);
  CHECK(m.final_error <= 0.05);
  CHECK(m.settling_time > 0.0);
  CHECK(m.settling_time < d.sim.T);
  CHECK(m.switch_count > 1000);
  CHECK(m.switch_count == traj.switch_count);
}

TEST_CASE("starting at the target stays within a step of it") {
  auto law = fx::example1_published();
  SimulationConfig cfg;
  cfg.h = 1e-3;
  cfg.T = 0.5;
  cfg.x0 = Vec::Zero(2);
  auto traj = simulate_closed_loop(law, cfg);
  double worst = 0.0;
  for (const auto& x : traj.states) worst = std::max(worst, x.norm());
  CHECK(worst <= 5.0 * cfg.h);
}

TEST_CASE("halving the step does not degrade the final error") {
  Demo d = demo("example1");
  auto law = design_switching(d.sys, d.lambda, d.x_e_perp);
  SimulationConfig cfg = d.sim;
  cfg.T = 12.0;
  auto coarse = simulate_closed_loop(law, cfg);
  cfg.h /= 2.0;
  auto fine = simulate_closed_loop(law, cfg);
  double e1 = coarse.states.back().norm();
  double e2 = fine.states.back().norm();
  CHECK(e1 <= 0.05);
  CHECK(e2 <= 2.0 * e1 + 1e-9);
}

TEST_CASE("positive certificate jumps shrink with the step") {
  Demo d = demo("example1");
  auto law = design_switching(d.sys, d.lambda, d.x_e_perp);
  SimulationConfig cfg = d.sim;
  cfg.T = 5.0;
  auto m1 = compute_metrics(simulate_closed_loop(law, cfg), 0.05);
  cfg.h /= 2.0;
  auto m2 = compute_metrics(simulate_closed_loop(law, cfg), 0.05);
  CHECK(m1.max_v_jump >= 0.0);
  double c1 = m1.max_v_jump / d.sim.h;
  double c2 = m2.max_v_jump / cfg.h;
  CHECK(c2 <= 2.0 * c1 + 1e-9);
}

TEST_CASE("nullspace transit time scales with the distance") {
  auto law = fx::example1_published();
  auto t_half = [&](double s) {
    SimulationConfig cfg;
    cfg.h = 1e-3;
    cfg.T = 1.2 * s;
    cfg.x0 = Vec::Zero(2);
    cfg.x0(0) = s;
    auto traj = simulate_closed_loop(law, cfg);
    for (size_t k = 0; k < traj.states.size(); ++k)
      if (traj.states[k].norm() <= 0.5 * s) return traj.times[k];
    return -1.0;
  };
  double t1 = t_half(1.0);
  double t100 = t_half(100.0);
  CHECK(t1 == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(t100 == doctest::Approx(50.0).epsilon(1e-2));
  CHECK(t100 / t1 >= 10.0);
}

TEST_CASE("zero drift on the nullspace freezes the slow coordinate") {
  Mat A = Mat::Zero(2, 2);
  A(1, 1) = -1.0;
  auto sys = SwitchedAffineSystem::make({A, A}, {Vec::Zero(2), Vec::Zero(2)});
  SimplexVector lam{Vec::Constant(2, 0.5)};
  auto dec = fx::axis_decomposition(A, 0);
  auto law = assemble_law(sys, lam, Vec::Zero(2), dec, Mat::Identity(1, 1),
                          Mat::Identity(1, 1));
  SimulationConfig cfg;
  cfg.h = 1e-2;
  cfg.T = 2.0;
  cfg.x0 = Vec::Zero(2);
  cfg.x0(0) = 3.0;
  auto traj = simulate_closed_loop(law, cfg);
  CHECK((traj.states.back() - cfg.x0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(traj.switch_count == 0);
}

TEST_CASE("speed bound holds for nullspace starts and gates everything else") {
  auto law = fx::example1_published();
  SimulationConfig cfg;
  cfg.h = 1e-3;
  cfg.T = 4.0;
  cfg.x0 = Vec::Zero(2);
  cfg.x0(0) = 3.0;
  auto on_axis = simulate_closed_loop(law, cfg);
  auto res = speed_bound_check(law, on_axis, cfg.h);
  CHECK(res.status == SpeedBoundStatus::ok);
  CHECK(res.worst_excess <= 0.0);

  cfg.x0(1) = 5.0;
  auto off_axis = simulate_closed_loop(law, cfg);
  CHECK(speed_bound_check(law, off_axis, cfg.h).status ==
        SpeedBoundStatus::not_applicable);

  // The motor law is not drift-limited, so the bound never applies.
  auto motor = fx::motor_position_published();
  SimulationConfig mcfg;
  mcfg.h = 1e-4;
  mcfg.T = 0.01;
  mcfg.x0 = motor.cert.x_e;
  auto mtraj = simulate_closed_loop(motor, mcfg);
  CHECK(speed_bound_check(motor, mtraj, mcfg.h).status ==
        SpeedBoundStatus::not_applicable);
}

TEST_CASE("reference events retarget the law mid-run") {
  auto law = fx::example1_published();
  SimulationConfig cfg;
  cfg.h = 1e-3;
  cfg.T = 3.0;
  cfg.x0 = Vec::Zero(2);
  cfg.reference_schedule = {{1.0, Vec::Constant(1, 2.0)}};
  auto traj = simulate_closed_loop(law, cfg);

  size_t flip = std::lround(1.0 / cfg.h);
  CHECK(traj.references[flip - 1](0) == 0.0);
  CHECK(traj.references[flip](0) == 2.0);
  CHECK(tracking_error(traj, traj.states.size() - 1) <= 0.05);
  CHECK((traj.states.back() - Vec(2.0 * Vec::Unit(2, 0))).norm() <= 0.05);
}

TEST_CASE("motor position demo tracks its step schedule") {
  Demo d = demo("motor-position");
  auto law = fx::motor_position_published().with_reference(d.x_e_perp);
  auto traj = simulate_closed_loop(law, d.sim);
  // Just before each reference change the angle error is within 2% of the
  // incoming step magnitude.
  double prev_target = 0.0;
  std::vector<std::pair<double, double>> segment_checks;
  double target = law.cert.x_e(3);
  size_t ev = 0;
  for (size_t k = 0; k + 1 < traj.states.size(); ++k) {
    bool boundary = (traj.references[k + 1] - traj.references[k])
                        .cwiseAbs()
                        .maxCoeff() != 0.0;
    if (boundary || k + 2 == traj.states.size()) {
      double step_size = std::abs(target - prev_target);
      double err = std::abs(traj.states[k](3) - target);
      segment_checks.push_back({err, 0.02 * step_size});
      prev_target = target;
      if (ev < d.sim.reference_schedule.size())
        target = d.sim.reference_schedule[ev++].x_e_perp(0);
    }
  }
  REQUIRE(segment_checks.size() == 4);
  for (auto [err, budget] : segment_checks) CHECK(err <= budget);
}

TEST_CASE("velocity loop rides through a load pulse") {
  Demo d = demo("motor-velocity");
  auto law = design_switching(d.sys, d.lambda, d.x_e_perp);
  SimulationConfig cfg;
  cfg.h = 2e-5;
  cfg.T = 3.0;
  cfg.x0 = Vec::Zero(4);
  DisturbanceProfile dist;
  dist.E = Vec::Zero(4);
  dist.E(2) = -1.0;
  dist.breakpoints = {0.8, 1.4};
  dist.values = {0.0, 50.0, 0.0};
  cfg.disturbance = dist;
  auto traj = simulate_closed_loop(law, cfg);

  // The sampled loop carries an intrinsic chatter band of about one rad/s;
  // the pulse must not push the error meaningfully beyond it and the loop
  // must sit back inside it once the load is gone.
  double pre = 0.0, during = 0.0, after = 0.0;
  for (size_t k = 0; k < traj.states.size(); ++k) {
    double t = traj.times[k];
    double e = std::abs(traj.states[k](2) - kDemoOmegaRef);
    if (t >= 0.3 && t < 0.8)
      pre = std::max(pre, e);
    else if (t >= 0.8 && t <= 1.4)
      during = std::max(during, e);
    else if (t >= 1.6)
      after = std::max(after, e);
  }
  CHECK(pre <= 2.0);
  CHECK(during <= 5.0);
  CHECK(after <= 2.0);
  CHECK(std::abs(traj.states.back()(2) - kDemoOmegaRef) <= 1.5);
}

TEST_CASE("runaway trajectories fail fast instead of emitting garbage") {
  Mat A = Mat::Zero(2, 2);
  A(1, 1) = 50.0;
  auto sys = SwitchedAffineSystem::make({A, A}, {Vec::Zero(2), Vec::Zero(2)});
  SimplexVector lam{Vec::Constant(2, 0.5)};
  auto dec = fx::axis_decomposition(A, 0);
  auto law = assemble_law(sys, lam, Vec::Zero(2), dec, Mat::Identity(1, 1),
                          Mat::Identity(1, 1));
  SimulationConfig cfg;
  cfg.h = 0.1;
  cfg.T = 60.0;
  cfg.x0 = Vec::Zero(2);
  cfg.x0(1) = 5.0;
  cfg.integrator = SimulationConfig::Integrator::euler;
  CHECK_THROWS_AS(simulate_closed_loop(law, cfg), std::runtime_error);
}

TEST_CASE("configuration errors are rejected before any stepping") {
  auto law = fx::example1_published();
  SimulationConfig cfg;
  cfg.x0 = Vec::Zero(2);

  SimulationConfig bad = cfg;
  bad.h = 0.0;
  CHECK_THROWS_WITH_AS(simulate_closed_loop(law, bad),
                       "step must be positive", std::invalid_argument);
  bad = cfg;
  bad.T = 1e-4;
  bad.h = 1e-3;
  CHECK_THROWS_WITH_AS(simulate_closed_loop(law, bad),
                       "horizon shorter than one step", std::invalid_argument);
  bad = cfg;
  bad.x0 = Vec::Zero(3);
  CHECK_THROWS_WITH_AS(simulate_closed_loop(law, bad),
                       "initial state has wrong dimension",
                       std::invalid_argument);
  bad = cfg;
  bad.reference_schedule = {{2.0, Vec::Zero(1)}, {1.0, Vec::Zero(1)}};
  CHECK_THROWS_WITH_AS(simulate_closed_loop(law, bad),
                       "reference events must be time-sorted",
                       std::invalid_argument);
  bad = cfg;
  DisturbanceProfile dist;
  dist.E = Vec::Zero(3);
  dist.values = {0.0};
  bad.disturbance = dist;
  CHECK_THROWS_WITH_AS(simulate_closed_loop(law, bad),
                       "disturbance input matrix has wrong height",
                       std::invalid_argument);
}

TEST_CASE("csv output is byte-stable and matches the hand-stepped run") {
  auto law = fx::example1_published();
  SimulationConfig cfg;
  cfg.h = 0.5;
  cfg.T = 1.0;
  cfg.x0 = Vec::Zero(2);
  cfg.x0(0) = 1.0;
  auto traj = simulate_closed_loop(law, cfg);
  std::ostringstream a, b;
  write_csv(a, traj);
  write_csv(b, traj);
  CHECK(a.str() == b.str());
  CHECK(a.str() ==
        "t,x1,x2,sigma,v\n"
        "0,1,0,1,1\n"
        "0.5,0.5,0,1,0.25\n"
        "1,0,0,1,0\n");
}

TEST_CASE("compute_metrics on a hand-built trajectory") {
  Trajectory traj;
  traj.times = {0.0, 0.1, 0.2};
  Vec x = Vec::Zero(2);
  x(0) = 1.0;
  traj.states = {x, x, x};
  traj.references = {Vec::Zero(2), Vec::Zero(2), x};
  traj.lyapunov = {1.0, 2.0, 10.0};
  traj.modes = {0, 0, 0};
  traj.switch_count = 7;

  auto m = compute_metrics(traj, 0.5);
  CHECK(m.final_error == 0.0);
  // The last sample outside the band is the second one, so settling lands on
  // the final time; the jump across the reference change is excluded.
  CHECK(m.settling_time == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m.max_v_jump == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.switch_count == 7);
}
