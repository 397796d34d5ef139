#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "switchaff/equilibria.hpp"
#include "switchaff/simulate.hpp"

namespace sa {

namespace {

Vec field(const SwitchedAffineSystem& sys, int mode,
          const std::optional<DisturbanceProfile>& dist, double t,
          const Vec& x) {
  Vec dx = sys.A[mode] * x + sys.b[mode];
  if (dist) dx += dist->E * dist->evaluate(t);
  return dx;
}

}  // namespace

Trajectory simulate_closed_loop(const SwitchingLaw& law,
                                const SimulationConfig& config) {
  if (!(config.h > 0.0)) throw std::invalid_argument("step must be positive");
  if (config.T < config.h)
    throw std::invalid_argument("horizon shorter than one step");
  if (config.x0.size() != law.sys.n)
    throw std::invalid_argument("initial state has wrong dimension");
  if (config.disturbance) {
    config.disturbance->validate();
    if (config.disturbance->E.rows() != law.sys.n)
      throw std::invalid_argument("disturbance input matrix has wrong height");
  }
  for (size_t k = 1; k < config.reference_schedule.size(); ++k)
    if (config.reference_schedule[k].time <
        config.reference_schedule[k - 1].time)
      throw std::invalid_argument("reference events must be time-sorted");

  const double h = config.h;
  const long steps = std::lround(config.T / h);
  SwitchingLaw active = law;
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.modes.reserve(steps + 1);
  traj.lyapunov.reserve(steps + 1);
  traj.references.reserve(steps + 1);

  Vec x = config.x0;
  int prev = -1;
  size_t next_event = 0;
  for (long k = 0; k <= steps; ++k) {
    const double t = k * h;
    while (next_event < config.reference_schedule.size() &&
           config.reference_schedule[next_event].time <=
               t + 1e-9 * (1.0 + std::abs(t))) {
      active = active.with_reference(
          config.reference_schedule[next_event].x_e_perp);
      ++next_event;
    }
    if (!x.allFinite())
      throw std::runtime_error("state diverged at t = " + std::to_string(t));
    const int sigma = select_mode(active, x, prev);
    if (prev >= 0 && sigma != prev) ++traj.switch_count;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.modes.push_back(sigma);
    traj.lyapunov.push_back(lyapunov_value(active, x));
    traj.references.push_back(active.cert.x_e);
    prev = sigma;
    if (k == steps) break;
    if (config.integrator == SimulationConfig::Integrator::euler) {
      x += h * field(law.sys, sigma, config.disturbance, t, x);
    } else {
      const Vec k1 = field(law.sys, sigma, config.disturbance, t, x);
      const Vec k2 = field(law.sys, sigma, config.disturbance, t + 0.5 * h,
                           x + 0.5 * h * k1);
      const Vec k3 = field(law.sys, sigma, config.disturbance, t + 0.5 * h,
                           x + 0.5 * h * k2);
      const Vec k4 =
          field(law.sys, sigma, config.disturbance, t + h, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return traj;
}

Metrics compute_metrics(const Trajectory& traj, double band) {
  Metrics m;
  m.switch_count = traj.switch_count;
  if (traj.states.empty()) return m;
  const size_t n = traj.states.size();
  m.final_error = (traj.states.back() - traj.references.back()).norm();

  size_t settle = 0;
  for (size_t k = 0; k < n; ++k)
    if ((traj.states[k] - traj.references[k]).norm() > band) settle = k + 1;
  m.settling_time = settle < n ? traj.times[settle] : -1.0;

  for (size_t k = 0; k + 1 < n; ++k) {
    const double ref_shift =
        (traj.references[k + 1] - traj.references[k]).cwiseAbs().maxCoeff();
    if (ref_shift != 0.0) continue;
    m.max_v_jump =
        std::max(m.max_v_jump, traj.lyapunov[k + 1] - traj.lyapunov[k]);
  }
  return m;
}

SpeedBoundResult speed_bound_check(const SwitchingLaw& law,
                                   const Trajectory& traj, double h) {
  SpeedBoundResult res;
  const NoGlobalExponentialDiagnostic diag =
      diagnose_no_global_exponential(law.ell, law.cert.decomp);
  if (!diag.triggered || traj.states.size() < 2) return res;
  const Vec xb0 = law.cert.decomp.V_bar.transpose() * traj.states.front();
  const Vec xbe = law.cert.decomp.V_bar.transpose() * law.cert.x_e;
  const double off_set =
      law.cert.decomp.p > 0 ? (xb0 - xbe).cwiseAbs().maxCoeff() : 0.0;
  if (off_set > 1e-9 * (1.0 + traj.states.front().norm())) return res;

  const double bound = diag.ell_bar + 10.0 * h * diag.ell_bar + 1e-9;
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const double speed = (traj.states[k + 1] - traj.states[k]).norm() / h;
    if (speed - bound > worst) {
      worst = speed - bound;
      res.worst_index = static_cast<int>(k);
    }
  }
  res.worst_excess = worst;
  res.status =
      worst > 0.0 ? SpeedBoundStatus::violated : SpeedBoundStatus::ok;
  return res;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  const int n =
      traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  os << "t";
  for (int j = 1; j <= n; ++j) os << ",x" << j;
  os << ",sigma,v\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (size_t k = 0; k < traj.states.size(); ++k) {
    put(traj.times[k]);
    for (int j = 0; j < n; ++j) {
      os << ',';
      put(traj.states[k](j));
    }
    os << ',' << traj.modes[k] + 1 << ',';
    put(traj.lyapunov[k]);
    os << '\n';
  }
}

}  // namespace sa
