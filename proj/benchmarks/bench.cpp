#include <benchmark/benchmark.h>

#include "switchaff/demos.hpp"
#include "switchaff/design.hpp"
#include "switchaff/rate.hpp"
#include "switchaff/simulate.hpp"

using namespace sa;

namespace {

const Demo& planar() {
  static Demo d = demo("example1");
  return d;
}

const Demo& three_mode() {
  static Demo d = demo("example2");
  return d;
}

const SwitchingLaw& planar_law() {
  static SwitchingLaw law =
      design_switching(planar().sys, planar().lambda, planar().x_e_perp);
  return law;
}

const SwitchingLaw& three_mode_law() {
  static SwitchingLaw law = design_switching(three_mode().sys,
                                             three_mode().lambda,
                                             three_mode().x_e_perp);
  return law;
}

void BM_design_planar(benchmark::State& state) {
  const Demo& d = planar();
  for (auto _ : state)
    benchmark::DoNotOptimize(design_switching(d.sys, d.lambda, d.x_e_perp));
}
BENCHMARK(BM_design_planar)->Unit(benchmark::kMillisecond);

void BM_design_motor(benchmark::State& state) {
  static Demo d = demo("motor-position");
  for (auto _ : state)
    benchmark::DoNotOptimize(design_switching(d.sys, d.lambda, d.x_e_perp));
}
BENCHMARK(BM_design_motor)->Unit(benchmark::kMillisecond);

void BM_mode_selection(benchmark::State& state) {
  const SwitchingLaw& law = three_mode_law();
  Vec x(3);
  x << 0.02, -0.01, 0.005;
  int prev = -1;
  for (auto _ : state) {
    prev = select_mode(law, x, prev);
    benchmark::DoNotOptimize(prev);
  }
}
BENCHMARK(BM_mode_selection);

void BM_simulate_second(benchmark::State& state) {
  const SwitchingLaw& law = planar_law();
  SimulationConfig cfg = planar().sim;
  cfg.T = 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_closed_loop(law, cfg));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(cfg.T / cfg.h));
}
BENCHMARK(BM_simulate_second)->Unit(benchmark::kMillisecond);

void BM_sos_witness(benchmark::State& state) {
  const SwitchingLaw& law = three_mode_law();
  Eigen::SelfAdjointEigenSolver<Mat> es(law.cert.P, Eigen::EigenvaluesOnly);
  const double r = es.eigenvalues().maxCoeff();
  for (auto _ : state)
    benchmark::DoNotOptimize(sos_find_beta(law, r));
}
BENCHMARK(BM_sos_witness)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
