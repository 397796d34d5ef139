// switchctl: command line front end for the switched affine toolkit.
//
// Subcommands: validate, equilibria, design, simulate, rate, demo. Systems
// come from --system <file.json> or --demo <name>; reports are JSON, written
// to --out or to stdout. Exit codes: 0 success, 1 I/O or parse error,
// 2 hypothesis failure (kind named in stderr and report), 3 solver failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "switchaff/demos.hpp"
#include "switchaff/design.hpp"
#include "switchaff/equilibria.hpp"
#include "switchaff/json_io.hpp"
#include "switchaff/rate.hpp"
#include "switchaff/simulate.hpp"
#include "switchaff/sysmodel.hpp"

using namespace sa;
using nlohmann::json;

namespace {

struct Args {
  std::string system, demo_name, positional_demo;
  std::string lambda, xe_perp, x0, out, r_grid;
  double step = 0.0, horizon = 0.0, beta = 0.0, margin = 0.0;
  bool simulate = false;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, sep)) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok) {
  size_t used = 0;
  double v = std::stod(tok, &used);
  while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used])))
    ++used;
  if (used != tok.size()) throw std::invalid_argument("bad number: " + tok);
  return v;
}

// Accepts "p/q" so simplex points like 1/3,1/3,1/3 sum cleanly.
double parse_rational(const std::string& tok) {
  auto slash = tok.find('/');
  if (slash == std::string::npos) return parse_number(tok);
  return parse_number(tok.substr(0, slash)) /
         parse_number(tok.substr(slash + 1));
}

Vec parse_vec(const std::string& csv) {
  auto toks = split(csv, ',');
  Vec v(static_cast<int>(toks.size()));
  for (size_t i = 0; i < toks.size(); ++i) v(static_cast<int>(i)) = parse_number(toks[i]);
  return v;
}

SimplexVector parse_lambda(const std::string& csv) {
  auto toks = split(csv, ',');
  Vec v(static_cast<int>(toks.size()));
  for (size_t i = 0; i < toks.size(); ++i)
    v(static_cast<int>(i)) = parse_rational(toks[i]);
  return SimplexVector(v);
}

struct Grid {
  double lo = 0.0, hi = 0.0;
  int count = 0;
};

Grid parse_grid(const std::string& s) {
  auto toks = split(s, ':');
  if (toks.size() != 3) throw std::invalid_argument("--r-grid wants lo:hi:count");
  Grid g;
  g.lo = parse_number(toks[0]);
  g.hi = parse_number(toks[1]);
  g.count = static_cast<int>(parse_number(toks[2]));
  if (g.count < 1 || g.lo <= 0.0 || g.hi < g.lo)
    throw std::invalid_argument("--r-grid wants 0 < lo <= hi and count >= 1");
  return g;
}

// Resolves --system/--demo into a Demo record; file-based systems get the
// file stem as their name and no default lambda.
Demo resolve_input(const Args& a, bool need_lambda) {
  const std::string demo_name =
      a.positional_demo.empty() ? a.demo_name : a.positional_demo;
  if (demo_name.empty() == a.system.empty())
    throw std::invalid_argument("give exactly one of --system or --demo");
  Demo d;
  if (!demo_name.empty()) {
    d = demo(demo_name);
  } else {
    auto slash = a.system.find_last_of("/\\");
    auto stem = a.system.substr(slash == std::string::npos ? 0 : slash + 1);
    auto dot = stem.rfind('.');
    d.name = dot == std::string::npos ? stem : stem.substr(0, dot);
    d.sys = system_from_json(slurp(a.system));
    d.sim.x0 = Vec::Zero(d.sys.n);
  }
  if (!a.lambda.empty()) d.lambda = parse_lambda(a.lambda);
  if (d.lambda.size() == 0 && need_lambda)
    throw std::invalid_argument("--lambda is required with --system");
  if (need_lambda && d.lambda.size() != d.sys.N)
    throw std::invalid_argument("lambda needs one weight per mode");
  if (!a.xe_perp.empty()) d.x_e_perp = parse_vec(a.xe_perp);
  if (!a.x0.empty()) d.sim.x0 = parse_vec(a.x0);
  if (a.step > 0.0) d.sim.h = a.step;
  if (a.horizon > 0.0) d.sim.T = a.horizon;
  return d;
}

// Default x_e_perp to zeros of the nullspace dimension when unset.
Vec resolved_xe_perp(const Demo& d) {
  if (d.x_e_perp.size() > 0) return d.x_e_perp;
  auto [Al, bl] = convex_combination(d.sys, d.lambda);
  return Vec::Zero(nullspace_decomposition(Al).m);
}

RateOptions rate_options(const Args& a) {
  RateOptions opt;
  if (const char* seed = std::getenv("SWITCHCTL_SEED"))
    opt.seed = std::strtoull(seed, nullptr, 10);
  if (a.beta > 0.0) opt.fixed_beta = a.beta;
  if (a.margin > 0.0) opt.solve.margin_threshold = a.margin;
  return opt;
}

DesignOptions design_options(const Args& a) {
  DesignOptions opt;
  if (a.margin > 0.0) opt.solve.margin_threshold = a.margin;
  return opt;
}

// JSON to --out (atomic) with a one line summary on stdout, or JSON to
// stdout with the summary on stderr so pipes stay clean.
void emit(const Args& a, const std::string& text, const std::string& summary) {
  if (!a.out.empty()) {
    atomic_write(a.out, text);
    std::cout << summary << " -> " << a.out << "\n";
  } else {
    std::cout << text;
    std::cerr << summary << "\n";
  }
}

std::string csv_of_curve(const std::vector<RateCurveRow>& rows) {
  std::string out = "r,beta,epsilon,alpha\n";
  char line[160];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", row.r,
                  row.beta, row.eps, row.alpha);
    out += line;
  }
  return out;
}

double spectral_max(const Mat& P) {
  Eigen::SelfAdjointEigenSolver<Mat> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

std::string events_json(const std::vector<ReferenceEvent>& schedule) {
  std::string out;
  for (const auto& ev : schedule) {
    json j;
    j["time"] = ev.time;
    j["x_e_perp"] = std::vector<double>(ev.x_e_perp.data(),
                                        ev.x_e_perp.data() + ev.x_e_perp.size());
    out += j.dump() + "\n";
  }
  return out;
}

int run_validate(const Args& a) {
  Demo d = resolve_input(a, false);
  auto report = validate_system(d.sys);
  for (const auto& issue : report.issues)
    std::cerr << d.name << ": " << issue.what << "\n";
  if (!report.valid) return 1;
  std::cout << d.name << ": ok, n=" << d.sys.n << ", N=" << d.sys.N << "\n";
  return 0;
}

int run_equilibria(const Args& a) {
  Demo d = resolve_input(a, true);
  auto eq = solve_equilibrium(d.sys, d.lambda, resolved_xe_perp(d));
  json j;
  j["lambda"] = std::vector<double>(d.lambda.weights().data(),
                                    d.lambda.weights().data() + d.lambda.size());
  j["x_e"] = std::vector<double>(eq.x_e.data(), eq.x_e.data() + eq.x_e.size());
  j["x_bar_e"] = std::vector<double>(eq.x_bar_e.data(),
                                     eq.x_bar_e.data() + eq.x_bar_e.size());
  j["x_e_perp"] = std::vector<double>(eq.x_e_perp.data(),
                                      eq.x_e_perp.data() + eq.x_e_perp.size());
  j["residual"] = eq.residual;
  std::ostringstream sum;
  sum << "equilibrium residual " << eq.residual;
  emit(a, j.dump(2) + "\n", sum.str());
  return 0;
}

int run_design(const Args& a) {
  Demo d = resolve_input(a, true);
  auto law = design_switching(d.sys, d.lambda, resolved_xe_perp(d),
                              design_options(a));
  auto report = verify_certificate(law);
  std::ostringstream sum;
  sum << d.name << ": " << (report.all_passed ? "verified" : "NOT verified")
      << ", decrease margin " << law.cert.margin_decrease
      << ", positivity margin " << law.cert.margin_positivity;
  emit(a, law_report_json(law, report), sum.str());
  return report.all_passed ? 0 : 3;
}

int run_simulate(const Args& a) {
  Demo d = resolve_input(a, true);
  auto law = design_switching(d.sys, d.lambda, resolved_xe_perp(d),
                              design_options(a));
  auto traj = simulate_closed_loop(law, d.sim);
  std::ostringstream csv;
  write_csv(csv, traj);
  auto metrics = compute_metrics(traj, 0.05);
  std::ostringstream sum;
  sum << d.name << ": final error " << metrics.final_error << ", "
      << metrics.switch_count << " switches over " << d.sim.T << " s";
  emit(a, csv.str(), sum.str());
  if (!a.out.empty() && !d.sim.reference_schedule.empty())
    atomic_write(a.out + ".events.jsonl", events_json(d.sim.reference_schedule));
  return 0;
}

int run_rate(const Args& a) {
  Demo d = resolve_input(a, true);
  auto law = design_switching(d.sys, d.lambda, resolved_xe_perp(d),
                              design_options(a));
  auto opt = rate_options(a);
  const double s_max = spectral_max(law.cert.P);
  if (!a.r_grid.empty()) {
    Grid g = parse_grid(a.r_grid);
    std::vector<double> radii;
    for (int k = 0; k < g.count; ++k) {
      double t = g.count == 1 ? 0.0 : double(k) / (g.count - 1);
      radii.push_back((g.lo + t * (g.hi - g.lo)) * s_max);
    }
    auto rows = rate_curve(law, radii, opt);
    for (const auto& row : rows)
      if (!(row.alpha > 0.0)) {
        std::cerr << "rate curve failed at r = " << row.r << "\n";
        return 3;
      }
    std::ostringstream sum;
    sum << d.name << ": alpha " << rows.front().alpha << " at r "
        << rows.front().r << " down to " << rows.back().alpha << " at r "
        << rows.back().r;
    emit(a, csv_of_curve(rows), sum.str());
    return 0;
  }
  const double r = s_max;
  auto sos = sos_find_beta(law, r, opt);
  if (!sos.feasible) {
    std::cerr << "no sum-of-squares witness at r = " << r << "\n";
    return 3;
  }
  auto fixed = opt;
  fixed.fixed_beta = sos.beta;
  auto cert = certify_rate(law, r, fixed);
  if (!cert.certified || !(cert.alpha > 0.0)) {
    std::cerr << "rate certification failed at r = " << r << "\n";
    return 3;
  }
  std::ostringstream sum;
  sum << d.name << ": alpha " << cert.alpha << ", beta " << cert.beta
      << ", eps " << cert.eps << " at r " << r;
  emit(a, rate_report_json(cert, sos), sum.str());
  return 0;
}

int run_demo(const Args& a) {
  Args local = a;
  if (local.positional_demo.empty())
    throw std::invalid_argument("demo wants a name: example1, example2, "
                                "motor-position, motor-velocity");
  Demo d = resolve_input(local, true);
  auto law = design_switching(d.sys, d.lambda, resolved_xe_perp(d),
                              design_options(a));
  auto report = verify_certificate(law);
  const std::string dir = a.out.empty() ? "." : a.out;
  atomic_write(dir + "/" + d.name + "_report.json",
               law_report_json(law, report));
  std::cout << d.name << ": " << (report.all_passed ? "verified" : "NOT verified")
            << ", report " << dir << "/" << d.name << "_report.json\n";
  if (a.simulate) {
    auto traj = simulate_closed_loop(law, d.sim);
    std::ostringstream csv;
    write_csv(csv, traj);
    const std::string traj_path = dir + "/" + d.name + "_trajectory.csv";
    atomic_write(traj_path, csv.str());
    if (!d.sim.reference_schedule.empty())
      atomic_write(dir + "/" + d.name + "_events.jsonl",
                   events_json(d.sim.reference_schedule));
    auto metrics = compute_metrics(traj, 0.05);
    std::cout << d.name << ": final error " << metrics.final_error << ", "
              << metrics.switch_count << " switches, trajectory " << traj_path
              << "\n";
  }
  return report.all_passed ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  Args args;
  CLI::App app{"switched affine stabilization toolkit"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd, bool with_sim) {
    cmd->add_option("--system", args.system, "system JSON file");
    cmd->add_option("--demo", args.demo_name,
                    "built-in demo: example1, example2, motor-position, "
                    "motor-velocity");
    cmd->add_option("--lambda", args.lambda,
                    "convex weights, comma separated, rationals allowed "
                    "(1/3,1/3,1/3)");
    cmd->add_option("--xe-perp", args.xe_perp,
                    "nullspace coordinate of the target equilibrium");
    cmd->add_option("--out", args.out, "output path");
    cmd->add_option("--margin", args.margin, "minimum acceptable LMI margin");
    if (with_sim) {
      cmd->add_option("--x0", args.x0, "initial state, comma separated");
      cmd->add_option("--step", args.step, "sampling period");
      cmd->add_option("--horizon", args.horizon, "simulation length");
    }
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a system file");
  add_common(validate_cmd, false);
  auto* equilibria_cmd =
      app.add_subcommand("equilibria", "solve for the blended equilibrium");
  add_common(equilibria_cmd, false);
  auto* design_cmd =
      app.add_subcommand("design", "synthesize and verify a switching law");
  add_common(design_cmd, false);
  auto* simulate_cmd =
      app.add_subcommand("simulate", "design then run the sampled loop");
  add_common(simulate_cmd, true);
  auto* rate_cmd =
      app.add_subcommand("rate", "certify a local convergence rate");
  add_common(rate_cmd, false);
  rate_cmd->add_option("--r-grid", args.r_grid,
                       "level multipliers lo:hi:count, scaled by s_max(P)");
  rate_cmd->add_option("--beta", args.beta, "skip the SOS search, fix beta");
  auto* demo_cmd = app.add_subcommand("demo", "run a built-in fixture");
  demo_cmd->add_option("name", args.positional_demo, "demo name")->required();
  demo_cmd->add_option("--out", args.out, "output directory");
  demo_cmd->add_option("--margin", args.margin, "minimum acceptable LMI margin");
  demo_cmd->add_flag("--simulate", args.simulate, "also write a trajectory CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (validate_cmd->parsed()) return run_validate(args);
    if (equilibria_cmd->parsed()) return run_equilibria(args);
    if (design_cmd->parsed()) return run_design(args);
    if (simulate_cmd->parsed()) return run_simulate(args);
    if (rate_cmd->parsed()) return run_rate(args);
    if (demo_cmd->parsed()) return run_demo(args);
  } catch (const DesignError& e) {
    std::cerr << "design failure: " << to_string(e.kind) << ": " << e.what()
              << "\n";
    if (!args.out.empty()) {
      json j;
      j["error"] = to_string(e.kind);
      j["message"] = e.what();
      atomic_write(args.out, j.dump(2) + "\n");
    }
    return e.kind == DesignFailure::LmiInfeasible ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
