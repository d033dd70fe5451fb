#pragma once

// Preset registry, experiment driver and run manifests. Every experiment
// writes into its own directory below the output root ($NEMATIC_OUT or
// ./out).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nematic/diagnostics.hpp"
#include "nematic/harness/config.hpp"
#include "nematic/harness/hypotheses.hpp"
#include "nematic/harness/scenario.hpp"
#include "nematic/lifting.hpp"
#include "nematic/majorant.hpp"
#include "nematic/simulate.hpp"
#include "nematic/steady.hpp"

namespace nematic::harness {

inline constexpr const char* kVersion = "0.4.0";

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunManifest {
  ScenarioSpec scenario;
  std::string version = kVersion;
  std::string output_dir;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
  std::vector<CheckResult> checks;
  std::map<std::string, double> metrics;
  std::vector<std::string> notes;
  bool failed = false;
  std::string error;

  bool pass() const {
    if (failed) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string short_fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + v[k];
  return s;
}

}  // namespace detail

/// The scenario as an INI document accepted by load_config.
inline void write_config(std::ostream& os, const ScenarioSpec& s) {
  using detail::fmt;
  os << "[grid]\nnx = " << s.nx << "\nny = " << s.ny << "\nlx = " << fmt(s.lx) << "\nly = " << fmt(s.ly) << "\n\n";
  os << "[params]\nnu = " << fmt(s.params.nu) << "\nlambda = " << fmt(s.params.lambda) << "\neta = " << fmt(s.params.eta)
     << "\neps = " << fmt(s.params.eps) << "\n\n";
  os << "[forcing]\nfamily = " << to_string(s.family) << "\ngamma = " << fmt(s.gamma) << "\na_h = " << fmt(s.a_h)
     << "\na_g = " << fmt(s.a_g) << "\nkappa = " << fmt(s.kappa) << "\nwinding = " << s.winding
     << "\nsigma1 = " << fmt(s.sigma1) << "\nsigma2 = " << fmt(s.sigma2) << "\nM1 = " << fmt(s.M1)
     << "\nM2 = " << fmt(s.M2) << "\nM3 = " << fmt(s.M3) << "\n\n";
  os << "[run]\nname = " << s.name << "\nmode = " << (s.lifting_only ? "lifting" : "dynamics") << "\nt_end = " << fmt(s.t_end) << "\ndt = " << fmt(s.dt)
     << "\nsample_every = " << s.sample_every << "\nseed = " << s.seed << "\nv0_amplitude = " << fmt(s.v0_amplitude)
     << "\nd0_amplitude = " << fmt(s.d0_amplitude)
     << "\ncoupling = " << (s.coupling == CouplingForm::chemical_potential ? "chemical-potential" : "tensor")
     << "\nsolver = " << (s.solver == SolverMethod::direct ? "direct" : "iterative")
     << "\ntrack_energy_law = " << (s.track_energy_law ? "true" : "false") << "\nchecks = " << detail::join(s.checks)
     << "\n\n";
  const Tolerances& t = s.tol;
  os << "[tolerances]\nenergy = " << fmt(t.energy) << "\nmax_principle = " << fmt(t.max_principle)
     << "\ngrad_v = " << fmt(t.grad_v) << "\nstationary = " << fmt(t.stationary) << "\neq_distance = " << fmt(t.eq_distance)
     << "\nconverge_H1 = " << fmt(t.converge_H1) << "\nrate = " << fmt(t.rate) << "\nstability_H1 = " << fmt(t.stability_H1)
     << "\nenergy_gap = " << fmt(t.energy_gap) << "\nsteady = " << fmt(t.steady) << "\nrate_tail = " << fmt(t.rate_tail)
     << "\n\n";
  const MajorantSpec& m = s.majorant;
  os << "[majorant]\nC_star = " << fmt(m.C_star) << "\nY0 = " << fmt(m.Y0) << "\nR3 = " << fmt(m.R3) << "\ndt = " << fmt(m.dt)
     << "\ny_cap = " << fmt(m.y_cap) << "\nt_end = " << fmt(m.t_end) << "\n";
}

/// Manifest: the scenario sections followed by a [manifest] section, so the
/// file can be fed back to `run`.
inline void write_manifest(std::ostream& os, const RunManifest& m) {
  write_config(os, m.scenario);
  os << "\n[manifest]\nversion = " << m.version << "\nstatus = " << (m.failed ? "error" : m.pass() ? "pass" : "fail")
     << "\nwall_seconds = " << detail::short_fmt(m.wall_seconds) << "\noutput_dir = " << m.output_dir
     << "\noutputs = " << detail::join(m.outputs) << '\n';
  if (m.failed) os << "error = " << m.error << '\n';
  for (const auto& [k, v] : m.metrics) os << "metric." << k << " = " << detail::fmt(v) << '\n';
  for (const auto& c : m.checks)
    os << "check." << c.name << " = " << (c.pass ? "pass" : "fail") << (c.detail.empty() ? "" : " ; " + c.detail) << '\n';
  for (std::size_t k = 0; k < m.notes.size(); ++k) os << "note." << k << " = " << m.notes[k] << '\n';
}

inline std::filesystem::path output_root() {
  const char* env = std::getenv("NEMATIC_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("out");
}

// ---------------------------------------------------------------------------
// Presets

struct Preset {
  std::string name;
  std::string description;
  ScenarioSpec spec;
};

inline std::vector<Preset> presets() {
  std::vector<Preset> out;
  {
    ScenarioSpec s;
    s.name = "energy-law-autonomous";
    s.family = Family::autonomous;
    s.t_end = 5.0;
    s.dt = 0.0;
    s.sample_every = 200;
    s.track_energy_law = true;
    s.checks = {"energy-law", "max-principle", "comparison"};
    out.push_back({s.name, "autonomous data, energy inequality at every step", s});
  }
  {
    ScenarioSpec s;
    s.name = "omega-limit";
    s.family = Family::autonomous;
    s.t_end = 50.0;
    s.dt = 1e-3;
    s.sample_every = 100;
    s.checks = {"max-principle", "omega-limit", "gronwall", "comparison"};
    out.push_back({s.name, "autonomous long run, convergence to a stationary state", s});
  }
  {
    ScenarioSpec s;
    s.name = "rate-gamma2";
    s.family = Family::polynomial_decay;
    s.gamma = 2.0;
    s.a_h = 0.3;
    s.a_g = 0.1;
    s.t_end = 200.0;
    s.dt = 2e-3;
    s.sample_every = 500;
    s.checks = {"max-principle", "rate", "comparison"};
    out.push_back({s.name, "polynomially decaying data, convergence rate", s});
  }
  {
    ScenarioSpec s;
    s.name = "lifting-check";
    s.family = Family::polynomial_decay;
    s.gamma = 2.0;
    s.a_h = 0.3;
    s.a_g = 0.0;
    s.lifting_only = true;
    s.t_end = 40.0;
    s.dt = 1e-3;
    s.sample_every = 100;
    s.checks = {};
    out.push_back({s.name, "liftings only, decay estimates of the caloric extension", s});
  }
  {
    ScenarioSpec s;
    s.name = "minimizer-perturbation";
    s.family = Family::minimizer_perturbation;
    s.gamma = 2.0;
    s.sigma1 = 0.05;
    s.sigma2 = 0.05;
    s.M1 = 0.01;
    s.M2 = 1e-4;
    s.M3 = 0.01;
    s.t_end = 20.0;
    s.dt = 1e-3;
    s.sample_every = 50;
    s.checks = {"max-principle", "minimizer-stability", "comparison"};
    out.push_back({s.name, "small perturbation of a local minimizer", s});
  }
  return out;
}

inline Preset find_preset(const std::string& name) {
  std::string names;
  for (const auto& p : presets()) {
    if (p.name == name) return p;
    names += (names.empty() ? "" : ", ") + p.name;
  }
  throw ConfigError("unknown preset '" + name + "'; available: " + names);
}

// ---------------------------------------------------------------------------
// Driver

struct ExperimentResult {
  RunManifest manifest;
  std::vector<EnergyRecord> records;
  std::vector<LiftingSample> lifting;
};

namespace detail {

inline bool wants(const ScenarioSpec& s, const std::string& check) {
  return std::find(s.checks.begin(), s.checks.end(), check) != s.checks.end();
}

inline void add(RunManifest& m, const std::string& name, bool pass, const std::string& detail) {
  m.checks.push_back({name, pass, detail});
}

inline void run_lifting_experiment(const ScenarioSpec& spec, const std::filesystem::path& dir, ExperimentResult& res) {
  RunManifest& m = res.manifest;
  const Grid g = spec.grid();
  const Forcing f = make_forcing(spec, spec.a_h, 0.0);
  const SolverConfig cfg = spec.solver_config();
  const double dt = spec.dt > 0.0 ? spec.dt : default_dt(g, spec.params);
  LiftingState s = make_lifting(f.trace(g, 0.0), 0.0, cfg);
  const long steps = std::lround(spec.t_end / dt);
  res.lifting.push_back(summarize(s));
  for (long k = 1; k <= steps; ++k) {
    s = parabolic_lift_step(s, f.trace(g, k * dt), dt, cfg);
    if (k % spec.sample_every == 0) res.lifting.push_back(summarize(s));
  }
  const LiftingReport r = lifting_diagnostics(res.lifting, spec.gamma);
  {
    std::ofstream os(dir / "lifting.csv");
    write_lifting_csv(os, res.lifting, r);
    m.outputs.push_back("lifting.csv");
  }
  m.metrics["dt_decay_exponent"] = r.dt_decay.exponent;
  m.metrics["grad_lap_tail_exponent"] = r.grad_lap_tail.exponent;
  m.metrics["lift_gap_constant"] = r.lift_gap.constant;
  m.metrics["final_dt_dP"] = r.final_dt_dP;
  m.metrics["max_identity_residual"] = r.max_identity_residual;
  add(m, "lift-gap", r.lift_gap.pass, "late ratio " + short_fmt(r.lift_gap.worst_late_ratio) + " vs calibrated " + short_fmt(r.lift_gap.constant));
  add(m, "lift-h2", r.lift_h2.pass, "late ratio " + short_fmt(r.lift_h2.worst_late_ratio) + " vs calibrated " + short_fmt(r.lift_h2.constant));
  add(m, "grad-lap-integral", r.grad_lap_integral.pass, "late ratio " + short_fmt(r.grad_lap_integral.worst_late_ratio) + " vs calibrated " + short_fmt(r.grad_lap_integral.constant));
  add(m, "dt-decay", r.dt_decay.pass, "exponent " + short_fmt(r.dt_decay.exponent) + " >= " + short_fmt(r.dt_decay.required));
  add(m, "grad-lap-tail", r.grad_lap_tail.pass, "exponent " + short_fmt(r.grad_lap_tail.exponent) + " >= " + short_fmt(r.grad_lap_tail.required));
  add(m, "final-dt", r.final_dt_pass, "||d_t d_P(t_end)|| = " + short_fmt(r.final_dt_dP));
  m.metrics["dt"] = dt;
}

inline void run_dynamic_experiment(const ScenarioSpec& spec, const std::filesystem::path& dir, ExperimentResult& res) {
  RunManifest& m = res.manifest;
  const Scenario sc = generate_scenario(spec);
  const Grid& g = sc.state.grid();
  m.metrics["dt"] = sc.state.dt;
  m.metrics["a_h"] = sc.a_h;
  m.metrics["a_g"] = sc.a_g;

  if (spec.family != Family::autonomous) {
    HypothesisOptions ho;
    if (spec.family == Family::minimizer_perturbation) {
      ho.M1 = spec.M1;
      ho.M2 = spec.M2;
      ho.M3 = spec.M3;
    }
    for (const auto& h : check_hypotheses(*sc.forcing, g, spec.gamma, ho)) {
      if (h.vacuous) continue;
      std::string d = "exponent " + short_fmt(h.fitted_exponent) + " >= " + short_fmt(h.required_exponent) +
                      ", C = " + short_fmt(h.constant);
      if (h.limit) d += " <= " + short_fmt(*h.limit);
      if (!h.note.empty()) d += " (" + h.note + ")";
      add(m, "hypothesis-" + h.name, h.pass, d);
    }
  }

  // Equilibrium for the limiting trace.
  Equilibrium eq = sc.psi_star ? *sc.psi_star
                               : solve_equilibrium(sc.h_inf, elliptic_lift(sc.h_inf, spec.solver_config()),
                                                   spec.params, spec.tol.steady);
  m.metrics["equilibrium_residual"] = eq.residual;
  if (!eq.converged) m.notes.push_back("equilibrium solve stopped at residual " + short_fmt(eq.residual));
  write_snapshot((dir / "equilibrium.snap").string(), 0.0, eq.psi);
  m.outputs.push_back("equilibrium.snap");

  std::ofstream csv(dir / "records.csv");
  write_energy_csv_header(csv);
  RunOptions ro;
  ro.sample_every = spec.sample_every;
  ro.track_energy_law = spec.track_energy_law || wants(spec, "energy-law");
  ro.reference = &eq.psi;
  ro.sinks.push_back([&csv](const EnergyRecord& r, const SimState&) { write_energy_csv_row(csv, r); });
  const RunSummary run_out = run(sc.state, spec.t_end, ro);
  csv.close();
  m.outputs.push_back("records.csv");
  const SimState& fin = run_out.final_state;
  {
    std::ofstream os(dir / "final.snap");
    write_snapshot(os, fin.t, {&fin.d[0], &fin.d[1], &fin.v[0], &fin.v[1], &fin.pi});
    m.outputs.push_back("final.snap");
  }
  res.records = run_out.records;
  m.metrics["steps"] = static_cast<double>(run_out.steps);
  m.metrics["cfl_warnings"] = static_cast<double>(run_out.cfl_warnings);
  m.metrics["max_abs_d"] = run_out.max_abs_d;
  if (run_out.aborted) {
    m.failed = true;
    m.error = "run aborted: " + run_out.abort_reason;
    return;
  }
  const EnergyRecord& last = run_out.records.back();

  if (wants(spec, "energy-law")) {
    const double tol = spec.tol.energy * (1.0 + run_out.E_hat0);
    m.metrics["max_energy_residual"] = run_out.max_energy_residual;
    m.metrics["max_energy_increase"] = run_out.max_energy_increase;
    add(m, "energy-law", run_out.max_energy_residual <= tol && run_out.max_energy_increase <= tol,
        "max residual " + short_fmt(run_out.max_energy_residual) + ", max increase " +
            short_fmt(run_out.max_energy_increase) + ", tol " + short_fmt(tol));
  }
  if (wants(spec, "max-principle")) {
    add(m, "max-principle", run_out.max_abs_d <= 1.0 + spec.tol.max_principle,
        "max |d| = " + fmt(run_out.max_abs_d));
  }
  if (wants(spec, "omega-limit")) {
    const double gv = std::sqrt(last.grad_v_sq);
    m.metrics["final_grad_v"] = gv;
    m.metrics["final_stationary_residual"] = last.residual_stationary;
    m.metrics["final_dist_L2"] = last.dist_d_L2;
    add(m, "omega-limit",
        gv <= spec.tol.grad_v && last.residual_stationary <= spec.tol.stationary && last.dist_d_L2 <= spec.tol.eq_distance,
        "||grad v|| = " + short_fmt(gv) + ", stationary residual " + short_fmt(last.residual_stationary) +
            ", ||d - psi|| = " + short_fmt(last.dist_d_L2));
  }
  if (wants(spec, "rate")) {
    RateModel rate = sc.rate;
    ConvergenceOptions co;
    co.tolerance = spec.tol.rate;
    co.tail_fraction = spec.tol.rate_tail;
    const ConvergenceReport c = convergence_report(run_out.records, fin.d, fin.v, eq, rate, co);
    m.metrics["final_dist_H1"] = c.dist_H1;
    m.metrics["fitted_exponent"] = c.fit_dist.exponent;
    m.metrics["predicted_exponent"] = c.predicted;
    m.metrics["theta_prime"] = rate.theta_prime;
    add(m, "convergence", c.dist_H1 <= spec.tol.converge_H1, "||d - psi||_H1 = " + short_fmt(c.dist_H1));
    add(m, "rate", c.rate_pass,
        "fitted " + short_fmt(c.fit_dist.exponent) + " >= predicted " + short_fmt(c.predicted) + " - " +
            short_fmt(co.tolerance) + (c.fit_dist.super_polynomial ? " (super-polynomial)" : ""));
  }
  if (wants(spec, "minimizer-stability")) {
    double sup = 0.0;
    for (const auto& r : run_out.records) sup = std::max(sup, r.dist_d_H1);
    const VectorField2D d_star = elliptic_lift(sc.h_inf, spec.solver_config());
    const double e_final = energy_script(fin.d, d_star, spec.params.eps);
    m.metrics["sup_dist_H1"] = sup;
    m.metrics["energy_gap"] = e_final - eq.energy_script;
    add(m, "minimizer-stability", sup <= spec.tol.stability_H1 && e_final <= eq.energy_script + spec.tol.energy_gap,
        "sup ||d - psi*||_H1 = " + short_fmt(sup) + ", energy gap " + short_fmt(e_final - eq.energy_script));
  }
  if (wants(spec, "gronwall")) {
    const double rho = std::min(1.0, 0.5 * (last.t - run_out.records.front().t));
    const GronwallVerdict v = gronwall_check_records(run_out.records, rho);
    m.metrics["gronwall_bound"] = v.bound;
    add(m, "gronwall", v.pass, "bound " + short_fmt(v.bound) + ", worst excess " + short_fmt(v.max_violation));
  }
  if (wants(spec, "comparison")) {
    const ComparisonVerdict v = comparison_check_records(run_out.records);
    m.metrics["majorant_C_star"] = v.C_star;
    add(m, "comparison", v.pass,
        "C* = " + short_fmt(v.C_star) + ", worst A_P / Y = " + short_fmt(v.worst_ratio) +
            (std::isfinite(v.T_cap) ? ", Y past cap at t = " + short_fmt(v.T_cap) : ""));
  }
}

}  // namespace detail

/// Runs a scenario and writes its outputs under `dir`. Errors are recorded in
/// the manifest rather than thrown.
inline ExperimentResult run_scenario(const ScenarioSpec& spec, const std::filesystem::path& dir) {
  ExperimentResult res;
  RunManifest& m = res.manifest;
  m.scenario = spec;
  m.output_dir = dir.string();
  const auto start = std::chrono::steady_clock::now();
  try {
    std::filesystem::create_directories(dir);
    if (spec.lifting_only) detail::run_lifting_experiment(spec, dir, res);
    else detail::run_dynamic_experiment(spec, dir, res);
  } catch (const std::exception& e) {
    m.failed = true;
    m.error = e.what();
  }
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream os(dir / "manifest.txt");
  write_manifest(os, m);
  return res;
}

inline ExperimentResult run_experiment(const std::string& name, const std::filesystem::path& root = output_root()) {
  const Preset p = find_preset(name);
  return run_scenario(p.spec, root / p.name);
}

}  // namespace nematic::harness
