#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nematic/nematic.hpp"

namespace fs = std::filesystem;
using namespace nematic;
using namespace nematic::harness;

namespace {

constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kFail = 2;

int report(const RunManifest& m) {
  for (const auto& c : m.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
  std::cout << "outputs: " << m.output_dir << '\n';
  if (m.failed) {
    std::cerr << "error: " << m.error << '\n';
    return kError;
  }
  return m.pass() ? kPass : kFail;
}

std::vector<double> read_column(const std::string& path, const std::string& column, std::vector<double>& t) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("column '" + name + "' not found in '" + path + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ct = find("t"), cv = find(column);
  std::vector<double> v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw ConfigError("ragged row in '" + path + "'");
    t.push_back(std::stod(cells[ct]));
    v.push_back(std::stod(cells[cv]));
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D nematic liquid-crystal flow simulator and verification harness"};
  app.require_subcommand(1);
  std::string out_root;
  app.add_option("--out", out_root, "Output root directory (default: $NEMATIC_OUT or ./out)");

  std::string config;
  auto* run_cmd = app.add_subcommand("run", "Simulate the scenario described by a config file");
  run_cmd->add_option("config", config, "INI config")->required();

  auto* steady_cmd = app.add_subcommand("steady", "Solve the stationary problem for the limiting boundary datum");
  steady_cmd->add_option("config", config, "INI config")->required();
  int probes = 16;
  double delta = 1e-3;
  steady_cmd->add_option("--probes", probes, "Number of minimality probes");
  steady_cmd->add_option("--delta", delta, "H1 radius of the probes");

  auto* lift_cmd = app.add_subcommand("lifting-check", "Decay estimates of the boundary liftings");
  lift_cmd->add_option("config", config, "INI config")->required();

  auto* maj_cmd = app.add_subcommand("majorant", "Integrate the comparison ODE and report its blow-up time");
  maj_cmd->add_option("config", config, "INI config")->required();

  std::string csv, column;
  double tail = 0.5;
  auto* fit_cmd = app.add_subcommand("fit-rate", "Fit a power-law decay exponent to a CSV column");
  fit_cmd->add_option("csv", csv, "CSV file with a 't' column")->required();
  fit_cmd->add_option("column", column, "Column to fit")->required();
  fit_cmd->add_option("--tail", tail, "Fraction of samples used, counted from the end");

  auto* list_cmd = app.add_subcommand("list-presets", "List the built-in experiments");

  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "Run a built-in experiment");
  preset_cmd->add_option("name", preset_name, "Preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kError;
  }

  const fs::path root = out_root.empty() ? output_root() : fs::path(out_root);
  try {
    if (*run_cmd) {
      const ScenarioSpec spec = load_config(config);
      return report(run_scenario(spec, root / spec.name).manifest);
    }
    if (*lift_cmd) {
      ScenarioSpec spec = load_config(config);
      spec.lifting_only = true;
      return report(run_scenario(spec, root / spec.name).manifest);
    }
    if (*preset_cmd) return report(run_experiment(preset_name, root).manifest);
    if (*list_cmd) {
      for (const auto& p : presets()) std::cout << std::left << std::setw(24) << p.name << p.description << '\n';
      return kPass;
    }
    if (*steady_cmd) {
      const ScenarioSpec spec = load_config(config);
      const BoundaryTrace h = limiting_trace(spec);
      const Equilibrium e = solve_equilibrium(h, elliptic_lift(h, spec.solver_config()), spec.params, spec.tol.steady);
      std::cout << std::setprecision(10) << "residual " << e.residual << "\nE " << e.energy_E << "\nscript_E "
                << e.energy_script << "\nconverged " << (e.converged ? "yes" : "no") << '\n';
      if (e.converged && probes > 0) {
        const MinimizerReport r = local_minimizer_check(e, h, spec.params, probes, delta);
        std::cout << "verdict " << to_string(r.verdict) << "\nmin_energy_gap " << r.min_energy_gap << '\n';
      }
      const fs::path dir = root / spec.name;
      fs::create_directories(dir);
      write_snapshot((dir / "equilibrium.snap").string(), 0.0, e.psi);
      std::cout << "outputs: " << dir.string() << '\n';
      return e.converged ? kPass : kFail;
    }
    if (*maj_cmd) {
      const ScenarioSpec spec = load_config(config);
      const MajorantSpec& ms = spec.majorant;
      MajorantProblem p;
      p.C_star = ms.C_star;
      p.Y0 = ms.Y0;
      if (ms.R3 != 0.0) p.R3 = [r = ms.R3](double) { return r; };
      const MajorantResult r = solve_majorant(p, ms.dt, ms.y_cap, ms.t_end);
      const fs::path dir = root / spec.name;
      fs::create_directories(dir);
      std::ofstream os(dir / "majorant.csv");
      os << "t,Y\n" << std::setprecision(17);
      for (std::size_t k = 0; k < r.t.size(); ++k) os << r.t[k] << ',' << r.Y[k] << '\n';
      std::cout << std::setprecision(8);
      if (r.crossed) std::cout << "T_max " << r.T_max << "\nT_cap " << r.T_cap << '\n';
      else std::cout << "no blow-up before t = " << ms.t_end << '\n';
      std::cout << "outputs: " << dir.string() << '\n';
      return kPass;
    }
    if (*fit_cmd) {
      std::vector<double> t;
      const std::vector<double> v = read_column(csv, column, t);
      const DecayFit f = fit_decay_exponent(t, v, tail);
      std::cout << std::fixed << std::setprecision(3) << f.exponent << '\n'
                << std::defaultfloat << std::setprecision(6) << "r2 " << f.r2 << '\n';
      if (f.super_polynomial) std::cout << "super-polynomial decay: exponent grows along the window\n";
      return kPass;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
