#pragma once

// Scenario description and its INI form. Sections: [grid], [params],
// [forcing], [run], [tolerances], [majorant]. Unknown sections or keys are
// rejected with the offending name.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nematic/dynamics.hpp"
#include "nematic/error.hpp"
#include "nematic/linsolve.hpp"

namespace nematic::harness {

enum class Family { autonomous, polynomial_decay, minimizer_perturbation };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::autonomous: return "autonomous";
    case Family::polynomial_decay: return "polynomial-decay";
    case Family::minimizer_perturbation: return "minimizer-perturbation";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "autonomous") return Family::autonomous;
  if (s == "polynomial-decay") return Family::polynomial_decay;
  if (s == "minimizer-perturbation") return Family::minimizer_perturbation;
  throw ConfigError("forcing.family: unknown family '" + s + "'");
}

struct Tolerances {
  double energy = 1e-8;          ///< energy residual relative to 1 + E_hat(0)
  double max_principle = 5e-3;   ///< allowed excess of max |d| over 1
  double grad_v = 1e-6;          ///< final ||grad v||
  double stationary = 1e-5;      ///< final ||-Lap d + f(d)||
  double eq_distance = 1e-4;     ///< final ||d - psi||_{L2}
  double converge_H1 = 1e-3;     ///< final ||d - psi||_{H1}
  double rate = 0.15;            ///< allowed shortfall of the fitted exponent
  double stability_H1 = 0.5;     ///< sup ||d - psi*||_{H1}
  double energy_gap = 1e-6;      ///< final script-E excess over psi*
  double steady = 1e-10;         ///< stationary residual of the equilibrium
  double rate_tail = 0.5;        ///< tail fraction used by the rate fit
};

struct MajorantSpec {
  double C_star = 1.0;
  double Y0 = 1.0;
  double R3 = 0.0;
  double dt = 1e-3;
  double y_cap = 1e12;
  double t_end = 1e3;
};

struct ScenarioSpec {
  std::string name = "custom";
  int nx = 64, ny = 64;
  double lx = 1.0, ly = 1.0;
  PhysParams params{};

  Family family = Family::autonomous;
  double gamma = 2.0;
  double a_h = 0.3;
  double a_g = 0.1;
  /// Amplitude of the limiting boundary angle.
  double kappa = 0.8;
  /// Winding number of the limiting boundary angle around the boundary.
  int winding = 0;
  double sigma1 = 0.05, sigma2 = 0.05;
  double M1 = 0.01, M2 = 1e-4, M3 = 0.01;

  /// Lifting-only runs advance the boundary liftings without the flow.
  bool lifting_only = false;
  double t_end = 1.0;
  /// Zero selects the default rule.
  double dt = 0.0;
  long sample_every = 100;
  unsigned seed = 1;
  double v0_amplitude = 1.0;  ///< L2 norm of the initial velocity
  double d0_amplitude = 1.0;  ///< peak interior rotation angle of the initial director
  CouplingForm coupling = CouplingForm::chemical_potential;
  SolverMethod solver = SolverMethod::direct;
  bool track_energy_law = false;
  /// Comma-separated list of acceptance checks run on the trajectory.
  std::vector<std::string> checks{"max-principle"};

  Tolerances tol{};
  MajorantSpec majorant{};

  Grid grid() const { return Grid(nx, ny, lx, ly); }

  SolverConfig solver_config() const {
    return solver == SolverMethod::direct ? SolverConfig::direct() : SolverConfig::iterative();
  }

  void validate() const {
    (void)grid();
    params.validate();
    if (family != Family::autonomous && !(gamma > 0.0)) throw ParameterError("gamma must be positive");
    if (!(t_end > 0.0)) throw ParameterError("t_end must be positive");
    if (dt < 0.0) throw ParameterError("dt must be nonnegative");
    if (sample_every < 1) throw ParameterError("sample_every must be positive");
    if (v0_amplitude < 0.0 || d0_amplitude < 0.0) throw ParameterError("initial amplitudes must be nonnegative");
    if (family == Family::minimizer_perturbation && (!(sigma1 >= 0) || !(sigma2 >= 0) || M1 < 0 || M2 < 0 || M3 < 0))
      throw ParameterError("minimizer-perturbation bounds must be nonnegative");
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& raw) {
  std::istringstream is(raw);
  T v{};
  if (!(is >> v) || !(is >> std::ws).eof()) throw ConfigError(key + ": cannot parse '" + raw + "'");
  return v;
}

template <>
inline bool parse_value<bool>(const std::string& key, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
  throw ConfigError(key + ": cannot parse '" + raw + "' as a boolean");
}

}  // namespace detail

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> c = {"energy-law", "max-principle", "omega-limit", "rate",
                                             "minimizer-stability", "gronwall", "comparison"};
  return c;
}

/// Applies an INI tree on top of `spec`.
inline ScenarioSpec apply_config(const boost::property_tree::ptree& tree, ScenarioSpec spec) {
  using detail::parse_value;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto num = [](double& dst) -> Setter { return [&dst](const std::string& k, const std::string& v) { dst = parse_value<double>(k, v); }; };
  auto integer = [](auto& dst) -> Setter {
    return [&dst](const std::string& k, const std::string& v) {
      using T = std::remove_reference_t<decltype(dst)>;
      dst = parse_value<T>(k, v);
    };
  };
  std::map<std::string, std::map<std::string, Setter>> table;
  table["grid"] = {{"nx", integer(spec.nx)}, {"ny", integer(spec.ny)}, {"lx", num(spec.lx)}, {"ly", num(spec.ly)}};
  table["params"] = {{"nu", num(spec.params.nu)},
                     {"lambda", num(spec.params.lambda)},
                     {"eta", num(spec.params.eta)},
                     {"eps", num(spec.params.eps)}};
  table["forcing"] = {{"family", [&](const std::string&, const std::string& v) { spec.family = parse_family(v); }},
                      {"gamma", num(spec.gamma)},
                      {"a_h", num(spec.a_h)},
                      {"a_g", num(spec.a_g)},
                      {"kappa", num(spec.kappa)},
                      {"winding", integer(spec.winding)},
                      {"sigma1", num(spec.sigma1)},
                      {"sigma2", num(spec.sigma2)},
                      {"M1", num(spec.M1)},
                      {"M2", num(spec.M2)},
                      {"M3", num(spec.M3)}};
  table["run"] = {
      {"name", [&](const std::string&, const std::string& v) { spec.name = v; }},
      {"mode",
       [&](const std::string& k, const std::string& v) {
         if (v == "dynamics") spec.lifting_only = false;
         else if (v == "lifting") spec.lifting_only = true;
         else throw ConfigError(k + ": expected dynamics or lifting, got '" + v + "'");
       }},
      {"t_end", num(spec.t_end)},
      {"dt", num(spec.dt)},
      {"sample_every", integer(spec.sample_every)},
      {"seed", integer(spec.seed)},
      {"v0_amplitude", num(spec.v0_amplitude)},
      {"d0_amplitude", num(spec.d0_amplitude)},
      {"track_energy_law", [&](const std::string& k, const std::string& v) { spec.track_energy_law = parse_value<bool>(k, v); }},
      {"coupling",
       [&](const std::string& k, const std::string& v) {
         if (v == "chemical-potential") spec.coupling = CouplingForm::chemical_potential;
         else if (v == "tensor") spec.coupling = CouplingForm::tensor;
         else throw ConfigError(k + ": expected chemical-potential or tensor, got '" + v + "'");
       }},
      {"solver",
       [&](const std::string& k, const std::string& v) {
         if (v == "direct") spec.solver = SolverMethod::direct;
         else if (v == "iterative") spec.solver = SolverMethod::conjugate_gradient;
         else throw ConfigError(k + ": expected direct or iterative, got '" + v + "'");
       }},
      {"checks",
       [&](const std::string& k, const std::string& v) {
         spec.checks = detail::split_list(v);
         for (const auto& c : spec.checks)
           if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
             throw ConfigError(k + ": unknown check '" + c + "'");
       }},
  };
  table["tolerances"] = {{"energy", num(spec.tol.energy)},
                         {"max_principle", num(spec.tol.max_principle)},
                         {"grad_v", num(spec.tol.grad_v)},
                         {"stationary", num(spec.tol.stationary)},
                         {"eq_distance", num(spec.tol.eq_distance)},
                         {"converge_H1", num(spec.tol.converge_H1)},
                         {"rate", num(spec.tol.rate)},
                         {"stability_H1", num(spec.tol.stability_H1)},
                         {"energy_gap", num(spec.tol.energy_gap)},
                         {"steady", num(spec.tol.steady)},
                         {"rate_tail", num(spec.tol.rate_tail)}};
  table["majorant"] = {{"C_star", num(spec.majorant.C_star)}, {"Y0", num(spec.majorant.Y0)},
                       {"R3", num(spec.majorant.R3)},         {"dt", num(spec.majorant.dt)},
                       {"y_cap", num(spec.majorant.y_cap)},   {"t_end", num(spec.majorant.t_end)}};

  for (const auto& [section, body] : tree) {
    // Run manifests carry their results in this section.
    if (section == "manifest") continue;
    auto sec = table.find(section);
    if (sec == table.end()) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      auto it = sec->second.find(key);
      if (it == sec->second.end()) throw ConfigError("unknown key '" + full + "'");
      it->second(full, node.get_value<std::string>());
    }
  }
  try {
    spec.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return spec;
}

inline ScenarioSpec parse_config(std::istream& is, ScenarioSpec base = {}) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  return apply_config(tree, std::move(base));
}

inline ScenarioSpec load_config(const std::string& path, ScenarioSpec base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace nematic::harness
