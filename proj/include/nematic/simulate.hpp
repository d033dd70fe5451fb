#pragma once

// Time loop: steps a state to t_end, samples diagnostics and tracks the
// discrete energy inequality.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nematic/diagnostics.hpp"
#include "nematic/dynamics.hpp"
#include "nematic/error.hpp"

namespace nematic {

using RecordSink = std::function<void(const EnergyRecord&, const SimState&)>;

struct RunOptions {
  long sample_every = 1;
  /// Evaluate the energy residual after every step, not just at samples.
  bool track_energy_law = false;
  /// Equilibrium used for the distance columns; may be null.
  const VectorField2D* reference = nullptr;
  std::vector<RecordSink> sinks;
};

struct RunSummary {
  SimState final_state;
  std::vector<EnergyRecord> records;
  long steps = 0;
  bool aborted = false;
  std::string abort_reason;
  /// Largest (E_hat_{k+1} - E_hat_k)/dt + D2_{k+1}/2 - r_{k+1}; only with track_energy_law.
  double max_energy_residual = -std::numeric_limits<double>::infinity();
  /// Largest single-step increase of E_hat; only with track_energy_law.
  double max_energy_increase = -std::numeric_limits<double>::infinity();
  double E_hat0 = 0.0;
  double max_abs_d = 0.0;
  long cfl_warnings = 0;
};

/// Steps until t >= t_end. A non-finite step ends the run with aborted set
/// and final_state holding the last good state; other errors propagate.
inline RunSummary run(const SimState& s0, double t_end, const RunOptions& opt = {}) {
  if (!(t_end > s0.t)) throw ParameterError("t_end must exceed the initial time");
  if (opt.sample_every < 1) throw ParameterError("sample_every must be positive");
  RunSummary out;
  SimState s = s0;
  EnergyRecord last = energy_record(s, opt.reference);
  out.E_hat0 = last.E_hat;
  out.max_abs_d = last.max_abs_d;
  auto emit = [&](const EnergyRecord& r) {
    out.records.push_back(r);
    for (const auto& sink : opt.sinks) sink(r, s);
  };
  emit(last);

  const double t_stop = t_end - 1e-9 * s0.dt;
  long k = 0;
  while (s.t < t_stop) {
    try {
      SimState n = step(s);
      s = std::move(n);
    } catch (const NonFiniteError& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    }
    ++k;
    const bool sample = k % opt.sample_every == 0;
    if (opt.track_energy_law || sample) {
      EnergyRecord r = energy_record(s, opt.reference);
      if (opt.track_energy_law) {
        out.max_energy_residual = std::max(out.max_energy_residual, energy_inequality_residual(last, r, s.dt));
        out.max_energy_increase = std::max(out.max_energy_increase, r.E_hat - last.E_hat);
      }
      out.max_abs_d = std::max(out.max_abs_d, r.max_abs_d);
      if (sample) emit(r);
      last = std::move(r);
    }
  }
  out.steps = k;
  out.cfl_warnings = s.cfl_warnings;
  out.final_state = std::move(s);
  return out;
}

}  // namespace nematic
