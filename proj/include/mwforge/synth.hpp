#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "mwforge/dds.hpp"
#include "mwforge/schedule.hpp"

namespace mwforge {

/// Carrier-bearing complex output of the DDS at f_DDS, sampled uniformly.
/// |sample| is the fraction of full-scale amplitude.
struct ComplexEnvelope {
  double sample_rate = 0.0;  // Hz
  double t0_ns = 0.0;
  std::vector<std::complex<double>> samples;

  double time_s(std::size_t i) const { return t0_ns * 1e-9 + static_cast<double>(i) / sample_rate; }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

enum class PhaseMode {
  Coherent,    // phase = 2 pi f t + offset, t from the schedule origin
  Continuous,  // accumulator keeps running through frequency changes
};

struct SynthOptions {
  PhaseMode phase_mode = PhaseMode::Coherent;
  /// Residual output while the switch is open, dB relative to the on state.
  double switch_leakage_db = -std::numeric_limits<double>::infinity();
  bool linear_switch_edges = false;
  double switch_edge_ns = 25.0;
  LatencyConfig latency{};
};

/// Plays a validated schedule. RAM words are held for `step_ns`; after the
/// last word the output holds it until the playback is stopped. Throws
/// UnvalidatedSchedule if validate_timing reports any violation and
/// NyquistViolation if the sample rate is below 4x the highest programmed
/// frequency.
ComplexEnvelope synthesize(const EventSchedule& schedule, double sample_rate,
                           const SysClock& clk = {}, const SynthOptions& options = {});

/// Highest frequency any register write or frequency-mode RAM word programs.
double max_programmed_frequency(const EventSchedule& schedule, const SysClock& clk = {});

/// Removes a reference carrier: z(t) * exp(-i 2 pi f_ref t).
std::vector<std::complex<double>> demodulate(const ComplexEnvelope& envelope, double f_ref_hz);

}  // namespace mwforge
