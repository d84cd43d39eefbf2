#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "mwforge/synth.hpp"

namespace mwforge {

/// Rotating-frame Bloch vector; w = -1 is the ground state.
struct BlochState {
  double u = 0.0;
  double v = 0.0;
  double w = -1.0;

  double norm() const;
  double excited_population() const { return (1.0 + w) / 2.0; }
};

/// Rabi frequency Omega(t) >= 0 and phase phi(t), both either sampled on a
/// uniform grid or given as functions, plus a detuning Delta(t) (rad/s).
class DriveField {
 public:
  enum class Interpolation { Hold, Linear };
  /// Which limit to take exactly on a sample boundary.
  enum class Side { Right, Left };

  static DriveField constant(double rabi, double phase, double detuning);
  static DriveField sampled(std::vector<double> rabi, std::vector<double> phase, double sample_period,
                            double detuning, Interpolation interp = Interpolation::Hold);
  /// Function drives carry caller-supplied bounds for the step-size check.
  static DriveField from_functions(std::function<double(double)> rabi, std::function<double(double)> phase,
                                   std::function<double(double)> detuning, double max_rabi,
                                   double max_abs_detuning);

  /// Drive seen by the atom from a synthesized envelope: demodulated at
  /// f_ref_hz, |env| scaled so amplitude 1.0 gives rabi_peak, phase -arg(env)
  /// (the lower mixing sideband conjugates the DDS phase).
  static DriveField from_envelope(const ComplexEnvelope& envelope, double f_ref_hz, double rabi_peak,
                                  double detuning);

  double rabi(double t, Side side = Side::Right) const;
  double phase(double t, Side side = Side::Right) const;
  double detuning(double t) const;

  /// Upper bounds used for the step-size check.
  double max_rabi() const { return max_rabi_; }
  double max_abs_detuning() const { return max_detuning_; }
  /// Length of the sampled record, 0 for function drives.
  double sampled_duration() const;
  double sample_period() const { return period_; }

 private:
  double sample(const std::vector<double>& data, double t, Side side) const;

  std::vector<double> rabi_samples_;
  std::vector<double> phase_samples_;
  double period_ = 0.0;
  Interpolation interp_ = Interpolation::Hold;
  std::function<double(double)> rabi_fn_;
  std::function<double(double)> phase_fn_;
  std::function<double(double)> detuning_fn_;
  double detuning_ = 0.0;
  double max_rabi_ = 0.0;
  double max_detuning_ = 0.0;
};

/// Largest step allowed for a drive: 2 pi / (50 max(Omega, |Delta|)).
double max_step(const DriveField& drive);

struct Trajectory {
  std::vector<double> t;
  std::vector<BlochState> states;
  const BlochState& final() const { return states.back(); }
};

/// Fixed-step RK4 on
///   du/dt = -Delta v - Omega sin(phi) w
///   dv/dt =  Delta u + Omega cos(phi) w
///   dw/dt =  Omega sin(phi) u - Omega cos(phi) v
/// with the step shortened to duration / ceil(duration / dt), followed by a
/// projection back onto the unit sphere. Records every record_stride-th step
/// plus the final state. StepTooLarge when dt exceeds max_step.
Trajectory evolve(const BlochState& initial, const DriveField& drive, double duration, double dt,
                  std::size_t record_stride = 1, bool project = true);

struct ProfilePoint {
  double detuning;
  double excited;
};

/// Excitation versus detuning for a pulse whose amplitude samples (hold,
/// sample_period apart) are scaled to the given on-resonance area.
std::vector<ProfilePoint> excitation_profile(const std::vector<double>& envelope, double sample_period,
                                             double area, const std::vector<double>& detunings,
                                             std::size_t substeps = 8);

struct CompositePulse {
  double area;   // rad
  double phase;  // rad
};

struct FidelityMap {
  std::vector<double> amp_errors;  // rows
  std::vector<double> detunings;   // columns, rad/s
  std::vector<std::vector<double>> fidelity;
};

/// Runs the sequence back to back (no gaps) at Omega = rabi (1 + eps) from
/// the ground state and reports (1 + w) / 2.
FidelityMap composite_scan(const std::vector<CompositePulse>& sequence, const std::vector<double>& amp_errors,
                           const std::vector<double>& detunings, double rabi);

/// Shift of the dressed level connected to the bare state.
double dressed_shift(double rabi, double detuning);

/// max over t of |d theta/dt| / sqrt(Omega^2 + Delta^2), theta = atan2(Omega, Delta) / 2,
/// probed on n points over [0, duration]. UndefinedMixingAngle where
/// Omega = Delta = 0.
double adiabaticity(const DriveField& ramp, double duration, std::size_t n_probe = 20001);

}  // namespace mwforge
