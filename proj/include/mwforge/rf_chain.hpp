#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwforge/synth.hpp"

namespace mwforge {

enum class MixerKind { SingleSideband, DoubleBalanced };
enum class PathName { Pulse, Dressing };

std::string_view to_string(MixerKind kind);
std::string_view to_string(PathName path);

/// Bandpass model. Inside the passband the gain is a single sinusoid in
/// frequency (zero at the center, +-ripple_inner_db extremum at
/// +-ripple_inner_hz). From the passband edge the attenuation rises
/// log-frequency linearly to ripple_outer_db at ripple_outer_hz, then to
/// stop_atten_db at stop_offset_hz, and stays flat beyond.
struct FilterConfig {
  double f_center = 6.835e9;
  double passband_width = 20e6;
  double ripple_inner_db = 0.2;
  double ripple_inner_hz = 5e6;
  double ripple_outer_db = 1.0;
  double ripple_outer_hz = 25e6;
  double stop_atten_db = 50.0;
  double stop_offset_hz = 250e6;
};

/// Attenuation A in dB (positive attenuates) at offset |f - f_center|.
double attenuation_db(double offset_hz, const FilterConfig& filter = {});

/// Gain in dB at absolute frequency f (= -A).
double passband_gain(double f_hz, const FilterConfig& filter = {});

struct ChainConfig {
  double f_lo = 7e9;
  MixerKind mixer_kind = MixerKind::SingleSideband;
  double lo_leak_dbc = -67.0;    // pre-filter
  double usb_level_dbc = -87.0;  // pre-filter
  FilterConfig filter;
  double switch_isolation_db = 40.0;
  double amplifier_gain_db = 0.0;
  double output_power_w = 0.0;  // metadata only
  PathName path = PathName::Pulse;
};

/// Measured post-filter spur levels for each mixer type.
struct SpurTargets {
  double lo_dbc;
  double usb_dbc;
};
SpurTargets default_targets(MixerKind kind);

void validate(const ChainConfig& cfg);

struct Spur {
  std::string label;  // "carrier", "lo", "usb"
  double f_hz;
  double level_dbc;
};

/// Carrier at f_LO - f_dds (0 dBc), LO leakage at f_LO, upper sideband at
/// f_LO + f_dds, all pre-filter.
std::vector<Spur> mix_spurs(double f_dds, const ChainConfig& cfg);

/// Attenuates each component; levels stay referenced to the unfiltered
/// carrier. Use relative_to_carrier to re-reference.
std::vector<Spur> apply_filter(std::vector<Spur> spurs, const FilterConfig& filter);
std::vector<Spur> relative_to_carrier(std::vector<Spur> spurs);

/// Sets the pre-filter spur levels so the filtered totals, relative to the
/// filtered carrier, hit the targets at this f_dds.
ChainConfig calibrate(ChainConfig cfg, double f_dds, const SpurTargets& targets);

struct SpectrumBin {
  double f_hz;
  double power_dbc;
};

struct SpectrumEstimate {
  std::vector<SpectrumBin> bins;  // ascending in f
  double rbw = 0.0;
  double carrier_power = 0.0;  // linear, peak bin before normalization
  double enbw_bins = 1.0;

  /// Sum of all bin powers, linear, in the envelope's units (mean square).
  double total_power() const;
  /// Strongest bin within +-half_width_hz of f.
  SpectrumBin peak_near(double f_hz, double half_width_hz) const;
};

SpectrumEstimate apply_filter(SpectrumEstimate spectrum, const FilterConfig& filter);

/// Adds the chain's spurs to the baseband envelope: the LO leak as a 0 Hz
/// tone of amplitude g_lo * peak|env|, the upper sideband as g_usb * conj(env).
std::vector<std::complex<double>> inject_spurs(const std::vector<std::complex<double>>& envelope,
                                               const ChainConfig& cfg);

/// Multiplies the envelope by exp(i phi(t)); phi must have one value per sample.
void apply_phase_noise(ComplexEnvelope& envelope, const std::vector<double>& phi);

/// Welch spectrum of envelope + spurs, mapped to RF by f = f_LO - f_baseband,
/// filtered per bin and normalized so the carrier peak reads 0 dBc.
/// InsufficientLength if rbw < sample_rate / length.
SpectrumEstimate output_spectrum(const ComplexEnvelope& envelope, const ChainConfig& cfg, double rbw);

/// JSON chain config. Keys mirror ChainConfig plus an optional
/// "calibrate_to": {"f_dds", "lo_dbc", "usb_dbc"} block; when present (or
/// when spur levels are absent) the pre-filter levels are calibrated.
ChainConfig chain_config_from_json(std::string_view text);

struct RippleRow {
  double f_hz;
  double gain_db;
  double amplitude_correction;  // multiply requested amplitude by this
};
std::vector<RippleRow> ripple_table(const FilterConfig& filter, double span_hz, double step_hz);

}  // namespace mwforge
