#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mwforge {

enum class NoiseKind { Phase, Amplitude };

struct NoisePoint {
  double f_hz;
  double level_dbc_hz;
  bool floor = false;  // at the measurement sensitivity limit
};

/// Single-sideband level L(f) in dBc/Hz on a log-log (power-law) grid.
/// S(f) = 2 * 10^(L/10) is the one-sided spectral density.
struct NoiseSpectrum {
  NoiseKind kind = NoiseKind::Phase;
  std::vector<NoisePoint> points;

  double f_min() const { return points.front().f_hz; }
  double f_max() const { return points.back().f_hz; }
  /// L(f); -inf outside the table.
  double level_at(double f_hz) const;
};

/// Checks >= 2 points, f strictly increasing and positive.
void validate(const NoiseSpectrum& spectrum);

/// CSV with header f_hz,level_dbc_hz[,floor]; '#' lines are comments.
NoiseSpectrum load_noise_table(std::string_view csv, NoiseKind kind = NoiseKind::Phase);
NoiseSpectrum load_noise_file(const std::string& path, NoiseKind kind = NoiseKind::Phase);
std::string to_csv(const NoiseSpectrum& spectrum);

/// sqrt(2 * integral of 10^(L/10) over [f1, f2]) with the exact power-law
/// integral per segment. RangeOutsideTable when [f1, f2] is not covered.
double integrate_rms(const NoiseSpectrum& spectrum, double f1_hz, double f2_hz);

NoiseSpectrum scale_multiplied(const NoiseSpectrum& spectrum, double factor);

/// Power sum on the union grid, restricted to the common range.
NoiseSpectrum combine(const std::vector<NoiseSpectrum>& spectra);

struct SynthesisOptions {
  bool extend_flat = false;  // hold the end levels outside the table instead of zero
};

/// Real time series with one-sided PSD S(f) = 2 * 10^(L/10). The length is
/// duration * sample_rate rounded up to a power of two. Deterministic per seed.
std::vector<double> synthesize_noise(const NoiseSpectrum& spectrum, double duration_s, double sample_rate,
                                     std::uint64_t seed, const SynthesisOptions& options = {});

struct NoiseBudget {
  std::map<std::string, NoiseSpectrum> sources;  // ref_100MHz, lo_7GHz, dds, output_path

  struct Row {
    std::string name;
    double rms;
  };
  std::vector<Row> integrate(double f1_hz, double f2_hz) const;
  /// Name of the source with the highest non-floor level at f, or "" if none.
  std::string dominant_at(double f_hz, const std::vector<std::string>& names) const;
};

/// JSON {"sources": {"name": "file.csv", ...}}; paths relative to base_dir.
NoiseBudget load_budget(const std::string& path);

}  // namespace mwforge
