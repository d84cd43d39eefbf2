#pragma once

// Bit-accurate model of one DDS channel: register quantization and RAM
// waveform data. Register widths follow the AD9910 (32-bit FTW, 14-bit ASF,
// 16-bit POW, 1024-word RAM split into eight profiles).

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mwforge {

inline constexpr int kFtwBits = 32;
inline constexpr int kAsfBits = 14;
inline constexpr int kPowBits = 16;
inline constexpr std::uint32_t kAsfFullScale = (1u << kAsfBits) - 1;  // amp = 1.0
inline constexpr std::uint32_t kPowModulus = 1u << kPowBits;
inline constexpr std::size_t kRamDepth = 1024;
inline constexpr std::size_t kProfileCount = 8;
inline constexpr std::int64_t kGridNs = 4;

struct SysClock {
  double f_sys = 1e9;  // Hz

  double nyquist() const { return f_sys / 2.0; }
};

struct RegisterWords {
  std::uint32_t ftw = 0;
  std::uint16_t asf = 0;
  std::uint16_t pow = 0;

  auto operator<=>(const RegisterWords&) const = default;
};

/// Floating-point view of a channel's registers.
struct ChannelSettings {
  double frequency_hz = 0.0;
  double amplitude = 0.0;  // fraction of full scale
  double phase_rad = 0.0;
};

/// Round-to-nearest (ties away from zero) quantization of a channel setting.
/// Throws FrequencyOutOfRange unless 0 <= f and the quantized frequency stays
/// below Nyquist; AmplitudeOutOfRange unless 0 <= amp <= 1.
RegisterWords quantize_settings(double frequency_hz, double amplitude, double phase_rad,
                                const SysClock& clk = {});

ChannelSettings dequantize(const RegisterWords& words, const SysClock& clk = {});

/// Throws if asf exceeds 14 bits or ftw reaches Nyquist.
void validate(const RegisterWords& words, const SysClock& clk = {});

double frequency_step(const SysClock& clk = {});
double amplitude_step();
double phase_step();

std::uint32_t ftw_from_frequency(double frequency_hz, const SysClock& clk = {});
std::uint16_t asf_from_amplitude(double amplitude);
std::uint16_t pow_from_phase(double phase_rad);

// ---------------------------------------------------------------------------
// RAM

enum class RamMode { Frequency, Amplitude, Phase, Polar };

std::string_view to_string(RamMode mode);
RamMode ram_mode_from_string(std::string_view name);

// 32-bit RAM word layouts:
//   frequency  FTW in [31:0]
//   phase      POW in [31:16]
//   amplitude  ASF in [31:18]
//   polar      POW in [31:16], ASF in [15:2]
std::uint32_t pack_frequency_word(std::uint32_t ftw);
std::uint32_t pack_phase_word(std::uint16_t pow);
std::uint32_t pack_amplitude_word(std::uint16_t asf);
std::uint32_t pack_polar_word(std::uint16_t asf, std::uint16_t pow);

/// Contribution of one RAM word to the channel output. Fields that the mode
/// does not drive keep their neutral value (amplitude 1, phase 0) and
/// `drives_frequency` tells whether `frequency_hz` replaces the FTW register.
struct RamSample {
  double amplitude = 1.0;
  double phase_rad = 0.0;
  double frequency_hz = 0.0;
  bool drives_frequency = false;
};

RamSample decode_word(RamMode mode, std::uint32_t word, const SysClock& clk = {});

struct RamProfile {
  RamMode mode = RamMode::Amplitude;
  std::vector<std::uint32_t> words;
  std::int64_t step_ns = kGridNs;

  std::int64_t duration_ns() const { return static_cast<std::int64_t>(words.size()) * step_ns; }

  auto operator<=>(const RamProfile&) const = default;
};

/// Throws CapacityExceeded or GridViolation if the profile cannot be played.
void validate(const RamProfile& profile);

enum class WindowKind { Rectangular, LinearEdges, Blackman };

std::string_view to_string(WindowKind kind);

struct Window {
  WindowKind kind = WindowKind::Rectangular;
  std::int64_t edge_ns = 0;  // LinearEdges only; 0 selects duration / 5
};

struct PolarPoint {
  double amplitude = 0.0;
  double phase_rad = 0.0;
};

/// A named window, or explicit samples in the units of the RAM mode (Hz,
/// amplitude fraction, radians), or amplitude/phase pairs for polar mode.
using Shape = std::variant<Window, std::vector<double>, std::vector<PolarPoint>>;

/// 0.42 - 0.5 cos(2 pi x) + 0.08 cos(4 pi x) on x in [0, 1].
double blackman(double x);

/// Window values at the `duration_ns / step_ns` word positions, peak
/// normalized to 1. Word k sits at x = k / (n - 1) so both edges are sampled.
std::vector<double> sample_window(const Window& window, std::int64_t duration_ns,
                                  std::int64_t step_ns);

RamProfile build_ram_profile(const Shape& shape, std::int64_t duration_ns, std::int64_t step_ns,
                             RamMode mode, const SysClock& clk = {});

}  // namespace mwforge
