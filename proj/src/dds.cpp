#include "mwforge/dds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwforge/error.hpp"

namespace mwforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFtwModulus = 4294967296.0;  // 2^32
constexpr std::uint64_t kNyquistFtw = 1ull << (kFtwBits - 1);

}  // namespace

std::uint32_t ftw_from_frequency(double frequency_hz, const SysClock& clk) {
  if (!(clk.f_sys > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "system clock must be positive");
  }
  if (!(frequency_hz >= 0.0) || frequency_hz >= clk.nyquist()) {
    throw Error(ErrorCode::FrequencyOutOfRange,
                std::to_string(frequency_hz) + " Hz outside [0, " +
                    std::to_string(clk.nyquist()) + ") Hz");
  }
  const auto ftw = static_cast<std::uint64_t>(std::llround(frequency_hz / clk.f_sys * kFtwModulus));
  if (ftw >= kNyquistFtw) {
    throw Error(ErrorCode::FrequencyOutOfRange,
                std::to_string(frequency_hz) + " Hz quantizes onto the Nyquist frequency");
  }
  return static_cast<std::uint32_t>(ftw);
}

std::uint16_t asf_from_amplitude(double amplitude) {
  if (!(amplitude >= 0.0 && amplitude <= 1.0)) {
    throw Error(ErrorCode::AmplitudeOutOfRange, std::to_string(amplitude) + " outside [0, 1]");
  }
  return static_cast<std::uint16_t>(std::llround(amplitude * kAsfFullScale));
}

std::uint16_t pow_from_phase(double phase_rad) {
  if (!std::isfinite(phase_rad)) {
    throw Error(ErrorCode::InvalidArgument, "phase must be finite");
  }
  double wrapped = std::fmod(phase_rad, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  const auto pow = std::llround(wrapped / kTwoPi * kPowModulus);
  return static_cast<std::uint16_t>(pow % kPowModulus);
}

RegisterWords quantize_settings(double frequency_hz, double amplitude, double phase_rad,
                                const SysClock& clk) {
  return RegisterWords{ftw_from_frequency(frequency_hz, clk), asf_from_amplitude(amplitude),
                       pow_from_phase(phase_rad)};
}

ChannelSettings dequantize(const RegisterWords& words, const SysClock& clk) {
  return ChannelSettings{
      static_cast<double>(words.ftw) * clk.f_sys / kFtwModulus,
      static_cast<double>(words.asf) / kAsfFullScale,
      static_cast<double>(words.pow) * kTwoPi / kPowModulus,
  };
}

void validate(const RegisterWords& words, const SysClock& clk) {
  if (words.asf > kAsfFullScale) {
    throw Error(ErrorCode::AmplitudeOutOfRange, "ASF " + std::to_string(words.asf) + " exceeds 14 bits");
  }
  if (words.ftw >= kNyquistFtw) {
    throw Error(ErrorCode::FrequencyOutOfRange,
                "FTW " + std::to_string(words.ftw) + " is at or above Nyquist for " +
                    std::to_string(clk.f_sys) + " Hz clock");
  }
}

double frequency_step(const SysClock& clk) { return clk.f_sys / kFtwModulus; }
double amplitude_step() { return 1.0 / kAsfFullScale; }
double phase_step() { return kTwoPi / kPowModulus; }

std::string_view to_string(RamMode mode) {
  switch (mode) {
    case RamMode::Frequency: return "frequency";
    case RamMode::Amplitude: return "amplitude";
    case RamMode::Phase: return "phase";
    case RamMode::Polar: return "polar";
  }
  return "amplitude";
}

RamMode ram_mode_from_string(std::string_view name) {
  if (name == "frequency") return RamMode::Frequency;
  if (name == "amplitude") return RamMode::Amplitude;
  if (name == "phase") return RamMode::Phase;
  if (name == "polar") return RamMode::Polar;
  throw Error(ErrorCode::InvalidArgument, "unknown RAM mode '" + std::string(name) + "'");
}

std::uint32_t pack_frequency_word(std::uint32_t ftw) { return ftw; }
std::uint32_t pack_phase_word(std::uint16_t pow) { return static_cast<std::uint32_t>(pow) << 16; }
std::uint32_t pack_amplitude_word(std::uint16_t asf) {
  return (static_cast<std::uint32_t>(asf) & kAsfFullScale) << 18;
}
std::uint32_t pack_polar_word(std::uint16_t asf, std::uint16_t pow) {
  return (static_cast<std::uint32_t>(pow) << 16) | ((static_cast<std::uint32_t>(asf) & kAsfFullScale) << 2);
}

RamSample decode_word(RamMode mode, std::uint32_t word, const SysClock& clk) {
  RamSample s;
  switch (mode) {
    case RamMode::Frequency:
      s.frequency_hz = static_cast<double>(word) * clk.f_sys / kFtwModulus;
      s.drives_frequency = true;
      break;
    case RamMode::Amplitude:
      s.amplitude = static_cast<double>(word >> 18) / kAsfFullScale;
      break;
    case RamMode::Phase:
      s.phase_rad = static_cast<double>(word >> 16) * kTwoPi / kPowModulus;
      break;
    case RamMode::Polar:
      s.phase_rad = static_cast<double>(word >> 16) * kTwoPi / kPowModulus;
      s.amplitude = static_cast<double>((word >> 2) & kAsfFullScale) / kAsfFullScale;
      break;
  }
  return s;
}

namespace {

std::size_t checked_word_count(std::int64_t duration_ns, std::int64_t step_ns) {
  if (step_ns < kGridNs || step_ns % kGridNs != 0) {
    throw Error(ErrorCode::GridViolation,
                "RAM step " + std::to_string(step_ns) + " ns is not a positive multiple of 4 ns");
  }
  if (duration_ns <= 0 || duration_ns % step_ns != 0) {
    throw Error(ErrorCode::GridViolation, "duration " + std::to_string(duration_ns) +
                                              " ns is not a positive multiple of the " +
                                              std::to_string(step_ns) + " ns step");
  }
  const auto n = static_cast<std::size_t>(duration_ns / step_ns);
  if (n > kRamDepth) {
    throw Error(ErrorCode::CapacityExceeded, std::to_string(n) + " words exceed the " +
                                                 std::to_string(kRamDepth) + "-word RAM");
  }
  return n;
}

}  // namespace

void validate(const RamProfile& profile) {
  if (profile.words.empty()) {
    throw Error(ErrorCode::GridViolation, "RAM profile has no words");
  }
  checked_word_count(profile.duration_ns(), profile.step_ns);
}

std::string_view to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::Rectangular: return "rectangular";
    case WindowKind::LinearEdges: return "linear";
    case WindowKind::Blackman: return "blackman";
  }
  return "rectangular";
}

double blackman(double x) {
  return 0.42 - 0.5 * std::cos(kTwoPi * x) + 0.08 * std::cos(2.0 * kTwoPi * x);
}

std::vector<double> sample_window(const Window& window, std::int64_t duration_ns,
                                  std::int64_t step_ns) {
  const std::size_t n = checked_word_count(duration_ns, step_ns);
  std::vector<double> values(n, 1.0);
  if (n == 1) return values;

  const double span = static_cast<double>(n - 1);
  const double duration = static_cast<double>(duration_ns);
  double edge = static_cast<double>(window.edge_ns > 0 ? window.edge_ns : duration_ns / 5);
  edge = std::min(edge, duration / 2.0);

  for (std::size_t k = 0; k < n; ++k) {
    const double x = static_cast<double>(k) / span;
    switch (window.kind) {
      case WindowKind::Rectangular:
        break;
      case WindowKind::LinearEdges: {
        const double t = x * duration;
        values[k] = edge > 0.0 ? std::min({1.0, t / edge, (duration - t) / edge}) : 1.0;
        break;
      }
      case WindowKind::Blackman:
        values[k] = std::max(0.0, blackman(x));
        break;
    }
  }
  const double peak = *std::max_element(values.begin(), values.end());
  if (peak > 0.0) {
    for (auto& v : values) v /= peak;
  }
  return values;
}

RamProfile build_ram_profile(const Shape& shape, std::int64_t duration_ns, std::int64_t step_ns,
                             RamMode mode, const SysClock& clk) {
  const std::size_t n = checked_word_count(duration_ns, step_ns);
  RamProfile profile{mode, {}, step_ns};
  profile.words.reserve(n);

  auto require_length = [n](std::size_t got) {
    if (got != n) {
      throw Error(ErrorCode::InvalidArgument, "sample list has " + std::to_string(got) +
                                                  " entries, expected " + std::to_string(n));
    }
  };

  if (const auto* window = std::get_if<Window>(&shape)) {
    if (mode != RamMode::Amplitude && mode != RamMode::Polar) {
      throw Error(ErrorCode::InvalidArgument, "named windows need amplitude or polar RAM mode");
    }
    for (double v : sample_window(*window, duration_ns, step_ns)) {
      const auto asf = asf_from_amplitude(v);
      profile.words.push_back(mode == RamMode::Polar ? pack_polar_word(asf, 0) : pack_amplitude_word(asf));
    }
  } else if (const auto* values = std::get_if<std::vector<double>>(&shape)) {
    require_length(values->size());
    for (double v : *values) {
      switch (mode) {
        case RamMode::Frequency: profile.words.push_back(pack_frequency_word(ftw_from_frequency(v, clk))); break;
        case RamMode::Amplitude: profile.words.push_back(pack_amplitude_word(asf_from_amplitude(v))); break;
        case RamMode::Phase: profile.words.push_back(pack_phase_word(pow_from_phase(v))); break;
        case RamMode::Polar: profile.words.push_back(pack_polar_word(asf_from_amplitude(v), 0)); break;
      }
    }
  } else {
    const auto& points = std::get<std::vector<PolarPoint>>(shape);
    if (mode != RamMode::Polar) {
      throw Error(ErrorCode::InvalidArgument, "amplitude/phase pairs need polar RAM mode");
    }
    require_length(points.size());
    for (const auto& p : points) {
      profile.words.push_back(pack_polar_word(asf_from_amplitude(p.amplitude), pow_from_phase(p.phase_rad)));
    }
  }
  return profile;
}

}  // namespace mwforge
