#include "mwforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwforge/error.hpp"

namespace mwforge {

namespace {

constexpr long double kFtwModulusL = 4294967296.0L;

long double wrap_turns(long double turns) {
  turns -= std::floor(turns);
  return turns;
}

}  // namespace

double max_programmed_frequency(const EventSchedule& schedule, const SysClock& clk) {
  double f_max = 0.0;
  for (const auto& e : schedule.events) {
    if (e.action == Action::SetRegisters) {
      f_max = std::max(f_max, dequantize(e.registers, clk).frequency_hz);
    }
  }
  for (const auto& p : schedule.profiles) {
    if (p.mode != RamMode::Frequency) continue;
    for (auto w : p.words) f_max = std::max(f_max, decode_word(p.mode, w, clk).frequency_hz);
  }
  return f_max;
}

ComplexEnvelope synthesize(const EventSchedule& schedule, double sample_rate, const SysClock& clk,
                           const SynthOptions& options) {
  const auto report = validate_timing(schedule, options.latency);
  if (!report.ok()) {
    throw Error(ErrorCode::UnvalidatedSchedule, "schedule fails timing validation:\n" + report.format());
  }
  for (const auto& p : schedule.profiles) validate(p);

  const double f_max = max_programmed_frequency(schedule, clk);
  if (!(sample_rate > 0.0) || sample_rate < 4.0 * f_max) {
    throw Error(ErrorCode::NyquistViolation,
                "sample rate " + std::to_string(sample_rate) + " Hz is below 4x the highest programmed " +
                    std::to_string(f_max) + " Hz");
  }

  ComplexEnvelope env;
  env.sample_rate = sample_rate;
  env.t0_ns = 0.0;
  const auto n_samples =
      static_cast<std::size_t>(std::llround(static_cast<double>(schedule.total_duration_ns) * 1e-9 * sample_rate));
  env.samples.assign(n_samples, {0.0, 0.0});

  const double leak = std::isinf(options.switch_leakage_db) && options.switch_leakage_db < 0
                          ? 0.0
                          : std::pow(10.0, options.switch_leakage_db / 20.0);

  // Channel state.
  RegisterWords regs{};
  int profile = -1;
  bool running = false;
  double ram_start_ns = 0.0;
  bool switch_on = false;
  double switch_change_ns = 0.0;
  double gain_at_change = leak;
  double source_change_ns = 0.0;  // last event that may have changed the frequency source

  // Phase-continuous accumulator (turns), advanced at frequency changes.
  long double acc_turns = 0.0L;
  double acc_ref_ns = 0.0;
  std::uint32_t acc_ftw = 0;

  auto gain_now = [&](double t_ns) {
    const double target = switch_on ? 1.0 : leak;
    if (!options.linear_switch_edges || options.switch_edge_ns <= 0.0) return target;
    const double frac = std::clamp((t_ns - switch_change_ns) / options.switch_edge_ns, 0.0, 1.0);
    return gain_at_change + (target - gain_at_change) * frac;
  };

  std::size_t next_event = 0;
  const auto& events = schedule.events;
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double t_s = static_cast<double>(n) / sample_rate;
    const double t_ns = t_s * 1e9;

    while (next_event < events.size() && static_cast<double>(events[next_event].t_ns) <= t_ns + 1e-6) {
      const Event& e = events[next_event++];
      const auto te = static_cast<double>(e.t_ns);
      switch (e.action) {
        case Action::SetRegisters:
          regs = e.registers;
          source_change_ns = te;
          break;
        case Action::SelectProfile: profile = e.profile; break;
        case Action::RamStart:
          running = true;
          ram_start_ns = te;
          source_change_ns = te;
          break;
        case Action::RamStop:
          running = false;
          source_change_ns = te;
          break;
        case Action::SwitchOn:
        case Action::SwitchOff: {
          const double g = gain_now(te);
          switch_on = e.action == Action::SwitchOn;
          switch_change_ns = te;
          gain_at_change = g;
          break;
        }
      }
    }

    const ChannelSettings reg = dequantize(regs, clk);
    double amplitude = reg.amplitude;
    double phase_offset = reg.phase_rad;
    std::uint32_t ftw = regs.ftw;
    double freq_since_ns = source_change_ns;

    if (running && profile >= 0) {
      const RamProfile& p = schedule.profiles[static_cast<std::size_t>(profile)];
      const auto elapsed = std::max(0.0, t_ns - ram_start_ns);
      auto idx = static_cast<std::size_t>(std::floor(elapsed / static_cast<double>(p.step_ns) + 1e-9));
      idx = std::min(idx, p.words.size() - 1);
      const RamSample s = decode_word(p.mode, p.words[idx], clk);
      amplitude *= s.amplitude;
      phase_offset += s.phase_rad;
      if (s.drives_frequency) {
        ftw = p.words[idx];
        freq_since_ns = ram_start_ns + static_cast<double>(idx) * static_cast<double>(p.step_ns);
      }
    }

    long double turns = 0.0L;
    if (options.phase_mode == PhaseMode::Coherent) {
      const long double cycles = static_cast<long double>(t_s) * static_cast<long double>(clk.f_sys);
      turns = wrap_turns(static_cast<long double>(ftw) * cycles / kFtwModulusL);
    } else {
      if (ftw != acc_ftw) {
        const double change_ns = std::max(freq_since_ns, acc_ref_ns);
        acc_turns = wrap_turns(acc_turns + static_cast<long double>(acc_ftw) * clk.f_sys / kFtwModulusL *
                                               static_cast<long double>(change_ns - acc_ref_ns) * 1e-9L);
        acc_ref_ns = change_ns;
        acc_ftw = ftw;
      }
      turns = wrap_turns(acc_turns + static_cast<long double>(ftw) * clk.f_sys / kFtwModulusL *
                                         static_cast<long double>(t_ns - acc_ref_ns) * 1e-9L);
    }

    const double gain = gain_now(t_ns);
    if (gain == 0.0) continue;
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(turns) + phase_offset;
    env.samples[n] = std::polar(amplitude * gain, phase);
  }
  return env;
}

std::vector<std::complex<double>> demodulate(const ComplexEnvelope& envelope, double f_ref_hz) {
  std::vector<std::complex<double>> out(envelope.samples.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const long double turns = wrap_turns(static_cast<long double>(f_ref_hz) *
                                         static_cast<long double>(envelope.time_s(i)));
    out[i] = envelope.samples[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(turns));
  }
  return out;
}

}  // namespace mwforge
