#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mwforge/compiler.hpp"
#include "mwforge/error.hpp"
#include "mwforge/synth.hpp"

using namespace mwforge;

namespace {

constexpr double kFs = 1e9;

ComplexEnvelope play(std::string_view src, SynthOptions opt = {}, double fs = kFs) {
  return synthesize(compile(src).schedule, fs, {}, opt);
}

std::size_t at_ns(double t_ns, double fs = kFs) { return static_cast<std::size_t>(std::llround(t_ns * 1e-9 * fs)); }

}  // namespace

TEST(Synth, GatedToneAmplitudeAndFrequency) {
  const auto env = play("pulse a { dur = 1us, freq = 100MHz, amp = 0.5 }\nseq s { a; }");
  ASSERT_EQ(env.samples.size(), at_ns(1700));
  EXPECT_EQ(std::abs(env.samples[at_ns(699)]), 0.0);
  const double f = dequantize(quantize_settings(100e6, 0.5, 0)).frequency_hz;
  const double a = dequantize(quantize_settings(100e6, 0.5, 0)).amplitude;
  for (std::size_t n = at_ns(700); n < at_ns(1700); n += 37) {
    EXPECT_NEAR(std::abs(env.samples[n]), a, 1e-12);
    // Coherent phase: 2 pi f t from the schedule origin.
    const double expect = std::remainder(2.0 * std::numbers::pi * f * env.time_s(n), 2.0 * std::numbers::pi);
    EXPECT_NEAR(std::remainder(std::arg(env.samples[n]) - expect, 2.0 * std::numbers::pi), 0.0, 1e-6);
  }
}

TEST(Synth, RegisterPhaseAddsToCarrier) {
  const auto e0 = play("pulse a { dur = 100ns, freq = 10MHz }\nseq s { a; }");
  const auto e1 = play("pulse a { dur = 100ns, freq = 10MHz, phase = 90deg }\nseq s { a; }");
  const auto n = at_ns(750);
  EXPECT_NEAR(std::remainder(std::arg(e1.samples[n]) - std::arg(e0.samples[n]), 2 * std::numbers::pi),
              std::numbers::pi / 2, 1e-9);
}

TEST(Synth, CoherentPhaseSurvivesFrequencyHops) {
  // After hopping away and back, the coherent phase equals an uninterrupted tone's.
  const auto env = play("pulse a { dur = 200ns, freq = 20MHz }\nseq s { a; a(freq = 30MHz); a; }");
  const double f = dequantize(quantize_settings(20e6, 1, 0)).frequency_hz;
  const auto last = pulse_timeline(compile("pulse a { dur = 200ns, freq = 20MHz }\nseq s { a; a(freq = 30MHz); a; }").schedule)[2];
  const auto n = at_ns(static_cast<double>(last.start_ns) + 100);
  const double expect = 2.0 * std::numbers::pi * f * env.time_s(n);
  EXPECT_NEAR(std::remainder(std::arg(env.samples[n]) - expect, 2 * std::numbers::pi), 0.0, 1e-6);
}

TEST(Synth, ContinuousModeCarriesAccumulatedPhase) {
  SynthOptions opt;
  opt.phase_mode = PhaseMode::Continuous;
  const auto src = "pulse a { dur = 200ns, freq = 20MHz }\nseq s { a; a(freq = 30MHz); }";
  const auto env = play(src, opt);
  const auto sched = compile(src).schedule;
  const auto t = pulse_timeline(sched);
  const double f1 = dequantize(quantize_settings(20e6, 1, 0)).frequency_hz;
  const double f2 = dequantize(quantize_settings(30e6, 1, 0)).frequency_hz;
  // f1 runs from 0 until the register update at the end of pulse 1, then f2.
  const double t_update = static_cast<double>(t[0].end_ns) * 1e-9;
  const auto n = at_ns(static_cast<double>(t[1].start_ns) + 50);
  const double expect = 2 * std::numbers::pi * (f1 * t_update + f2 * (env.time_s(n) - t_update));
  EXPECT_NEAR(std::remainder(std::arg(env.samples[n]) - expect, 2 * std::numbers::pi), 0.0, 1e-6);
}

TEST(Synth, RamAmplitudeShapesEnvelope) {
  const auto env = play("pulse b { shape = blackman, dur = 1us, freq = 10MHz, amp = 0.8 }\nseq s { b; }");
  const auto mid = std::abs(env.samples[at_ns(700 + 500)]);
  EXPECT_NEAR(mid, 0.8, 2e-3);
  EXPECT_LT(std::abs(env.samples[at_ns(702)]), 1e-3);
}

TEST(Synth, PhaseFlipAppearsMidPulse) {
  const auto env = play("pulse f { dur = 1us, freq = 10MHz, flip = 180deg }\nseq s { f; }");
  const double f = dequantize(quantize_settings(10e6, 1, 0)).frequency_hz;
  auto rel = [&](double t_ns) {
    const auto n = at_ns(t_ns);
    return std::remainder(std::arg(env.samples[n]) - 2 * std::numbers::pi * f * env.time_s(n), 2 * std::numbers::pi);
  };
  EXPECT_NEAR(rel(700 + 400), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(rel(700 + 600)), std::numbers::pi, 1e-6);
}

TEST(Synth, SwitchLeakageAndEdges) {
  SynthOptions opt;
  opt.switch_leakage_db = -40;
  const auto env = play("pulse a { dur = 100ns, freq = 10MHz }\nseq s { a; }", opt);
  EXPECT_NEAR(std::abs(env.samples[at_ns(600)]), 0.01, 1e-6);  // switch open
  EXPECT_NEAR(std::abs(env.samples[at_ns(750)]), 1.0, 1e-9);
  opt.switch_leakage_db = -std::numeric_limits<double>::infinity();
  opt.linear_switch_edges = true;
  const auto soft = play("pulse a { dur = 100ns, freq = 10MHz }\nseq s { a; }", opt);
  EXPECT_NEAR(std::abs(soft.samples[at_ns(700 + 12.5 + 0.5)]), (13.0 / 25.0), 1e-3);
  EXPECT_NEAR(std::abs(soft.samples[at_ns(790)]), 1.0, 1e-9);
}

TEST(Synth, RejectsInvalidSchedulesAndLowSampleRate) {
  auto sched = compile("pulse a { dur = 1us, freq = 10MHz }\nseq s { a; a(freq = 11MHz); }").schedule;
  for (auto& e : sched.events) {
    if (e.t_ns > 1700) e.t_ns -= 100;
  }
  try {
    synthesize(sched, kFs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnvalidatedSchedule);
  }
  try {
    play("pulse a { dur = 1us, freq = 100MHz }\nseq s { a; }", {}, 300e6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NyquistViolation);
  }
}

TEST(Synth, DemodulateRecoversBaseband) {
  const auto env = play("pulse a { dur = 1us, freq = 100MHz, phase = 30deg }\nseq s { a; }");
  const double f = dequantize(quantize_settings(100e6, 1, 0)).frequency_hz;
  const auto bb = demodulate(env, f);
  const auto z = bb[at_ns(1200)];
  EXPECT_NEAR(std::abs(z), 1.0, 1e-12);
  EXPECT_NEAR(std::arg(z), dequantize(quantize_settings(100e6, 1, std::numbers::pi / 6)).phase_rad, 1e-6);
}
