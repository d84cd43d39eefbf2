#include <gtest/gtest.h>

#include <fmt/format.h>

#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include "mwforge/compiler.hpp"
#include "mwforge/error.hpp"
#include "mwforge/io.hpp"

using namespace mwforge;

namespace {

std::vector<Diagnostic> diagnostics_of(std::string_view src) {
  try {
    compile(src);
  } catch (const CompileError& e) {
    return e.diagnostics();
  }
  ADD_FAILURE() << "program compiled:\n" << src;
  return {};
}

ErrorCode code_of(std::string_view src) {
  try {
    compile(src);
  } catch (const CompileError& e) {
    return e.code();
  }
  ADD_FAILURE() << "program compiled:\n" << src;
  return ErrorCode::Io;
}

std::vector<std::int64_t> gaps(const EventSchedule& s) {
  std::vector<std::int64_t> out;
  for (const auto& p : pulse_timeline(s)) out.push_back(p.gap_before_ns);
  return out;
}

}  // namespace

TEST(Parser, UnitsNormalize) {
  const auto p = parse_program(R"(
    pulse a { dur = 1.5us, freq = 0.165GHz, amp = 0.5, phase = 90deg, step = 4ns }
    seq s { a; wait 2us; a(phase = 0.25turn); }
  )");
  const auto& d = *p.find("a");
  EXPECT_EQ(d.params.duration_ns, 1500);
  EXPECT_DOUBLE_EQ(d.params.frequency_hz, 165e6);
  EXPECT_DOUBLE_EQ(d.params.amplitude, 0.5);
  EXPECT_NEAR(d.params.phase_rad, std::numbers::pi / 2, 1e-15);
  EXPECT_EQ(d.params.step_ns, 4);
  ASSERT_EQ(p.sequence.size(), 3u);
  EXPECT_EQ(std::get<Wait>(p.sequence[1]).duration_ns, 2000);
  EXPECT_NEAR(std::get<Invocation>(p.sequence[2]).params.phase_rad, std::numbers::pi / 2, 1e-15);
}

TEST(Parser, EmptyInputIsSyntaxError) {
  const auto d = diagnostics_of("");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].code, ErrorCode::SyntaxError);
  EXPECT_EQ(d[0].line, 1);
}

TEST(Parser, SyntaxErrorReportsPositionAndExpectation) {
  const auto d = diagnostics_of("pulse a { dur = 1us, freq = 1MHz }\nseq s {\n  a(dur 2us);\n}\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].code, ErrorCode::SyntaxError);
  EXPECT_EQ(d[0].line, 3);
  EXPECT_EQ(d[0].column, 9);
  EXPECT_NE(d[0].message.find("'='"), std::string::npos) << d[0].message;
}

TEST(Parser, SemanticErrorsAreCollected) {
  const auto d = diagnostics_of(R"(
    pulse a { dur = 1001ns, freq = 1MHz }
    pulse b { dur = 1us, freq = 1MHz, amp = 2 }
    seq s { a; b; c; wait 3ns; }
  )");
  ASSERT_GE(d.size(), 4u);
  for (const auto& x : d) EXPECT_EQ(x.code, ErrorCode::SemanticError) << x.format();
  EXPECT_EQ(code_of("pulse a { dur = 1us }\nseq s { a; }"), ErrorCode::SemanticError);
  EXPECT_EQ(code_of("pulse a { dur = 1us, freq = 1MHz, bogus = 3 }\nseq s { a; }"), ErrorCode::SemanticError);
  EXPECT_EQ(code_of("pulse a { dur = 1MHz, freq = 1MHz }\nseq s { a; }"), ErrorCode::SemanticError);
  EXPECT_EQ(code_of("pulse a { dur = 1us, freq = 600MHz }\nseq s { a; }"), ErrorCode::SemanticError);
}

TEST(Compiler, UpdateGapsGolden) {
  const auto c = compile(R"(
    pulse ramped { shape = linear, dur = 1us, edge = 200ns, freq = 50MHz }
    pulse ramped_long { shape = linear, dur = 2us, edge = 200ns, freq = 65MHz }
    seq updates { ramped; ramped; ramped(freq = 65MHz); ramped_long; }
  )");
  const auto t = pulse_timeline(c.schedule);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(gaps(c.schedule), (std::vector<std::int64_t>{700, 0, 700, 400}));
  EXPECT_EQ(t[0].start_ns, 700);
  EXPECT_EQ(t[1].start_ns, 1700);
  EXPECT_EQ(t[2].start_ns, 3400);
  EXPECT_EQ(t[3].start_ns, 4800);
  EXPECT_EQ(c.schedule.total_duration_ns, 6800);
  EXPECT_EQ(c.schedule.profiles.size(), 2u);
  EXPECT_TRUE(validate_timing(c.schedule).ok()) << validate_timing(c.schedule).format();
}

TEST(Compiler, WaitsBelowLatencyAreAbsorbed) {
  const auto c = compile(R"(
    pulse a { dur = 100ns, freq = 10MHz }
    seq s { a; wait 200ns; a(amp = 0.5); wait 1us; a(amp = 0.5); wait 8ns; a(amp = 0.5); }
  )");
  EXPECT_EQ(gaps(c.schedule), (std::vector<std::int64_t>{700, 700, 1000, 8}));
}

TEST(Compiler, CapacityExceeded) {
  EXPECT_EQ(code_of("pulse a { dur = 4100ns, freq = 1MHz }\nseq s { a; }"), ErrorCode::CapacityExceeded);
  EXPECT_NO_THROW(compile("pulse a { dur = 4096ns, freq = 1MHz }\nseq s { a; }"));
  const auto d = diagnostics_of("pulse a { dur = 4100ns, freq = 1MHz }\nseq s {\n  a;\n}");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].line, 3);
  EXPECT_EQ(exit_code(d[0].code), 3);
}

TEST(Compiler, NinthShapeOverflows) {
  std::string src;
  std::string seq = "seq s {";
  for (int i = 1; i <= 9; ++i) {
    src += fmt::format("pulse p{} {{ dur = {}ns, freq = 1MHz }}\n", i, 100 * i);
    seq += fmt::format(" p{};", i);
  }
  EXPECT_EQ(code_of(src + seq + " }"), ErrorCode::ProfileOverflow);
  // Eight distinct shapes, reused freely, fit.
  std::string eight;
  for (int i = 1; i <= 8; ++i) eight += fmt::format("pulse p{} {{ dur = {}ns, freq = 1MHz }}\n", i, 100 * i);
  EXPECT_NO_THROW(compile(eight + "seq s { p1; p2; p3; p4; p5; p6; p7; p8; p1; p8; }"));
}

TEST(Compiler, IdenticalContentSharesProfile) {
  // Amplitude lives in the register, so both pulses play the same RAM words.
  const auto c = compile(R"(
    pulse a { dur = 1us, freq = 10MHz, amp = 1 }
    pulse b { dur = 1us, freq = 10MHz, amp = 0.5 }
    seq s { a; b; }
  )");
  EXPECT_EQ(c.schedule.profiles.size(), 1u);
  EXPECT_EQ(gaps(c.schedule), (std::vector<std::int64_t>{700, 700}));
}

TEST(Compiler, PhaseFlipUsesOnePolarProfile) {
  const auto c = compile("pulse f { shape = blackman, dur = 1us, freq = 165MHz, flip = 180deg }\nseq s { f; }");
  ASSERT_EQ(c.schedule.profiles.size(), 1u);
  const auto& p = c.schedule.profiles[0];
  EXPECT_EQ(p.mode, RamMode::Polar);
  ASSERT_EQ(p.words.size(), 250u);
  EXPECT_NEAR(decode_word(p.mode, p.words[124]).phase_rad, 0.0, 1e-12);
  EXPECT_NEAR(decode_word(p.mode, p.words[125]).phase_rad, std::numbers::pi, 1e-12);
  EXPECT_NEAR(decode_word(p.mode, p.words[124]).amplitude, decode_word(p.mode, p.words[125]).amplitude, 1e-12);
}

TEST(Compiler, MergeRemovesDeadTime) {
  const auto c = compile(R"(
    pulse x { shape = blackman, dur = 500ns, freq = 165MHz }
    pulse y { shape = blackman, dur = 1us, freq = 165MHz, phase = 90deg }
    seq s { merge { x; y; x; } }
  )");
  ASSERT_EQ(c.schedule.profiles.size(), 1u);
  EXPECT_EQ(c.schedule.profiles[0].words.size(), 500u);
  EXPECT_EQ(pulse_timeline(c.schedule).size(), 1u);
  EXPECT_EQ(code_of("pulse x { dur = 100ns, freq = 1MHz }\npulse y { dur = 100ns, freq = 2MHz }\nseq s { merge { x; y; } }"),
            ErrorCode::SemanticError);
}

TEST(Compiler, RampLevels) {
  const auto c = compile("ramp r { start = 0.2, end = 0.8, dur = 400ns, freq = 10MHz }\nseq s { r; }");
  const auto& p = c.schedule.profiles[0];
  ASSERT_EQ(p.words.size(), 100u);
  EXPECT_NEAR(decode_word(p.mode, p.words.front()).amplitude, 0.2, 1e-4);
  EXPECT_NEAR(decode_word(p.mode, p.words.back()).amplitude, 0.8, 1e-4);
  EXPECT_NEAR(decode_word(p.mode, p.words[50]).amplitude, 0.2 + 0.6 * 50.0 / 99.0, 1e-4);
}

TEST(Schedule, JsonRoundTrip) {
  const auto c = compile(R"(
    pulse a { shape = blackman, dur = 1us, freq = 165MHz, phase = 1rad }
    pulse f { shape = linear, dur = 800ns, freq = 160MHz, flip = 0.5turn }
    seq s { a; wait 3us; f; a; }
  )");
  const auto text = to_json(c.schedule);
  EXPECT_EQ(schedule_from_json(text), c.schedule);
  EXPECT_EQ(to_json(schedule_from_json(text)), text);
}

TEST(Schedule, ValidatorCatchesTampering) {
  auto s = compile("pulse a { dur = 1us, freq = 10MHz }\nseq s { a; a(freq = 11MHz); }").schedule;
  ASSERT_TRUE(validate_timing(s).ok());
  auto early = s;
  for (auto& e : early.events) {
    if (e.t_ns > 1700) e.t_ns -= 100;  // second pulse starts 600 ns after the update
  }
  EXPECT_FALSE(validate_timing(early).ok());
  auto offgrid = s;
  offgrid.events.back().t_ns += 2;
  offgrid.total_duration_ns += 4;
  EXPECT_FALSE(validate_timing(offgrid).ok());
}

// Independent gap oracle over random plain-pulse programs.
TEST(Compiler, RandomProgramsMatchGapOracle) {
  std::mt19937_64 rng(20240521);
  const char* shapes[] = {"rect", "linear", "blackman"};
  int compiled = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_defs = 1 + static_cast<int>(rng() % 10);
    struct Def {
      int shape;
      std::int64_t dur, step;
      double freq, amp, phase;
    };
    std::vector<Def> defs;
    std::string src;
    for (int i = 0; i < n_defs; ++i) {
      Def d{static_cast<int>(rng() % 3), 0, 4 * static_cast<std::int64_t>(1 + rng() % 3), 0, 0, 0};
      d.dur = d.step * static_cast<std::int64_t>(2 + rng() % 200);
      d.freq = static_cast<double>(1 + rng() % 5) * 1e6;
      d.amp = static_cast<double>(1 + rng() % 4) / 4.0;
      d.phase = static_cast<double>(rng() % 4) * 90.0;
      defs.push_back(d);
      src += fmt::format("pulse d{} {{ shape = {}, dur = {}ns, step = {}ns, freq = {}Hz, amp = {}, phase = {}deg }}\n",
                         i, shapes[d.shape], d.dur, d.step, d.freq, d.amp, d.phase);
    }
    src += "seq s {\n";
    struct Played {
      std::int64_t wait;
      int def;
    };
    std::vector<Played> played;
    std::int64_t pending = 0;
    const int n_items = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n_items; ++k) {
      if (rng() % 3 == 0) {
        const std::int64_t w = 4 * static_cast<std::int64_t>(rng() % 400);
        pending += w;
        src += fmt::format("  wait {}ns;\n", w);
      } else {
        const int d = static_cast<int>(rng() % static_cast<unsigned>(n_defs));
        played.push_back({pending, d});
        pending = 0;
        src += fmt::format("  d{};\n", d);
      }
    }
    src += "}\n";

    // Oracle: waveform identity is (shape, duration, step); registers are
    // (frequency, amplitude, phase).
    std::map<std::tuple<int, std::int64_t, std::int64_t>, int> profiles;
    bool overflow = false;
    std::vector<std::int64_t> expect_gaps, expect_starts;
    std::int64_t end = 0;
    std::tuple<double, double, double> regs{-1, -1, -1};
    int profile = -1;
    for (const auto& p : played) {
      const auto& d = defs[static_cast<std::size_t>(p.def)];
      const auto key = std::make_tuple(d.shape, d.dur, d.step);
      if (!profiles.count(key)) {
        if (profiles.size() == 8) overflow = true;
        const int next = static_cast<int>(profiles.size());
        profiles[key] = next;
      }
      const int prof = profiles[key];
      const auto r = std::make_tuple(d.freq, d.amp, std::fmod(d.phase, 360.0));
      std::int64_t floor = 0;
      if (r != regs) floor = 700;
      else if (prof != profile) floor = 400;
      const std::int64_t gap = std::max(floor, p.wait);  // waits are already on the grid
      expect_gaps.push_back(gap);
      expect_starts.push_back(end + gap);
      end += gap + d.dur;
      regs = r;
      profile = prof;
    }

    if (overflow) {
      EXPECT_EQ(code_of(src), ErrorCode::ProfileOverflow) << src;
      continue;
    }
    Compilation c;
    ASSERT_NO_THROW(c = compile(src)) << src;
    ++compiled;
    const auto timeline = pulse_timeline(c.schedule);
    ASSERT_EQ(timeline.size(), played.size()) << src;
    for (std::size_t i = 0; i < played.size(); ++i) {
      EXPECT_EQ(timeline[i].gap_before_ns, expect_gaps[i]) << src << " pulse " << i;
      EXPECT_EQ(timeline[i].start_ns, expect_starts[i]) << src << " pulse " << i;
    }
    for (const auto& e : c.schedule.events) ASSERT_EQ(e.t_ns % 4, 0);
    EXPECT_EQ(c.schedule.total_duration_ns % 4, 0);
    const auto report = validate_timing(c.schedule);
    EXPECT_TRUE(report.ok()) << report.format() << src;
  }
  EXPECT_GT(compiled, 900);
}

TEST(Io, RamProfileCsvRoundTrip) {
  const auto p = build_ram_profile(Window{WindowKind::Blackman, 0}, 800, 8, RamMode::Amplitude);
  EXPECT_EQ(ram_profile_from_csv(to_csv(p)), p);
}
