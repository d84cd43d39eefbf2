#pragma once

// Pulse-program language.
//
//   program    := definition* sequence
//   definition := ("pulse" | "ramp") NAME "{" (KEY "=" VALUE ","?)* "}"
//   sequence   := "seq" NAME "{" item* "}"
//   item       := invocation | "wait" DURATION ";"? | "merge" "{" invocation* "}"
//   invocation := NAME ("(" (KEY "=" VALUE ","?)* ")")? ";"
//
// "#" starts a comment. Durations take ns/us/ms/s suffixes (bare numbers are
// ns), frequencies Hz/kHz/MHz/GHz (bare: Hz), angles rad/deg/turn (bare: rad).
//
// Pulse keys: shape (rect | linear | blackman), dur, freq, amp, phase, step,
// edge (linear edge length), flip (phase step applied mid-pulse), flip_at.
// Ramp keys: start, end, dur, freq, phase, step, shape (linear | blackman).
//
// A pulse with `flip`, and every `merge` block, compiles into one polar RAM
// profile so the phase change needs no register update.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mwforge/dds.hpp"

namespace mwforge {

struct SourceLoc {
  int line = 1;
  int column = 1;
};

enum class DefinitionKind { Pulse, Ramp };

/// Fully resolved waveform parameters, units normalized to ns / Hz / rad.
struct WaveformParams {
  DefinitionKind kind = DefinitionKind::Pulse;
  WindowKind shape = WindowKind::Rectangular;
  std::int64_t duration_ns = 0;
  double frequency_hz = 0.0;
  double amplitude = 1.0;
  double phase_rad = 0.0;
  std::int64_t step_ns = kGridNs;
  std::int64_t edge_ns = 0;  // 0: default (duration / 5)
  std::optional<double> flip_rad;
  std::optional<std::int64_t> flip_at_ns;
  double ramp_start = 0.0;
  double ramp_end = 1.0;

  bool operator==(const WaveformParams&) const = default;
};

/// Literal with its unit resolved: a number scaled to ns / Hz / rad, a
/// unitless number, or a bare identifier.
struct Value {
  enum class Dimension { None, Time, Frequency, Angle, Identifier };
  Dimension dimension = Dimension::None;
  double number = 0.0;
  std::string text;  // token as written
};

struct KeyValue {
  std::string key;
  Value value;
  SourceLoc loc;
};

struct Definition {
  std::string name;
  DefinitionKind kind = DefinitionKind::Pulse;
  std::vector<KeyValue> entries;
  WaveformParams params;  // resolved from entries
  SourceLoc loc;
};

struct Invocation {
  std::string name;
  std::vector<KeyValue> overrides;
  WaveformParams params;  // definition + overrides, resolved
  SourceLoc loc;
};

struct Wait {
  Value literal;
  std::int64_t duration_ns = 0;  // resolved
  SourceLoc loc;
};

struct MergeBlock {
  std::vector<Invocation> parts;
  SourceLoc loc;
};

using SequenceItem = std::variant<Invocation, Wait, MergeBlock>;

struct PulseProgram {
  std::vector<Definition> definitions;
  std::string sequence_name;
  std::vector<SequenceItem> sequence;

  const Definition* find(std::string_view name) const;
};

/// Parses and semantically checks a program. Throws CompileError carrying a
/// SyntaxError diagnostic (position + expected tokens) or every
/// SemanticError found.
PulseProgram parse_program(std::string_view source);

}  // namespace mwforge
