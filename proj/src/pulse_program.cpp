#include "mwforge/pulse_program.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include "mwforge/error.hpp"

namespace mwforge {

const Definition* PulseProgram::find(std::string_view name) const {
  for (const auto& d : definitions) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Number, LBrace, RBrace, LParen, RParen, Semicolon, Equals, Comma, End };

std::string describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Semicolon: return "';'";
    case Tok::Equals: return "'='";
    case Tok::Comma: return "','";
    case Tok::End: return "end of input";
  }
  return "token";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier or the full number literal
  double number = 0.0;
  std::string unit;
  SourceLoc loc;
};

[[noreturn]] void syntax_error(SourceLoc loc, std::string message) {
  throw CompileError({Diagnostic{ErrorCode::SyntaxError, loc.line, loc.column, std::move(message)}});
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          t.text += advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
        lex_number(t);
      } else {
        switch (c) {
          case '{': t.kind = Tok::LBrace; break;
          case '}': t.kind = Tok::RBrace; break;
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case ';': t.kind = Tok::Semicolon; break;
          case '=': t.kind = Tok::Equals; break;
          case ',': t.kind = Tok::Comma; break;
          default:
            syntax_error(t.loc, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, advance());
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  bool at_digit() const {
    return pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]));
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    t.kind = Tok::Number;
    std::string digits;
    if (src_[pos_] == '-' || src_[pos_] == '+') digits += advance();
    bool any = false;
    while (at_digit()) {
      digits += advance();
      any = true;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      digits += advance();
      while (at_digit()) {
        digits += advance();
        any = true;
      }
    }
    if (!any) syntax_error(t.loc, "malformed number '" + digits + "'");
    // Exponent only when digits follow, so "1e" is not swallowed and "1em" stays a unit.
    if (pos_ + 1 < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (src_[look] == '+' || src_[look] == '-') ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        while (pos_ < look) digits += advance();
        while (at_digit()) digits += advance();
      }
    }
    t.number = std::stod(digits);
    while (pos_ < src_.size()) {
      const auto u = static_cast<unsigned char>(src_[pos_]);
      if (std::isalpha(u)) {
        t.unit += advance();
      } else if (u == 0xC2 && pos_ + 1 < src_.size() && static_cast<unsigned char>(src_[pos_ + 1]) == 0xB5) {
        advance();
        advance();
        t.unit += "u";  // micro sign
      } else {
        break;
      }
    }
    t.text = digits + t.unit;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

struct UnitInfo {
  Value::Dimension dimension;
  double scale;
};

std::optional<UnitInfo> lookup_unit(std::string_view unit) {
  static const std::map<std::string, UnitInfo, std::less<>> units = {
      {"ns", {Value::Dimension::Time, 1.0}},
      {"us", {Value::Dimension::Time, 1e3}},
      {"ms", {Value::Dimension::Time, 1e6}},
      {"s", {Value::Dimension::Time, 1e9}},
      {"Hz", {Value::Dimension::Frequency, 1.0}},
      {"kHz", {Value::Dimension::Frequency, 1e3}},
      {"MHz", {Value::Dimension::Frequency, 1e6}},
      {"GHz", {Value::Dimension::Frequency, 1e9}},
      {"rad", {Value::Dimension::Angle, 1.0}},
      {"deg", {Value::Dimension::Angle, std::numbers::pi / 180.0}},
      {"turn", {Value::Dimension::Angle, 2.0 * std::numbers::pi}},
  };
  if (unit.empty()) return UnitInfo{Value::Dimension::None, 1.0};
  const auto it = units.find(unit);
  if (it == units.end()) return std::nullopt;
  return it->second;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diags)
      : toks_(std::move(tokens)), diags_(diags) {}

  PulseProgram run() {
    PulseProgram program;
    while (is_keyword("pulse") || is_keyword("ramp")) {
      program.definitions.push_back(definition());
    }
    if (!is_keyword("seq")) {
      fail({"'pulse'", "'ramp'", "'seq'"});
    }
    advance();
    program.sequence_name = expect(Tok::Ident, "sequence name").text;
    expect(Tok::LBrace);
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::End) fail({"invocation", "'wait'", "'merge'", "'}'"});
      program.sequence.push_back(item());
    }
    advance();
    if (peek().kind != Tok::End) fail({"end of input"});
    return program;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_ + 1 < toks_.size() ? pos_++ : pos_]; }
  bool is_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }

  [[noreturn]] void fail(std::initializer_list<std::string> expected) const {
    std::string msg = "expected ";
    std::size_t i = 0;
    for (const auto& e : expected) {
      if (i > 0) msg += (i + 1 == expected.size()) ? " or " : ", ";
      msg += e;
      ++i;
    }
    const Token& t = peek();
    msg += ", found " + (t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'");
    syntax_error(t.loc, msg);
  }

  const Token& expect(Tok kind, const std::string& what = {}) {
    if (peek().kind != kind) fail({what.empty() ? describe(kind) : what});
    return advance();
  }

  Value number_value(const Token& t) {
    Value v;
    v.text = t.text;
    const auto unit = lookup_unit(t.unit);
    if (!unit) {
      diags_.push_back({ErrorCode::SemanticError, t.loc.line, t.loc.column, "unknown unit '" + t.unit + "'"});
      v.dimension = Value::Dimension::None;
      v.number = t.number;
      return v;
    }
    v.dimension = unit->dimension;
    v.number = t.number * unit->scale;
    return v;
  }

  Definition definition() {
    Definition d;
    d.loc = peek().loc;
    d.kind = advance().text == "pulse" ? DefinitionKind::Pulse : DefinitionKind::Ramp;
    d.name = expect(Tok::Ident, "definition name").text;
    expect(Tok::LBrace);
    d.entries = key_values(Tok::RBrace);
    return d;
  }

  std::vector<KeyValue> key_values(Tok close) {
    std::vector<KeyValue> kvs;
    while (peek().kind != close) {
      if (peek().kind != Tok::Ident) fail({"key", describe(close)});
      KeyValue kv;
      kv.loc = peek().loc;
      kv.key = advance().text;
      expect(Tok::Equals);
      const Token& v = peek();
      if (v.kind == Tok::Number) {
        kv.value = number_value(v);
      } else if (v.kind == Tok::Ident) {
        kv.value.dimension = Value::Dimension::Identifier;
        kv.value.text = v.text;
      } else {
        fail({"number", "identifier"});
      }
      advance();
      kvs.push_back(std::move(kv));
      if (peek().kind == Tok::Comma) advance();
    }
    advance();
    return kvs;
  }

  SequenceItem item() {
    if (is_keyword("wait")) {
      Wait w;
      w.loc = advance().loc;
      if (peek().kind != Tok::Number) fail({"duration"});
      w.literal = number_value(peek());
      advance();
      if (peek().kind == Tok::Semicolon) advance();
      return w;
    }
    if (is_keyword("merge")) {
      MergeBlock m;
      m.loc = advance().loc;
      expect(Tok::LBrace);
      while (peek().kind != Tok::RBrace) {
        if (peek().kind != Tok::Ident) fail({"invocation", "'}'"});
        m.parts.push_back(invocation());
      }
      advance();
      return m;
    }
    if (peek().kind != Tok::Ident) fail({"invocation", "'wait'", "'merge'", "'}'"});
    return invocation();
  }

  Invocation invocation() {
    Invocation inv;
    inv.loc = peek().loc;
    inv.name = advance().text;
    if (peek().kind == Tok::LParen) {
      advance();
      inv.overrides = key_values(Tok::RParen);
    }
    expect(Tok::Semicolon);
    return inv;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;
};

// ---------------------------------------------------------------------------
// Semantic resolution

class Resolver {
 public:
  explicit Resolver(std::vector<Diagnostic>& diags) : diags_(diags) {}

  void resolve(PulseProgram& program) {
    std::set<std::string, std::less<>> names;
    for (auto& d : program.definitions) {
      if (!names.insert(d.name).second) {
        error(d.loc, "duplicate definition '" + d.name + "'");
      }
      resolve_definition(d);
    }
    for (auto& item : program.sequence) {
      if (auto* inv = std::get_if<Invocation>(&item)) {
        resolve_invocation(program, *inv);
      } else if (auto* w = std::get_if<Wait>(&item)) {
        resolve_wait(*w);
      } else {
        auto& m = std::get<MergeBlock>(item);
        if (m.parts.empty()) error(m.loc, "merge block is empty");
        for (auto& part : m.parts) resolve_invocation(program, part);
        for (std::size_t i = 1; i < m.parts.size(); ++i) {
          const auto& a = m.parts.front().params;
          const auto& b = m.parts[i].params;
          if (a.frequency_hz != b.frequency_hz) {
            error(m.parts[i].loc, "merged segments must share one frequency");
          }
          if (a.step_ns != b.step_ns) {
            error(m.parts[i].loc, "merged segments must share one RAM step");
          }
        }
      }
    }
  }

 private:
  void error(SourceLoc loc, std::string msg) {
    diags_.push_back({ErrorCode::SemanticError, loc.line, loc.column, std::move(msg)});
  }

  std::optional<double> number(const KeyValue& kv, Value::Dimension want, std::string_view what) {
    const auto dim = kv.value.dimension;
    if (dim == Value::Dimension::Identifier || (dim != Value::Dimension::None && dim != want)) {
      error(kv.loc, "'" + kv.key + "' expects " + std::string(what) + ", got '" + kv.value.text + "'");
      return std::nullopt;
    }
    return kv.value.number;
  }

  std::optional<std::int64_t> nanoseconds(const KeyValue& kv) {
    const auto v = number(kv, Value::Dimension::Time, "a duration");
    if (!v) return std::nullopt;
    return whole_ns(*v, kv.loc, kv.value.text);
  }

  std::optional<std::int64_t> whole_ns(double v, SourceLoc loc, const std::string& text) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-6) {
      error(loc, "'" + text + "' is not a whole number of ns");
      return std::nullopt;
    }
    return static_cast<std::int64_t>(r);
  }

  void apply(WaveformParams& p, const KeyValue& kv) {
    const bool pulse = p.kind == DefinitionKind::Pulse;
    const std::string& k = kv.key;
    if (k == "shape") {
      if (kv.value.dimension != Value::Dimension::Identifier) {
        error(kv.loc, "'shape' expects a name");
        return;
      }
      const std::string& n = kv.value.text;
      if (pulse && (n == "rect" || n == "rectangular" || n == "box")) {
        p.shape = WindowKind::Rectangular;
      } else if (n == "linear" || (pulse && n == "trapezoid")) {
        p.shape = WindowKind::LinearEdges;
      } else if (n == "blackman") {
        p.shape = WindowKind::Blackman;
      } else {
        error(kv.loc, "unknown " + std::string(pulse ? "pulse" : "ramp") + " shape '" + n + "'");
      }
    } else if (k == "dur") {
      if (auto v = nanoseconds(kv)) p.duration_ns = *v;
    } else if (k == "step") {
      if (auto v = nanoseconds(kv)) p.step_ns = *v;
    } else if (k == "freq") {
      if (auto v = number(kv, Value::Dimension::Frequency, "a frequency")) p.frequency_hz = *v;
    } else if (k == "phase") {
      if (auto v = number(kv, Value::Dimension::Angle, "an angle")) p.phase_rad = *v;
    } else if (pulse && k == "amp") {
      if (auto v = number(kv, Value::Dimension::None, "a fraction")) p.amplitude = *v;
    } else if (pulse && k == "edge") {
      if (auto v = nanoseconds(kv)) p.edge_ns = *v;
    } else if (pulse && k == "flip") {
      if (auto v = number(kv, Value::Dimension::Angle, "an angle")) p.flip_rad = *v;
    } else if (pulse && k == "flip_at") {
      if (auto v = nanoseconds(kv)) p.flip_at_ns = *v;
    } else if (!pulse && k == "start") {
      if (auto v = number(kv, Value::Dimension::None, "a fraction")) p.ramp_start = *v;
    } else if (!pulse && k == "end") {
      if (auto v = number(kv, Value::Dimension::None, "a fraction")) p.ramp_end = *v;
    } else {
      error(kv.loc, "unknown key '" + k + "' for a " + (pulse ? "pulse" : "ramp"));
    }
  }

  void check(const WaveformParams& p, SourceLoc loc) {
    if (p.duration_ns <= 0) {
      error(loc, "duration must be positive");
    } else if (p.duration_ns % kGridNs != 0) {
      error(loc, "duration " + std::to_string(p.duration_ns) + " ns is not a multiple of the 4 ns grid");
    }
    if (p.step_ns < kGridNs || p.step_ns % kGridNs != 0) {
      error(loc, "RAM step " + std::to_string(p.step_ns) + " ns is not a positive multiple of 4 ns");
    } else if (p.duration_ns > 0 && p.duration_ns % p.step_ns != 0) {
      error(loc, "duration " + std::to_string(p.duration_ns) + " ns is not a multiple of the " +
                     std::to_string(p.step_ns) + " ns RAM step");
    }
    try {
      ftw_from_frequency(p.frequency_hz);
    } catch (const Error& e) {
      error(loc, e.what());
    }
    if (p.kind == DefinitionKind::Pulse) {
      if (!(p.amplitude >= 0.0 && p.amplitude <= 1.0)) {
        error(loc, "amplitude " + std::to_string(p.amplitude) + " outside [0, 1]");
      }
      if (p.edge_ns < 0 || p.edge_ns % kGridNs != 0 || 2 * p.edge_ns > p.duration_ns) {
        error(loc, "edge must be a multiple of 4 ns and at most half the duration");
      }
      if (p.flip_at_ns && !p.flip_rad) {
        error(loc, "'flip_at' needs 'flip'");
      }
      if (p.flip_at_ns && p.step_ns > 0) {
        const auto at = *p.flip_at_ns;
        if (at <= 0 || at >= p.duration_ns || at % p.step_ns != 0) {
          error(loc, "flip_at must be a RAM-step boundary inside the pulse");
        }
      }
    } else {
      for (double a : {p.ramp_start, p.ramp_end}) {
        if (!(a >= 0.0 && a <= 1.0)) error(loc, "ramp level " + std::to_string(a) + " outside [0, 1]");
      }
    }
  }

  void resolve_definition(Definition& d) {
    d.params = WaveformParams{};
    d.params.kind = d.kind;
    if (d.kind == DefinitionKind::Ramp) d.params.shape = WindowKind::LinearEdges;
    std::set<std::string, std::less<>> seen;
    for (const auto& kv : d.entries) {
      if (!seen.insert(kv.key).second) error(kv.loc, "duplicate key '" + kv.key + "'");
      apply(d.params, kv);
    }
    for (const char* required : {"dur", "freq"}) {
      if (!seen.contains(required)) error(d.loc, "'" + d.name + "' is missing '" + required + "'");
    }
    if (seen.contains("dur") && seen.contains("freq")) check(d.params, d.loc);
  }

  void resolve_invocation(const PulseProgram& program, Invocation& inv) {
    const Definition* def = program.find(inv.name);
    if (def == nullptr) {
      error(inv.loc, "undefined name '" + inv.name + "'");
      return;
    }
    inv.params = def->params;
    if (inv.overrides.empty()) return;
    for (const auto& kv : inv.overrides) apply(inv.params, kv);
    check(inv.params, inv.loc);
  }

  void resolve_wait(Wait& w) {
    const auto dim = w.literal.dimension;
    if (dim != Value::Dimension::Time && dim != Value::Dimension::None) {
      error(w.loc, "'wait' expects a duration, got '" + w.literal.text + "'");
      return;
    }
    const auto ns = whole_ns(w.literal.number, w.loc, w.literal.text);
    if (!ns) return;
    if (*ns < 0 || *ns % kGridNs != 0) {
      error(w.loc, "wait " + std::to_string(*ns) + " ns is not a non-negative multiple of the 4 ns grid");
      return;
    }
    w.duration_ns = *ns;
  }

  std::vector<Diagnostic>& diags_;
};

}  // namespace

PulseProgram parse_program(std::string_view source) {
  std::vector<Diagnostic> diags;
  auto tokens = Lexer(source).run();
  PulseProgram program = Parser(std::move(tokens), diags).run();
  Resolver(diags).resolve(program);
  if (!diags.empty()) throw CompileError(std::move(diags));
  return program;
}

}  // namespace mwforge
