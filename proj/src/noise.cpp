#include "mwforge/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mwforge/error.hpp"
#include "mwforge/spectral.hpp"

namespace mwforge {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Exact integral of 10^(L/10) between a and b inside one log-log segment.
double segment_integral(const NoisePoint& p0, const NoisePoint& p1, double a, double b) {
  if (std::isinf(p0.level_dbc_hz) || std::isinf(p1.level_dbc_hz) || b <= a) return 0.0;
  const double m = (p1.level_dbc_hz - p0.level_dbc_hz) / 10.0 / std::log10(p1.f_hz / p0.f_hz);
  const double s0 = std::pow(10.0, p0.level_dbc_hz / 10.0);  // S at p0.f_hz
  const double e = m + 1.0;
  const double la = std::log(a / p0.f_hz);
  const double lb = std::log(b / p0.f_hz);
  if (std::abs(e) < 1e-12) return s0 * p0.f_hz * (lb - la);
  // f0*s0*((b/f0)^e - (a/f0)^e)/e, written with expm1 to stay accurate near e = 0.
  return s0 * p0.f_hz * std::exp(e * la) * std::expm1(e * (lb - la)) / e;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_level(const std::string& text) {
  const std::string t = trim(text);
  if (t == "-inf" || t == "-Inf" || t == "-INF") return kNegInf;
  std::size_t used = 0;
  const double v = std::stod(t, &used);
  if (used != t.size()) throw std::invalid_argument(t);
  return v;
}

}  // namespace

double NoiseSpectrum::level_at(double f) const {
  if (points.empty() || f < points.front().f_hz || f > points.back().f_hz) return kNegInf;
  auto hi = std::lower_bound(points.begin(), points.end(), f,
                             [](const NoisePoint& p, double x) { return p.f_hz < x; });
  if (hi->f_hz == f) return hi->level_dbc_hz;
  const auto lo = hi - 1;
  if (std::isinf(lo->level_dbc_hz) || std::isinf(hi->level_dbc_hz)) return kNegInf;
  const double t = std::log(f / lo->f_hz) / std::log(hi->f_hz / lo->f_hz);
  return lo->level_dbc_hz + t * (hi->level_dbc_hz - lo->level_dbc_hz);
}

void validate(const NoiseSpectrum& s) {
  if (s.points.size() < 2) throw Error(ErrorCode::EmptyTable, "noise table needs at least two points");
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (!(s.points[i].f_hz > 0.0) || !std::isfinite(s.points[i].f_hz)) {
      throw Error(ErrorCode::NonMonotonicFrequency, "offset frequencies must be positive");
    }
    if (i > 0 && !(s.points[i].f_hz > s.points[i - 1].f_hz)) {
      throw Error(ErrorCode::NonMonotonicFrequency,
                  "offset frequency " + std::to_string(s.points[i].f_hz) + " Hz does not increase");
    }
    if (std::isnan(s.points[i].level_dbc_hz) || s.points[i].level_dbc_hz == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::InvalidArgument, "noise level must be finite or -inf");
    }
  }
}

NoiseSpectrum load_noise_table(std::string_view csv, NoiseKind kind) {
  NoiseSpectrum spec;
  spec.kind = kind;
  std::istringstream in{std::string(csv)};
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(trim(cell));
    if (!header_seen && !cells.empty() && cells[0] == "f_hz") {
      header_seen = true;
      continue;
    }
    if (cells.size() < 2) {
      throw Error(ErrorCode::SyntaxError, "noise table line " + std::to_string(line_no) + ": expected f_hz,level_dbc_hz");
    }
    NoisePoint p{};
    try {
      p.f_hz = parse_level(cells[0]);
      p.level_dbc_hz = parse_level(cells[1]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::SyntaxError, "noise table line " + std::to_string(line_no) + ": not a number");
    }
    p.floor = cells.size() > 2 && (cells[2] == "1" || cells[2] == "true" || cells[2] == "floor");
    spec.points.push_back(p);
  }
  if (spec.points.empty()) throw Error(ErrorCode::EmptyTable, "noise table has no rows");
  validate(spec);
  return spec;
}

NoiseSpectrum load_noise_file(const std::string& path, NoiseKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read noise table " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_noise_table(ss.str(), kind);
}

std::string to_csv(const NoiseSpectrum& s) {
  std::ostringstream out;
  out.precision(10);
  out << "f_hz,level_dbc_hz,floor\n";
  for (const auto& p : s.points) out << p.f_hz << ',' << p.level_dbc_hz << ',' << (p.floor ? 1 : 0) << '\n';
  return out.str();
}

double integrate_rms(const NoiseSpectrum& s, double f1, double f2) {
  validate(s);
  if (f1 > f2) throw Error(ErrorCode::InvalidArgument, "integration band must satisfy f1 <= f2");
  if (f1 < s.f_min() || f2 > s.f_max()) {
    throw Error(ErrorCode::RangeOutsideTable, "band " + std::to_string(f1) + ".." + std::to_string(f2) +
                                                  " Hz exceeds the table range " + std::to_string(s.f_min()) +
                                                  ".." + std::to_string(s.f_max()) + " Hz");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
    const double a = std::max(f1, s.points[i].f_hz);
    const double b = std::min(f2, s.points[i + 1].f_hz);
    total += segment_integral(s.points[i], s.points[i + 1], a, b);
  }
  return std::sqrt(2.0 * total);
}

NoiseSpectrum scale_multiplied(const NoiseSpectrum& s, double factor) {
  if (!(factor >= 1.0)) throw Error(ErrorCode::InvalidArgument, "multiplication factor must be >= 1");
  NoiseSpectrum out = s;
  const double db = 20.0 * std::log10(factor);
  for (auto& p : out.points) p.level_dbc_hz += db;
  return out;
}

NoiseSpectrum combine(const std::vector<NoiseSpectrum>& specs) {
  if (specs.empty()) throw Error(ErrorCode::EmptyTable, "nothing to combine");
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (const auto& s : specs) {
    validate(s);
    if (s.kind != specs.front().kind) throw Error(ErrorCode::InvalidArgument, "cannot combine phase and amplitude noise");
    lo = std::max(lo, s.f_min());
    hi = std::min(hi, s.f_max());
  }
  if (!(lo < hi)) throw Error(ErrorCode::DisjointRanges, "noise tables share no frequency range");

  std::set<double> grid{lo, hi};
  for (const auto& s : specs) {
    for (const auto& p : s.points) {
      if (p.f_hz > lo && p.f_hz < hi) grid.insert(p.f_hz);
    }
  }
  NoiseSpectrum out;
  out.kind = specs.front().kind;
  for (double f : grid) {
    double sum = 0.0;
    bool all_floor = true;
    for (const auto& s : specs) {
      sum += std::pow(10.0, s.level_at(f) / 10.0);
      const auto it = std::find_if(s.points.begin(), s.points.end(), [f](const NoisePoint& p) { return p.f_hz == f; });
      all_floor = all_floor && it != s.points.end() && it->floor;
    }
    out.points.push_back({f, sum > 0.0 ? 10.0 * std::log10(sum) : kNegInf, all_floor});
  }
  return out;
}

std::vector<double> synthesize_noise(const NoiseSpectrum& s, double duration_s, double fs, std::uint64_t seed,
                                     const SynthesisOptions& options) {
  validate(s);
  if (!(duration_s > 0.0) || !(fs > 0.0)) throw Error(ErrorCode::InvalidArgument, "duration and sample rate must be positive");
  if (fs / 2.0 < s.f_max() && !options.extend_flat) {
    throw Error(ErrorCode::NyquistViolation, "fs/2 = " + std::to_string(fs / 2.0) +
                                                 " Hz is below the last breakpoint " + std::to_string(s.f_max()) + " Hz");
  }
  const auto wanted = static_cast<std::size_t>(std::ceil(duration_s * fs - 1e-9));
  const std::size_t n = std::bit_ceil(std::max<std::size_t>(wanted, 2));
  const double df = fs / static_cast<double>(n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> half(n / 2 + 1, {0.0, 0.0});
  bool any = false;
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double f = static_cast<double>(k) * df;
    double level = s.level_at(f);
    if (options.extend_flat) {
      if (f < s.f_min()) level = s.points.front().level_dbc_hz;
      if (f > s.f_max()) level = s.points.back().level_dbc_hz;
    }
    // Draw both quadratures regardless so the stream does not depend on the table.
    const double g_re = gauss(rng);
    const double g_im = gauss(rng);
    if (std::isinf(level)) continue;
    const double S = 2.0 * std::pow(10.0, level / 10.0);
    // E|X_k|^2 = S df / 2 with X = Y / n.
    const double sigma = static_cast<double>(n) * std::sqrt(S * df / 4.0);
    half[k] = {sigma * g_re, sigma * g_im};
    any = true;
  }
  std::vector<double> x(wanted, 0.0);
  if (!any) return x;
  auto full = inverse_real_fft(half, n);
  for (std::size_t i = 0; i < wanted; ++i) x[i] = full[i] / static_cast<double>(n);
  return x;
}

std::vector<NoiseBudget::Row> NoiseBudget::integrate(double f1, double f2) const {
  std::vector<Row> rows;
  for (const auto& [name, spec] : sources) rows.push_back({name, integrate_rms(spec, f1, f2)});
  return rows;
}

std::string NoiseBudget::dominant_at(double f, const std::vector<std::string>& names) const {
  std::string best;
  double best_level = kNegInf;
  for (const auto& name : names) {
    const auto it = sources.find(name);
    if (it == sources.end()) continue;
    const auto& pts = it->second.points;
    // A level interpolated only from floor points says nothing about the source.
    const auto hi = std::lower_bound(pts.begin(), pts.end(), f, [](const NoisePoint& p, double x) { return p.f_hz < x; });
    if (hi == pts.end()) continue;
    const bool floor = hi->floor && (hi->f_hz == f || hi == pts.begin() || (hi - 1)->floor);
    if (floor) continue;
    const double level = it->second.level_at(f);
    if (level > best_level) {
      best_level = level;
      best = name;
    }
  }
  return best;
}

NoiseBudget load_budget(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read noise budget " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SyntaxError, std::string("noise budget: ") + e.what());
  }
  if (!j.contains("sources") || !j["sources"].is_object()) {
    throw Error(ErrorCode::SemanticError, "noise budget: missing \"sources\" object");
  }
  const auto base = std::filesystem::path(path).parent_path();
  NoiseBudget budget;
  for (const auto& [name, file] : j["sources"].items()) {
    if (!file.is_string()) throw Error(ErrorCode::SemanticError, "noise budget: source '" + name + "' must name a file");
    budget.sources[name] = load_noise_file((base / file.get<std::string>()).string());
  }
  return budget;
}

}  // namespace mwforge
