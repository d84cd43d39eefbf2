#include "commands.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "json.hpp"
#include "mwforge/atom.hpp"
#include "mwforge/compiler.hpp"
#include "mwforge/error.hpp"
#include "mwforge/io.hpp"
#include "mwforge/noise.hpp"
#include "mwforge/rf_chain.hpp"
#include "mwforge/synth.hpp"

namespace mwforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_json(const std::string& path) { return fs::path(path).extension() == ".json"; }

EventSchedule load_schedule(const std::string& input) {
  const auto text = read_file(input);
  if (is_json(input)) return schedule_from_json(text);
  return compile(text).schedule;
}

json load_json(const std::string& path, const char* what) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SyntaxError, fmt::format("{} {}: {}", what, path, e.what()));
  }
}

void emit(const std::string& out, std::string_view content) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    write_file(out, content);
  }
}

std::pair<double, double> parse_band(const std::string& band) {
  const auto colon = band.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "band must be f1:f2, got '" + band + "'");
  try {
    return {std::stod(band.substr(0, colon)), std::stod(band.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "band must be f1:f2 in Hz, got '" + band + "'");
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "grid must be from:to:count, got '" + spec + "'");
  }
  double lo = 0, hi = 0;
  long n = 0;
  try {
    lo = std::stod(spec.substr(0, a));
    hi = std::stod(spec.substr(a + 1, b - a - 1));
    n = std::stol(spec.substr(b + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "grid must be from:to:count, got '" + spec + "'");
  }
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "grid count must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> grid_from_json(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::SemanticError, fmt::format("composite spec: missing \"{}\"", key));
  const auto& g = j.at(key);
  if (g.is_array()) return g.get<std::vector<double>>();
  return parse_grid(fmt::format("{}:{}:{}", g.at("from").get<double>(), g.at("to").get<double>(), g.at("count").get<long>()));
}

double first_programmed_frequency(const EventSchedule& s) {
  for (const auto& e : s.events) {
    if (e.action == Action::SetRegisters) return dequantize(e.registers).frequency_hz;
  }
  throw Error(ErrorCode::SemanticError, "schedule never programs a frequency");
}

}  // namespace

std::string resolve_config(const std::string& name, const std::string& fallback) {
  const char* dir = std::getenv("MWFORGE_CONFIG_DIR");
  const std::string wanted = name.empty() ? fallback : name;
  if (!name.empty() && fs::exists(name)) return name;
  if (dir != nullptr && *dir != '\0') {
    const auto candidate = fs::path(dir) / wanted;
    if (fs::exists(candidate)) return candidate.string();
  }
  if (name.empty()) {
    throw Error(ErrorCode::Io, fmt::format("no config given and {} not found in $MWFORGE_CONFIG_DIR", fallback));
  }
  throw Error(ErrorCode::Io, "config not found: " + name);
}

int run_compile(const CompileArgs& args) {
  const auto c = compile(read_file(args.program));
  const auto json_text = to_json(c.schedule);
  if (args.out.empty()) {
    std::cout << json_text;
    if (!args.quiet) std::cerr << timing_report(c.schedule);
  } else {
    write_file(args.out, json_text);
    if (!args.quiet) std::cout << timing_report(c.schedule);
  }
  return 0;
}

int run_spectrum(const SpectrumArgs& args) {
  const auto cfg = chain_config_from_json(read_file(resolve_config(args.config, "pulse_path.json")));
  const auto schedule = load_schedule(args.input);
  SynthOptions opt;
  opt.switch_leakage_db = -cfg.switch_isolation_db;
  auto env = synthesize(schedule, args.sample_rate, {}, opt);
  if (args.with_phase_noise) {
    const auto table = load_noise_file(resolve_config(args.noise_table, "output_path.csv"));
    apply_phase_noise(env, synthesize_noise(table, env.duration_s(), env.sample_rate, args.seed));
  }
  const auto est = output_spectrum(env, cfg, args.rbw);
  emit(args.out, to_csv(est));

  const double f_dds = first_programmed_frequency(schedule);
  const double window = 5.0 * est.rbw;
  const auto carrier = est.peak_near(cfg.f_lo - f_dds, window);
  const auto lo = est.peak_near(cfg.f_lo, window);
  const auto usb = est.peak_near(cfg.f_lo + f_dds, window);
  auto& log = args.out.empty() ? std::cerr : std::cout;
  log << fmt::format("path {} ({}), rbw {:.1f} Hz, {} bins\n", to_string(cfg.path), to_string(cfg.mixer_kind), est.rbw,
                     est.bins.size());
  log << fmt::format("  carrier  {:.6f} GHz  {:8.2f} dBc\n", carrier.f_hz / 1e9, carrier.power_dbc);
  log << fmt::format("  lo       {:.6f} GHz  {:8.2f} dBc\n", lo.f_hz / 1e9, lo.power_dbc);
  log << fmt::format("  usb      {:.6f} GHz  {:8.2f} dBc\n", usb.f_hz / 1e9, usb.power_dbc);
  return 0;
}

int run_noise(const NoiseArgs& args) {
  const auto [f1, f2] = parse_band(args.band);
  if (!args.table.empty()) {
    const auto spec = load_noise_file(args.table);
    fmt::print("band {:g} Hz .. {:g} Hz\n{:<24} {:>12.2f} urad\n", f1, f2, fs::path(args.table).filename().string(),
               integrate_rms(spec, f1, f2) * 1e6);
    return 0;
  }
  const auto path = resolve_config(args.config, "budget.json");
  const auto budget = load_budget(path);
  fmt::print("band {:g} Hz .. {:g} Hz\n", f1, f2);
  for (const auto& row : budget.integrate(f1, f2)) fmt::print("{:<24} {:>12.2f} urad\n", row.name, row.rms * 1e6);

  const auto cfg = load_json(path, "noise budget");
  if (cfg.contains("multiplied")) {
    for (const auto& [name, factor] : cfg["multiplied"].items()) {
      const auto it = budget.sources.find(name);
      if (it == budget.sources.end()) continue;
      const auto scaled = scale_multiplied(it->second, factor.get<double>());
      fmt::print("{:<24} {:>12.2f} urad\n", fmt::format("{} x{:g}", name, factor.get<double>()),
                 integrate_rms(scaled, f1, f2) * 1e6);
    }
  }
  const std::vector<std::string> parts{"lo_7GHz", "dds"};
  if (budget.sources.count(parts[0]) && budget.sources.count(parts[1])) {
    const auto combined = combine({budget.sources.at(parts[0]), budget.sources.at(parts[1])});
    fmt::print("{:<24} {:>12.2f} urad\n", "combined lo_7GHz+dds", integrate_rms(combined, f1, f2) * 1e6);
    fmt::print("dominant source per decade:\n");
    for (double lo = std::pow(10.0, std::floor(std::log10(f1))); lo < f2; lo *= 10.0) {
      const double a = std::max(lo, f1), b = std::min(lo * 10.0, f2);
      if (!(b > a)) continue;
      const std::string who = budget.dominant_at(std::sqrt(a * b), parts);
      fmt::print("  {:>10g} .. {:<10g} Hz  {}\n", a, b, who.empty() ? "-" : who);
    }
  }
  return 0;
}

int run_synth_noise(const SynthNoiseArgs& args) {
  const auto spec = load_noise_file(args.table);
  SynthesisOptions opt;
  opt.extend_flat = args.extend_flat;
  const auto x = synthesize_noise(spec, args.duration, args.sample_rate, args.seed, opt);
  std::string csv = "t_s,phi_rad\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    csv += fmt::format("{:.9e},{:.9e}\n", static_cast<double>(i) / args.sample_rate, x[i]);
  }
  emit(args.out, csv);
  return 0;
}

int run_bloch(const BlochArgs& args) {
  if (!args.composite.empty()) {
    const auto spec = load_json(args.composite, "composite spec");
    try {
      std::vector<CompositePulse> seq;
      for (const auto& p : spec.at("sequence")) {
        const double area = p.contains("area_deg") ? p["area_deg"].get<double>() * std::numbers::pi / 180.0
                                                   : p.at("area_rad").get<double>();
        const double phase = p.contains("phase_deg") ? p["phase_deg"].get<double>() * std::numbers::pi / 180.0
                                                     : p.value("phase_rad", 0.0);
        seq.push_back({area, phase});
      }
      if (!spec.contains("rabi_rad_s")) {
        throw Error(ErrorCode::MissingCalibration, "composite spec needs \"rabi_rad_s\"");
      }
      const auto map = composite_scan(seq, grid_from_json(spec, "amp_error"), grid_from_json(spec, "detuning_rad_s"),
                                      spec.at("rabi_rad_s").get<double>());
      emit(args.out, to_csv(map));
      return 0;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SemanticError, std::string("composite spec: ") + e.what());
    }
  }

  if (args.input.empty()) throw Error(ErrorCode::InvalidArgument, "bloch needs a program/schedule or --composite");
  const auto cfg = load_json(resolve_config(args.config, "atom.json"), "atom config");
  if (!cfg.contains("rabi_peak_rad_s") || !cfg["rabi_peak_rad_s"].is_number()) {
    throw Error(ErrorCode::MissingCalibration, "atom config must set rabi_peak_rad_s (Rabi frequency at amplitude 1.0)");
  }
  const double rabi_peak = cfg["rabi_peak_rad_s"].get<double>();
  const auto schedule = load_schedule(args.input);
  const double f_ref = cfg.value("resonance_dds_hz", first_programmed_frequency(schedule));
  const double fs_rate = cfg.value("sample_rate_hz", 1e9);
  const auto env = synthesize(schedule, fs_rate);
  const auto drive = DriveField::from_envelope(env, f_ref, rabi_peak, cfg.value("detuning_rad_s", 0.0));

  if (!args.profile.empty()) {
    // Amplitude samples of the played pulse, trimmed to where the output is on.
    const auto base = demodulate(env, f_ref);
    std::size_t first = base.size(), last = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (std::abs(base[i]) > 0.0) {
        first = std::min(first, i);
        last = i;
      }
    }
    if (first > last) throw Error(ErrorCode::InvalidArgument, "schedule plays no pulse");
    std::vector<double> amp;
    for (std::size_t i = first; i <= last; ++i) amp.push_back(std::abs(base[i]));
    const auto profile =
        excitation_profile(amp, 1.0 / fs_rate, cfg.value("pulse_area_rad", std::numbers::pi), parse_grid(args.profile));
    emit(args.out, to_csv(profile));
    return 0;
  }

  const double period = drive.sample_period();
  const double m = std::ceil(period / max_step(drive) - 1e-9);
  const auto stride = cfg.value("record_stride", std::size_t{1});
  const auto traj = evolve({}, drive, env.duration_s(), period / std::max(1.0, m), stride);
  emit(args.out, to_csv(traj));
  auto& log = args.out.empty() ? std::cerr : std::cout;
  const auto& s = traj.final();
  log << fmt::format("final u={:.9f} v={:.9f} w={:.9f} p_excited={:.9f}\n", s.u, s.v, s.w, s.excited_population());
  return 0;
}

int run_calibrate_ripple(const RippleArgs& args) {
  const auto cfg = chain_config_from_json(read_file(resolve_config(args.config, "pulse_path.json")));
  std::string csv = "f_Hz,gain_dB,amplitude_correction\n";
  for (const auto& r : ripple_table(cfg.filter, args.span, args.step)) {
    csv += fmt::format("{:.1f},{:.6f},{:.9f}\n", r.f_hz, r.gain_db, r.amplitude_correction);
  }
  emit(args.out, csv);
  return 0;
}

}  // namespace mwforge::cli
