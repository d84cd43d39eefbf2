// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mwforge/atom.hpp"
#include "mwforge/compiler.hpp"
#include "mwforge/dds.hpp"
#include "mwforge/error.hpp"
#include "mwforge/io.hpp"
#include "mwforge/noise.hpp"
#include "mwforge/rf_chain.hpp"
#include "mwforge/spectral.hpp"
#include "mwforge/synth.hpp"

using namespace mwforge;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kSource = MWFORGE_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "!! ") + std::move(note));
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<void(Outcome&)> body;
  bool excluded = false;
};

ErrorCode compile_error(const std::string& src) {
  try {
    compile(src);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

double rabi_formula(double omega, double delta, double t) {
  const double g = std::hypot(omega, delta);
  const double s = std::sin(g * t / 2.0);
  return omega * omega / (g * g) * s * s;
}

void quantization_steps(Outcome& o) {
  // Rounded to the displayed precision: 10 mHz, 0.001 %, 1 urad.
  const double f_mhz = std::round(frequency_step() * 1e3 / 10.0) * 10.0;
  const double a_pct = std::round(amplitude_step() * 100.0 * 1e3) / 1e3;
  const double p_urad = std::round(phase_step() * 1e6);
  o.check(f_mhz == 230.0, fmt::format("frequency step {:.4f} mHz -> {:.0f} mHz", frequency_step() * 1e3, f_mhz));
  o.check(a_pct == 0.006, fmt::format("amplitude step {:.6f} % -> {:.3f} %", amplitude_step() * 100.0, a_pct));
  o.check(p_urad == 96.0, fmt::format("phase step {:.3f} urad -> {:.0f} urad", phase_step() * 1e6, p_urad));
}

void spur_budget(Outcome& o) {
  const auto schedule = compile(read_file(kSource + "/programs/cw_165MHz.mwp")).schedule;
  const double f_dds = dequantize(schedule.events.front().registers).frequency_hz;
  const auto env = synthesize(schedule, 800e6);
  o.check(env.duration_s() >= 200e-6, fmt::format("waveform {:.1f} us at 800 MHz", env.duration_s() * 1e6));
  for (const auto& [file, lo_target, usb_target] :
       {std::tuple{"pulse_path.json", -67.0, -87.0}, std::tuple{"dressing_path.json", -62.0, -62.0}}) {
    const auto cfg = chain_config_from_json(read_file(kSource + "/configs/" + file));
    const auto analytic = relative_to_carrier(apply_filter(mix_spurs(f_dds, cfg), cfg.filter));
    o.check(std::abs(analytic[1].level_dbc - lo_target) <= 0.1,
            fmt::format("{} analytic LO {:.3f} dBc (target {})", file, analytic[1].level_dbc, lo_target));
    o.check(std::abs(analytic[2].level_dbc - usb_target) <= 0.1,
            fmt::format("{} analytic USB {:.3f} dBc (target {})", file, analytic[2].level_dbc, usb_target));
    const auto est = output_spectrum(env, cfg, 10e3);
    const double lo = est.peak_near(cfg.f_lo, 5 * est.rbw).power_dbc;
    const double usb = est.peak_near(cfg.f_lo + f_dds, 5 * est.rbw).power_dbc;
    o.check(std::abs(lo - lo_target) <= 3.0, fmt::format("{} FFT LO {:.2f} dBc", file, lo));
    o.check(std::abs(usb - usb_target) <= 3.0, fmt::format("{} FFT USB {:.2f} dBc", file, usb));
  }
}

void noise_integration(Outcome& o) {
  const NoiseSpectrum flat{NoiseKind::Phase, {{10.0, -120.0}, {1e5, -120.0}}};
  const double closed = std::sqrt(2.0 * 1e-12 * (1e5 - 10.0));
  const double got = integrate_rms(flat, 10.0, 1e5);
  o.check(std::abs(got / closed - 1.0) <= 1e-4 && std::round(got * 1e7) == 4472.0,
          fmt::format("flat -120 dBc/Hz: {:.4f} urad (closed form {:.4f})", got * 1e6, closed * 1e6));

  const auto lo = load_noise_file(kSource + "/data/noise/lo_7GHz.csv");
  const double shift = scale_multiplied(lo, 70.0).points.front().level_dbc_hz - lo.points.front().level_dbc_hz;
  o.check(std::abs(shift - 36.90) <= 0.01, fmt::format("x70 adds {:.4f} dB", shift));

  const auto out = load_noise_file(kSource + "/data/noise/output_path.csv");
  const double rms = integrate_rms(out, 10.0, 1e5);
  o.check(std::abs(rms * 1e6 - 580.0) <= 0.15 * 580.0, fmt::format("output path table: {:.1f} urad", rms * 1e6));
}

void synthesis_round_trip(Outcome& o) {
  const auto table = load_noise_file(kSource + "/data/noise/output_path.csv");
  SynthesisOptions opt;
  opt.extend_flat = true;  // the table runs past the 500 kHz Nyquist limit
  const double fs = 1e6;
  const std::size_t nfft = std::size_t{1} << 18;
  std::vector<double> avg;
  std::vector<double> freq;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto x = synthesize_noise(table, 1.0, fs, static_cast<std::uint64_t>(seed), opt);
    const auto psd = welch_psd(x, fs, nfft);
    if (avg.empty()) {
      avg.assign(psd.value.size(), 0.0);
      freq = psd.frequency_hz;
    }
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += psd.value[k] / seeds;
  }
  for (double decade = 10.0; decade < 1e5; decade *= 10.0) {
    const double mid = decade * std::sqrt(10.0);
    double measured = 0.0, target = 0.0;
    int bins = 0;
    for (std::size_t k = 1; k < freq.size(); ++k) {
      if (std::abs(freq[k] / mid - 1.0) > 0.1) continue;
      measured += avg[k];
      target += 2.0 * std::pow(10.0, table.level_at(freq[k]) / 10.0);
      ++bins;
    }
    const double err = 10.0 * std::log10(measured / target);
    o.check(bins > 0 && std::abs(err) <= 3.0, fmt::format("{:.0f} Hz: {:+.2f} dB over {} bins", mid, err, bins));
  }
}

void compiler_golden(Outcome& o) {
  const auto c = compile(read_file(kSource + "/programs/update_gaps.mwp"));
  const auto timeline = pulse_timeline(c.schedule);
  std::vector<std::int64_t> gaps;
  for (std::size_t i = 1; i < timeline.size(); ++i) gaps.push_back(timeline[i].gap_before_ns);
  o.check(gaps == std::vector<std::int64_t>{0, 700, 400},
          fmt::format("update gaps {} ns", fmt::join(gaps, "/")));

  const auto cap = compile_error("pulse a { dur = 4100ns, step = 4ns, freq = 1MHz }\nseq s { a; }");
  o.check(cap == ErrorCode::CapacityExceeded, fmt::format("1025 words -> {}", to_string(cap)));
  const auto over = compile_error(read_file(kSource + "/programs/nine_shapes.mwp"));
  o.check(over == ErrorCode::ProfileOverflow, fmt::format("9 shapes -> {}", to_string(over)));

  std::mt19937_64 rng(7);
  const char* shapes[] = {"rect", "linear", "blackman"};
  int programs = 0, compiled = 0, bad = 0;
  for (; programs < 1000; ++programs) {
    std::string src;
    const int defs = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < defs; ++i) {
      const std::int64_t step = 4 * static_cast<std::int64_t>(1 + rng() % 4);
      src += fmt::format("pulse p{} {{ shape = {}, dur = {}ns, step = {}ns, freq = {}kHz, amp = {} }}\n", i,
                         shapes[rng() % 3], step * static_cast<std::int64_t>(2 + rng() % 250), step,
                         1 + rng() % 200000, static_cast<double>(1 + rng() % 8) / 8.0);
    }
    src += "seq s {";
    for (int k = 0, n = 1 + static_cast<int>(rng() % 15); k < n; ++k) {
      if (rng() % 4 == 0) {
        src += fmt::format(" wait {}ns;", 4 * (rng() % 500));
      } else {
        src += fmt::format(" p{};", rng() % static_cast<unsigned>(defs));
      }
    }
    src += " }\n";
    const auto sched = compile(src).schedule;
    ++compiled;
    bool ok = validate_timing(sched).ok() && sched.total_duration_ns % 4 == 0;
    for (const auto& e : sched.events) ok = ok && e.t_ns % 4 == 0;
    bad += ok ? 0 : 1;
  }
  o.check(bad == 0, fmt::format("{} random programs, {} off-grid or invalid", compiled, bad));
}

void bloch_oracle(Outcome& o) {
  const double base = 2 * kPi * 1e6;
  double worst = 0.0;
  int points = 0;
  for (double om : {0.5, 1.0, 2.0, 3.0}) {
    for (double de : {0.0, 0.7, -1.5, 3.0, 5.0}) {
      const double omega = om * base, delta = de * base;
      const double t = (1.0 + 0.37 * om + 0.11 * std::abs(de)) * 1e-6;
      const auto drive = DriveField::constant(omega, 0.4, delta);
      const auto tr = evolve({}, drive, t, max_step(drive) / 10);
      worst = std::max(worst, std::abs(tr.final().excited_population() - rabi_formula(omega, delta, t)));
      ++points;
    }
  }
  o.check(points == 20 && worst < 1e-6, fmt::format("{} grid points, worst population error {:.2e}", points, worst));

  const auto drive = DriveField::constant(base, 0.0, 0.8 * base);
  const double t = 2.3e-6, exact = rabi_formula(base, 0.8 * base, t);
  std::vector<double> errs;
  for (int k = 0; k < 3; ++k) {
    const auto tr = evolve({}, drive, t, max_step(drive) / std::pow(2.0, k), 1, false);
    errs.push_back(std::abs(tr.final().excited_population() - exact));
  }
  const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
  o.check(r1 >= 8.0 && r2 >= 8.0, fmt::format("RK4 error ratios per halving {:.1f}, {:.1f}", r1, r2));

  const auto c = compile(read_file(kSource + "/programs/phase_flip.mwp"));
  const auto env = synthesize(c.schedule, 1e9);
  const double f = dequantize(c.schedule.events.front().registers).frequency_hz;
  const auto flip = DriveField::from_envelope(env, f, 2 * kPi * 1e6, 0.0);
  const auto tr = evolve({}, flip, env.duration_s(), flip.sample_period() / 4);
  const double dw = std::abs(tr.final().w - (-1.0));
  o.check(dw <= 1e-4, fmt::format("phase-flip pulse returns w to within {:.2e}", dw));
}

void shaped_pulse(Outcome& o) {
  const double T = 1e-6;
  const std::size_t n = 1000;
  std::vector<double> box(n, 1.0), bm(n);
  for (std::size_t i = 0; i < n; ++i) bm[i] = blackman((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  std::vector<double> det;
  for (double d = std::sqrt(35.0) * kPi / T; d <= 40 * kPi / T; d += 0.02 * kPi / T) det.push_back(d);
  const auto pb = excitation_profile(box, T / n, kPi, det);
  const auto pk = excitation_profile(bm, T / n, kPi, det);
  const auto highest_lobe = [](const std::vector<ProfilePoint>& p) {
    double peak = 0.0;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
      if (p[i].excited > p[i - 1].excited && p[i].excited >= p[i + 1].excited) peak = std::max(peak, p[i].excited);
    }
    return peak;
  };
  const double lb = highest_lobe(pb), lk = highest_lobe(pk);
  const double margin = 10 * std::log10(lb / lk);
  o.check(lk > 0.0 && margin >= 30.0,
          fmt::format("highest sidelobe box {:.1f} dB, Blackman {:.1f} dB, margin {:.1f} dB", 10 * std::log10(lb),
                      10 * std::log10(lk), margin));
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "quantization step sizes", 1.0, quantization_steps},
      {2, "spur budget, analytic and FFT", 30.0, spur_budget},
      {3, "phase-noise integration", 1.0, noise_integration},
      {4, "noise synthesis round trip", 60.0, synthesis_round_trip},
      {5, "compiler golden schedules", 10.0, compiler_golden},
      {6, "Bloch oracle", 30.0, bloch_oracle},
      {7, "shaped-pulse sidelobes", 30.0, shaped_pulse},
      {8, "absolute powers, AM-noise figure, switch transients", 0.0, nullptr, true},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (c.excluded) {
      fmt::print("EXCLUDED [{}] {}: not reproducible without hardware or raw instrument data\n", c.id, c.name);
      continue;
    }
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(dt < c.budget_s, fmt::format("runtime {:.2f} s (limit {:.0f} s)", dt, c.budget_s));
    fmt::print("{} [{}] {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name);
    for (const auto& note : o.notes) fmt::print("       {}\n", note);
    failed += o.pass ? 0 : 1;
  }
  fmt::print("{} criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
