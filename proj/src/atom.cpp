#include "mwforge/atom.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "mwforge/error.hpp"

namespace mwforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Index-ordered results regardless of which worker finishes first.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Derivative {
  double du, dv, dw;
};

Derivative bloch_rhs(const BlochState& s, double rabi, double phase, double detuning) {
  const double ox = rabi * std::cos(phase);
  const double oy = rabi * std::sin(phase);
  return {-detuning * s.v - oy * s.w, detuning * s.u + ox * s.w, oy * s.u - ox * s.v};
}

BlochState advance(const BlochState& s, const Derivative& d, double h) {
  return {s.u + h * d.du, s.v + h * d.dv, s.w + h * d.dw};
}

}  // namespace

double BlochState::norm() const { return std::sqrt(u * u + v * v + w * w); }

DriveField DriveField::constant(double rabi, double phase, double detuning) {
  if (rabi < 0.0) throw Error(ErrorCode::InvalidArgument, "Rabi frequency must be >= 0");
  DriveField d;
  d.rabi_fn_ = [rabi](double) { return rabi; };
  d.phase_fn_ = [phase](double) { return phase; };
  d.detuning_ = detuning;
  d.max_rabi_ = rabi;
  d.max_detuning_ = std::abs(detuning);
  return d;
}

DriveField DriveField::sampled(std::vector<double> rabi, std::vector<double> phase, double sample_period,
                               double detuning, Interpolation interp) {
  if (rabi.empty() || rabi.size() != phase.size()) {
    throw Error(ErrorCode::InvalidArgument, "drive samples must be non-empty and of equal length");
  }
  if (!(sample_period > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample period must be positive");
  DriveField d;
  for (double r : rabi) {
    if (r < 0.0) throw Error(ErrorCode::InvalidArgument, "Rabi frequency must be >= 0");
    d.max_rabi_ = std::max(d.max_rabi_, r);
  }
  d.rabi_samples_ = std::move(rabi);
  d.phase_samples_ = std::move(phase);
  d.period_ = sample_period;
  d.interp_ = interp;
  d.detuning_ = detuning;
  d.max_detuning_ = std::abs(detuning);
  return d;
}

DriveField DriveField::from_functions(std::function<double(double)> rabi, std::function<double(double)> phase,
                                      std::function<double(double)> detuning, double max_rabi,
                                      double max_abs_detuning) {
  DriveField d;
  d.rabi_fn_ = std::move(rabi);
  d.phase_fn_ = phase ? std::move(phase) : [](double) { return 0.0; };
  d.detuning_fn_ = std::move(detuning);
  d.max_rabi_ = max_rabi;
  d.max_detuning_ = max_abs_detuning;
  return d;
}

DriveField DriveField::from_envelope(const ComplexEnvelope& envelope, double f_ref_hz, double rabi_peak,
                                     double detuning) {
  if (!(rabi_peak > 0.0)) throw Error(ErrorCode::MissingCalibration, "rabi_peak must be a positive calibration");
  const auto base = demodulate(envelope, f_ref_hz);
  std::vector<double> rabi(base.size()), phase(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double a = std::abs(base[i]);
    rabi[i] = rabi_peak * a;
    phase[i] = a > 0.0 ? -std::arg(base[i]) : 0.0;
  }
  return sampled(std::move(rabi), std::move(phase), 1.0 / envelope.sample_rate, detuning, Interpolation::Hold);
}

namespace {
double left_of(double t) { return t > 0.0 ? std::nextafter(t, -std::numeric_limits<double>::infinity()) : t; }
}  // namespace

double DriveField::sample(const std::vector<double>& data, double t, Side side) const {
  const double x = t / period_;
  const auto last = static_cast<double>(data.size() - 1);
  if (interp_ == Interpolation::Linear) {
    const double xc = std::clamp(x, 0.0, last);
    const auto k = static_cast<std::size_t>(std::floor(xc));
    if (k + 1 >= data.size()) return data.back();
    const double f = xc - static_cast<double>(k);
    return data[k] + f * (data[k + 1] - data[k]);
  }
  double k = side == Side::Right ? std::floor(x + 1e-9) : std::ceil(x - 1e-9) - 1.0;
  k = std::clamp(k, 0.0, last);
  return data[static_cast<std::size_t>(k)];
}

double DriveField::rabi(double t, Side side) const {
  if (rabi_fn_) return rabi_fn_(side == Side::Left ? left_of(t) : t);
  const double end = sampled_duration();
  if (t < 0.0 || t > end || (side == Side::Right && t >= end * (1.0 - 1e-15) && interp_ == Interpolation::Hold)) {
    return 0.0;
  }
  return sample(rabi_samples_, t, side);
}

double DriveField::phase(double t, Side side) const {
  if (phase_fn_) return phase_fn_(side == Side::Left ? left_of(t) : t);
  return sample(phase_samples_, t, side);
}

double DriveField::detuning(double t) const { return detuning_fn_ ? detuning_fn_(t) : detuning_; }

double DriveField::sampled_duration() const {
  if (rabi_samples_.empty()) return 0.0;
  const auto n = static_cast<double>(rabi_samples_.size());
  return interp_ == Interpolation::Hold ? n * period_ : (n - 1.0) * period_;
}

double max_step(const DriveField& drive) {
  const double rate = std::max(drive.max_rabi(), drive.max_abs_detuning());
  return rate > 0.0 ? kTwoPi / (50.0 * rate) : std::numeric_limits<double>::infinity();
}

Trajectory evolve(const BlochState& initial, const DriveField& drive, double duration, double dt,
                  std::size_t record_stride, bool project) {
  if (!(duration >= 0.0) || !(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "duration >= 0 and dt > 0 required");
  const double limit = max_step(drive);
  if (dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorCode::StepTooLarge,
                "dt = " + std::to_string(dt) + " s exceeds the stability bound " + std::to_string(limit) + " s");
  }
  record_stride = std::max<std::size_t>(1, record_stride);
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
  const double h = steps > 0 ? duration / static_cast<double>(steps) : 0.0;

  Trajectory traj;
  traj.t.push_back(0.0);
  traj.states.push_back(initial);
  BlochState s = initial;
  using Side = DriveField::Side;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * h;
    const double tm = t + h / 2.0;
    const double te = static_cast<double>(n + 1) * h;
    const auto k1 = bloch_rhs(s, drive.rabi(t, Side::Right), drive.phase(t, Side::Right), drive.detuning(t));
    const double rm = drive.rabi(tm), pm = drive.phase(tm), dm = drive.detuning(tm);
    const auto k2 = bloch_rhs(advance(s, k1, h / 2.0), rm, pm, dm);
    const auto k3 = bloch_rhs(advance(s, k2, h / 2.0), rm, pm, dm);
    const auto k4 = bloch_rhs(advance(s, k3, h), drive.rabi(te, Side::Left), drive.phase(te, Side::Left),
                              drive.detuning(te));
    s.u += h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    s.v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    s.w += h / 6.0 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
    if (project) {
      const double r = s.norm();
      const double r0 = initial.norm();
      if (r > 0.0) {
        s.u *= r0 / r;
        s.v *= r0 / r;
        s.w *= r0 / r;
      }
    }
    if ((n + 1) % record_stride == 0 || n + 1 == steps) {
      traj.t.push_back(te);
      traj.states.push_back(s);
    }
  }
  return traj;
}

std::vector<ProfilePoint> excitation_profile(const std::vector<double>& envelope, double sample_period,
                                             double area, const std::vector<double>& detunings,
                                             std::size_t substeps) {
  if (envelope.empty() || !(sample_period > 0.0)) throw Error(ErrorCode::InvalidArgument, "empty pulse envelope");
  double integral = 0.0;
  for (double a : envelope) {
    if (a < 0.0) throw Error(ErrorCode::InvalidArgument, "pulse envelope must be non-negative");
    integral += a * sample_period;
  }
  if (!(integral > 0.0)) throw Error(ErrorCode::InvalidArgument, "pulse envelope has zero area");
  std::vector<double> rabi(envelope.size());
  for (std::size_t i = 0; i < envelope.size(); ++i) rabi[i] = area * envelope[i] / integral;
  const std::vector<double> phase(envelope.size(), 0.0);
  const double duration = sample_period * static_cast<double>(envelope.size());

  std::vector<ProfilePoint> out(detunings.size());
  parallel_for(detunings.size(), [&](std::size_t i) {
    const auto drive = DriveField::sampled(rabi, phase, sample_period, detunings[i]);
    const auto m = std::max<double>(static_cast<double>(substeps), std::ceil(sample_period / max_step(drive) - 1e-9));
    const auto traj = evolve(BlochState{}, drive, duration, sample_period / m, std::numeric_limits<std::size_t>::max());
    out[i] = {detunings[i], traj.final().excited_population()};
  });
  return out;
}

FidelityMap composite_scan(const std::vector<CompositePulse>& sequence, const std::vector<double>& amp_errors,
                           const std::vector<double>& detunings, double rabi) {
  if (!(rabi > 0.0)) throw Error(ErrorCode::InvalidArgument, "nominal Rabi frequency must be positive");
  FidelityMap map;
  map.amp_errors = amp_errors;
  map.detunings = detunings;
  map.fidelity.assign(amp_errors.size(), std::vector<double>(detunings.size(), 0.0));
  parallel_for(amp_errors.size() * detunings.size(), [&](std::size_t idx) {
    const std::size_t r = idx / detunings.size();
    const std::size_t c = idx % detunings.size();
    const double omega = std::max(0.0, rabi * (1.0 + amp_errors[r]));
    BlochState s;
    for (const auto& p : sequence) {
      const auto drive = DriveField::constant(omega, p.phase, detunings[c]);
      const double duration = std::abs(p.area) / rabi;
      const double h = max_step(drive) / 8.0;
      if (std::isinf(h)) continue;  // no drive, no detuning: nothing moves
      s = evolve(s, drive, duration, h, std::numeric_limits<std::size_t>::max()).final();
    }
    map.fidelity[r][c] = s.excited_population();
  });
  return map;
}

double dressed_shift(double rabi, double detuning) {
  if (detuning == 0.0) return rabi / 2.0;
  const double sign = detuning > 0.0 ? 1.0 : -1.0;
  // (sign*sqrt(D^2 + W^2) - D) / 2, rearranged to avoid cancellation for D >> W.
  const double root = std::hypot(detuning, rabi);
  return sign * rabi * rabi / (2.0 * (root + std::abs(detuning)));
}

double adiabaticity(const DriveField& ramp, double duration, std::size_t n_probe) {
  if (!(duration > 0.0) || n_probe < 2) throw Error(ErrorCode::InvalidArgument, "adiabaticity needs a positive duration");
  const double h = duration / static_cast<double>(n_probe - 1);
  double worst = 0.0;
  using Side = DriveField::Side;
  for (std::size_t i = 0; i < n_probe; ++i) {
    const double t = static_cast<double>(i) * h;
    const double omega = ramp.rabi(t, Side::Left) * 0.5 + ramp.rabi(t, Side::Right) * 0.5;
    const double delta = ramp.detuning(t);
    if (omega == 0.0 && delta == 0.0) {
      throw Error(ErrorCode::UndefinedMixingAngle, "Omega and Delta both vanish at t = " + std::to_string(t) + " s");
    }
    // One-sided differences at the ends of the window.
    const double ta = i == 0 ? t : t - h / 2.0;
    const double tb = i + 1 == n_probe ? t : t + h / 2.0;
    const double span = tb - ta;
    const double d_omega = (ramp.rabi(tb, Side::Left) - ramp.rabi(ta, Side::Right)) / span;
    const double d_delta = (ramp.detuning(tb) - ramp.detuning(ta)) / span;
    const double gen2 = omega * omega + delta * delta;
    const double rate = 0.5 * std::abs(delta * d_omega - omega * d_delta) / gen2;
    worst = std::max(worst, rate / std::sqrt(gen2));
  }
  return worst;
}

}  // namespace mwforge
