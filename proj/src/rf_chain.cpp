#include "mwforge/rf_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "mwforge/error.hpp"
#include "mwforge/spectral.hpp"

namespace mwforge {

namespace {

double db_to_amplitude(double db) { return std::isinf(db) && db < 0 ? 0.0 : std::pow(10.0, db / 20.0); }

double log_interp(double x, double x0, double y0, double x1, double y1) {
  return y0 + (y1 - y0) * std::log(x / x0) / std::log(x1 / x0);
}

}  // namespace

std::string_view to_string(MixerKind kind) {
  return kind == MixerKind::SingleSideband ? "single_sideband" : "double_balanced";
}

std::string_view to_string(PathName path) { return path == PathName::Pulse ? "pulse" : "dressing"; }

double attenuation_db(double offset_hz, const FilterConfig& f) {
  const double x = std::abs(offset_hz);
  const double edge = f.passband_width / 2.0;
  if (x <= edge) {
    // Quarter period at ripple_inner_hz puts the extremum there.
    return -f.ripple_inner_db * std::sin(std::numbers::pi / 2.0 * x / f.ripple_inner_hz);
  }
  const double edge_level = -f.ripple_inner_db * std::sin(std::numbers::pi / 2.0 * edge / f.ripple_inner_hz);
  if (x <= f.ripple_outer_hz) return log_interp(x, edge, std::max(0.0, edge_level), f.ripple_outer_hz, f.ripple_outer_db);
  if (x < f.stop_offset_hz) return log_interp(x, f.ripple_outer_hz, f.ripple_outer_db, f.stop_offset_hz, f.stop_atten_db);
  return f.stop_atten_db;
}

double passband_gain(double f_hz, const FilterConfig& filter) {
  return -attenuation_db(f_hz - filter.f_center, filter);
}

SpurTargets default_targets(MixerKind kind) {
  return kind == MixerKind::SingleSideband ? SpurTargets{-67.0, -87.0} : SpurTargets{-62.0, -62.0};
}

void validate(const ChainConfig& cfg) {
  if (!(cfg.f_lo > 0.0)) throw Error(ErrorCode::InvalidArgument, "f_LO must be positive");
  if (cfg.lo_leak_dbc > 0.0 || cfg.usb_level_dbc > 0.0) {
    throw Error(ErrorCode::InvalidArgument, "spur levels must be <= 0 dBc");
  }
}

std::vector<Spur> mix_spurs(double f_dds, const ChainConfig& cfg) {
  validate(cfg);
  if (!(f_dds > 0.0 && f_dds < cfg.f_lo)) {
    throw Error(ErrorCode::FrequencyOutOfRange, "DDS frequency must lie in (0, f_LO)");
  }
  return {{"carrier", cfg.f_lo - f_dds, 0.0},
          {"lo", cfg.f_lo, cfg.lo_leak_dbc},
          {"usb", cfg.f_lo + f_dds, cfg.usb_level_dbc}};
}

std::vector<Spur> apply_filter(std::vector<Spur> spurs, const FilterConfig& filter) {
  for (auto& s : spurs) s.level_dbc -= attenuation_db(s.f_hz - filter.f_center, filter);
  return spurs;
}

std::vector<Spur> relative_to_carrier(std::vector<Spur> spurs) {
  const auto it = std::find_if(spurs.begin(), spurs.end(), [](const Spur& s) { return s.label == "carrier"; });
  if (it == spurs.end()) return spurs;
  const double ref = it->level_dbc;
  for (auto& s : spurs) s.level_dbc -= ref;
  return spurs;
}

ChainConfig calibrate(ChainConfig cfg, double f_dds, const SpurTargets& targets) {
  // Evaluate the filter with 0 dBc probes, then offset by the shortfall.
  cfg.lo_leak_dbc = 0.0;
  cfg.usb_level_dbc = 0.0;
  const auto probe = relative_to_carrier(apply_filter(mix_spurs(f_dds, cfg), cfg.filter));
  cfg.lo_leak_dbc = targets.lo_dbc - probe[1].level_dbc;
  cfg.usb_level_dbc = targets.usb_dbc - probe[2].level_dbc;
  validate(cfg);
  return cfg;
}

double SpectrumEstimate::total_power() const {
  double sum = 0.0;
  for (const auto& b : bins) sum += std::pow(10.0, b.power_dbc / 10.0);
  return sum * carrier_power / enbw_bins;
}

SpectrumBin SpectrumEstimate::peak_near(double f_hz, double half_width_hz) const {
  SpectrumBin best{f_hz, -std::numeric_limits<double>::infinity()};
  const auto lo = std::lower_bound(bins.begin(), bins.end(), f_hz - half_width_hz,
                                   [](const SpectrumBin& b, double f) { return b.f_hz < f; });
  for (auto it = lo; it != bins.end() && it->f_hz <= f_hz + half_width_hz; ++it) {
    if (it->power_dbc > best.power_dbc) best = *it;
  }
  return best;
}

SpectrumEstimate apply_filter(SpectrumEstimate spectrum, const FilterConfig& filter) {
  for (auto& b : spectrum.bins) b.power_dbc -= attenuation_db(b.f_hz - filter.f_center, filter);
  return spectrum;
}

std::vector<std::complex<double>> inject_spurs(const std::vector<std::complex<double>>& envelope,
                                               const ChainConfig& cfg) {
  double peak = 0.0;
  for (const auto& s : envelope) peak = std::max(peak, std::abs(s));
  const double g_lo = db_to_amplitude(cfg.lo_leak_dbc);
  const double g_usb = db_to_amplitude(cfg.usb_level_dbc);
  std::vector<std::complex<double>> out(envelope.size());
  for (std::size_t i = 0; i < envelope.size(); ++i) {
    out[i] = envelope[i] + g_lo * peak + g_usb * std::conj(envelope[i]);
  }
  return out;
}

void apply_phase_noise(ComplexEnvelope& envelope, const std::vector<double>& phi) {
  if (phi.size() != envelope.samples.size()) {
    throw Error(ErrorCode::InvalidArgument, "phase series length differs from the envelope");
  }
  for (std::size_t i = 0; i < phi.size(); ++i) envelope.samples[i] *= std::polar(1.0, phi[i]);
}

SpectrumEstimate output_spectrum(const ComplexEnvelope& envelope, const ChainConfig& cfg, double rbw) {
  validate(cfg);
  const double fs = envelope.sample_rate;
  if (!(rbw > 0.0) || rbw * static_cast<double>(envelope.samples.size()) < fs * (1.0 - 1e-12)) {
    throw Error(ErrorCode::InsufficientLength,
                "rbw " + std::to_string(rbw) + " Hz needs at least " + std::to_string(fs / rbw) +
                    " samples, envelope has " + std::to_string(envelope.samples.size()));
  }
  const auto nfft = std::min(envelope.samples.size(), static_cast<std::size_t>(std::ceil(fs / rbw - 1e-9)));
  const auto welch = welch_power(inject_spurs(envelope.samples, cfg), fs, nfft);

  SpectrumEstimate est;
  est.rbw = fs / static_cast<double>(nfft);
  est.enbw_bins = welch.enbw_bins;
  est.bins.resize(nfft);
  // Ascending baseband maps to descending RF; fill from the back.
  for (std::size_t j = 0; j < nfft; ++j) {
    const double f_rf = cfg.f_lo - welch.frequency_hz[j];
    const double a = attenuation_db(f_rf - cfg.filter.f_center, cfg.filter);
    est.bins[nfft - 1 - j] = {f_rf, welch.value[j] * std::pow(10.0, -a / 10.0)};
  }
  double carrier = 0.0;
  for (const auto& b : est.bins) carrier = std::max(carrier, b.power_dbc);
  if (!(carrier > 0.0)) throw Error(ErrorCode::InvalidArgument, "envelope carries no power");
  est.carrier_power = carrier;
  for (auto& b : est.bins) {
    b.power_dbc = b.power_dbc > 0.0 ? 10.0 * std::log10(b.power_dbc / carrier) : -400.0;
  }
  return est;
}

ChainConfig chain_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SyntaxError, std::string("chain config: ") + e.what());
  }
  try {
    ChainConfig cfg;
    cfg.f_lo = j.value("f_lo_hz", cfg.f_lo);
    if (j.contains("mixer_kind")) {
      const auto kind = j.at("mixer_kind").get<std::string>();
      if (kind == "single_sideband" || kind == "ssb") {
        cfg.mixer_kind = MixerKind::SingleSideband;
      } else if (kind == "double_balanced" || kind == "dbm") {
        cfg.mixer_kind = MixerKind::DoubleBalanced;
      } else {
        throw Error(ErrorCode::SemanticError, "chain config: unknown mixer_kind '" + kind + "'");
      }
    }
    if (j.contains("path")) {
      const auto path = j.at("path").get<std::string>();
      if (path == "pulse") {
        cfg.path = PathName::Pulse;
      } else if (path == "dressing") {
        cfg.path = PathName::Dressing;
      } else {
        throw Error(ErrorCode::SemanticError, "chain config: unknown path '" + path + "'");
      }
    }
    cfg.switch_isolation_db = j.value("switch_isolation_db", cfg.switch_isolation_db);
    cfg.amplifier_gain_db = j.value("amplifier_gain_db", cfg.amplifier_gain_db);
    cfg.output_power_w = j.value("output_power_w", cfg.output_power_w);
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      cfg.filter.f_center = f.value("f_center_hz", cfg.filter.f_center);
      cfg.filter.passband_width = f.value("passband_width_hz", cfg.filter.passband_width);
      cfg.filter.ripple_inner_db = f.value("ripple_inner_db", cfg.filter.ripple_inner_db);
      cfg.filter.ripple_inner_hz = f.value("ripple_inner_hz", cfg.filter.ripple_inner_hz);
      cfg.filter.ripple_outer_db = f.value("ripple_outer_db", cfg.filter.ripple_outer_db);
      cfg.filter.ripple_outer_hz = f.value("ripple_outer_hz", cfg.filter.ripple_outer_hz);
      cfg.filter.stop_atten_db = f.value("stop_atten_db", cfg.filter.stop_atten_db);
      cfg.filter.stop_offset_hz = f.value("stop_offset_hz", cfg.filter.stop_offset_hz);
    }
    const bool explicit_levels = j.contains("lo_leak_dbc") && j.contains("usb_level_dbc");
    if (j.contains("calibrate_to") || !explicit_levels) {
      const auto cal = j.value("calibrate_to", nlohmann::json::object());
      SpurTargets targets = default_targets(cfg.mixer_kind);
      targets.lo_dbc = cal.value("lo_dbc", targets.lo_dbc);
      targets.usb_dbc = cal.value("usb_dbc", targets.usb_dbc);
      const double f_dds = cal.value("f_dds_hz", cfg.f_lo - cfg.filter.f_center);
      cfg = calibrate(cfg, f_dds, targets);
    } else {
      cfg.lo_leak_dbc = j.at("lo_leak_dbc").get<double>();
      cfg.usb_level_dbc = j.at("usb_level_dbc").get<double>();
    }
    validate(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SemanticError, std::string("chain config: ") + e.what());
  }
}

std::vector<RippleRow> ripple_table(const FilterConfig& filter, double span_hz, double step_hz) {
  if (!(step_hz > 0.0) || !(span_hz >= 0.0)) throw Error(ErrorCode::InvalidArgument, "span and step must be positive");
  std::vector<RippleRow> rows;
  const auto n = static_cast<long>(std::floor(span_hz / step_hz + 1e-9));
  for (long k = -n; k <= n; ++k) {
    const double f = filter.f_center + static_cast<double>(k) * step_hz;
    const double g = passband_gain(f, filter);
    rows.push_back({f, g, std::pow(10.0, -g / 20.0)});
  }
  return rows;
}

}  // namespace mwforge
