#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mwforge/error.hpp"
#include "mwforge/io.hpp"
#include "mwforge/rf_chain.hpp"

using namespace mwforge;

namespace {

ComplexEnvelope tone(double f_hz, double fs, std::size_t n, double amp = 1.0) {
  ComplexEnvelope env;
  env.sample_rate = fs;
  env.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = std::fmod(f_hz * static_cast<double>(i) / fs, 1.0) * 2.0 * std::numbers::pi;
    env.samples[i] = std::polar(amp, ph);
  }
  return env;
}

ChainConfig quiet_chain() {
  ChainConfig c;
  c.lo_leak_dbc = -std::numeric_limits<double>::infinity();
  c.usb_level_dbc = -std::numeric_limits<double>::infinity();
  return c;
}

}  // namespace

TEST(Filter, AnchorPoints) {
  const FilterConfig f;
  EXPECT_DOUBLE_EQ(attenuation_db(0.0, f), 0.0);
  EXPECT_DOUBLE_EQ(attenuation_db(250e6, f), 50.0);
  EXPECT_DOUBLE_EQ(attenuation_db(-250e6, f), 50.0);
  EXPECT_DOUBLE_EQ(attenuation_db(1e9, f), 50.0);
  EXPECT_NEAR(std::abs(attenuation_db(5e6, f)), 0.2, 1e-12);
  EXPECT_NEAR(attenuation_db(25e6, f), 1.0, 1e-12);
  // Log-frequency interpolation: 1 dB + 49 dB * log10(165/25).
  EXPECT_NEAR(attenuation_db(165e6, f), 1.0 + 49.0 * std::log10(165.0 / 25.0), 1e-9);
}

TEST(Filter, RippleBounds) {
  const FilterConfig f;
  double max5 = 0.0, max25 = 0.0;
  for (double d = -25e6; d <= 25e6; d += 1e4) {
    const double g = std::abs(passband_gain(f.f_center + d, f));
    if (std::abs(d) <= 5e6) max5 = std::max(max5, g);
    max25 = std::max(max25, g);
  }
  EXPECT_NEAR(max5, 0.2, 1e-6);
  EXPECT_NEAR(max25, 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(passband_gain(f.f_center, f), 0.0);
}

TEST(Filter, MonotoneBeyondPassbandEdge) {
  const FilterConfig f;
  double prev = attenuation_db(f.passband_width / 2, f);
  for (double d = f.passband_width / 2; d < 2e9; d *= 1.001) {
    const double a = attenuation_db(d, f);
    EXPECT_GE(a, prev - 1e-12) << d;
    prev = a;
  }
}

TEST(Mixer, CarrierIdentity) {
  const ChainConfig c;
  for (double f = 140e6; f <= 190e6; f += 0.5e6) {
    const auto s = mix_spurs(f, c);
    EXPECT_EQ(s[0].f_hz, c.f_lo - f);
    EXPECT_EQ(s[0].level_dbc, 0.0);
    EXPECT_EQ(s[1].f_hz, c.f_lo);
    EXPECT_EQ(s[2].f_hz, c.f_lo + f);
  }
  const auto s = mix_spurs(165e6, c);
  EXPECT_DOUBLE_EQ(s[0].f_hz, 6.835e9);
  EXPECT_DOUBLE_EQ(s[1].f_hz, 7.0e9);
  EXPECT_DOUBLE_EQ(s[2].f_hz, 7.165e9);
  EXPECT_THROW(mix_spurs(0.0, c), Error);
  EXPECT_THROW(mix_spurs(8e9, c), Error);
}

TEST(Mixer, CalibrationClosesOnTargets) {
  for (auto kind : {MixerKind::SingleSideband, MixerKind::DoubleBalanced}) {
    ChainConfig c;
    c.mixer_kind = kind;
    const auto t = default_targets(kind);
    c = calibrate(c, 165e6, t);
    // Independent check: pre-filter level minus the filter's attenuation.
    EXPECT_NEAR(c.lo_leak_dbc - attenuation_db(165e6), t.lo_dbc, 1e-9);
    EXPECT_NEAR(c.usb_level_dbc - attenuation_db(330e6), t.usb_dbc, 1e-9);
    const auto post = relative_to_carrier(apply_filter(mix_spurs(165e6, c), c.filter));
    EXPECT_NEAR(post[1].level_dbc, t.lo_dbc, 1e-9);
    EXPECT_NEAR(post[2].level_dbc, t.usb_dbc, 1e-9);
  }
}

TEST(Spectrum, PureToneIsClean) {
  const double fs = 800e6;
  const auto env = tone(165e6, fs, 1 << 16);
  const auto s = output_spectrum(env, quiet_chain(), fs / 8192.0);
  ASSERT_TRUE(std::is_sorted(s.bins.begin(), s.bins.end(), [](auto& a, auto& b) { return a.f_hz < b.f_hz; }));
  const auto peak = s.peak_near(6.835e9, s.rbw * 2);
  EXPECT_NEAR(peak.power_dbc, 0.0, 1e-12);
  EXPECT_NEAR(peak.f_hz, 6.835e9, s.rbw);
  for (const auto& b : s.bins) {
    if (std::abs(b.f_hz - 6.835e9) > 10 * s.rbw) EXPECT_LT(b.power_dbc, -100.0) << b.f_hz;
  }
}

TEST(Spectrum, ParsevalForNoiseFreeTones) {
  const double fs = 800e6;
  for (double amp : {1.0, 0.3}) {
    auto env = tone(165e6, fs, 1 << 16, amp);
    const auto s = output_spectrum(env, quiet_chain(), fs / 4096.0);
    double ms = 0.0;
    for (const auto& z : env.samples) ms += std::norm(z);
    ms /= static_cast<double>(env.samples.size());
    EXPECT_NEAR(10 * std::log10(s.total_power() / ms), 0.0, 0.1);
  }
}

TEST(Spectrum, CalibratedSpursAgreeWithAnalytic) {
  const double fs = 800e6;
  const auto env = tone(165e6, fs, 1 << 16);
  for (auto kind : {MixerKind::SingleSideband, MixerKind::DoubleBalanced}) {
    ChainConfig c;
    c.mixer_kind = kind;
    c = calibrate(c, 165e6, default_targets(kind));
    const auto s = output_spectrum(env, c, fs / 8192.0);
    const auto analytic = relative_to_carrier(apply_filter(mix_spurs(165e6, c), c.filter));
    EXPECT_NEAR(s.peak_near(7.0e9, 3 * s.rbw).power_dbc, analytic[1].level_dbc, 0.5);
    EXPECT_NEAR(s.peak_near(7.165e9, 3 * s.rbw).power_dbc, analytic[2].level_dbc, 0.5);
  }
}

TEST(Spectrum, RbwBelowResolutionIsRejected) {
  const auto env = tone(165e6, 800e6, 4096);
  try {
    output_spectrum(env, ChainConfig{}, 800e6 / 8192.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientLength);
  }
}

TEST(Spectrum, CsvIsSortedAndLabelled) {
  const auto env = tone(165e6, 800e6, 4096);
  const auto csv = to_csv(output_spectrum(env, quiet_chain(), 800e6 / 1024.0));
  EXPECT_EQ(csv.substr(0, 9), "f_Hz,dBc\n");
}

TEST(Config, JsonCalibratesToTargets) {
  const auto c = chain_config_from_json(R"({"mixer_kind": "double_balanced", "path": "dressing",
                                             "calibrate_to": {"f_dds_hz": 165e6, "lo_dbc": -62, "usb_dbc": -62}})");
  EXPECT_EQ(c.path, PathName::Dressing);
  const auto post = relative_to_carrier(apply_filter(mix_spurs(165e6, c), c.filter));
  EXPECT_NEAR(post[1].level_dbc, -62.0, 1e-9);
  EXPECT_NEAR(post[2].level_dbc, -62.0, 1e-9);
  const auto explicit_levels = chain_config_from_json(R"({"lo_leak_dbc": -30, "usb_level_dbc": -40})");
  EXPECT_EQ(explicit_levels.lo_leak_dbc, -30.0);
  EXPECT_THROW(chain_config_from_json(R"({"lo_leak_dbc": 3, "usb_level_dbc": -40})"), Error);
  EXPECT_THROW(chain_config_from_json("{"), Error);
}

TEST(Ripple, CorrectionInvertsGain) {
  const auto rows = ripple_table(FilterConfig{}, 5e6, 1e6);
  ASSERT_EQ(rows.size(), 11u);
  for (const auto& r : rows) EXPECT_NEAR(20 * std::log10(r.amplitude_correction) + r.gain_db, 0.0, 1e-12);
}
