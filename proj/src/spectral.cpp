#include "mwforge/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "mwforge/error.hpp"

namespace mwforge {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct ComplexPlan {
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit ComplexPlan(std::size_t n) {
    in = fftw_alloc_complex(n);
    out = fftw_alloc_complex(n);
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~ComplexPlan() {
    {
      std::lock_guard lock(plan_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
  }
  ComplexPlan(const ComplexPlan&) = delete;
  ComplexPlan& operator=(const ComplexPlan&) = delete;
};

void check_segment(std::size_t length, std::size_t nfft) {
  if (nfft == 0 || nfft > length) {
    throw Error(ErrorCode::InsufficientLength, "segment length " + std::to_string(nfft) +
                                                   " needs at least that many samples, have " +
                                                   std::to_string(length));
  }
}

std::size_t segment_count(std::size_t length, std::size_t nfft) {
  const std::size_t hop = std::max<std::size_t>(1, nfft / 2);
  return 1 + (length - nfft) / hop;
}

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

std::vector<double> flattop_window(std::size_t n) {
  static constexpr double c[] = {1.0,        -1.96760033, 1.57983607, -0.81123644,
                                 0.22583558, -0.02773848, 0.00090360};
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    double s = 0.0;
    for (std::size_t k = 0; k < std::size(c); ++k) s += c[k] * std::cos(static_cast<double>(k) * z);
    w[i] = s;
  }
  return w;
}

WelchResult welch_power(const std::vector<std::complex<double>>& x, double sample_rate, std::size_t nfft) {
  check_segment(x.size(), nfft);
  const auto w = flattop_window(nfft);
  double sum_w = 0.0, sum_w2 = 0.0;
  for (double v : w) {
    sum_w += v;
    sum_w2 += v * v;
  }

  WelchResult r;
  r.nfft = nfft;
  r.segments = segment_count(x.size(), nfft);
  r.enbw_bins = static_cast<double>(nfft) * sum_w2 / (sum_w * sum_w);
  std::vector<double> acc(nfft, 0.0);

  ComplexPlan plan(nfft);
  const std::size_t hop = std::max<std::size_t>(1, nfft / 2);
  for (std::size_t s = 0; s < r.segments; ++s) {
    const std::size_t off = s * hop;
    for (std::size_t i = 0; i < nfft; ++i) {
      const auto v = x[off + i] * w[i];
      plan.in[i][0] = v.real();
      plan.in[i][1] = v.imag();
    }
    fftw_execute(plan.plan);
    for (std::size_t i = 0; i < nfft; ++i) acc[i] += plan.out[i][0] * plan.out[i][0] + plan.out[i][1] * plan.out[i][1];
  }

  const double scale = 1.0 / (static_cast<double>(r.segments) * sum_w * sum_w);
  r.frequency_hz.resize(nfft);
  r.value.resize(nfft);
  // fftshift: output index j holds bin k = j - floor(n/2) (mod n).
  const std::size_t half = nfft / 2;
  for (std::size_t j = 0; j < nfft; ++j) {
    const std::size_t k = (j + nfft - half) % nfft;
    r.frequency_hz[j] = (static_cast<double>(j) - static_cast<double>(half)) * sample_rate / static_cast<double>(nfft);
    r.value[j] = acc[k] * scale;
  }
  return r;
}

WelchResult welch_psd(const std::vector<double>& x, double sample_rate, std::size_t nfft) {
  check_segment(x.size(), nfft);
  const auto w = hann_window(nfft);
  double sum_w2 = 0.0;
  for (double v : w) sum_w2 += v * v;

  WelchResult r;
  r.nfft = nfft;
  r.segments = segment_count(x.size(), nfft);
  r.enbw_bins = 1.5;
  const std::size_t nbins = nfft / 2 + 1;
  std::vector<double> acc(nbins, 0.0);

  double* in = fftw_alloc_real(nfft);
  fftw_complex* out = fftw_alloc_complex(nbins);
  fftw_plan plan;
  {
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in, out, FFTW_ESTIMATE);
  }
  const std::size_t hop = std::max<std::size_t>(1, nfft / 2);
  for (std::size_t s = 0; s < r.segments; ++s) {
    const std::size_t off = s * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < nfft; ++i) mean += x[off + i];
    mean /= static_cast<double>(nfft);
    for (std::size_t i = 0; i < nfft; ++i) in[i] = (x[off + i] - mean) * w[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < nbins; ++k) acc[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
  {
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);

  const double scale = 1.0 / (static_cast<double>(r.segments) * sample_rate * sum_w2);
  r.frequency_hz.resize(nbins);
  r.value.resize(nbins);
  for (std::size_t k = 0; k < nbins; ++k) {
    const bool edge = k == 0 || (nfft % 2 == 0 && k == nbins - 1);
    r.frequency_hz[k] = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
    r.value[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
  }
  return r;
}

std::vector<double> inverse_real_fft(const std::vector<std::complex<double>>& half, std::size_t n) {
  if (half.size() != n / 2 + 1) throw Error(ErrorCode::InvalidArgument, "half spectrum must have n/2+1 bins");
  fftw_complex* in = fftw_alloc_complex(half.size());
  double* out = fftw_alloc_real(n);
  fftw_plan plan;
  {
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < half.size(); ++k) {
    in[k][0] = half[k].real();
    in[k][1] = half[k].imag();
  }
  fftw_execute(plan);
  std::vector<double> x(out, out + n);
  {
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return x;
}

}  // namespace mwforge
