#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mwforge {

/// Periodic Hann window.
std::vector<double> hann_window(std::size_t n);

/// HFT144D flat-top window (peak amplitude error below 0.01 dB, sidelobes
/// near -144 dB).
std::vector<double> flattop_window(std::size_t n);

struct WelchResult {
  std::vector<double> frequency_hz;  // ascending
  std::vector<double> value;         // power per bin, or PSD per Hz
  std::size_t nfft = 0;
  std::size_t segments = 0;
  double enbw_bins = 1.0;  // equivalent noise bandwidth of the window, in bins
};

/// Two-sided averaged periodogram of a complex series with the flat-top
/// window and 50 % overlap. Scaled as a power spectrum: a tone of amplitude
/// A reads A^2 in its peak bin, so sum(value) / enbw_bins is the mean-square
/// power. Frequencies run from -fs/2 upward.
WelchResult welch_power(const std::vector<std::complex<double>>& x, double sample_rate, std::size_t nfft);

/// One-sided PSD (units^2/Hz) of a real series, Hann window, 50 % overlap.
WelchResult welch_psd(const std::vector<double>& x, double sample_rate, std::size_t nfft);

/// Real inverse FFT of a half spectrum (n/2 + 1 bins), unnormalized:
/// x[t] = sum_k X[k] e^{+2 pi i k t / n} over the Hermitian extension.
std::vector<double> inverse_real_fft(const std::vector<std::complex<double>>& half, std::size_t n);

}  // namespace mwforge
