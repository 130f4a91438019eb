#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "dradar/units.hpp"

namespace dradar {

// Linear-FM chirp parameters. The sweep slope bandwidth/duration is always
// derived, never stored.
struct ChirpConfig {
  double start_frequency_hz = 140e9;
  double bandwidth_hz = 10e9;
  double duration_s = 10e-6;
  int chirps_per_frame = 100;
  double sampling_rate_hz = 0.0;

  double slope() const { return bandwidth_hz / duration_s; }

  void validate() const {
    if (bandwidth_hz <= 0.0) throw std::domain_error("chirp bandwidth must be positive");
    if (duration_s <= 0.0) throw std::domain_error("chirp duration must be positive");
    if (chirps_per_frame < 1) throw std::domain_error("need at least one chirp per frame");
    if (sampling_rate_hz <= 0.0) throw std::domain_error("sampling rate must be positive");
  }
};

// Beat frequency of an echo from a target at `range_m` after dechirping:
// (2R/c) * slope.
inline double if_frequency(const ChirpConfig& cfg, double range_m) {
  if (range_m < 0.0) throw std::domain_error("range must be nonnegative");
  return (2.0 * range_m / speed_of_light) * cfg.slope();
}

// Minimum separation between two targets that still land in distinct range
// bins: c / (2B).
inline double range_resolution(double bandwidth_hz) {
  if (bandwidth_hz <= 0.0) throw std::domain_error("bandwidth must be positive");
  return speed_of_light / (2.0 * bandwidth_hz);
}

// Sampling rate with 4x margin over the highest beat frequency expected at
// `max_range_m`, enough for windowless FFT peak picking.
inline double default_sampling_rate(const ChirpConfig& cfg, double max_range_m) {
  return 4.0 * (2.0 * max_range_m / speed_of_light) * cfg.slope();
}

// Uniformly sampled complex baseband series.
struct ComplexSampleSeries {
  std::vector<std::complex<double>> samples;
  double sampling_rate_hz = 0.0;
  double start_time_s = 0.0;

  std::size_t size() const { return samples.size(); }
};

namespace detail {

// Chirp value at absolute time t (time measured from the chirp start):
// exp(j(w0 t + pi S t^2)). Evaluated analytically so a delayed copy stays a
// pure time shift of the same expression.
inline std::complex<double> chirp_value(const ChirpConfig& cfg, double t) {
  const double w0 = 2.0 * pi * cfg.start_frequency_hz;
  const double phase = w0 * t + pi * cfg.slope() * t * t;
  return {std::cos(phase), std::sin(phase)};
}

}  // namespace detail

// Transmit chirp, unit amplitude, sampled at cfg.sampling_rate_hz starting
// at t = 0.
inline ComplexSampleSeries tx_chirp(const ChirpConfig& cfg, std::size_t n_samples) {
  cfg.validate();
  const auto max_samples =
      static_cast<std::size_t>(std::floor(cfg.duration_s * cfg.sampling_rate_hz));
  if (n_samples > max_samples) {
    throw std::invalid_argument("requested samples exceed one chirp duration");
  }
  ComplexSampleSeries out;
  out.sampling_rate_hz = cfg.sampling_rate_hz;
  out.samples.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = static_cast<double>(k) / cfg.sampling_rate_hz;
    out.samples[k] = detail::chirp_value(cfg, t);
  }
  return out;
}

// Echo from a point target: the transmit chirp delayed by the two-way time
// of flight 2R/c and scaled by `amplitude`.
inline ComplexSampleSeries rx_echo(const ChirpConfig& cfg, double range_m,
                                   double amplitude, std::size_t n_samples) {
  if (range_m < 0.0) throw std::domain_error("range must be nonnegative");
  cfg.validate();
  const auto max_samples =
      static_cast<std::size_t>(std::floor(cfg.duration_s * cfg.sampling_rate_hz));
  if (n_samples > max_samples) {
    throw std::invalid_argument("requested samples exceed one chirp duration");
  }
  const double tof = 2.0 * range_m / speed_of_light;
  ComplexSampleSeries out;
  out.sampling_rate_hz = cfg.sampling_rate_hz;
  out.samples.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = static_cast<double>(k) / cfg.sampling_rate_hz;
    out.samples[k] = amplitude * detail::chirp_value(cfg, t - tof);
  }
  return out;
}

// Conjugate mixing of the transmit chirp against the received echo. For an
// echo delayed by tau the product is a complex tone at -slope*tau plus the
// constant phase term -pi*tau^2*slope, which is kept (it does not move the
// spectral peak). The bandpass filter is treated as ideal.
inline ComplexSampleSeries dechirp(const ComplexSampleSeries& tx,
                                   const ComplexSampleSeries& rx) {
  if (tx.size() != rx.size() || tx.size() == 0) {
    throw std::invalid_argument("dechirp requires equal-length, nonempty series");
  }
  if (tx.sampling_rate_hz != rx.sampling_rate_hz) {
    throw std::invalid_argument("dechirp requires matching sampling rates");
  }
  ComplexSampleSeries out;
  out.sampling_rate_hz = tx.sampling_rate_hz;
  out.start_time_s = tx.start_time_s;
  out.samples.resize(tx.size());
  for (std::size_t k = 0; k < tx.size(); ++k) {
    out.samples[k] = std::conj(tx.samples[k]) * rx.samples[k];
  }
  return out;
}

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Magnitude spectrum of the series, zero padded to 4x the next power of two.
inline std::vector<double> padded_magnitude_spectrum(const ComplexSampleSeries& s,
                                                     std::size_t* fft_size) {
  const std::size_t n_fft = 4 * next_pow2(s.size());
  std::vector<std::complex<double>> in(n_fft, {0.0, 0.0});
  std::copy(s.samples.begin(), s.samples.end(), in.begin());
  std::vector<std::complex<double>> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  std::vector<double> mag(n_fft);
  for (std::size_t k = 0; k < n_fft; ++k) mag[k] = std::abs(out[k]);
  *fft_size = n_fft;
  return mag;
}

// Sub-bin peak position via parabolic interpolation on the log magnitude,
// with wrap-around neighbors.
inline double interpolate_peak(const std::vector<double>& mag, std::size_t k) {
  const std::size_t n = mag.size();
  const double eps = 1e-300;
  const double a = std::log(mag[(k + n - 1) % n] + eps);
  const double b = std::log(mag[k] + eps);
  const double c = std::log(mag[(k + 1) % n] + eps);
  const double denom = a - 2.0 * b + c;
  if (denom >= 0.0) return static_cast<double>(k);  // flat or degenerate
  return static_cast<double>(k) + 0.5 * (a - c) / denom;
}

}  // namespace detail

// Recover target range from a dechirped series: locate the dominant line of
// the zero-padded magnitude spectrum, refine it to sub-bin accuracy, and
// invert the beat-frequency relation. The conjugate mixing above puts the
// tone at negative frequency, so bins above fs/2 are read as |f|.
inline double estimate_range(const ComplexSampleSeries& if_series,
                             const ChirpConfig& cfg) {
  if (if_series.size() < 16) {
    throw std::invalid_argument("series too short for range estimation");
  }
  std::size_t n_fft = 0;
  const std::vector<double> mag = detail::padded_magnitude_spectrum(if_series, &n_fft);
  const std::size_t peak_bin = static_cast<std::size_t>(
      std::distance(mag.begin(), std::max_element(mag.begin(), mag.end())));
  double bin = detail::interpolate_peak(mag, peak_bin);
  double freq = bin / static_cast<double>(n_fft) * if_series.sampling_rate_hz;
  if (freq > 0.5 * if_series.sampling_rate_hz) {
    freq = if_series.sampling_rate_hz - freq;  // fold the negative-frequency line
  }
  return std::abs(freq) * speed_of_light / (2.0 * cfg.slope());
}

}  // namespace dradar
