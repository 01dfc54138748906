#pragma once

// Discrete Gabor transform on a circular lattice realizing a Parseval tight
// frame. Signals of length N are embedded in a zero-padded buffer of length
// L (a multiple of the hop) with window_length/2 zeros in front, so every
// signal sample is covered by the full set of window_length/hop frames.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "declip/fft.hpp"
#include "declip/signal.hpp"

namespace declip {

/// Complex coefficients c[m, t], m < channels, t < frames. Stored frame-major
/// so that each time frame's spectrum is contiguous.
struct CoefGrid {
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::vector<std::complex<double>> values;

  CoefGrid() = default;
  CoefGrid(std::size_t m, std::size_t t) : channels(m), frames(t), values(m * t) {}

  std::size_t size() const { return values.size(); }
  std::complex<double>& operator()(std::size_t m, std::size_t t) { return values[t * channels + m]; }
  const std::complex<double>& operator()(std::size_t m, std::size_t t) const { return values[t * channels + m]; }
  std::span<std::complex<double>> frame(std::size_t t) { return {values.data() + t * channels, channels}; }
  std::span<const std::complex<double>> frame(std::size_t t) const {
    return {values.data() + t * channels, channels};
  }
};

inline double squared_norm(const CoefGrid& c) {
  double acc = 0.0;
  for (const auto& v : c.values) acc += std::norm(v);
  return acc;
}

/// Periodic Hann window 0.5 - 0.5 cos(2 pi n / L).
inline std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length));
  return w;
}

class GaborFrame {
 public:
  /// Builds a tight Hann frame. overlap_fraction must be 0.5 or 0.75, and
  /// channels >= window_len >= hop (painless case).
  static GaborFrame make(std::size_t window_len, double overlap_fraction, std::size_t channels,
                         std::size_t signal_len) {
    if (overlap_fraction != 0.5 && overlap_fraction != 0.75)
      throw Error("overlap fraction must be 0.5 or 0.75");
    const std::size_t divisor = overlap_fraction == 0.5 ? 2 : 4;
    if (window_len == 0 || window_len % divisor != 0)
      throw Error("window length " + std::to_string(window_len) + " is not divisible into the requested overlap");
    return GaborFrame(window_len, window_len / divisor, channels, signal_len);
  }

  GaborFrame(std::size_t window_len, std::size_t hop, std::size_t channels, std::size_t signal_len)
      : window_length_(window_len), hop_(hop), channels_(channels), input_length_(signal_len) {
    if (hop_ == 0 || window_length_ < 2 * hop_ || window_length_ % hop_ != 0)
      throw Error("window length must be a multiple of the hop, with at least two frames of overlap");
    if (channels_ < window_length_)
      throw Error("channel count " + std::to_string(channels_) + " is below the window length " +
                  std::to_string(window_length_) + " (painless case violated)");
    if (input_length_ < window_length_) throw Error("signal is shorter than the window");

    lead_ = window_length_ / 2;
    padded_length_ = (input_length_ + window_length_ + hop_ - 1) / hop_ * hop_;
    frames_ = padded_length_ / hop_;

    // Canonical tight window: divide by the square root of the squared
    // overlap-add sum (periodic in the hop) and scale by 1/sqrt(M).
    window_ = hann_window(window_length_);
    std::vector<double> ola(hop_, 0.0);
    for (std::size_t j = 0; j < window_length_; ++j) ola[j % hop_] += window_[j] * window_[j];
    const double m = static_cast<double>(channels_);
    for (std::size_t j = 0; j < window_length_; ++j) window_[j] /= std::sqrt(ola[j % hop_] * m);

    for (std::size_t r = 0; r < hop_; ++r) {
      double acc = 0.0;
      for (std::size_t j = r; j < window_length_; j += hop_) acc += window_[j] * window_[j];
      if (std::abs(acc * m - 1.0) > 1e-12) throw Error("Gabor window failed the tightness check");
    }
  }

  std::size_t window_length() const { return window_length_; }
  std::size_t hop() const { return hop_; }
  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  std::size_t input_length() const { return input_length_; }
  std::size_t padded_length() const { return padded_length_; }
  std::size_t lead() const { return lead_; }
  std::size_t coefficient_count() const { return channels_ * frames_; }
  const std::vector<double>& window() const { return window_; }

  /// Position in the padded buffer of sample j of frame t.
  std::size_t position(std::size_t t, std::size_t j) const { return (t * hop_ + j) % padded_length_; }

  std::vector<double> pad(std::span<const double> s) const {
    if (s.size() != input_length_)
      throw Error("signal length " + std::to_string(s.size()) + " does not match frame length " +
                  std::to_string(input_length_));
    std::vector<double> padded(padded_length_, 0.0);
    std::copy(s.begin(), s.end(), padded.begin() + static_cast<std::ptrdiff_t>(lead_));
    return padded;
  }

  /// Analysis operator D*: c[m, t] = sum_j g[j] s[t*hop + j] exp(-2 pi i m j / M).
  CoefGrid analyze(std::span<const double> s) const {
    const std::vector<double> padded = pad(s);
    CoefGrid c(channels_, frames_);
    Fft fft(channels_, FftDirection::Forward);
    auto buf = fft.buffer();
    for (std::size_t t = 0; t < frames_; ++t) {
      std::fill(buf.begin(), buf.end(), std::complex<double>{});
      for (std::size_t j = 0; j < window_length_; ++j) buf[j] = window_[j] * padded[position(t, j)];
      fft.execute();
      std::copy(buf.begin(), buf.end(), c.frame(t).begin());
    }
    return c;
  }
  CoefGrid analyze(const Signal& s) const { return analyze(s.view()); }

  /// Synthesis operator D: real part of the overlap-added, windowed inverse
  /// DFTs, restricted to the unpadded signal support.
  std::vector<double> synthesize(const CoefGrid& c) const {
    if (c.channels != channels_ || c.frames != frames_ || c.values.size() != channels_ * frames_)
      throw Error("coefficient grid shape does not match the frame");
    std::vector<double> padded(padded_length_, 0.0);
    Fft ifft(channels_, FftDirection::Backward);
    auto buf = ifft.buffer();
    for (std::size_t t = 0; t < frames_; ++t) {
      const auto col = c.frame(t);
      std::copy(col.begin(), col.end(), buf.begin());
      ifft.execute();
      for (std::size_t j = 0; j < window_length_; ++j) padded[position(t, j)] += window_[j] * buf[j].real();
    }
    return {padded.begin() + static_cast<std::ptrdiff_t>(lead_),
            padded.begin() + static_cast<std::ptrdiff_t>(lead_ + input_length_)};
  }

  /// The `length` samples of the padded signal centered on frame t's window,
  /// taken circularly. Used to align per-frame spectral analyses with the
  /// coefficient lattice.
  std::vector<double> segment(std::span<const double> padded, std::size_t t, std::size_t length) const {
    if (padded.size() != padded_length_) throw Error("segment expects a padded signal");
    std::vector<double> out(length);
    const std::size_t center = t * hop_ + window_length_ / 2;
    const std::size_t start = (center + padded_length_ * ((length / 2) / padded_length_ + 1) - length / 2);
    for (std::size_t j = 0; j < length; ++j) out[j] = padded[(start + j) % padded_length_];
    return out;
  }

 private:
  std::size_t window_length_;
  std::size_t hop_;
  std::size_t channels_;
  std::size_t input_length_;
  std::size_t padded_length_ = 0;
  std::size_t frames_ = 0;
  std::size_t lead_ = 0;
  std::vector<double> window_;
};

/// DGT parameter sets used by the CLI.
struct FrameProfile {
  std::size_t window_length;
  double overlap;
  std::size_t channels;

  GaborFrame make(std::size_t signal_len) const {
    return GaborFrame::make(window_length, overlap, channels, signal_len);
  }
};

inline constexpr FrameProfile kDefaultProfile{8192, 0.75, 8192};
inline constexpr FrameProfile kFastProfile{2048, 0.75, 2048};

}  // namespace declip
