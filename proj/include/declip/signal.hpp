#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace declip {

/// Thrown for contract violations and malformed inputs across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real-valued sampled waveform. Carries both the clean and the clipped signal.
struct Signal {
  std::vector<double> samples;
  int sample_rate = 44100;

  Signal() = default;
  Signal(std::vector<double> s, int fs) : samples(std::move(s)), sample_rate(fs) {}

  std::size_t size() const { return samples.size(); }
  double operator[](std::size_t n) const { return samples[n]; }
  double& operator[](std::size_t n) { return samples[n]; }
  std::span<const double> view() const { return samples; }
};

inline void validate(const Signal& s) {
  if (s.samples.empty()) throw Error("signal is empty");
  if (s.sample_rate <= 0) throw Error("sample rate must be positive");
  for (double v : s.samples)
    if (!std::isfinite(v)) throw Error("signal contains non-finite samples");
}

inline double peak(std::span<const double> s) {
  double p = 0.0;
  for (double v : s) p = std::max(p, std::abs(v));
  return p;
}

inline Signal peak_normalize(const Signal& s) {
  validate(s);
  const double p = peak(s.samples);
  if (p == 0.0) throw Error("cannot peak-normalize an all-zero signal");
  Signal out = s;
  if (p == 1.0) return out;
  for (double& v : out.samples) v /= p;
  return out;
}

enum class SampleClass : unsigned char { Reliable, High, Low };

/// Partition of sample indices into reliable (R), clipped-high (H) and
/// clipped-low (L) positions for clipping threshold `threshold`.
class ClipMask {
 public:
  ClipMask() = default;
  ClipMask(std::vector<SampleClass> labels, double threshold)
      : labels_(std::move(labels)), threshold_(threshold) {
    if (!(threshold_ > 0.0)) throw Error("clipping threshold must be positive");
  }

  std::size_t size() const { return labels_.size(); }
  double threshold() const { return threshold_; }
  SampleClass operator[](std::size_t n) const { return labels_[n]; }
  const std::vector<SampleClass>& labels() const { return labels_; }

  std::vector<std::size_t> indices(SampleClass c) const {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < labels_.size(); ++n)
      if (labels_[n] == c) out.push_back(n);
    return out;
  }
  std::vector<std::size_t> reliable() const { return indices(SampleClass::Reliable); }
  std::vector<std::size_t> clipped_high() const { return indices(SampleClass::High); }
  std::vector<std::size_t> clipped_low() const { return indices(SampleClass::Low); }

  std::size_t clipped_count() const {
    return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(), [](SampleClass c) {
      return c != SampleClass::Reliable;
    }));
  }
  double clipped_fraction() const {
    return labels_.empty() ? 0.0 : static_cast<double>(clipped_count()) / static_cast<double>(labels_.size());
  }

  friend bool operator==(const ClipMask&, const ClipMask&) = default;

 private:
  std::vector<SampleClass> labels_;
  double threshold_ = 1.0;
};

struct ClippedSignal {
  Signal signal;
  ClipMask mask;
};

/// Hard clipping: samples with |x_n| >= threshold are replaced by
/// threshold * sgn(x_n). Equality counts as clipped.
inline ClippedSignal hard_clip(const Signal& x, double threshold) {
  if (!(threshold > 0.0)) throw Error("clipping threshold must be positive");
  validate(x);
  ClippedSignal out{x, {}};
  std::vector<SampleClass> labels(x.size(), SampleClass::Reliable);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double v = x[n];
    if (v >= threshold) {
      out.signal[n] = threshold;
      labels[n] = SampleClass::High;
    } else if (v <= -threshold) {
      out.signal[n] = -threshold;
      labels[n] = SampleClass::Low;
    }
  }
  out.mask = ClipMask(std::move(labels), threshold);
  return out;
}

/// Classifies the samples of an observed clipped signal. With the default
/// tolerance of 0 the plateau must sit exactly at +-threshold, which is what
/// hard_clip produces. A positive tolerance accepts inexact plateaus from
/// externally clipped recordings: |y_n| >= threshold - tolerance is clipped,
/// and only |y_n| > threshold + tolerance is rejected.
inline ClipMask detect_mask(const Signal& y, double threshold, double tolerance = 0.0) {
  if (!(threshold > 0.0)) throw Error("clipping threshold must be positive");
  if (tolerance < 0.0) throw Error("mask tolerance must be nonnegative");
  validate(y);
  std::vector<SampleClass> labels(y.size(), SampleClass::Reliable);
  for (std::size_t n = 0; n < y.size(); ++n) {
    const double v = y[n];
    if (std::abs(v) > threshold + tolerance)
      throw Error("sample " + std::to_string(n) + " exceeds the clipping threshold");
    if (v >= threshold - tolerance)
      labels[n] = SampleClass::High;
    else if (v <= -threshold + tolerance)
      labels[n] = SampleClass::Low;
  }
  return ClipMask(std::move(labels), threshold);
}

}  // namespace declip
