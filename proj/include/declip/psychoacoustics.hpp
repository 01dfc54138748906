#pragma once

// Absolute threshold of hearing and a simplified MPEG-1 psychoacoustic
// model 1 in which every masker is treated as tonal.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "declip/fft.hpp"
#include "declip/gabor.hpp"
#include "declip/signal.hpp"

namespace declip {

/// Upper bound applied to threshold curves (dB SPL). Keeps the DC bin finite
/// and the tau-based weight variants nonnegative.
inline constexpr double kCurveClampDb = 100.0;
/// Lower bound of PSD estimates (dB SPL); zero power maps here.
inline constexpr double kPsdFloorDb = -100.0;
/// A full-scale sinusoid at a bin center peaks at this level.
inline constexpr double kFullScaleDb = 96.0;
inline constexpr double kTonalProminenceDb = 7.0;
inline constexpr double kMaskerMinSeparationBark = 0.5;

/// Values over the M/2 + 1 nonnegative-frequency bins of an M-point DFT.
struct ThresholdCurve {
  std::vector<double> values_db;
  std::vector<double> bin_freqs;

  std::size_t size() const { return values_db.size(); }
};

/// Terhardt's approximation of the threshold in quiet, unclamped.
inline double ath_db_unclamped(double f_hz) {
  const double g = f_hz / 1000.0;
  return 3.64 * std::pow(g, -0.8) - 6.5 * std::exp(-0.6 * (g - 3.3) * (g - 3.3)) + 1e-3 * g * g * g * g;
}

inline double ath_db(double f_hz) {
  if (!(f_hz > 0.0)) throw Error("absolute threshold is undefined for f <= 0");
  return std::min(ath_db_unclamped(f_hz), kCurveClampDb);
}

/// Critical-band rate (Zwicker).
inline double hz_to_bark(double f_hz) {
  const double r = f_hz / 7500.0;
  return 13.0 * std::atan(0.00076 * f_hz) + 3.5 * std::atan(r * r);
}

inline std::vector<double> bin_frequencies(std::size_t channels, int sample_rate) {
  std::vector<double> f(channels / 2 + 1);
  for (std::size_t k = 0; k < f.size(); ++k)
    f[k] = static_cast<double>(k) * sample_rate / static_cast<double>(channels);
  return f;
}

inline ThresholdCurve ath_vector(std::size_t channels, int sample_rate) {
  if (channels < 2) throw Error("need at least two channels");
  if (sample_rate <= 0) throw Error("sample rate must be positive");
  ThresholdCurve c;
  c.bin_freqs = bin_frequencies(channels, sample_rate);
  c.values_db.resize(c.bin_freqs.size());
  c.values_db[0] = kCurveClampDb;
  for (std::size_t k = 1; k < c.size(); ++k) c.values_db[k] = ath_db(c.bin_freqs[k]);
  return c;
}

inline ThresholdCurve ath_vector(const GaborFrame& frame, int sample_rate) {
  return ath_vector(frame.channels(), sample_rate);
}

/// One-sided PSD of a Hann-windowed frame in dB SPL.
inline ThresholdCurve psd_estimate(std::span<const double> frame, int sample_rate) {
  const std::size_t m = frame.size();
  if (m < 2) throw Error("PSD frame too short");
  const std::vector<double> hann = hann_window(m);
  Fft fft(m, FftDirection::Forward);
  auto buf = fft.buffer();
  for (std::size_t n = 0; n < m; ++n) buf[n] = hann[n] * frame[n];
  fft.execute();

  // A unit sinusoid at a bin center yields |X(k)| = M/4 under a periodic Hann window.
  const double quarter = static_cast<double>(m) / 4.0;
  const double offset = kFullScaleDb - 10.0 * std::log10(quarter * quarter);

  ThresholdCurve psd;
  psd.bin_freqs = bin_frequencies(m, sample_rate);
  psd.values_db.resize(psd.bin_freqs.size());
  for (std::size_t k = 0; k < psd.size(); ++k) {
    const double power = std::norm(buf[k]);
    const double db = power > 0.0 ? offset + 10.0 * std::log10(power) : kPsdFloorDb;
    psd.values_db[k] = std::max(db, kPsdFloorDb);
  }
  return psd;
}

struct Masker {
  std::size_t bin = 0;
  double level_db = 0.0;
  double bark = 0.0;
};

/// Offsets examined for the 7 dB prominence test around bin k.
inline std::vector<std::size_t> tonal_neighborhood(std::size_t k) {
  std::size_t widest = 12;
  if (k < 63)
    widest = 2;
  else if (k < 127)
    widest = 3;
  else if (k < 255)
    widest = 6;
  std::vector<std::size_t> out;
  for (std::size_t d = 2; d <= widest; ++d) out.push_back(d);
  return out;
}

inline double power_sum_db(std::initializer_list<double> levels) {
  double acc = 0.0;
  for (double l : levels) acc += std::pow(10.0, l / 10.0);
  return 10.0 * std::log10(acc);
}

inline std::vector<Masker> find_tonal_maskers(const ThresholdCurve& psd) {
  const auto& p = psd.values_db;
  const std::size_t bins = p.size();
  std::vector<Masker> candidates;
  for (std::size_t k = 1; k + 1 < bins; ++k) {
    if (!(p[k] > p[k - 1] && p[k] > p[k + 1])) continue;
    bool prominent = true;
    for (std::size_t d : tonal_neighborhood(k)) {
      if (k >= d && p[k] - p[k - d] < kTonalProminenceDb) prominent = false;
      if (k + d < bins && p[k] - p[k + d] < kTonalProminenceDb) prominent = false;
      if (!prominent) break;
    }
    if (!prominent) continue;
    const double f = psd.bin_freqs[k];
    const double level = power_sum_db({p[k - 1], p[k], p[k + 1]});
    if (level < ath_db(f)) continue;
    candidates.push_back({k, level, hz_to_bark(f)});
  }

  // Of two maskers closer than 0.5 Bark only the stronger one survives.
  std::vector<Masker> kept;
  for (const Masker& m : candidates) {
    if (!kept.empty() && m.bark - kept.back().bark < kMaskerMinSeparationBark) {
      if (m.level_db > kept.back().level_db) kept.back() = m;
      continue;
    }
    kept.push_back(m);
  }
  return kept;
}

/// Model 1 spreading function for a masker of level `level_db` at distance
/// dz = z(maskee) - z(masker) Bark. Outside [-3, 8) there is no masking.
inline double spreading_db(double dz, double level_db) {
  if (dz < -3.0 || dz >= 8.0) return -std::numeric_limits<double>::infinity();
  if (dz < -1.0) return 17.0 * dz - 0.4 * level_db + 11.0;
  if (dz < 0.0) return (0.4 * level_db + 6.0) * dz;
  if (dz < 1.0) return -17.0 * dz;
  return -(dz - 1.0) * (17.0 - 0.15 * level_db) - 17.0;
}

/// Individual threshold of a tonal masker at critical-band rate `bark`.
inline double tonal_masking_db(const Masker& m, double bark) {
  return m.level_db - 0.275 * m.bark - 6.025 + spreading_db(bark - m.bark, m.level_db);
}

/// Power-additive combination of the threshold in quiet and the individual
/// masking thresholds, clamped to kCurveClampDb.
inline ThresholdCurve global_masking_threshold(std::span<const Masker> maskers, const ThresholdCurve& ath) {
  ThresholdCurve gmt = ath;
  if (maskers.empty()) return gmt;
  for (std::size_t k = 0; k < gmt.size(); ++k) {
    const double z = hz_to_bark(gmt.bin_freqs[k]);
    double power = std::pow(10.0, ath.values_db[k] / 10.0);
    for (const Masker& m : maskers) {
      const double t = tonal_masking_db(m, z);
      if (std::isfinite(t)) power += std::pow(10.0, t / 10.0);
    }
    // max() guards against the power sum rounding a hair below the ATH term.
    gmt.values_db[k] = std::min(std::max(10.0 * std::log10(power), ath.values_db[k]), kCurveClampDb);
  }
  return gmt;
}

inline ThresholdCurve global_masking_threshold(std::span<const double> frame, int sample_rate) {
  const ThresholdCurve psd = psd_estimate(frame, sample_rate);
  const std::vector<Masker> maskers = find_tonal_maskers(psd);
  return global_masking_threshold(maskers, ath_vector(frame.size(), sample_rate));
}

}  // namespace declip
