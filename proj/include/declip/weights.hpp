#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "declip/gabor.hpp"
#include "declip/psychoacoustics.hpp"
#include "declip/signal.hpp"

namespace declip {

inline constexpr double kDefaultTau = 100.0;

/// Nonnegative per-coefficient weights aligned with a CoefGrid (frame-major).
struct WeightGrid {
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::vector<double> values;
  double tau = kDefaultTau;

  WeightGrid() = default;
  WeightGrid(std::size_t m, std::size_t t, double fill = 1.0) : channels(m), frames(t), values(m * t, fill) {}

  double operator()(std::size_t m, std::size_t t) const { return values[t * channels + m]; }
  double& operator()(std::size_t m, std::size_t t) { return values[t * channels + m]; }
  std::span<double> frame(std::size_t t) { return {values.data() + t * channels, channels}; }
  std::span<const double> frame(std::size_t t) const { return {values.data() + t * channels, channels}; }
};

enum class WeightKind { None, Ath1, Ath2, Ath3, Gmt1, Gmt2, Gmt3, Parabola };

inline constexpr std::array kAllWeightKinds{WeightKind::None, WeightKind::Ath1, WeightKind::Ath2,
                                            WeightKind::Ath3, WeightKind::Gmt1, WeightKind::Gmt2,
                                            WeightKind::Gmt3, WeightKind::Parabola};

inline std::string_view to_string(WeightKind k) {
  switch (k) {
    case WeightKind::None: return "none";
    case WeightKind::Ath1: return "ath1";
    case WeightKind::Ath2: return "ath2";
    case WeightKind::Ath3: return "ath3";
    case WeightKind::Gmt1: return "gmt1";
    case WeightKind::Gmt2: return "gmt2";
    case WeightKind::Gmt3: return "gmt3";
    case WeightKind::Parabola: return "parabola";
  }
  return "?";
}

inline WeightKind parse_weight_kind(std::string_view name) {
  for (WeightKind k : kAllWeightKinds)
    if (to_string(k) == name) return k;
  throw Error("unknown weight recipe '" + std::string(name) + "'");
}

inline bool is_gmt(WeightKind k) {
  return k == WeightKind::Gmt1 || k == WeightKind::Gmt2 || k == WeightKind::Gmt3;
}

/// Variant 1..3 of a curve-derived recipe (0 for none/parabola).
inline int curve_variant(WeightKind k) {
  switch (k) {
    case WeightKind::Ath1: case WeightKind::Gmt1: return 1;
    case WeightKind::Ath2: case WeightKind::Gmt2: return 2;
    case WeightKind::Ath3: case WeightKind::Gmt3: return 3;
    default: return 0;
  }
}

struct WeightRecipe {
  WeightKind kind = WeightKind::None;
  double tau = kDefaultTau;
};

namespace detail {

inline void normalize_peak(std::span<double> w) {
  const double top = *std::max_element(w.begin(), w.end());
  if (!(top > 0.0)) throw Error("weights have no positive entry");
  for (double& v : w) v /= top;
}

/// Copies the M/2 + 1 nonnegative-frequency values into all M channels so that
/// channel m and channel M - m carry the same weight.
inline void mirror(std::span<const double> one_sided, std::span<double> two_sided) {
  const std::size_t m = two_sided.size();
  for (std::size_t k = 0; k < m; ++k) two_sided[k] = one_sided[k <= m / 2 ? k : m - k];
}

}  // namespace detail

/// Unnormalized one-sided weights from a threshold curve t (dB).
///   1: (t - min t + 1)^-1    2: tau - t    3: 2e-5 * 10^((tau - t) / 20)
inline std::vector<double> curve_weights_raw(std::span<const double> t, int variant, double tau) {
  if (t.empty()) throw Error("empty threshold curve");
  if (variant < 1 || variant > 3) throw Error("curve weight variant must be 1, 2 or 3");
  for (double v : t)
    if (!std::isfinite(v)) throw Error("threshold curve contains non-finite values");
  const double t_max = *std::max_element(t.begin(), t.end());
  if (variant != 1 && tau < t_max) throw Error("tau is below the curve maximum; weights would be negative");
  const double t_min = *std::min_element(t.begin(), t.end());
  std::vector<double> w(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    switch (variant) {
      case 1: w[k] = 1.0 / (t[k] - t_min + 1.0); break;
      case 2: w[k] = tau - t[k]; break;
      default: w[k] = 2e-5 * std::pow(10.0, (tau - t[k]) / 20.0); break;
    }
  }
  return w;
}

/// Peak-normalized one-sided weights from a threshold curve.
inline std::vector<double> weights_from_curve(std::span<const double> t, int variant, double tau = kDefaultTau) {
  std::vector<double> w = curve_weights_raw(t, variant, tau);
  detail::normalize_peak(w);
  return w;
}

/// Two-sided variant: the curve covers M/2 + 1 bins and the result all M channels.
inline std::vector<double> weights_from_curve(const ThresholdCurve& t, std::size_t channels, int variant,
                                              double tau = kDefaultTau) {
  if (t.size() != channels / 2 + 1) throw Error("curve length does not match channel count");
  const std::vector<double> one_sided = weights_from_curve(t.values_db, variant, tau);
  std::vector<double> out(channels);
  detail::mirror(one_sided, out);
  return out;
}

/// Parabola weights k^2 over the nonnegative-frequency channels k = 1..M/2+1,
/// peak-normalized. Returns the one-sided vector.
inline std::vector<double> parabola_weights_one_sided(std::size_t channels) {
  if (channels < 2) throw Error("parabola weights need at least two channels");
  std::vector<double> w(channels / 2 + 1);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = static_cast<double>((k + 1) * (k + 1));
  detail::normalize_peak(w);
  return w;
}

inline std::vector<double> parabola_weights(std::size_t channels) {
  const std::vector<double> one_sided = parabola_weights_one_sided(channels);
  std::vector<double> out(channels);
  detail::mirror(one_sided, out);
  return out;
}

/// Per-channel vector broadcast over every frame.
inline WeightGrid broadcast(std::span<const double> per_channel, std::size_t frames, double tau) {
  WeightGrid g(per_channel.size(), frames);
  g.tau = tau;
  for (std::size_t t = 0; t < frames; ++t) std::copy(per_channel.begin(), per_channel.end(), g.frame(t).begin());
  return g;
}

/// Per-frame global masking thresholds of `reference`, one per DGT frame,
/// computed on the channels-long segment centered on each window.
inline std::vector<ThresholdCurve> frame_masking_thresholds(const GaborFrame& frame, const Signal& reference) {
  const std::vector<double> padded = frame.pad(reference.view());
  std::vector<ThresholdCurve> curves;
  curves.reserve(frame.frames());
  for (std::size_t t = 0; t < frame.frames(); ++t) {
    const std::vector<double> seg = frame.segment(padded, t, frame.channels());
    curves.push_back(global_masking_threshold(seg, reference.sample_rate));
  }
  return curves;
}

/// Builds the weight grid for a recipe. GMT recipes need `reference`, the
/// signal the masking thresholds are estimated from; `sample_rate` is used for
/// ATH recipes.
inline WeightGrid assemble_weight_grid(const WeightRecipe& recipe, const GaborFrame& frame, int sample_rate,
                                       const Signal* reference = nullptr) {
  const std::size_t m = frame.channels();
  const std::size_t frames = frame.frames();
  switch (recipe.kind) {
    case WeightKind::None: {
      WeightGrid g(m, frames, 1.0);
      g.tau = recipe.tau;
      return g;
    }
    case WeightKind::Parabola:
      return broadcast(parabola_weights(m), frames, recipe.tau);
    case WeightKind::Ath1:
    case WeightKind::Ath2:
    case WeightKind::Ath3:
      return broadcast(weights_from_curve(ath_vector(m, sample_rate), m, curve_variant(recipe.kind), recipe.tau),
                       frames, recipe.tau);
    case WeightKind::Gmt1:
    case WeightKind::Gmt2:
    case WeightKind::Gmt3: {
      if (reference == nullptr) throw Error("GMT weights require a reference signal");
      if (reference->size() != frame.input_length()) throw Error("reference length does not match the frame");
      const int variant = curve_variant(recipe.kind);
      WeightGrid g(m, frames);
      g.tau = recipe.tau;
      const auto curves = frame_masking_thresholds(frame, *reference);
      for (std::size_t t = 0; t < frames; ++t) {
        const std::vector<double> raw = curve_weights_raw(curves[t].values_db, variant, recipe.tau);
        detail::mirror(raw, g.frame(t));
      }
      detail::normalize_peak(g.values);
      return g;
    }
  }
  throw Error("unhandled weight recipe");
}

}  // namespace declip
