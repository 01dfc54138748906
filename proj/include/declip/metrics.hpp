#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "declip/signal.hpp"

namespace declip {

inline constexpr double kInfiniteSdr = std::numeric_limits<double>::infinity();

/// Signal-to-distortion ratio 10 log10(||u||^2 / ||u - v||^2) in dB, with u
/// the reference. Returns +inf when v equals u exactly.
inline double sdr(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error("sdr: length mismatch");
  double signal = 0.0, error = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    signal += u[n] * u[n];
    const double e = u[n] - v[n];
    error += e * e;
  }
  if (signal == 0.0) throw Error("sdr: reference signal has zero energy");
  if (error == 0.0) return kInfiniteSdr;
  return 10.0 * std::log10(signal / error);
}

inline double sdr(const Signal& u, const Signal& v) { return sdr(u.view(), v.view()); }

struct SdrReport {
  double sdr_clipped_db = 0.0;
  double sdr_restored_db = 0.0;
  double delta_sdr_db = 0.0;
};

/// SDR improvement of `restored` over `clipped`, both measured against `clean`.
inline SdrReport delta_sdr(std::span<const double> clean, std::span<const double> clipped,
                           std::span<const double> restored) {
  SdrReport r;
  r.sdr_clipped_db = sdr(clean, clipped);
  r.sdr_restored_db = sdr(clean, restored);
  // Equal terms (including inf - inf) are no improvement.
  r.delta_sdr_db = r.sdr_restored_db == r.sdr_clipped_db ? 0.0 : r.sdr_restored_db - r.sdr_clipped_db;
  return r;
}

inline SdrReport delta_sdr(const Signal& clean, const Signal& clipped, const Signal& restored) {
  return delta_sdr(clean.view(), clipped.view(), restored.view());
}

}  // namespace declip
