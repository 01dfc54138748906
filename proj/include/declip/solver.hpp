#pragma once

// Douglas-Rachford declipping: minimize ||w . c||_1 subject to the synthesis
// D c agreeing with the observation on reliable samples and lying beyond the
// clipping threshold on clipped ones.

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "declip/gabor.hpp"
#include "declip/signal.hpp"
#include "declip/weights.hpp"

namespace declip {

struct DeclipProblem {
  Signal observed;
  ClipMask mask;
  GaborFrame frame;
  WeightGrid weights;

  void validate() const {
    declip::validate(observed);
    if (mask.size() != observed.size()) throw Error("mask length does not match the observed signal");
    if (frame.input_length() != observed.size()) throw Error("frame length does not match the observed signal");
    if (weights.channels != frame.channels() || weights.frames != frame.frames() ||
        weights.values.size() != frame.coefficient_count())
      throw Error("weight grid shape does not match the frame");
    for (double w : weights.values)
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error("weights must be finite and nonnegative");
  }
};

struct SolverConfig {
  double gamma = 1.0;
  double lambda = 1.0;
  int max_iter = 1000;
  bool record_objective = false;

  void validate() const {
    if (!(gamma > 0.0)) throw Error("gamma must be positive");
    if (!(lambda > 0.0 && lambda < 2.0)) throw Error("lambda must lie in (0, 2)");
    if (max_iter < 0) throw Error("iteration count must be nonnegative");
  }
};

struct SolveResult {
  Signal restored;
  CoefGrid coefficients;
  std::vector<double> objective_trace;
  int iterations_run = 0;
};

/// Time-domain projection onto the consistent set: y on reliable samples,
/// max(theta, z) on clipped-high, min(-theta, z) on clipped-low.
inline std::vector<double> project_time(std::span<const double> z, const ClipMask& mask, std::span<const double> y) {
  if (z.size() != mask.size() || y.size() != mask.size()) throw Error("project_time: length mismatch");
  const double theta = mask.threshold();
  std::vector<double> out(z.size());
  for (std::size_t n = 0; n < z.size(); ++n) {
    switch (mask[n]) {
      case SampleClass::Reliable: out[n] = y[n]; break;
      case SampleClass::High: out[n] = std::max(theta, z[n]); break;
      case SampleClass::Low: out[n] = std::min(-theta, z[n]); break;
    }
  }
  return out;
}

/// Projection onto the feasible coefficient set, valid for Parseval frames:
/// c - D*(D c - project_time(D c)).
inline CoefGrid project_gamma(const CoefGrid& c, const DeclipProblem& problem) {
  const std::vector<double> synth = problem.frame.synthesize(c);
  const std::vector<double> target = project_time(synth, problem.mask, problem.observed.view());
  std::vector<double> residual(synth.size());
  for (std::size_t n = 0; n < synth.size(); ++n) residual[n] = synth[n] - target[n];
  CoefGrid correction = problem.frame.analyze(residual);
  CoefGrid out = c;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= correction.values[i];
  return out;
}

/// Complex soft thresholding, phase preserving; sgn(0) = 0.
inline std::complex<double> soft_threshold(std::complex<double> z, double threshold) {
  const double mag = std::abs(z);
  if (mag <= threshold || mag == 0.0) return {0.0, 0.0};
  return z * ((mag - threshold) / mag);
}

/// Elementwise soft thresholding with thresholds gamma * w.
inline CoefGrid soft_threshold(const CoefGrid& c, const WeightGrid& w, double gamma) {
  if (c.values.size() != w.values.size()) throw Error("soft_threshold: shape mismatch");
  CoefGrid out = c;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = soft_threshold(c.values[i], gamma * w.values[i]);
  return out;
}

inline double weighted_l1(const CoefGrid& c, const WeightGrid& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c.values.size(); ++i) acc += w.values[i] * std::abs(c.values[i]);
  return acc;
}

/// Runs the Douglas-Rachford iteration from c0 = D* y:
///   c~ = proj(c);  c += lambda * (soft(2 c~ - c) - c~)
/// The restored signal is synthesized from proj(c_final) and passed through
/// project_time, so reliable samples reproduce y exactly.
inline SolveResult solve(const DeclipProblem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();
  const WeightGrid& w = problem.weights;
  const std::size_t count = w.values.size();

  std::vector<double> thresholds(count);
  for (std::size_t i = 0; i < count; ++i) thresholds[i] = config.gamma * w.values[i];

  SolveResult result;
  CoefGrid c = problem.frame.analyze(problem.observed);
  if (config.record_objective) result.objective_trace.reserve(static_cast<std::size_t>(config.max_iter));

  for (int it = 0; it < config.max_iter; ++it) {
    const CoefGrid projected = project_gamma(c, problem);
    if (config.record_objective) result.objective_trace.push_back(weighted_l1(projected, w));
    double energy = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const std::complex<double> ct = projected.values[i];
      const std::complex<double> reflected = 2.0 * ct - c.values[i];
      c.values[i] += config.lambda * (soft_threshold(reflected, thresholds[i]) - ct);
      energy += std::norm(c.values[i]);
    }
    if (!std::isfinite(energy))
      throw Error("solver diverged: non-finite coefficients at iteration " + std::to_string(it));
    result.iterations_run = it + 1;
  }

  result.coefficients = project_gamma(c, problem);
  const std::vector<double> synth = problem.frame.synthesize(result.coefficients);
  result.restored = Signal(project_time(synth, problem.mask, problem.observed.view()), problem.observed.sample_rate);
  return result;
}

struct ConsistencyReport {
  double max_reliable_deviation = 0.0;
  double max_high_violation = 0.0;
  double max_low_violation = 0.0;

  bool ok(double tol = 1e-9) const {
    return max_reliable_deviation <= tol && max_high_violation <= tol && max_low_violation <= tol;
  }
};

inline ConsistencyReport check_consistency(std::span<const double> restored, std::span<const double> observed,
                                           const ClipMask& mask) {
  if (restored.size() != mask.size() || observed.size() != mask.size())
    throw Error("consistency check: length mismatch");
  ConsistencyReport r;
  const double theta = mask.threshold();
  for (std::size_t n = 0; n < mask.size(); ++n) {
    switch (mask[n]) {
      case SampleClass::Reliable:
        r.max_reliable_deviation = std::max(r.max_reliable_deviation, std::abs(restored[n] - observed[n]));
        break;
      case SampleClass::High: r.max_high_violation = std::max(r.max_high_violation, theta - restored[n]); break;
      case SampleClass::Low: r.max_low_violation = std::max(r.max_low_violation, restored[n] + theta); break;
    }
  }
  return r;
}

/// Called with the pass number (1 or 2) before each solver run.
using PassObserver = std::function<void(int pass, WeightKind weights)>;

/// Two-pass GMT scheme: an unweighted solve first, then masking thresholds
/// estimated from that reconstruction drive a weighted second solve.
inline SolveResult declip_two_pass(const Signal& y, const ClipMask& mask, const GaborFrame& frame,
                                   const WeightRecipe& recipe, const SolverConfig& config,
                                   const PassObserver& observer = {}) {
  if (!is_gmt(recipe.kind)) throw Error("two-pass declipping requires a gmt recipe");
  if (observer) observer(1, WeightKind::None);
  DeclipProblem first{y, mask, frame, assemble_weight_grid({WeightKind::None, recipe.tau}, frame, y.sample_rate)};
  const SolveResult pass1 = solve(first, config);
  if (observer) observer(2, recipe.kind);
  DeclipProblem second{y, mask, frame, assemble_weight_grid(recipe, frame, y.sample_rate, &pass1.restored)};
  return solve(second, config);
}

inline SolveResult declip_two_pass(const Signal& y, double threshold, const GaborFrame& frame,
                                   const WeightRecipe& recipe, const SolverConfig& config,
                                   const PassObserver& observer = {}) {
  return declip_two_pass(y, detect_mask(y, threshold), frame, recipe, config, observer);
}

/// Dispatches on the recipe: GMT recipes run the two-pass scheme, all others
/// a single weighted solve.
inline SolveResult declip(const Signal& y, const ClipMask& mask, const GaborFrame& frame, const WeightRecipe& recipe,
                          const SolverConfig& config, const PassObserver& observer = {}) {
  if (is_gmt(recipe.kind)) return declip_two_pass(y, mask, frame, recipe, config, observer);
  if (observer) observer(1, recipe.kind);
  DeclipProblem problem{y, mask, frame, assemble_weight_grid(recipe, frame, y.sample_rate)};
  return solve(problem, config);
}

}  // namespace declip
