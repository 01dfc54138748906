#pragma once

// Implementations of the declip CLI subcommands. Argument parsing lives in
// tools/declip.cpp; these functions take parsed options and an output stream.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "declip/experiment.hpp"
#include "declip/gabor.hpp"
#include "declip/metrics.hpp"
#include "declip/psychoacoustics.hpp"
#include "declip/solver.hpp"
#include "declip/wav.hpp"
#include "declip/weights.hpp"

namespace declip {

struct ClipOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  double threshold = 0.0;
  ChannelMode channels = ChannelMode::First;
  SampleFormat format = SampleFormat::Float32;
};

/// Peak-normalizes and hard-clips a file. Returns the clipped-sample fraction.
inline double cmd_clip(const ClipOptions& opt, std::ostream& log) {
  if (!(opt.threshold > 0.0)) throw Error("threshold must be positive");
  const Signal x = peak_normalize(read_wav(opt.input, opt.channels));
  const ClippedSignal clipped = hard_clip(x, opt.threshold);
  write_wav(opt.output, clipped.signal, opt.format);
  const double fraction = clipped.mask.clipped_fraction();
  char line[160];
  std::snprintf(line, sizeof line, "clipped %zu of %zu samples (%.2f %%) at threshold %g\n",
                clipped.mask.clipped_count(), clipped.mask.size(), 100.0 * fraction, opt.threshold);
  log << line;
  return fraction;
}

struct DeclipOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  double threshold = 0.0;
  WeightKind weights = WeightKind::None;
  std::optional<int> iterations;  // default 1000, or 300 with the fast profile
  double gamma = 1.0;
  double lambda = 1.0;
  double tau = kDefaultTau;
  bool fast = false;
  double mask_tolerance = 0.0;
  std::optional<std::filesystem::path> reference;
  std::optional<std::filesystem::path> objective_csv;
  ChannelMode channels = ChannelMode::First;
};

struct DeclipOutcome {
  ConsistencyReport consistency;
  std::optional<SdrReport> sdr;
  int iterations = 0;
};

inline DeclipOutcome cmd_declip(const DeclipOptions& opt, std::ostream& log) {
  WavData wav = read_wav_channels(opt.input);
  const SampleFormat input_format = wav.format;
  const Signal y = to_mono(std::move(wav), opt.channels);
  validate(y);
  // A plateau written at the threshold is stored rounded to the file's precision.
  const double threshold = opt.threshold > 0.0 ? stored_value(opt.threshold, input_format) : opt.threshold;
  const ClipMask mask = detect_mask(y, threshold, opt.mask_tolerance);
  const FrameProfile profile = opt.fast ? kFastProfile : kDefaultProfile;
  const GaborFrame frame = profile.make(y.size());

  SolverConfig config;
  config.gamma = opt.gamma;
  config.lambda = opt.lambda;
  config.max_iter = opt.iterations.value_or(opt.fast ? 300 : 1000);
  config.record_objective = opt.objective_csv.has_value();

  log << "input: " << y.size() << " samples at " << y.sample_rate << " Hz, " << mask.clipped_count()
      << " clipped (" << mask.clipped_high().size() << " high, " << mask.clipped_low().size() << " low)\n";
  log << "frame: window " << frame.window_length() << ", hop " << frame.hop() << ", channels " << frame.channels()
      << ", " << frame.frames() << " frames\n";

  const int passes = is_gmt(opt.weights) ? 2 : 1;
  const SolveResult result =
      declip(y, mask, frame, {opt.weights, opt.tau}, config, [&](int pass, WeightKind w) {
        log << "solver pass " << pass << "/" << passes << ": weights " << to_string(w) << ", " << config.max_iter
            << " iterations\n";
      });

  // Verify what will actually be stored: float32 samples.
  Signal stored = result.restored;
  for (double& v : stored.samples) v = static_cast<float>(v);
  DeclipOutcome outcome;
  outcome.iterations = result.iterations_run;
  outcome.consistency = check_consistency(stored.view(), y.view(), mask);
  char line[200];
  std::snprintf(line, sizeof line,
                "consistency: max reliable deviation %.3g, max high violation %.3g, max low violation %.3g\n",
                outcome.consistency.max_reliable_deviation, outcome.consistency.max_high_violation,
                outcome.consistency.max_low_violation);
  log << line;
  if (!outcome.consistency.ok()) throw Error("restored signal is not consistent with the input; not written");
  write_wav(opt.output, stored, SampleFormat::Float32);

  if (opt.objective_csv) {
    std::ofstream csv(*opt.objective_csv);
    if (!csv) throw Error("cannot write " + opt.objective_csv->string());
    csv << "iteration,weighted_l1_objective\n";
    for (std::size_t i = 0; i < result.objective_trace.size(); ++i)
      csv << i << ',' << format_number(result.objective_trace[i]) << '\n';
  }

  if (opt.reference) {
    // The clip command peak-normalizes before clipping; the reference is
    // normalized the same way.
    const Signal ref = peak_normalize(read_wav(*opt.reference, opt.channels));
    if (ref.size() != y.size()) throw Error("reference length does not match the input");
    outcome.sdr = delta_sdr(ref, y, result.restored);
    log << "sdr clipped: " << format_number(outcome.sdr->sdr_clipped_db)
        << " dB, sdr restored: " << format_number(outcome.sdr->sdr_restored_db)
        << " dB, delta sdr: " << format_number(outcome.sdr->delta_sdr_db) << " dB\n";
  }
  return outcome;
}

inline ExperimentOutput cmd_experiment(const std::filesystem::path& config_path, std::ostream& log,
                                       std::optional<int> jobs = std::nullopt) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (jobs) cfg.jobs = *jobs;
  const ExperimentOutput out = run_experiment(cfg);
  std::size_t failed = 0;
  for (const ResultRow& r : out.rows)
    if (!r.error.empty()) {
      ++failed;
      log << "error: " << r.file << " theta " << format_number(r.threshold) << " " << to_string(r.recipe) << ": "
          << r.error << "\n";
    }
  log << out.rows.size() << " cells (" << failed << " failed), results in " << cfg.output_dir.string() << "\n";
  return out;
}

enum class CurveKind { Ath, Weights, Gmt };

inline CurveKind parse_curve_kind(const std::string& s) {
  if (s == "ath") return CurveKind::Ath;
  if (s == "weights") return CurveKind::Weights;
  if (s == "gmt") return CurveKind::Gmt;
  throw Error("unknown curve kind '" + s + "' (expected ath, weights or gmt)");
}

struct CurvesOptions {
  CurveKind what = CurveKind::Ath;
  std::size_t channels = 8192;
  int sample_rate = 44100;
  double tau = kDefaultTau;
  double fmin = 20.0;
  double fmax = 20000.0;
  std::optional<std::filesystem::path> input;  // gmt only
  std::optional<std::size_t> offset;           // gmt frame start; default centers on the peak sample
  ChannelMode input_channels = ChannelMode::First;
};

/// Writes the requested curve as CSV.
inline void cmd_curves(const CurvesOptions& opt, std::ostream& out) {
  switch (opt.what) {
    case CurveKind::Ath: {
      const ThresholdCurve ath = ath_vector(opt.channels, opt.sample_rate);
      out << "bin_freq_hz,value_db\n";
      for (std::size_t k = 1; k < ath.size(); ++k)
        if (ath.bin_freqs[k] >= opt.fmin && ath.bin_freqs[k] <= opt.fmax)
          out << format_number(ath.bin_freqs[k]) << ',' << format_number(ath.values_db[k]) << '\n';
      return;
    }
    case CurveKind::Weights: {
      const ThresholdCurve ath = ath_vector(opt.channels, opt.sample_rate);
      const auto w1 = weights_from_curve(ath.values_db, 1, opt.tau);
      const auto w2 = weights_from_curve(ath.values_db, 2, opt.tau);
      const auto w3 = weights_from_curve(ath.values_db, 3, opt.tau);
      const auto wp = parabola_weights_one_sided(opt.channels);
      out << "bin_freq_hz,ath_db,ath1,ath2,ath3,parabola\n";
      for (std::size_t k = 0; k < ath.size(); ++k)
        out << format_number(ath.bin_freqs[k]) << ',' << format_number(ath.values_db[k]) << ','
            << format_number(w1[k]) << ',' << format_number(w2[k]) << ',' << format_number(w3[k]) << ','
            << format_number(wp[k]) << '\n';
      return;
    }
    case CurveKind::Gmt: {
      if (!opt.input) throw Error("gmt curves need an input WAV");
      const Signal s = read_wav(*opt.input, opt.input_channels);
      validate(s);
      const std::size_t m = opt.channels;
      std::size_t start = 0;
      if (opt.offset) {
        start = *opt.offset;
      } else {
        std::size_t peak_at = 0;
        for (std::size_t n = 0; n < s.size(); ++n)
          if (std::abs(s[n]) > std::abs(s[peak_at])) peak_at = n;
        start = peak_at > m / 2 ? peak_at - m / 2 : 0;
      }
      std::vector<double> frame(m, 0.0);
      for (std::size_t j = 0; j < m && start + j < s.size(); ++j) frame[j] = s[start + j];
      const ThresholdCurve psd = psd_estimate(frame, s.sample_rate);
      const ThresholdCurve ath = ath_vector(m, s.sample_rate);
      const ThresholdCurve gmt = global_masking_threshold(find_tonal_maskers(psd), ath);
      const auto w1 = weights_from_curve(gmt.values_db, 1, opt.tau);
      const auto w2 = weights_from_curve(gmt.values_db, 2, opt.tau);
      const auto w3 = weights_from_curve(gmt.values_db, 3, opt.tau);
      out << "bin_freq_hz,psd_db,ath_db,gmt_db,gmt1,gmt2,gmt3\n";
      for (std::size_t k = 0; k < gmt.size(); ++k)
        out << format_number(gmt.bin_freqs[k]) << ',' << format_number(psd.values_db[k]) << ','
            << format_number(ath.values_db[k]) << ',' << format_number(gmt.values_db[k]) << ','
            << format_number(w1[k]) << ',' << format_number(w2[k]) << ',' << format_number(w3[k]) << '\n';
      return;
    }
  }
}

}  // namespace declip
