#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "declip/declip.hpp"

int main(int argc, char** argv) {
  using namespace declip;

  CLI::App app{"Audio declipping by weighted l1 minimization (Douglas-Rachford)"};
  app.require_subcommand(1);

  ClipOptions clip;
  bool clip_downmix = false, clip_pcm16 = false;
  auto* clip_cmd = app.add_subcommand("clip", "Peak-normalize and hard-clip a WAV file");
  clip_cmd->add_option("input", clip.input, "Input WAV")->required()->check(CLI::ExistingFile);
  clip_cmd->add_option("output", clip.output, "Output WAV")->required();
  clip_cmd->add_option("-t,--threshold", clip.threshold, "Clipping threshold in (0, 1]")->required();
  clip_cmd->add_flag("--downmix", clip_downmix, "Average all channels instead of taking channel 0");
  clip_cmd->add_flag("--pcm16", clip_pcm16, "Write 16-bit PCM instead of 32-bit float");

  DeclipOptions dec;
  std::string weights = "none";
  bool dec_downmix = false;
  std::string reference, objective;
  int iterations = -1;
  auto* dec_cmd = app.add_subcommand("declip", "Restore a clipped WAV file");
  dec_cmd->add_option("input", dec.input, "Clipped input WAV")->required()->check(CLI::ExistingFile);
  dec_cmd->add_option("output", dec.output, "Restored output WAV (32-bit float)")->required();
  dec_cmd->add_option("-t,--threshold", dec.threshold, "Clipping threshold of the input")->required();
  dec_cmd->add_option("-w,--weights", weights, "none|ath1|ath2|ath3|gmt1|gmt2|gmt3|parabola")->capture_default_str();
  dec_cmd->add_option("-n,--iterations", iterations, "Iterations (default 1000, fast profile 300)");
  dec_cmd->add_option("--gamma", dec.gamma, "Soft-threshold step gamma")->capture_default_str();
  dec_cmd->add_option("--lambda", dec.lambda, "Relaxation lambda in (0, 2)")->capture_default_str();
  dec_cmd->add_option("--tau", dec.tau, "Curve ceiling tau in dB")->capture_default_str();
  dec_cmd->add_flag("--fast", dec.fast, "Window 2048, hop 512, 2048 channels, 300 iterations");
  dec_cmd->add_option("--mask-tolerance", dec.mask_tolerance,
                      "Treat |y| >= threshold - tol as clipped (inexact plateaus)")
      ->capture_default_str();
  dec_cmd->add_option("--reference", reference, "Clean reference WAV; prints SDR figures");
  dec_cmd->add_option("--objective-csv", objective, "Write the per-iteration weighted l1 objective");
  dec_cmd->add_flag("--downmix", dec_downmix, "Average all channels instead of taking channel 0");

  std::string config_path;
  int jobs = 0;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a files x thresholds x recipes evaluation grid");
  exp_cmd->add_option("config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("-j,--jobs", jobs, "Parallel cells (DECLIP_JOBS overrides)");

  CurvesOptions curves;
  std::string what = "ath", curve_input, curve_out;
  std::size_t offset = 0;
  auto* cur_cmd = app.add_subcommand("curves", "Export ATH, weight or GMT curves as CSV");
  cur_cmd->add_option("--what", what, "ath|weights|gmt")->capture_default_str();
  cur_cmd->add_option("-m,--channels", curves.channels, "DFT length / channel count")->capture_default_str();
  cur_cmd->add_option("--sample-rate", curves.sample_rate, "Sample rate for ath/weights")->capture_default_str();
  cur_cmd->add_option("--tau", curves.tau, "Curve ceiling tau in dB")->capture_default_str();
  cur_cmd->add_option("--fmin", curves.fmin, "Lowest frequency for ath")->capture_default_str();
  cur_cmd->add_option("--fmax", curves.fmax, "Highest frequency for ath")->capture_default_str();
  cur_cmd->add_option("--input", curve_input, "WAV file for gmt");
  auto* offset_opt = cur_cmd->add_option("--offset", offset, "First sample of the gmt frame (default: around the peak)");
  cur_cmd->add_option("-o,--output", curve_out, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (clip_cmd->parsed()) {
      if (clip_downmix) clip.channels = ChannelMode::Downmix;
      if (clip_pcm16) clip.format = SampleFormat::Pcm16;
      cmd_clip(clip, std::cout);
    } else if (dec_cmd->parsed()) {
      dec.weights = parse_weight_kind(weights);
      if (iterations >= 0) dec.iterations = iterations;
      if (!reference.empty()) dec.reference = reference;
      if (!objective.empty()) dec.objective_csv = objective;
      if (dec_downmix) dec.channels = ChannelMode::Downmix;
      cmd_declip(dec, std::cout);
    } else if (exp_cmd->parsed()) {
      const auto out = cmd_experiment(config_path, std::cout, jobs > 0 ? std::optional<int>(jobs) : std::nullopt);
      (void)out;
    } else if (cur_cmd->parsed()) {
      curves.what = parse_curve_kind(what);
      if (!curve_input.empty()) curves.input = curve_input;
      if (offset_opt->count() > 0) curves.offset = offset;
      if (curve_out.empty()) {
        cmd_curves(curves, std::cout);
      } else {
        std::ofstream f(curve_out);
        if (!f) throw Error("cannot write " + curve_out);
        cmd_curves(curves, f);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "declip: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
