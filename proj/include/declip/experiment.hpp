#pragma once

// Batch evaluation over (file x threshold x recipe): every cell peak-normalizes
// and clips the file, restores it and records SDR figures. Output is
// deterministic regardless of the number of worker threads.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "declip/gabor.hpp"
#include "declip/metrics.hpp"
#include "declip/solver.hpp"
#include "declip/wav.hpp"
#include "declip/weights.hpp"

namespace declip {

inline constexpr const char* kResultsSchema = "# declip-results v1";
inline constexpr const char* kSummarySchema = "# declip-summary v1";

/// Formats a double so that it parses back to the same value; infinities are
/// written as "inf" / "-inf".
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

struct ExperimentConfig {
  std::vector<std::string> inputs;
  std::vector<double> thresholds{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<WeightRecipe> recipes;
  FrameProfile profile = kDefaultProfile;
  SolverConfig solver;
  std::filesystem::path output_dir = "results";
  std::filesystem::path base_dir;  // relative inputs resolve against this
  ChannelMode channels = ChannelMode::First;
  int jobs = 1;

  ExperimentConfig() {
    for (WeightKind k : kAllWeightKinds) recipes.push_back({k, kDefaultTau});
  }

  void validate() const {
    if (inputs.empty()) throw Error("experiment needs at least one input file");
    if (thresholds.empty()) throw Error("experiment needs at least one threshold");
    for (double t : thresholds)
      if (!(t > 0.0 && t < 1.0)) throw Error("thresholds must lie in (0, 1)");
    if (recipes.empty()) throw Error("experiment needs at least one recipe");
    if (jobs < 1) throw Error("jobs must be at least 1");
    solver.validate();
  }
};

/// Parses a JSON experiment description. Recognized keys: inputs, thresholds,
/// recipes, profile ("default" | "fast"), iterations, gamma, lambda, tau,
/// output_dir, jobs, downmix. Unset keys keep their defaults; the fast
/// profile also lowers the default iteration count to 300.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  try {
    cfg.inputs = j.at("inputs").get<std::vector<std::string>>();
    if (j.contains("thresholds")) cfg.thresholds = j["thresholds"].get<std::vector<double>>();
    const std::string profile = j.value("profile", std::string("default"));
    if (profile == "fast") {
      cfg.profile = kFastProfile;
      cfg.solver.max_iter = 300;
    } else if (profile != "default") {
      throw Error("unknown profile '" + profile + "'");
    }
    cfg.solver.max_iter = j.value("iterations", cfg.solver.max_iter);
    cfg.solver.gamma = j.value("gamma", cfg.solver.gamma);
    cfg.solver.lambda = j.value("lambda", cfg.solver.lambda);
    const double tau = j.value("tau", kDefaultTau);
    if (j.contains("recipes")) {
      cfg.recipes.clear();
      for (const auto& name : j["recipes"].get<std::vector<std::string>>())
        cfg.recipes.push_back({parse_weight_kind(name), tau});
    } else {
      for (auto& r : cfg.recipes) r.tau = tau;
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    cfg.jobs = j.value("jobs", 1);
    if (j.value("downmix", false)) cfg.channels = ChannelMode::Downmix;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid experiment config: ") + e.what());
  }
  if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

struct ResultRow {
  std::string file;
  double threshold = 0.0;
  WeightKind recipe = WeightKind::None;
  double sdr_clipped_db = 0.0;
  double sdr_restored_db = 0.0;
  double delta_sdr_db = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  std::string error;  // empty on success
};

struct SummaryRow {
  double threshold = 0.0;
  WeightKind recipe = WeightKind::None;
  std::size_t count = 0;
  double mean_sdr_clipped_db = 0.0;
  double mean_sdr_restored_db = 0.0;
  double mean_delta_sdr_db = 0.0;
};

/// Result of one clip-and-restore cell on an already loaded clean signal.
inline ResultRow run_cell(const Signal& clean, double threshold, const WeightRecipe& recipe,
                          const FrameProfile& profile, const SolverConfig& solver) {
  ResultRow row;
  row.threshold = threshold;
  row.recipe = recipe.kind;
  const auto start = std::chrono::steady_clock::now();
  const Signal normalized = peak_normalize(clean);
  const ClippedSignal clipped = hard_clip(normalized, threshold);
  const GaborFrame frame = profile.make(normalized.size());
  const SolveResult result = declip(clipped.signal, clipped.mask, frame, recipe, solver);
  if (!check_consistency(result.restored.view(), clipped.signal.view(), clipped.mask).ok())
    throw Error("restored signal failed the consistency check");
  const SdrReport report = delta_sdr(normalized, clipped.signal, result.restored);
  row.sdr_clipped_db = report.sdr_clipped_db;
  row.sdr_restored_db = report.sdr_restored_db;
  row.delta_sdr_db = report.delta_sdr_db;
  row.iterations = result.iterations_run;
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Runs the full grid. Rows come back in (file, threshold, recipe) config
/// order; failures are captured in ResultRow::error.
inline std::vector<ResultRow> run_experiment_grid(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t per_file = cfg.thresholds.size() * cfg.recipes.size();
  std::vector<ResultRow> rows(cfg.inputs.size() * per_file);

  std::vector<std::optional<Signal>> signals(cfg.inputs.size());
  std::vector<std::string> load_errors(cfg.inputs.size());
  for (std::size_t f = 0; f < cfg.inputs.size(); ++f) {
    std::filesystem::path p = cfg.inputs[f];
    if (p.is_relative() && !cfg.base_dir.empty()) p = cfg.base_dir / p;
    try {
      signals[f] = read_wav(p, cfg.channels);
    } catch (const std::exception& e) {
      load_errors[f] = e.what();
    }
  }

  auto work = [&](std::size_t index) {
    const std::size_t f = index / per_file;
    const std::size_t rem = index % per_file;
    const double theta = cfg.thresholds[rem / cfg.recipes.size()];
    const WeightRecipe& recipe = cfg.recipes[rem % cfg.recipes.size()];
    ResultRow row;
    try {
      if (!signals[f]) throw Error(load_errors[f]);
      row = run_cell(*signals[f], theta, recipe, cfg.profile, cfg.solver);
    } catch (const std::exception& e) {
      row = ResultRow{};
      row.error = e.what();
    }
    row.file = cfg.inputs[f];
    row.threshold = theta;
    row.recipe = recipe.kind;
    rows[index] = std::move(row);
  };

  const int env_jobs = [] {
    const char* v = std::getenv("DECLIP_JOBS");
    return v ? std::atoi(v) : 0;
  }();
  const std::size_t jobs = static_cast<std::size_t>(env_jobs > 0 ? env_jobs : cfg.jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) work(i);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < std::min(jobs, rows.size()); ++j) pool.emplace_back(worker);
  }
  return rows;
}

/// Means per (threshold, recipe) over the rows without errors, in config order.
inline std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  for (double theta : cfg.thresholds) {
    for (const WeightRecipe& recipe : cfg.recipes) {
      SummaryRow s;
      s.threshold = theta;
      s.recipe = recipe.kind;
      for (const ResultRow& r : rows) {
        if (!r.error.empty() || r.threshold != theta || r.recipe != recipe.kind) continue;
        ++s.count;
        s.mean_sdr_clipped_db += r.sdr_clipped_db;
        s.mean_sdr_restored_db += r.sdr_restored_db;
        s.mean_delta_sdr_db += r.delta_sdr_db;
      }
      if (s.count > 0) {
        const double n = static_cast<double>(s.count);
        s.mean_sdr_clipped_db /= n;
        s.mean_sdr_restored_db /= n;
        s.mean_delta_sdr_db /= n;
      }
      out.push_back(s);
    }
  }
  return out;
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kResultsSchema << "\n";
  out << "file,theta_c,recipe,sdr_clipped_db,sdr_restored_db,delta_sdr_db,iterations,error\n";
  for (const ResultRow& r : rows) {
    out << csv_field(r.file) << ',' << format_number(r.threshold) << ',' << to_string(r.recipe) << ',';
    if (r.error.empty()) {
      out << format_number(r.sdr_clipped_db) << ',' << format_number(r.sdr_restored_db) << ','
          << format_number(r.delta_sdr_db) << ',' << r.iterations << ",\n";
    } else {
      out << ",,,," << csv_field(r.error) << '\n';
    }
  }
  return out.str();
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << kSummarySchema << "\n";
  out << "theta_c,recipe,count,mean_sdr_clipped_db,mean_sdr_restored_db,mean_delta_sdr_db\n";
  for (const SummaryRow& s : rows) {
    out << format_number(s.threshold) << ',' << to_string(s.recipe) << ',' << s.count << ',';
    if (s.count == 0) {
      out << ",,\n";
    } else {
      out << format_number(s.mean_sdr_clipped_db) << ',' << format_number(s.mean_sdr_restored_db) << ','
          << format_number(s.mean_delta_sdr_db) << '\n';
    }
  }
  return out.str();
}

/// Wall-clock times live in their own file so results.csv stays reproducible.
inline std::string timings_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "file,theta_c,recipe,wall_time_s\n";
  for (const ResultRow& r : rows) {
    char t[32];
    std::snprintf(t, sizeof t, "%.3f", r.wall_time_s);
    out << csv_field(r.file) << ',' << format_number(r.threshold) << ',' << to_string(r.recipe) << ',' << t << '\n';
  }
  return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
};

/// Runs the grid and writes results.csv, summary.csv and timings.csv into
/// cfg.output_dir.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  out.rows = run_experiment_grid(cfg);
  out.summary = summarize(cfg, out.rows);
  std::filesystem::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "results.csv", results_csv(out.rows));
  write_text(cfg.output_dir / "summary.csv", summary_csv(out.summary));
  write_text(cfg.output_dir / "timings.csv", timings_csv(out.rows));
  return out;
}

}  // namespace declip
