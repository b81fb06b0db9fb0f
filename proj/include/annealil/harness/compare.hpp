#pragma once

#include "annealil/harness/evaluate.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace annealil::harness {

struct CurvePoint {
  long env_steps = 0;
  double mean = 0.0;      ///< mean over seeds of the evaluation return
  double std = 0.0;       ///< population std over seeds
  double smoothed = 0.0;  ///< trailing moving average of `mean`
};

struct MethodResult {
  std::string label;
  std::string env_id;
  std::filesystem::path dir;
  EvalReport final_report;
  std::vector<CurvePoint> curve;
  std::optional<long> steps_to_threshold;
};

struct Comparison {
  double threshold = 0.0;
  int window = 5;
  std::vector<MethodResult> methods;

  const MethodResult& at(const std::string& label) const;
};

/// Trailing moving average; the first points average what is available.
std::vector<double> moving_average(const std::vector<double>& values, int window);

/// First env-step count whose smoothed value reaches `threshold`.
std::optional<long> steps_to_threshold(const std::vector<CurvePoint>& curve, double threshold);

MethodResult summarize_run(const std::filesystem::path& run_dir, double threshold, int window = 5);

/// Threshold defaults to the one stored in the first run's config.
Comparison compare(const std::vector<std::filesystem::path>& run_dirs, std::optional<double> threshold = {},
                   int window = 5);

/// comparison.csv (final table incl. steps-to-threshold) and curves/<label>.csv.
void write_comparison(const Comparison& comparison, const std::filesystem::path& out_dir);

/// Human-readable table for the terminal.
std::string format_table(const Comparison& comparison);

}  // namespace annealil::harness
