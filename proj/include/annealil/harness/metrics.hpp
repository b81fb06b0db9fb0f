#pragma once

#include "annealil/imitation/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace annealil::harness {

/// One line of a run's metrics file. Absent values are NaN and written as
/// "nan". `phase` is one of "bc", "post_bc", "disc_pretrain", "train".
struct MetricsRow {
  std::string phase;
  long iteration = 0;
  long env_steps = 0;
  double alpha = 0.0;
  double bc_loss = 0.0;
  double val_loss = 0.0;
  double pg_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double disc_loss = 0.0;
  double surrogate_reward = 0.0;
  double train_return = 0.0;
  int episodes = 0;
  double eval_return = 0.0;
  double eval_std = 0.0;

  static MetricsRow from_iteration(const std::string& phase, const imitation::IterationMetrics& m);
};

/// Column order of metrics.csv.
const std::vector<std::string>& metrics_columns();

/// Append-only CSV writer; every row is flushed as soon as it is written.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
};

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

/// Fixed-precision number formatting shared by every text output.
std::string format_number(double v);

}  // namespace annealil::harness
