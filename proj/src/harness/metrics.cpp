#include "annealil/harness/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace annealil::harness {

namespace {

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double parse_double(const std::string& s) {
  if (s == "nan") return nan();
  return std::stod(s);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "phase",       "iteration", "env_steps",        "alpha",        "bc_loss",  "val_loss",    "pg_loss",
      "value_loss",  "entropy",   "disc_loss",        "surrogate_reward", "train_return", "episodes", "eval_return",
      "eval_std"};
  return cols;
}

MetricsRow MetricsRow::from_iteration(const std::string& phase, const imitation::IterationMetrics& m) {
  MetricsRow r;
  r.phase = phase;
  r.iteration = m.iteration;
  r.env_steps = m.env_steps;
  r.alpha = m.alpha;
  r.bc_loss = m.bc_loss;
  r.val_loss = nan();
  r.pg_loss = m.pg_loss;
  r.value_loss = m.value_loss;
  r.entropy = m.entropy;
  r.disc_loss = m.disc_loss;
  r.surrogate_reward = m.mean_surrogate_reward;
  r.train_return = m.mean_episode_return;
  r.episodes = m.episodes_completed;
  r.eval_return = nan();
  r.eval_std = nan();
  return r;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open metrics file " + path.string());
  if (std::filesystem::file_size(path) == 0) {
    const auto& cols = metrics_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n' << std::flush;
  }
}

void MetricsWriter::write(const MetricsRow& r) {
  out_ << r.phase << ',' << r.iteration << ',' << r.env_steps << ',' << format_number(r.alpha) << ','
       << format_number(r.bc_loss) << ',' << format_number(r.val_loss) << ',' << format_number(r.pg_loss) << ','
       << format_number(r.value_loss) << ',' << format_number(r.entropy) << ',' << format_number(r.disc_loss) << ','
       << format_number(r.surrogate_reward) << ',' << format_number(r.train_return) << ',' << r.episodes << ','
       << format_number(r.eval_return) << ',' << format_number(r.eval_std) << '\n'
       << std::flush;
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty metrics file " + path.string());

  std::vector<MetricsRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != metrics_columns().size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    MetricsRow r;
    r.phase = f[0];
    r.iteration = std::stol(f[1]);
    r.env_steps = std::stol(f[2]);
    r.alpha = parse_double(f[3]);
    r.bc_loss = parse_double(f[4]);
    r.val_loss = parse_double(f[5]);
    r.pg_loss = parse_double(f[6]);
    r.value_loss = parse_double(f[7]);
    r.entropy = parse_double(f[8]);
    r.disc_loss = parse_double(f[9]);
    r.surrogate_reward = parse_double(f[10]);
    r.train_return = parse_double(f[11]);
    r.episodes = std::stoi(f[12]);
    r.eval_return = parse_double(f[13]);
    r.eval_std = parse_double(f[14]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace annealil::harness
