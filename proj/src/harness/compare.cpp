#include "annealil/harness/compare.hpp"

#include "annealil/harness/config.hpp"
#include "annealil/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace annealil::harness {

namespace fs = std::filesystem;

const MethodResult& Comparison::at(const std::string& label) const {
  for (const auto& m : methods)
    if (m.label == label) return m;
  throw std::out_of_range("no method labelled " + label);
}

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

std::optional<long> steps_to_threshold(const std::vector<CurvePoint>& curve, double threshold) {
  for (const auto& p : curve)
    if (p.smoothed >= threshold) return p.env_steps;
  return std::nullopt;
}

MethodResult summarize_run(const fs::path& run_dir, double threshold, int window) {
  std::ifstream cfg_in(run_dir / "config.json");
  if (!cfg_in) throw std::runtime_error("not a run directory (no config.json): " + run_dir.string());
  const TrainConfig config = apply_json(TrainConfig{}, nlohmann::json::parse(cfg_in));

  MethodResult m;
  m.label = config.display_label();
  m.env_id = config.env.id();
  m.dir = run_dir;

  std::ifstream report_in(run_dir / "eval_report.json");
  if (!report_in) throw std::runtime_error("run has no eval_report.json (incomplete?): " + run_dir.string());
  m.final_report = report_from_json(nlohmann::json::parse(report_in));

  // Evaluation rows per seed, aligned by position.
  std::vector<std::vector<MetricsRow>> per_seed;
  for (std::uint64_t seed : config.seeds) {
    std::vector<MetricsRow> evals;
    for (const auto& row : read_metrics(run_dir / ("seed_" + std::to_string(seed)) / "metrics.csv")) {
      if (!std::isnan(row.eval_return)) evals.push_back(row);
    }
    per_seed.push_back(std::move(evals));
  }
  std::size_t points = per_seed.empty() ? 0 : per_seed.front().size();
  for (const auto& s : per_seed) points = std::min(points, s.size());

  std::vector<double> means;
  for (std::size_t k = 0; k < points; ++k) {
    std::vector<double> values;
    long steps = 0;
    for (const auto& s : per_seed) {
      values.push_back(s[k].eval_return);
      steps = std::max(steps, s[k].env_steps);
    }
    const MeanStd ms = mean_std(values);
    m.curve.push_back({steps, ms.mean, ms.std, 0.0});
    means.push_back(ms.mean);
  }
  const auto smooth = moving_average(means, window);
  for (std::size_t k = 0; k < points; ++k) m.curve[k].smoothed = smooth[k];
  m.steps_to_threshold = steps_to_threshold(m.curve, threshold);
  return m;
}

Comparison compare(const std::vector<fs::path>& run_dirs, std::optional<double> threshold, int window) {
  if (run_dirs.empty()) throw std::invalid_argument("compare: need at least one run directory");
  Comparison c;
  c.window = window;
  if (threshold) {
    c.threshold = *threshold;
  } else {
    std::ifstream in(run_dirs.front() / "config.json");
    if (!in) throw std::runtime_error("not a run directory (no config.json): " + run_dirs.front().string());
    c.threshold = apply_json(TrainConfig{}, nlohmann::json::parse(in)).threshold;
  }
  for (const auto& dir : run_dirs) {
    MethodResult m = summarize_run(dir, c.threshold, window);
    if (!c.methods.empty() && m.env_id != c.methods.front().env_id) {
      throw std::invalid_argument("compare: runs use different environments (" + c.methods.front().env_id + " vs " +
                                  m.env_id + ")");
    }
    c.methods.push_back(std::move(m));
  }
  return c;
}

void write_comparison(const Comparison& c, const fs::path& out_dir) {
  fs::create_directories(out_dir / "curves");
  std::ofstream table(out_dir / "comparison.csv");
  table << "method,env,final_mean,final_std,episodes,steps_to_threshold,threshold,smoothing_window\n";
  for (const auto& m : c.methods) {
    table << m.label << ',' << m.env_id << ',' << format_number(m.final_report.pooled_mean) << ','
          << format_number(m.final_report.pooled_std) << ',' << m.final_report.num_episodes << ','
          << (m.steps_to_threshold ? std::to_string(*m.steps_to_threshold) : std::string("not reached")) << ','
          << format_number(c.threshold) << ',' << c.window << '\n';

    std::ofstream curve(out_dir / "curves" / (m.label + ".csv"));
    curve << "env_steps,mean_return,std_return,smoothed_return\n";
    for (const auto& p : m.curve) {
      curve << p.env_steps << ',' << format_number(p.mean) << ',' << format_number(p.std) << ','
            << format_number(p.smoothed) << '\n';
    }
  }
}

std::string format_table(const Comparison& c) {
  // full precision lives in the csv; the table only needs to be readable
  const auto brief = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  std::ostringstream s;
  s << std::left << std::setw(26) << "method" << std::setw(24) << "final return" << "steps to "
    << format_number(c.threshold) << " (window " << c.window << ")\n";
  for (const auto& m : c.methods) {
    const std::string perf =
        brief(m.final_report.pooled_mean) + " +/- " + brief(m.final_report.pooled_std);
    s << std::setw(26) << m.label << std::setw(24) << perf << ' '
      << (m.steps_to_threshold ? std::to_string(*m.steps_to_threshold) : std::string("not reached")) << '\n';
  }
  return s.str();
}

}  // namespace annealil::harness
