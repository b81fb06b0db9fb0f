#include "annealil/harness/cli.hpp"

#include "annealil/harness/compare.hpp"
#include "annealil/harness/config.hpp"
#include "annealil/harness/evaluate.hpp"
#include "annealil/harness/metrics.hpp"
#include "annealil/harness/run.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

namespace annealil::harness {

namespace fs = std::filesystem;

namespace {

// --env accepts "keydoor", "keydoor-<n>" or "point"; --size picks the grid.
EnvSpec resolve_env(const std::string& name, std::optional<int> size) {
  if (name == "point") return {EnvKind::point, 0};
  if (name == "keydoor") return parse_env_id("keydoor-" + std::to_string(size.value_or(8)));
  EnvSpec env = parse_env_id(name);
  if (size && env.kind == EnvKind::keydoor && *size != env.grid_size) {
    throw ConfigError("--env " + name + " conflicts with --size " + std::to_string(*size));
  }
  return env;
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// key=value with value parsed as JSON when possible, else taken as a string.
void apply_set(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  try {
    j[key] = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    j[key] = value;
  }
}

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string dataset;
};

void add_seed(CLI::App* app, CommonFlags& f, const std::string& help) { app->add_option("--seed", f.seed, help); }
void add_out(CLI::App* app, CommonFlags& f, const std::string& help) { app->add_option("--out", f.out, help); }
void add_dataset(CLI::App* app, CommonFlags& f, const std::string& help) {
  app->add_option("--dataset", f.dataset, help);
}

}  // namespace

int cli(int argc, char** argv) {
  CLI::App app{"Annealed BC+GAIL imitation learning experiments"};
  app.name("annealil");
  app.require_subcommand(1);

  // collect-expert
  CommonFlags collect_flags;
  std::string collect_env = "keydoor";
  std::optional<int> collect_size;
  std::optional<int> collect_n;
  auto* collect_cmd = app.add_subcommand("collect-expert", "Roll out the scripted expert and save a dataset");
  collect_cmd->add_option("--env", collect_env, "keydoor, keydoor-<n> or point")->capture_default_str();
  collect_cmd->add_option("--size", collect_size, "gridworld size (8, 10 or 12)");
  collect_cmd->add_option("-n,--trajectories", collect_n, "number of trajectories (default by environment)");
  add_seed(collect_cmd, collect_flags, "seed of the first episode (default 0)");
  add_out(collect_cmd, collect_flags, "output dataset path (same as --dataset)");
  add_dataset(collect_cmd, collect_flags, "output dataset path (default expert.jsonl)");

  // train
  CommonFlags train_flags;
  std::string train_config_path, train_algorithm, train_env;
  std::optional<double> train_alpha;
  std::optional<int> train_half_life, train_size, train_num_seeds;
  std::optional<long> train_budget;
  std::vector<std::string> train_sets;
  auto* train_cmd = app.add_subcommand("train", "Train one algorithm over one or more seeds");
  train_cmd->add_option("--config", train_config_path, "JSON config file");
  train_cmd->add_option("--algorithm", train_algorithm,
                        "bc, gail, bcgail_annealed, bcgail_fixed, bc_pretrain_gail, random_reward_ablation, reinforce");
  train_cmd->add_option("--alpha", train_alpha, "fixed alpha for bcgail_fixed");
  train_cmd->add_option("--half-life", train_half_life, "annealing half-life in iterations");
  train_cmd->add_option("--env", train_env, "keydoor, keydoor-<n> or point");
  train_cmd->add_option("--size", train_size, "gridworld size (8, 10 or 12)");
  train_cmd->add_option("--budget", train_budget, "total env steps per seed");
  train_cmd->add_option("--seeds", train_num_seeds, "number of consecutive seeds starting at --seed");
  train_cmd->add_option("--set", train_sets, "override any config key: key=value (repeatable)");
  add_seed(train_cmd, train_flags, "run only this seed (or the first of --seeds)");
  add_out(train_cmd, train_flags, "run directory");
  add_dataset(train_cmd, train_flags, "expert dataset path");

  // evaluate
  CommonFlags eval_flags;
  std::string eval_checkpoint, eval_env = "keydoor";
  std::optional<int> eval_size;
  int eval_episodes = 20;
  auto* eval_cmd = app.add_subcommand("evaluate", "Greedy evaluation of a policy checkpoint");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "policy checkpoint")->required();
  eval_cmd->add_option("--env", eval_env, "keydoor, keydoor-<n> or point")->capture_default_str();
  eval_cmd->add_option("--size", eval_size, "gridworld size (8, 10 or 12)");
  eval_cmd->add_option("--episodes", eval_episodes, "number of episodes")->capture_default_str();
  add_seed(eval_cmd, eval_flags, "evaluation seed (default 0)");
  add_out(eval_cmd, eval_flags, "write the report as JSON to this path");

  // compare
  CommonFlags compare_flags;
  std::vector<std::string> compare_dirs;
  std::optional<double> compare_threshold;
  int compare_window = 5;
  auto* compare_cmd = app.add_subcommand("compare", "Tabulate runs and emit learning curves");
  compare_cmd->add_option("dirs", compare_dirs, "run directories")->required();
  compare_cmd->add_option("--threshold", compare_threshold, "steps-to-threshold target (default from first run)");
  compare_cmd->add_option("--window", compare_window, "moving-average window")->capture_default_str();
  add_out(compare_cmd, compare_flags, "directory for comparison.csv and curves/ (default: print only)");

  // reproduce
  CommonFlags repro_flags;
  std::string repro_bundle, repro_config_path;
  int repro_size = 8, repro_num_seeds = 3;
  std::vector<std::string> repro_only, repro_sets;
  auto* repro_cmd = app.add_subcommand("reproduce", "Run a named experiment bundle and compare its runs");
  repro_cmd->add_option("bundle", repro_bundle, "gridworld, annealing-sweep or random-reward")->required();
  repro_cmd->add_option("--size", repro_size, "gridworld size (8, 10 or 12)")->capture_default_str();
  repro_cmd->add_option("--seeds", repro_num_seeds, "seeds per run")->capture_default_str();
  repro_cmd->add_option("--only", repro_only, "run only these labels");
  repro_cmd->add_option("--config", repro_config_path, "JSON overrides applied to every run");
  repro_cmd->add_option("--set", repro_sets, "override any config key: key=value (repeatable)");
  add_seed(repro_cmd, repro_flags, "first seed (default 0)");
  add_out(repro_cmd, repro_flags, "bundle output root (default runs/<bundle>)");
  add_dataset(repro_cmd, repro_flags, "reuse this expert dataset instead of collecting one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const auto* sub : app.get_subcommands()) failed = sub;
    std::cerr << failed->help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*collect_cmd) {
      const EnvSpec env = resolve_env(collect_env, collect_size);
      const int n = collect_n.value_or(env.kind == EnvKind::keydoor ? expert_trajectories_for(env.grid_size) : 5);
      if (n < 1) throw ConfigError("--trajectories must be >= 1");
      if (!collect_flags.out.empty() && !collect_flags.dataset.empty() && collect_flags.out != collect_flags.dataset) {
        throw ConfigError("--out and --dataset name different files");
      }
      std::string path = !collect_flags.dataset.empty() ? collect_flags.dataset : collect_flags.out;
      if (path.empty()) path = "expert.jsonl";
      const fs::path resolved = resolve_out(path);
      if (resolved.has_parent_path()) fs::create_directories(resolved.parent_path());
      const Dataset data = collect_expert(env, n, collect_flags.seed.value_or(0));
      save_dataset(data, resolved);
      const auto returns = episode_returns(data);
      const MeanStd ms = mean_std(returns);
      std::cout << "wrote " << data.trajectories.size() << " trajectories (" << data.num_transitions()
                << " transitions, mean return " << format_number(ms.mean) << ") to " << resolved.string() << '\n';
      return 0;
    }

    if (*train_cmd) {
      nlohmann::json j = train_config_path.empty() ? nlohmann::json::object() : read_json_file(train_config_path);
      if (!train_env.empty() || train_size) {
        std::string name = train_env.empty() ? "keydoor" : train_env;
        j["env"] = resolve_env(name, train_size).id();
      }
      if (!train_algorithm.empty()) j["algorithm"] = train_algorithm;
      if (train_alpha) j["alpha"] = *train_alpha;
      if (train_half_life) j["half_life"] = *train_half_life;
      if (train_budget) j["total_env_steps"] = *train_budget;
      if (!train_flags.dataset.empty()) j["dataset"] = train_flags.dataset;
      if (!train_flags.out.empty()) j["out"] = train_flags.out;
      if (train_flags.seed || train_num_seeds) {
        const std::uint64_t first = train_flags.seed.value_or(0);
        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < train_num_seeds.value_or(1); ++i) seeds.push_back(first + static_cast<std::uint64_t>(i));
        j["seeds"] = seeds;
      }
      for (const auto& s : train_sets) apply_set(j, s);

      TrainConfig base = default_config(j.contains("env") ? parse_env_id(j["env"].get<std::string>()) : EnvSpec{});
      TrainConfig config = apply_json(base, j);
      if (config.out.empty()) config.out = "runs/" + config.env.id() + "/" + config.display_label();
      const fs::path dir = run(config);
      std::cout << "run directory: " << dir.string() << '\n';
      std::cout << format_table(compare({dir}));
      return 0;
    }

    if (*eval_cmd) {
      if (eval_episodes < 1) throw ConfigError("--episodes must be >= 1");
      const EnvSpec env = resolve_env(eval_env, eval_size);
      const SeedEval e = evaluate(eval_checkpoint, env, eval_episodes, eval_flags.seed.value_or(0));
      std::cout << env.id() << ": mean return " << format_number(e.mean) << " +/- " << format_number(e.std) << " over "
                << e.returns.size() << " episodes\n";
      if (!eval_flags.out.empty()) {
        const fs::path path = resolve_out(eval_flags.out);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path);
        out << to_json(make_report({e})).dump(2) << '\n';
      }
      return 0;
    }

    if (*compare_cmd) {
      if (compare_window < 1) throw ConfigError("--window must be >= 1");
      std::vector<fs::path> dirs(compare_dirs.begin(), compare_dirs.end());
      const Comparison c = compare(dirs, compare_threshold, compare_window);
      std::cout << format_table(c);
      if (!compare_flags.out.empty()) write_comparison(c, resolve_out(compare_flags.out));
      return 0;
    }

    if (*repro_cmd) {
      BundleOptions options;
      options.grid_size = repro_size;
      options.base_seed = repro_flags.seed.value_or(0);
      if (repro_num_seeds < 1) throw ConfigError("--seeds must be >= 1");
      options.num_seeds = repro_num_seeds;
      options.out_root = resolve_out(repro_flags.out.empty() ? "runs/" + repro_bundle : repro_flags.out);
      options.dataset = repro_flags.dataset;
      options.labels = repro_only;
      nlohmann::json overrides = repro_config_path.empty() ? nlohmann::json::object() : read_json_file(repro_config_path);
      for (const auto& s : repro_sets) apply_set(overrides, s);
      if (!overrides.empty()) options.overrides = overrides;

      const auto dirs = reproduce(repro_bundle, options);
      if (dirs.empty()) throw ConfigError("no runs selected");
      const Comparison c = compare(dirs);
      write_comparison(c, options.out_root / "comparison");
      std::cout << format_table(c);
      std::cout << "comparison written to " << (options.out_root / "comparison").string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace annealil::harness
