#include "annealil/harness/run.hpp"

#include "annealil/harness/metrics.hpp"
#include "annealil/imitation/trainer.hpp"
#include "annealil/neural/checkpoint.hpp"
#include "annealil/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

namespace annealil::harness {

namespace fs = std::filesystem;

namespace {

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

MetricsRow blank_row(const std::string& phase, long iteration, long env_steps) {
  MetricsRow r;
  r.phase = phase;
  r.iteration = iteration;
  r.env_steps = env_steps;
  r.alpha = r.bc_loss = r.val_loss = r.pg_loss = r.value_loss = r.entropy = r.disc_loss = nan();
  r.surrogate_reward = r.train_return = r.eval_return = r.eval_std = nan();
  return r;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Supervised cloning on the 70/30 split; logs one row per epoch.
imitation::Net clone_policy(const TrainConfig& config, const Dataset& data, std::uint64_t seed,
                            MetricsWriter& metrics, Environment& eval_env) {
  auto [train, val] = split_bc(data, 0.7, derive_seed(seed, 0xB5));
  imitation::Net policy =
      imitation::make_policy_net(data.obs_dim, data.action_spec, config.hidden, derive_seed(seed, 1));
  imitation::BcConfig bc{config.bc_batch_size, config.bc_max_epochs, config.bc_patience, config.bc_lr,
                         derive_seed(seed, 0xBC)};
  imitation::train_bc(policy, train, val, bc, [&](const imitation::BcEpoch& e, const imitation::Net& net) {
    MetricsRow row = blank_row("bc", e.epoch, 0);
    row.alpha = 1.0;
    row.bc_loss = e.train_loss;
    row.val_loss = e.val_loss;
    if (e.epoch % config.eval_every == 0) {
      const MeanStd ms = mean_std(evaluate_returns(net, eval_env, config.eval_episodes, seed, false));
      row.eval_return = ms.mean;
      row.eval_std = ms.std;
    }
    metrics.write(row);
  });
  return policy;
}

}  // namespace

SeedOutcome run_seed(const TrainConfig& config, const Dataset* dataset, std::uint64_t seed, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path metrics_path = dir / "metrics.csv";
  fs::remove(metrics_path);
  MetricsWriter metrics(metrics_path);
  auto eval_env = make_env(config.env);

  SeedOutcome outcome;
  outcome.seed = seed;
  long env_steps = 0;

  auto evaluate_into = [&](MetricsRow& row, const imitation::Net& net) {
    const MeanStd ms = mean_std(evaluate_returns(net, *eval_env, config.eval_episodes, seed, false));
    row.eval_return = ms.mean;
    row.eval_std = ms.std;
  };

  std::optional<imitation::Net> final_policy;
  if (config.algorithm == Algorithm::bc) {
    final_policy = clone_policy(config, *dataset, seed, metrics, *eval_env);
  } else {
    std::optional<imitation::Net> pretrained;
    if (config.algorithm == Algorithm::bc_pretrain_gail) {
      pretrained = clone_policy(config, *dataset, seed, metrics, *eval_env);
      MetricsRow row = blank_row("post_bc", 0, 0);
      evaluate_into(row, *pretrained);
      outcome.post_bc_return = row.eval_return;
      metrics.write(row);
    }

    imitation::Trainer trainer(trainer_config(config, seed), dataset);
    long iterations = config.num_iterations();
    if (pretrained) {
      trainer.policy().params() = pretrained->params();
      const long pre = std::min<long>(config.disc_pretrain_iterations, iterations - 1);
      for (long i = 0; i < pre; ++i) {
        metrics.write(MetricsRow::from_iteration("disc_pretrain", trainer.discriminator_iteration(i)));
      }
      iterations -= pre;
    }
    for (long t = 0; t < iterations; ++t) {
      MetricsRow row = MetricsRow::from_iteration("train", trainer.train_iteration(t));
      if ((t + 1) % config.eval_every == 0 || t + 1 == iterations) evaluate_into(row, trainer.policy());
      metrics.write(row);
    }
    env_steps = trainer.env_steps();
    final_policy = trainer.policy();
  }

  neural::save_checkpoint(*final_policy, dir / "policy.ckpt");
  outcome.final_eval.seed = seed;
  outcome.final_eval.env_steps = env_steps;
  outcome.final_eval.returns = evaluate_returns(*final_policy, *eval_env, config.eval_episodes, seed, true);
  const MeanStd ms = mean_std(outcome.final_eval.returns);
  outcome.final_eval.mean = ms.mean;
  outcome.final_eval.std = ms.std;
  write_json(dir / "eval.json", to_json(outcome.final_eval));
  return outcome;
}

fs::path run(const TrainConfig& config) {
  validate(config);
  std::optional<Dataset> dataset;
  if (config.needs_dataset()) {
    dataset = load_dataset(config.dataset);
    if (dataset->env_id != config.env.id()) {
      throw ConfigError("dataset is for " + dataset->env_id + ", config wants " + config.env.id());
    }
    if (dataset->trajectories.empty()) throw ConfigError("dataset has no trajectories");
    if (config.algorithm == Algorithm::bc || config.algorithm == Algorithm::bc_pretrain_gail) {
      if (dataset->trajectories.size() < 2) throw ConfigError("behavior cloning needs at least two trajectories");
    }
  }

  const fs::path out = resolve_out(config.out);
  fs::create_directories(out);
  write_json(out / "config.json", to_json(config));

  std::vector<SeedEval> evals;
  for (std::uint64_t seed : config.seeds) {
    const SeedOutcome o =
        run_seed(config, dataset ? &*dataset : nullptr, seed, out / ("seed_" + std::to_string(seed)));
    std::clog << config.display_label() << " seed " << seed << ": final return " << format_number(o.final_eval.mean)
              << " +/- " << format_number(o.final_eval.std) << '\n';
    evals.push_back(o.final_eval);
  }
  write_json(out / "eval_report.json", to_json(make_report(std::move(evals))));
  return out;
}

int expert_trajectories_for(int grid_size) {
  switch (grid_size) {
    case 8: return 200;
    case 10: return 350;
    case 12: return 500;
    default: throw std::invalid_argument("no expert trajectory count for grid size " + std::to_string(grid_size));
  }
}

Dataset collect_expert(const EnvSpec& env_spec, int n_trajectories, std::uint64_t seed) {
  auto env = make_env(env_spec);
  if (env_spec.kind == EnvKind::keydoor) {
    AStarExpert expert;
    return collect(*env, expert, n_trajectories, seed);
  }
  PointExpert expert;
  return collect(*env, expert, n_trajectories, seed);
}

std::vector<TrainConfig> bundle_configs(const std::string& bundle, const BundleOptions& options,
                                        const std::string& dataset_path) {
  EnvSpec env;
  std::vector<std::pair<Algorithm, double>> runs;
  if (bundle == "gridworld") {
    env = {EnvKind::keydoor, options.grid_size};
    runs = {{Algorithm::bc, 0.0},
            {Algorithm::gail, 0.0},
            {Algorithm::bcgail_annealed, 0.0},
            {Algorithm::bc_pretrain_gail, 0.0},
            {Algorithm::reinforce, 0.0}};
  } else if (bundle == "annealing-sweep") {
    env = {EnvKind::point, 0};
    runs = {{Algorithm::bcgail_fixed, 0.25},
            {Algorithm::bcgail_fixed, 0.5},
            {Algorithm::bcgail_fixed, 0.75},
            {Algorithm::bcgail_annealed, 0.0}};
  } else if (bundle == "random-reward") {
    env = {EnvKind::point, 0};
    runs = {{Algorithm::random_reward_ablation, 0.0}, {Algorithm::bc, 0.0}, {Algorithm::gail, 0.0}};
  } else {
    throw ConfigError("unknown bundle '" + bundle + "' (expected gridworld, annealing-sweep or random-reward)");
  }

  std::vector<TrainConfig> configs;
  for (const auto& [algorithm, alpha] : runs) {
    TrainConfig c = default_config(env);
    c.algorithm = algorithm;
    c.alpha = alpha;
    if (options.overrides) c = apply_json(c, *options.overrides);
    c.algorithm = algorithm;
    c.alpha = algorithm == Algorithm::bcgail_fixed ? alpha : c.alpha;
    c.label.clear();
    c.dataset = dataset_path;
    c.seeds.clear();
    for (int i = 0; i < options.num_seeds; ++i) c.seeds.push_back(options.base_seed + static_cast<std::uint64_t>(i));
    c.out = (options.out_root / c.display_label()).string();
    if (!options.labels.empty() &&
        std::find(options.labels.begin(), options.labels.end(), c.display_label()) == options.labels.end()) {
      continue;
    }
    configs.push_back(std::move(c));
  }
  return configs;
}

std::string prepare_bundle_dataset(const std::string& bundle, const BundleOptions& options) {
  // Validate the bundle name before collecting any data.
  bundle_configs(bundle, options, "");
  if (!options.dataset.empty()) return options.dataset;

  fs::create_directories(options.out_root);
  EnvSpec env = bundle == "gridworld" ? EnvSpec{EnvKind::keydoor, options.grid_size} : EnvSpec{EnvKind::point, 0};
  int n = 0;
  if (bundle == "gridworld") n = expert_trajectories_for(options.grid_size);
  else if (bundle == "annealing-sweep") n = 1;
  else n = 5;
  const Dataset data = collect_expert(env, n, derive_seed(options.base_seed, 0xDA7A));
  const fs::path path = options.out_root / "expert.jsonl";
  save_dataset(data, path);
  return path.string();
}

std::vector<fs::path> reproduce(const std::string& bundle, const BundleOptions& options) {
  const std::string dataset_path = prepare_bundle_dataset(bundle, options);
  std::vector<fs::path> dirs;
  for (const TrainConfig& c : bundle_configs(bundle, options, dataset_path)) dirs.push_back(run(c));
  return dirs;
}

}  // namespace annealil::harness
