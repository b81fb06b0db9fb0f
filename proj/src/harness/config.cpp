#include "annealil/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace annealil::harness {

namespace {

using nlohmann::json;

constexpr std::pair<Algorithm, const char*> kAlgorithms[] = {
    {Algorithm::bc, "bc"},
    {Algorithm::gail, "gail"},
    {Algorithm::bcgail_annealed, "bcgail_annealed"},
    {Algorithm::bcgail_fixed, "bcgail_fixed"},
    {Algorithm::bc_pretrain_gail, "bc_pretrain_gail"},
    {Algorithm::random_reward_ablation, "random_reward_ablation"},
    {Algorithm::reinforce, "reinforce"},
};

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) field = it->get<T>();
}

}  // namespace

const char* algorithm_name(Algorithm a) {
  for (const auto& [alg, name] : kAlgorithms)
    if (alg == a) return name;
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& [alg, n] : kAlgorithms)
    if (name == n) return alg;
  throw ConfigError("unknown algorithm '" + name + "'");
}

long TrainConfig::num_iterations() const { return std::max(1L, total_env_steps / std::max(1, rollout_size())); }

std::string TrainConfig::display_label() const {
  if (!label.empty()) return label;
  if (algorithm == Algorithm::bcgail_fixed) {
    std::ostringstream s;
    s << "bcgail_fixed_" << alpha;
    return s.str();
  }
  return algorithm_name(algorithm);
}

TrainConfig default_config(const EnvSpec& env) {
  TrainConfig c;
  c.env = env;
  if (env.kind == EnvKind::point) {
    c.disc_mode = {imitation::DiscVariant::gan, 0.01};
    c.num_envs = 8;
    c.steps_per_env = 256;
    c.entropy_coef = 0.0;
    // weaker settings never separate expert from policy within the budget
    c.disc_lr = 1e-3;
    c.disc_steps = 5;
    c.total_env_steps = 400'000;
    c.threshold = -30.0;
  } else {
    c.disc_mode = {imitation::DiscVariant::wgan, 0.01};
    c.num_envs = 8;
    c.steps_per_env = 128;
    c.entropy_coef = 0.01;
    c.disc_lr = 3e-4;
    c.disc_steps = 1;
    c.total_env_steps = 2'000'000;
    c.threshold = 0.9;
  }
  return c;
}

json to_json(const TrainConfig& c) {
  return json{
      {"env", c.env.id()},
      {"algorithm", algorithm_name(c.algorithm)},
      {"label", c.label},
      {"alpha", c.alpha},
      {"half_life", c.half_life},
      {"disc_mode", c.disc_mode.variant == imitation::DiscVariant::gan ? "gan" : "wgan"},
      {"wgan_clip", c.disc_mode.clip},
      {"gamma", c.gamma},
      {"gae_lambda", c.gae_lambda},
      {"lr", c.lr},
      {"disc_lr", c.disc_lr},
      {"num_envs", c.num_envs},
      {"steps_per_env", c.steps_per_env},
      {"disc_steps", c.disc_steps},
      {"disc_batch", c.disc_batch},
      {"entropy_coef", c.entropy_coef},
      {"value_coef", c.value_coef},
      {"max_grad_norm", c.max_grad_norm},
      {"ppo_clip", c.ppo_clip},
      {"epochs", c.epochs},
      {"minibatches", c.minibatches},
      {"hidden", c.hidden},
      {"total_env_steps", c.total_env_steps},
      {"eval_every", c.eval_every},
      {"eval_episodes", c.eval_episodes},
      {"bc_batch_size", c.bc_batch_size},
      {"bc_max_epochs", c.bc_max_epochs},
      {"bc_patience", c.bc_patience},
      {"bc_lr", c.bc_lr},
      {"disc_pretrain_iterations", c.disc_pretrain_iterations},
      {"threshold", c.threshold},
      {"seeds", c.seeds},
      {"dataset", c.dataset},
      {"out", c.out},
  };
}

TrainConfig apply_json(TrainConfig c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (j.contains("env")) {
      const EnvSpec env = parse_env_id(j.at("env").get<std::string>());
      // Switching environments resets the environment-dependent defaults.
      if (!(env.id() == c.env.id())) {
        const TrainConfig d = default_config(env);
        c.env = env;
        c.disc_mode = d.disc_mode;
        c.num_envs = d.num_envs;
        c.steps_per_env = d.steps_per_env;
        c.entropy_coef = d.entropy_coef;
        c.disc_lr = d.disc_lr;
        c.disc_steps = d.disc_steps;
        c.total_env_steps = d.total_env_steps;
        c.threshold = d.threshold;
      }
    }
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("disc_mode")) {
      const auto mode = j.at("disc_mode").get<std::string>();
      if (mode != "gan" && mode != "wgan") throw ConfigError("disc_mode must be gan or wgan");
      c.disc_mode.variant = mode == "gan" ? imitation::DiscVariant::gan : imitation::DiscVariant::wgan;
    }
    read(j, "wgan_clip", c.disc_mode.clip);
    read(j, "label", c.label);
    read(j, "alpha", c.alpha);
    read(j, "half_life", c.half_life);
    read(j, "gamma", c.gamma);
    read(j, "gae_lambda", c.gae_lambda);
    read(j, "lr", c.lr);
    read(j, "disc_lr", c.disc_lr);
    read(j, "num_envs", c.num_envs);
    read(j, "steps_per_env", c.steps_per_env);
    read(j, "disc_steps", c.disc_steps);
    read(j, "disc_batch", c.disc_batch);
    read(j, "entropy_coef", c.entropy_coef);
    read(j, "value_coef", c.value_coef);
    read(j, "max_grad_norm", c.max_grad_norm);
    read(j, "ppo_clip", c.ppo_clip);
    read(j, "epochs", c.epochs);
    read(j, "minibatches", c.minibatches);
    read(j, "hidden", c.hidden);
    read(j, "total_env_steps", c.total_env_steps);
    read(j, "eval_every", c.eval_every);
    read(j, "eval_episodes", c.eval_episodes);
    read(j, "bc_batch_size", c.bc_batch_size);
    read(j, "bc_max_epochs", c.bc_max_epochs);
    read(j, "bc_patience", c.bc_patience);
    read(j, "bc_lr", c.bc_lr);
    read(j, "disc_pretrain_iterations", c.disc_pretrain_iterations);
    read(j, "threshold", c.threshold);
    read(j, "seeds", c.seeds);
    read(j, "dataset", c.dataset);
    read(j, "out", c.out);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  TrainConfig base;
  if (j.contains("env")) {
    try {
      base = default_config(parse_env_id(j.at("env").get<std::string>()));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else {
    base = default_config(EnvSpec{});
  }
  return apply_json(base, j);
}

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.seeds.empty()) fail("seeds must be nonempty");
  if (c.total_env_steps <= 0) fail("total_env_steps must be positive");
  if (c.num_envs < 1 || c.steps_per_env < 1) fail("rollout size must be positive");
  if (c.epochs < 1 || c.minibatches < 1 || c.minibatches > c.rollout_size()) fail("bad epochs/minibatches");
  if (c.half_life < 1) fail("half_life must be >= 1");
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) fail("alpha must be in [0, 1]");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) fail("gae_lambda must be in [0, 1]");
  if (c.disc_mode.variant == imitation::DiscVariant::wgan && !(c.disc_mode.clip > 0.0)) fail("wgan_clip must be > 0");
  if (c.eval_every < 1 || c.eval_episodes < 1) fail("evaluation settings must be positive");
  if (c.hidden.empty()) fail("hidden must list at least one layer");
  if (c.needs_dataset()) {
    if (c.dataset.empty()) fail(std::string("algorithm ") + algorithm_name(c.algorithm) + " needs a dataset path");
    if (!std::filesystem::exists(c.dataset)) fail("dataset not found: " + c.dataset);
  }
}

imitation::TrainerConfig trainer_config(const TrainConfig& c, std::uint64_t seed) {
  imitation::TrainerConfig t;
  t.env = c.env;
  t.hidden = c.hidden;
  t.num_envs = c.num_envs;
  t.steps_per_env = c.steps_per_env;
  t.disc_mode = c.disc_mode;
  t.disc_steps = c.disc_steps;
  t.disc_batch = c.disc_batch;
  t.disc_lr = c.disc_lr;
  t.gamma = c.gamma;
  t.gae_lambda = c.gae_lambda;
  t.lr = c.lr;
  t.entropy_coef = c.entropy_coef;
  t.value_coef = c.value_coef;
  t.max_grad_norm = c.max_grad_norm;
  t.ppo_clip = c.ppo_clip;
  t.epochs = c.epochs;
  t.minibatches = c.minibatches;
  t.seed = seed;

  using imitation::AnnealSchedule;
  switch (c.algorithm) {
    case Algorithm::bcgail_annealed: t.schedule = AnnealSchedule::annealed(c.half_life); break;
    case Algorithm::bcgail_fixed: t.schedule = AnnealSchedule::fixed(c.alpha); break;
    case Algorithm::random_reward_ablation:
      t.schedule = AnnealSchedule::fixed(0.5);
      t.disc_frozen = true;
      break;
    case Algorithm::reinforce:
      t.schedule = AnnealSchedule::fixed(0.0);
      t.reward_source = imitation::RewardSource::environment;
      t.gae_lambda = 1.0;
      break;
    case Algorithm::bc: t.schedule = AnnealSchedule::fixed(1.0); break;
    case Algorithm::gail:
    case Algorithm::bc_pretrain_gail: t.schedule = AnnealSchedule::fixed(0.0); break;
  }
  return t;
}

std::filesystem::path resolve_out(const std::string& out) {
  std::filesystem::path p = out.empty() ? std::filesystem::path("runs") : std::filesystem::path(out);
  if (p.is_relative()) {
    if (const char* root = std::getenv("ANNEALIL_OUT_ROOT"); root != nullptr && *root != '\0') {
      return std::filesystem::absolute(std::filesystem::path(root) / p);
    }
  }
  return p;
}

}  // namespace annealil::harness
