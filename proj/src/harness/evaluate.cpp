#include "annealil/harness/evaluate.hpp"

#include "annealil/neural/checkpoint.hpp"
#include "annealil/neural/distributions.hpp"
#include "annealil/random.hpp"

#include <cmath>
#include <stdexcept>

namespace annealil::harness {

Action GreedyPolicy::act(const Observation& obs) {
  const auto fwd = net_.forward(obs);
  neural::PolicyOutput<double> out{net_.spec().head, fwd.head.col(0), {}};
  return neural::greedy_action(out);
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) return {std::nan(""), std::nan("")};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

std::uint64_t eval_episode_seed(std::uint64_t run_seed, bool final_eval, int i) {
  const std::uint64_t stream = final_eval ? 0xF17A1ULL : 0xE7A1ULL;
  return derive_seed(derive_seed(run_seed, stream), static_cast<std::uint64_t>(i));
}

std::vector<double> evaluate_returns(const imitation::Net& policy, Environment& env, int n_episodes,
                                     std::uint64_t run_seed, bool final_eval) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: need at least one episode");
  if (policy.spec().input_dim != env.obs_dim()) throw std::invalid_argument("evaluate: policy/env mismatch");
  GreedyPolicy greedy(policy);
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(n_episodes));
  for (int i = 0; i < n_episodes; ++i) {
    Observation obs = env.reset(eval_episode_seed(run_seed, final_eval, i));
    double total = 0.0;
    while (true) {
      StepResult r = env.step(greedy.act(obs));
      total += r.reward;
      if (r.done || r.truncated) break;
      obs = std::move(r.obs);
    }
    returns.push_back(total);
  }
  return returns;
}

SeedEval evaluate(const std::filesystem::path& checkpoint, const EnvSpec& env_spec, int n_episodes,
                  std::uint64_t seed) {
  const auto net = neural::load_checkpoint(checkpoint);
  auto env = make_env(env_spec);
  const auto spec = env->action_spec();
  const auto expected = spec.kind == ActionKind::discrete ? neural::HeadKind::categorical : neural::HeadKind::gaussian;
  if (net.spec().input_dim != env->obs_dim() || net.spec().head != expected || net.spec().head_size != spec.size) {
    throw std::invalid_argument("evaluate: checkpoint does not match environment " + env->id());
  }
  SeedEval e;
  e.seed = seed;
  e.returns = evaluate_returns(net, *env, n_episodes, seed, true);
  const MeanStd ms = mean_std(e.returns);
  e.mean = ms.mean;
  e.std = ms.std;
  return e;
}

EvalReport make_report(std::vector<SeedEval> seeds) {
  EvalReport r;
  std::vector<double> all;
  for (const auto& s : seeds) all.insert(all.end(), s.returns.begin(), s.returns.end());
  const MeanStd ms = mean_std(all);
  r.seeds = std::move(seeds);
  r.pooled_mean = ms.mean;
  r.pooled_std = ms.std;
  r.num_episodes = static_cast<int>(all.size());
  return r;
}

nlohmann::json to_json(const SeedEval& e) {
  return {{"seed", e.seed}, {"env_steps", e.env_steps}, {"mean", e.mean}, {"std", e.std}, {"returns", e.returns}};
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : r.seeds) seeds.push_back(to_json(s));
  return {{"pooled_mean", r.pooled_mean}, {"pooled_std", r.pooled_std}, {"num_episodes", r.num_episodes},
          {"seeds", seeds}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  std::vector<SeedEval> seeds;
  for (const auto& s : j.at("seeds")) {
    SeedEval e;
    e.seed = s.at("seed").get<std::uint64_t>();
    e.env_steps = s.at("env_steps").get<long>();
    e.returns = s.at("returns").get<std::vector<double>>();
    e.mean = s.at("mean").get<double>();
    e.std = s.at("std").get<double>();
    seeds.push_back(std::move(e));
  }
  return make_report(std::move(seeds));
}

}  // namespace annealil::harness
