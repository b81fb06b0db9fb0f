#pragma once

#include "annealil/envsim.hpp"
#include "annealil/expert.hpp"
#include "annealil/imitation/losses.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace annealil::harness {

/// Acts with the argmax action (discrete) or the clamped mean (continuous).
class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(const imitation::Net& net) : net_(net) {}
  Action act(const Observation& obs) override;

 private:
  const imitation::Net& net_;
};

struct SeedEval {
  std::uint64_t seed = 0;
  long env_steps = 0;  ///< training env steps consumed when the evaluation ran
  std::vector<double> returns;
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

struct EvalReport {
  std::vector<SeedEval> seeds;
  double pooled_mean = 0.0;
  double pooled_std = 0.0;
  int num_episodes = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& values);

/// Seed of the i-th evaluation episode. Periodic and final evaluations use
/// disjoint streams, both disjoint from training episodes.
std::uint64_t eval_episode_seed(std::uint64_t run_seed, bool final_eval, int i);

/// Greedy returns over `n_episodes` fresh episodes.
std::vector<double> evaluate_returns(const imitation::Net& policy, Environment& env, int n_episodes,
                                     std::uint64_t run_seed, bool final_eval);

/// Loads a checkpoint and evaluates it; rejects checkpoint/env mismatches.
SeedEval evaluate(const std::filesystem::path& checkpoint, const EnvSpec& env, int n_episodes, std::uint64_t seed);

/// Pools per-seed evaluations; pooled statistics are over all episodes.
EvalReport make_report(std::vector<SeedEval> seeds);

nlohmann::json to_json(const SeedEval& e);
nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace annealil::harness
