#include "annealil/harness/cli.hpp"
#include "annealil/harness/compare.hpp"
#include "annealil/harness/config.hpp"
#include "annealil/harness/evaluate.hpp"
#include "annealil/harness/metrics.hpp"
#include "annealil/harness/run.hpp"
#include "annealil/neural/checkpoint.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace annealil;
using namespace annealil::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "annealil_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Test processes may run concurrently and share these files.
void save_atomically(const Dataset& d, const fs::path& p) {
  const fs::path tmp = p.string() + "." + std::to_string(::getpid());
  save_dataset(d, tmp);
  fs::rename(tmp, p);
}

const std::string& grid_dataset() {
  static const std::string path = [] {
    const fs::path p = fs::temp_directory_path() / "annealil_test_harness" / "grid8.jsonl";
    fs::create_directories(p.parent_path());
    save_atomically(collect_expert({EnvKind::keydoor, 8}, 6, 17), p);
    return p.string();
  }();
  return path;
}

const std::string& point_dataset() {
  static const std::string path = [] {
    const fs::path p = fs::temp_directory_path() / "annealil_test_harness" / "point.jsonl";
    fs::create_directories(p.parent_path());
    save_atomically(collect_expert({EnvKind::point, 0}, 3, 17), p);
    return p.string();
  }();
  return path;
}

// A few seconds of compute at most.
TrainConfig tiny(Algorithm algorithm, const std::string& out) {
  TrainConfig c = default_config({EnvKind::keydoor, 8});
  c.algorithm = algorithm;
  c.hidden = {8};
  c.num_envs = 2;
  c.steps_per_env = 16;
  c.total_env_steps = 32 * 12;
  c.eval_every = 3;
  c.eval_episodes = 2;
  c.bc_max_epochs = 4;
  c.bc_batch_size = 16;
  c.disc_pretrain_iterations = 2;
  c.seeds = {0, 1};
  c.dataset = grid_dataset();
  c.out = out;
  return c;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "annealil");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  TrainConfig c = default_config({EnvKind::keydoor, 10});
  c.algorithm = Algorithm::bcgail_fixed;
  c.alpha = 0.25;
  c.hidden = {32, 16};
  c.seeds = {4, 9};
  c.disc_mode = {imitation::DiscVariant::gan, 0.05};
  c.dataset = "d.jsonl";
  const auto j = to_json(c);
  EXPECT_EQ(to_json(apply_json(TrainConfig{}, j)), j);
  EXPECT_EQ(apply_json(TrainConfig{}, j).env.id(), "keydoor-10");
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  EXPECT_THROW(apply_json(TrainConfig{}, {{"learning_rate", 0.1}}), ConfigError);
  EXPECT_THROW(apply_json(TrainConfig{}, {{"algorithm", "dagger"}}), ConfigError);
  EXPECT_THROW(apply_json(TrainConfig{}, {{"disc_mode", "lsgan"}}), ConfigError);
  EXPECT_THROW(apply_json(TrainConfig{}, nlohmann::json::array()), ConfigError);

  TrainConfig c = tiny(Algorithm::gail, "unused");
  EXPECT_NO_THROW(validate(c));
  TrainConfig bad = c;
  bad.seeds.clear();
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.total_env_steps = 0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.alpha = 1.5;
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Config, MissingDatasetFailsBeforeCompute) {
  const fs::path out = scratch("no_dataset");
  TrainConfig c = tiny(Algorithm::bcgail_annealed, out.string());
  c.dataset.clear();
  EXPECT_THROW(run(c), ConfigError);
  c.dataset = (out.parent_path() / "does-not-exist.jsonl").string();
  EXPECT_THROW(run(c), ConfigError);
  EXPECT_FALSE(fs::exists(out));

  // reinforce needs none.
  c.algorithm = Algorithm::reinforce;
  c.dataset.clear();
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, DatasetEnvMismatchRejected) {
  const fs::path out = scratch("mismatch");
  TrainConfig c = tiny(Algorithm::gail, out.string());
  c.dataset = point_dataset();
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Config, AlgorithmMapping) {
  const TrainConfig base = tiny(Algorithm::gail, "unused");
  auto alpha0 = [&](Algorithm a, double alpha = 0.5) {
    TrainConfig c = base;
    c.algorithm = a;
    c.alpha = alpha;
    return imitation::alpha_at(trainer_config(c, 0).schedule, 0);
  };
  EXPECT_EQ(alpha0(Algorithm::gail), 0.0);
  EXPECT_EQ(alpha0(Algorithm::bc), 1.0);
  EXPECT_EQ(alpha0(Algorithm::bcgail_annealed), 1.0);
  EXPECT_EQ(alpha0(Algorithm::bcgail_fixed, 0.25), 0.25);
  EXPECT_EQ(alpha0(Algorithm::random_reward_ablation), 0.5);

  TrainConfig r = base;
  r.algorithm = Algorithm::random_reward_ablation;
  EXPECT_TRUE(trainer_config(r, 0).disc_frozen);
  r.algorithm = Algorithm::reinforce;
  EXPECT_EQ(trainer_config(r, 0).reward_source, imitation::RewardSource::environment);
}

TEST(Metrics, WriteReadRoundTrip) {
  const fs::path dir = scratch("metrics");
  fs::create_directories(dir);
  MetricsRow a;
  a.phase = "train";
  a.iteration = 3;
  a.env_steps = 4096;
  a.alpha = 0.8705505632961241;
  a.eval_return = std::nan("");
  a.episodes = 7;
  {
    MetricsWriter w(dir / "m.csv");
    w.write(a);
  }
  const auto rows = read_metrics(dir / "m.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].phase, "train");
  EXPECT_EQ(rows[0].env_steps, 4096);
  EXPECT_EQ(rows[0].episodes, 7);
  EXPECT_NEAR(rows[0].alpha, a.alpha, 1e-9);
  EXPECT_TRUE(std::isnan(rows[0].eval_return));

  const std::string text = slurp(dir / "m.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "phase,iteration,env_steps,alpha,bc_loss,val_loss,pg_loss,value_loss,"
                                             "entropy,disc_loss,surrogate_reward,train_return,episodes,eval_return,"
                                             "eval_std");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Report, PooledStatisticsRecomputable) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-3.0, 1.0);
  std::vector<SeedEval> seeds(3);
  std::vector<double> all;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    seeds[s].seed = s;
    for (int i = 0; i < 20; ++i) seeds[s].returns.push_back(u(rng));
    const MeanStd ms = mean_std(seeds[s].returns);
    seeds[s].mean = ms.mean;
    seeds[s].std = ms.std;
    all.insert(all.end(), seeds[s].returns.begin(), seeds[s].returns.end());
  }
  const EvalReport r = make_report(seeds);
  EXPECT_EQ(r.num_episodes, 60);

  double mean = 0.0;
  for (double v : all) mean += v;
  mean /= static_cast<double>(all.size());
  double var = 0.0;
  for (double v : all) var += (v - mean) * (v - mean);
  EXPECT_NEAR(r.pooled_mean, mean, 1e-12);
  EXPECT_NEAR(r.pooled_std, std::sqrt(var / static_cast<double>(all.size())), 1e-12);

  const EvalReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_NEAR(back.pooled_mean, r.pooled_mean, 1e-12);
  EXPECT_NEAR(back.pooled_std, r.pooled_std, 1e-12);
}

TEST(Evaluate, CountContractAndMismatch) {
  const fs::path dir = scratch("evaluate");
  fs::create_directories(dir);
  const auto net = imitation::make_policy_net(385, {ActionKind::discrete, 4}, {16}, 3);
  neural::save_checkpoint(net, dir / "p.ckpt");
  const SeedEval e = evaluate(dir / "p.ckpt", {EnvKind::keydoor, 8}, 20, 0);
  EXPECT_EQ(e.returns.size(), 20u);
  EXPECT_EQ(evaluate(dir / "p.ckpt", {EnvKind::keydoor, 8}, 20, 0).returns, e.returns);
  EXPECT_THROW(evaluate(dir / "p.ckpt", {EnvKind::keydoor, 10}, 5, 0), std::invalid_argument);
  EXPECT_THROW(evaluate(dir / "p.ckpt", {EnvKind::point, 0}, 5, 0), std::invalid_argument);
  EXPECT_THROW(evaluate(dir / "p.ckpt", {EnvKind::keydoor, 8}, 0, 0), std::invalid_argument);
}

TEST(Evaluate, RandomInitPolicyRarelySucceeds) {
  const auto net = imitation::make_policy_net(385, {ActionKind::discrete, 4}, {64, 64}, 11);
  KeyDoorEnv env(8);
  const auto returns = evaluate_returns(net, env, 100, 0, true);
  EXPECT_LT(mean_std(returns).mean, 0.05);
}

TEST(Evaluate, GreedyPolicyOnClonedLayoutSucceeds) {
  // A policy cloned to convergence on one fixed layout replays the expert there.
  const std::uint64_t layout = 21;
  KeyDoorEnv env(8);
  AStarExpert expert;
  const Dataset d = collect(env, expert, 1, layout);
  // collect() seeds episode i from derive_seed(layout, i); reuse that start.
  auto net = imitation::make_policy_net(385, {ActionKind::discrete, 4}, {16}, 0);
  imitation::BcConfig bc{64, 3000, 3000, 1e-2, 0};
  imitation::train_bc(net, d, d, bc);

  GreedyPolicy greedy(net);
  const Dataset replay = collect(env, greedy, 1, layout);
  EXPECT_EQ(episode_returns(replay).at(0), 1.0);
}

TEST(Compare, MovingAverageAndThreshold) {
  EXPECT_EQ(moving_average({1, 2, 3, 4, 5, 6}, 3), (std::vector<double>{1, 1.5, 2, 3, 4, 5}));
  EXPECT_EQ(moving_average({2, 4}, 1), (std::vector<double>{2, 4}));
  EXPECT_THROW(moving_average({1}, 0), std::invalid_argument);

  std::vector<CurvePoint> curve = {{100, 0, 0, 0.2}, {200, 0, 0, 0.95}, {300, 0, 0, 0.99}};
  EXPECT_EQ(steps_to_threshold(curve, 0.9), 200);
  EXPECT_FALSE(steps_to_threshold(curve, 1.0).has_value());
  EXPECT_FALSE(steps_to_threshold({}, 0.0).has_value());
}

TEST(Run, ArtifactsAndEnvStepAccounting) {
  const fs::path out = scratch("annealed");
  const TrainConfig c = tiny(Algorithm::bcgail_annealed, out.string());
  ASSERT_EQ(run(c), out);
  for (const char* f : {"config.json", "eval_report.json", "seed_0/metrics.csv", "seed_0/policy.ckpt",
                        "seed_0/eval.json", "seed_1/metrics.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto rows = read_metrics(out / "seed_0" / "metrics.csv");
  ASSERT_EQ(static_cast<long>(rows.size()), c.num_iterations());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    EXPECT_EQ(rows[t].env_steps, static_cast<long>(t + 1) * c.rollout_size());
    EXPECT_EQ(rows[t].iteration, static_cast<long>(t));
  }
  EXPECT_EQ(rows[0].alpha, 1.0);
  EXPECT_NEAR(rows[1].alpha, 0.933033, 1e-6);
  EXPECT_NEAR(rows[10].alpha, 0.5, 1e-12);
  int evals = 0;
  for (const auto& r : rows) evals += std::isnan(r.eval_return) ? 0 : 1;
  EXPECT_EQ(evals, 4);

  const EvalReport report = report_from_json(nlohmann::json::parse(slurp(out / "eval_report.json")));
  EXPECT_EQ(report.num_episodes, 2 * c.eval_episodes);
  EXPECT_EQ(report.seeds.at(0).env_steps, c.num_iterations() * c.rollout_size());
}

TEST(Run, DeterministicMetricsBytes) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  run(tiny(Algorithm::bcgail_annealed, a.string()));
  run(tiny(Algorithm::bcgail_annealed, b.string()));
  for (const char* f : {"seed_0/metrics.csv", "seed_1/metrics.csv", "eval_report.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Run, GailEqualsFixedAlphaZero) {
  const fs::path g = scratch("gail");
  const fs::path f = scratch("fixed0");
  run(tiny(Algorithm::gail, g.string()));
  TrainConfig c = tiny(Algorithm::bcgail_fixed, f.string());
  c.alpha = 0.0;
  run(c);
  EXPECT_EQ(slurp(g / "seed_0/metrics.csv"), slurp(f / "seed_0/metrics.csv"));
  for (const auto& r : read_metrics(g / "seed_0/metrics.csv")) EXPECT_EQ(r.alpha, 0.0);
}

TEST(Run, BcAndPretrainPhases) {
  const fs::path b = scratch("bc");
  run(tiny(Algorithm::bc, b.string()));
  const auto bc_rows = read_metrics(b / "seed_0/metrics.csv");
  ASSERT_FALSE(bc_rows.empty());
  for (const auto& r : bc_rows) {
    EXPECT_EQ(r.phase, "bc");
    EXPECT_EQ(r.env_steps, 0);
  }

  const fs::path p = scratch("pretrain");
  const TrainConfig c = tiny(Algorithm::bc_pretrain_gail, p.string());
  run(c);
  const auto rows = read_metrics(p / "seed_0/metrics.csv");
  std::vector<std::string> phases;
  for (const auto& r : rows)
    if (phases.empty() || phases.back() != r.phase) phases.push_back(r.phase);
  EXPECT_EQ(phases, (std::vector<std::string>{"bc", "post_bc", "disc_pretrain", "train"}));
  // Pretraining iterations count toward the budget.
  EXPECT_EQ(rows.back().env_steps, c.num_iterations() * c.rollout_size());
}

TEST(Run, ReinforceAndRandomRewardOnPoint) {
  TrainConfig c = default_config({EnvKind::point, 0});
  c.hidden = {8};
  c.num_envs = 2;
  c.steps_per_env = 32;
  c.total_env_steps = 64 * 4;
  c.eval_every = 2;
  c.eval_episodes = 2;
  c.seeds = {0};
  c.algorithm = Algorithm::reinforce;
  c.out = scratch("reinforce").string();
  EXPECT_NO_THROW(run(c));
  c.algorithm = Algorithm::random_reward_ablation;
  c.dataset = point_dataset();
  c.out = scratch("random_reward").string();
  run(c);
  const auto rows = read_metrics(fs::path(c.out) / "seed_0/metrics.csv");
  // A frozen discriminator reports the same loss scale every iteration but never learns.
  for (const auto& r : rows) EXPECT_EQ(r.alpha, 0.5);
}

TEST(Compare, SingleRunTableAndCurves) {
  const fs::path out = scratch("cmp_single");
  run(tiny(Algorithm::gail, out.string()));
  const Comparison c = compare({out});
  ASSERT_EQ(c.methods.size(), 1u);
  EXPECT_EQ(c.threshold, 0.9);
  const MethodResult& m = c.at("gail");
  EXPECT_EQ(m.env_id, "keydoor-8");
  ASSERT_EQ(m.curve.size(), 4u);
  for (std::size_t i = 1; i < m.curve.size(); ++i) EXPECT_GT(m.curve[i].env_steps, m.curve[i - 1].env_steps);
  EXPECT_THROW(c.at("nope"), std::out_of_range);

  // Far above anything reachable.
  const Comparison high = compare({out}, 2.0);
  EXPECT_FALSE(high.methods[0].steps_to_threshold.has_value());
  const fs::path table = scratch("cmp_single_out");
  write_comparison(high, table);
  const std::string csv = slurp(table / "comparison.csv");
  EXPECT_NE(csv.find("not reached"), std::string::npos);
  EXPECT_NE(csv.find("smoothing_window"), std::string::npos);
  EXPECT_TRUE(fs::exists(table / "curves" / "gail.csv"));
  EXPECT_EQ(slurp(table / "curves" / "gail.csv").substr(0, 44), "env_steps,mean_return,std_return,smoothed_re");
}

TEST(Compare, IdenticalRunsIdenticalStatistics) {
  const fs::path a = scratch("cmp_a");
  const fs::path b = scratch("cmp_b");
  TrainConfig ca = tiny(Algorithm::gail, a.string());
  ca.label = "first";
  TrainConfig cb = tiny(Algorithm::gail, b.string());
  cb.label = "second";
  run(ca);
  run(cb);
  const Comparison c = compare({a, b});
  EXPECT_EQ(c.at("first").final_report.pooled_mean, c.at("second").final_report.pooled_mean);
  EXPECT_EQ(c.at("first").final_report.pooled_std, c.at("second").final_report.pooled_std);
}

TEST(Compare, MismatchedEnvironmentsRejected) {
  const fs::path g = scratch("cmp_grid");
  run(tiny(Algorithm::reinforce, g.string()));
  TrainConfig p = default_config({EnvKind::point, 0});
  p.algorithm = Algorithm::reinforce;
  p.hidden = {8};
  p.num_envs = 1;
  p.steps_per_env = 32;
  p.total_env_steps = 64;
  p.eval_every = 1;
  p.eval_episodes = 1;
  p.seeds = {0};
  p.out = scratch("cmp_point").string();
  run(p);
  EXPECT_THROW(compare({g, fs::path(p.out)}), std::invalid_argument);
}

TEST(Bundles, Membership) {
  BundleOptions o;
  auto labels = [&](const std::string& b) {
    std::vector<std::string> out;
    for (const auto& c : bundle_configs(b, o, "x.jsonl")) out.push_back(c.display_label());
    return out;
  };
  EXPECT_EQ(labels("gridworld"),
            (std::vector<std::string>{"bc", "gail", "bcgail_annealed", "bc_pretrain_gail", "reinforce"}));
  EXPECT_EQ(labels("annealing-sweep"), (std::vector<std::string>{"bcgail_fixed_0.25", "bcgail_fixed_0.5",
                                                                 "bcgail_fixed_0.75", "bcgail_annealed"}));
  EXPECT_EQ(labels("random-reward"), (std::vector<std::string>{"random_reward_ablation", "bc", "gail"}));
  for (const auto& c : bundle_configs("gridworld", o, "x.jsonl")) {
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(c.env.id(), "keydoor-8");
  }
  o.labels = {"gail"};
  EXPECT_EQ(bundle_configs("gridworld", o, "x.jsonl").size(), 1u);
  EXPECT_THROW(bundle_configs("mujoco", o, "x.jsonl"), ConfigError);
}

TEST(Cli, UsageErrorsExitNonzero) {
  EXPECT_NE(run_cli({}), 0);
  EXPECT_NE(run_cli({"dance"}), 0);
  EXPECT_NE(run_cli({"train", "--no-such-flag"}), 0);
  EXPECT_NE(run_cli({"compare"}), 0);
  EXPECT_NE(run_cli({"reproduce", "nonsense", "--out", scratch("cli_bad_bundle").string()}), 0);
  EXPECT_EQ(run_cli({"--help"}), 0);
}

TEST(Cli, TrainWithoutDatasetFailsBeforeCompute) {
  const fs::path out = scratch("cli_nodata");
  EXPECT_NE(run_cli({"train", "--algorithm", "gail", "--env", "keydoor-8", "--out", out.string()}), 0);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, CollectTrainEvaluateCompare) {
  const fs::path root = scratch("cli_flow");
  const std::string data = (root / "expert.jsonl").string();
  ASSERT_EQ(run_cli({"collect-expert", "--env", "point", "-n", "3", "--seed", "2", "--out", data}), 0);
  EXPECT_EQ(load_dataset(data).trajectories.size(), 3u);

  const std::string run_dir = (root / "run").string();
  ASSERT_EQ(run_cli({"train", "--env", "point", "--algorithm", "bcgail_fixed", "--alpha", "0.25", "--dataset", data,
                     "--budget", "256", "--seeds", "1", "--set", "num_envs=2", "--set", "steps_per_env=32",
                     "--set", "hidden=[8]", "--set", "eval_episodes=2", "--out", run_dir}),
            0);
  const TrainConfig saved = load_config(fs::path(run_dir) / "config.json");
  EXPECT_EQ(saved.algorithm, Algorithm::bcgail_fixed);
  EXPECT_EQ(saved.alpha, 0.25);
  EXPECT_EQ(saved.hidden, (std::vector<int>{8}));

  const std::string report = (root / "report.json").string();
  EXPECT_EQ(run_cli({"evaluate", "--checkpoint", run_dir + "/seed_0/policy.ckpt", "--env", "point", "--episodes", "4",
                     "--out", report}),
            0);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(slurp(report))).num_episodes, 4);
  EXPECT_EQ(run_cli({"compare", run_dir, "--out", (root / "cmp").string()}), 0);
  EXPECT_TRUE(fs::exists(root / "cmp" / "comparison.csv"));

  // A config file plus a flag override.
  const fs::path cfg = root / "cfg.json";
  std::ofstream(cfg) << R"({"env": "point", "algorithm": "bcgail_fixed", "alpha": 0.75, "hidden": [4],
                           "num_envs": 1, "steps_per_env": 32, "total_env_steps": 64, "seeds": [0],
                           "eval_episodes": 1})";
  ASSERT_EQ(run_cli({"train", "--config", cfg.string(), "--alpha", "0.5", "--dataset", data, "--out",
                     (root / "from_cfg").string()}),
            0);
  EXPECT_EQ(load_config(root / "from_cfg" / "config.json").alpha, 0.5);
}
