#pragma once

#include "annealil/envsim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace annealil {

struct Transition {
  Observation obs;
  Action action;
  double reward = 0.0;
  bool done = false;

  bool operator==(const Transition& o) const {
    return obs == o.obs && action == o.action && reward == o.reward && done == o.done;
  }
};

using Trajectory = std::vector<Transition>;

struct Dataset {
  std::string env_id;
  int obs_dim = 0;
  ActionSpec action_spec;
  std::vector<Trajectory> trajectories;

  std::size_t num_transitions() const;
  bool operator==(const Dataset&) const = default;
};

/// Anything that picks actions from observations; `begin_episode` lets
/// planners inspect the freshly reset environment.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(const Environment& /*env*/) {}
  virtual Action act(const Observation& obs) = 0;
};

// ---------------------------------------------------------------------------
// Gridworld planner

/// Shortest 4-connected path between two cells by A* with a Manhattan
/// heuristic. Ties go to the earliest action in (up, down, left, right)
/// order. The door is traversable only when `door_passable`. Returns the
/// action sequence, or nothing if `to` is unreachable.
std::optional<std::vector<int>> astar_path(const GridState& state, Cell from, Cell to, bool door_passable);

/// Agent -> key -> door -> goal plan for a fresh reset. Throws
/// std::logic_error if any leg is unreachable.
std::vector<int> astar_plan(const GridState& state);

class AStarExpert final : public Policy {
 public:
  void begin_episode(const Environment& env) override;
  Action act(const Observation& obs) override;

 private:
  std::vector<int> plan_;
  std::size_t cursor_ = 0;
};

// ---------------------------------------------------------------------------
// Point-reach controller

struct PointExpertGains {
  double kp = 1.0;
  double kd = 0.5;
};

/// PD law on the (pos, vel, target - pos) observation, clamped to [-1, 1].
Eigen::Vector2d point_expert(const Observation& obs, const PointExpertGains& gains = {});

class PointExpert final : public Policy {
 public:
  explicit PointExpert(PointExpertGains gains = {}) : gains_(gains) {}
  Action act(const Observation& obs) override { return point_expert(obs, gains_); }

 private:
  PointExpertGains gains_;
};

/// Uniform random actions; the baseline for "expert beats random" checks.
class RandomPolicy final : public Policy {
 public:
  RandomPolicy(ActionSpec spec, std::uint64_t seed) : spec_(spec), rng_(seed) {}
  Action act(const Observation& obs) override;

 private:
  ActionSpec spec_;
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------

/// Runs `n_trajectories` full episodes; episode i resets with seed + i.
Dataset collect(Environment& env, Policy& policy, int n_trajectories, std::uint64_t seed);

/// Returns of every episode in a dataset (sum of stored rewards).
std::vector<double> episode_returns(const Dataset& dataset);

class DatasetError : public std::runtime_error {
 public:
  /// `record` is the 0-based trajectory record index, or -1 for the header.
  DatasetError(long record, const std::string& what)
      : std::runtime_error("dataset record " + std::to_string(record) + ": " + what), record_(record) {}
  long record() const { return record_; }

 private:
  long record_;
};

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Seeded split by whole trajectories; the first part holds round(fraction * n).
std::pair<Dataset, Dataset> split_bc(const Dataset& dataset, double fraction, std::uint64_t seed);

}  // namespace annealil
