#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

namespace annealil {

using Observation = Eigen::VectorXd;

/// Actions share one representation: a discrete action is a length-1 vector
/// holding the index, a continuous action is the raw control vector.
using Action = Eigen::VectorXd;

enum class ActionKind { discrete, continuous };

struct ActionSpec {
  ActionKind kind = ActionKind::discrete;
  int size = 0;  ///< number of choices (discrete) or control dimension (continuous)

  bool operator==(const ActionSpec&) const = default;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;       ///< terminal condition reached
  bool truncated = false;  ///< horizon reached without termination
};

// ---------------------------------------------------------------------------
// Key-Door gridworld

struct Cell {
  int row = 0;
  int col = 0;

  bool operator==(const Cell&) const = default;
};

enum class GridAction : int { up = 0, down = 1, left = 2, right = 3 };
inline constexpr int kGridActions = 4;

/// One-hot channels per cell in the grid observation.
enum class GridChannel : int { empty = 0, wall = 1, key = 2, door = 3, goal = 4, agent = 5 };
inline constexpr int kGridChannels = 6;

/// Two rooms split by a full-height wall at `wall_col`; the only gap is the
/// door cell, passable once the agent carries the key. `wall_col < 0` denotes
/// a wall-free room (test fixtures only).
struct GridState {
  int grid_size = 8;
  Cell agent;
  Cell key;
  Cell door;
  Cell goal;
  int wall_col = -1;
  bool has_key = false;
  bool door_open = false;
  int steps_elapsed = 0;

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < grid_size && c.col >= 0 && c.col < grid_size;
  }
  bool is_wall(Cell c) const { return c.col == wall_col && !(c == door); }
  bool has_wall() const { return wall_col >= 0; }
  int horizon() const { return 4 * grid_size * grid_size; }

  bool operator==(const GridState&) const = default;
};

GridState keydoor_reset(int grid_size, std::uint64_t seed);
std::pair<GridState, StepResult> keydoor_step(const GridState& state, int action);
Observation encode_obs(const GridState& state);
int keydoor_obs_dim(int grid_size);
Cell move_cell(Cell c, GridAction a);

/// Channel shown at a cell, ignoring the agent overlay when `with_agent` is false.
GridChannel cell_channel(const GridState& state, Cell c, bool with_agent = true);

// ---------------------------------------------------------------------------
// Point reach

struct PointParams {
  double decay = 0.9;
  double accel_gain = 0.1;
  double v_max = 0.2;
  double ctrl_cost = 0.01;
  double success_radius = 0.05;
  int horizon = 200;
};

struct PointState {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel = Eigen::Vector2d::Zero();
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  int steps_elapsed = 0;

  bool operator==(const PointState& o) const {
    return pos == o.pos && vel == o.vel && target == o.target && steps_elapsed == o.steps_elapsed;
  }
};

inline constexpr int kPointObsDim = 6;

PointState point_reset(std::uint64_t seed);
std::pair<PointState, StepResult> point_step(const PointState& state, const Eigen::Vector2d& action,
                                             const PointParams& params = {});
Observation encode_obs(const PointState& state);

// ---------------------------------------------------------------------------
// Polymorphic wrapper used by collection, training and evaluation.

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual int obs_dim() const = 0;
  virtual ActionSpec action_spec() const = 0;
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Action& action) = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

class KeyDoorEnv final : public Environment {
 public:
  explicit KeyDoorEnv(int grid_size);

  std::string id() const override;
  int obs_dim() const override { return keydoor_obs_dim(grid_size_); }
  ActionSpec action_spec() const override { return {ActionKind::discrete, kGridActions}; }
  Observation reset(std::uint64_t seed) override;
  StepResult step(const Action& action) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<KeyDoorEnv>(*this); }

  const GridState& state() const { return state_; }
  void set_state(const GridState& s) { state_ = s; }

 private:
  int grid_size_;
  GridState state_;
};

class PointReachEnv final : public Environment {
 public:
  explicit PointReachEnv(PointParams params = {}) : params_(params) {}

  std::string id() const override { return "point"; }
  int obs_dim() const override { return kPointObsDim; }
  ActionSpec action_spec() const override { return {ActionKind::continuous, 2}; }
  Observation reset(std::uint64_t seed) override;
  StepResult step(const Action& action) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<PointReachEnv>(*this); }

  const PointState& state() const { return state_; }
  void set_state(const PointState& s) { state_ = s; }
  const PointParams& params() const { return params_; }

 private:
  PointParams params_;
  PointState state_;
};

enum class EnvKind { keydoor, point };

struct EnvSpec {
  EnvKind kind = EnvKind::keydoor;
  int grid_size = 8;

  std::string id() const;
};

std::unique_ptr<Environment> make_env(const EnvSpec& spec);
EnvSpec parse_env_id(const std::string& id);

}  // namespace annealil
