#include "annealil/envsim.hpp"

#include "annealil/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace annealil {

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Cell random_cell_in_columns(Rng& rng, int grid_size, int col_lo, int col_hi) {
  return {uniform_int(rng, 0, grid_size - 1), uniform_int(rng, col_lo, col_hi)};
}

}  // namespace

int keydoor_obs_dim(int grid_size) { return kGridChannels * grid_size * grid_size + 1; }

Cell move_cell(Cell c, GridAction a) {
  switch (a) {
    case GridAction::up: return {c.row - 1, c.col};
    case GridAction::down: return {c.row + 1, c.col};
    case GridAction::left: return {c.row, c.col - 1};
    case GridAction::right: return {c.row, c.col + 1};
  }
  return c;
}

GridState keydoor_reset(int grid_size, std::uint64_t seed) {
  if (grid_size != 8 && grid_size != 10 && grid_size != 12) {
    throw std::invalid_argument("keydoor: grid_size must be 8, 10 or 12, got " +
                                std::to_string(grid_size));
  }
  Rng rng(seed);
  GridState s;
  s.grid_size = grid_size;
  s.wall_col = uniform_int(rng, 1, grid_size - 2);
  s.door = {uniform_int(rng, 0, grid_size - 1), s.wall_col};

  // Columns [0, wall) form the left room, (wall, n) the right one.
  const bool start_left = uniform_int(rng, 0, 1) == 0;
  const int start_lo = start_left ? 0 : s.wall_col + 1;
  const int start_hi = start_left ? s.wall_col - 1 : grid_size - 1;
  const int goal_lo = start_left ? s.wall_col + 1 : 0;
  const int goal_hi = start_left ? grid_size - 1 : s.wall_col - 1;

  s.agent = random_cell_in_columns(rng, grid_size, start_lo, start_hi);
  do {
    s.key = random_cell_in_columns(rng, grid_size, start_lo, start_hi);
  } while (s.key == s.agent);
  s.goal = random_cell_in_columns(rng, grid_size, goal_lo, goal_hi);
  return s;
}

std::pair<GridState, StepResult> keydoor_step(const GridState& state, int action) {
  if (action < 0 || action >= kGridActions) {
    throw std::invalid_argument("keydoor: action must be in [0, 4), got " + std::to_string(action));
  }
  if (state.agent == state.goal || state.steps_elapsed >= state.horizon()) {
    throw std::logic_error("keydoor: step called on a finished episode");
  }
  GridState next = state;
  const Cell target = move_cell(state.agent, static_cast<GridAction>(action));

  bool passable = next.in_bounds(target) && !next.is_wall(target);
  if (passable && next.has_wall() && target == next.door && !next.door_open) {
    if (next.has_key) {
      next.door_open = true;
    } else {
      passable = false;
    }
  }
  if (passable) next.agent = target;
  if (!next.has_key && next.agent == next.key) next.has_key = true;
  ++next.steps_elapsed;

  StepResult result;
  result.done = next.agent == next.goal;
  result.reward = result.done ? 1.0 : 0.0;
  result.truncated = !result.done && next.steps_elapsed >= next.horizon();
  result.obs = encode_obs(next);
  return {next, result};
}

GridChannel cell_channel(const GridState& state, Cell c, bool with_agent) {
  if (with_agent && c == state.agent) return GridChannel::agent;
  if (state.has_wall() && c == state.door) return GridChannel::door;
  if (state.is_wall(c)) return GridChannel::wall;
  if (!state.has_key && c == state.key) return GridChannel::key;
  if (c == state.goal) return GridChannel::goal;
  return GridChannel::empty;
}

Observation encode_obs(const GridState& state) {
  const int n = state.grid_size;
  Observation obs = Observation::Zero(keydoor_obs_dim(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int channel = static_cast<int>(cell_channel(state, {r, c}));
      obs[(r * n + c) * kGridChannels + channel] = 1.0;
    }
  }
  obs[obs.size() - 1] = state.has_key ? 1.0 : 0.0;
  return obs;
}

// ---------------------------------------------------------------------------

PointState point_reset(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  PointState s;
  s.pos = {coord(rng), coord(rng)};
  do {
    s.target = {coord(rng), coord(rng)};
  } while ((s.target - s.pos).norm() < 0.2);
  return s;
}

std::pair<PointState, StepResult> point_step(const PointState& state, const Eigen::Vector2d& action,
                                             const PointParams& params) {
  if (!action.allFinite()) throw std::invalid_argument("point: non-finite action");
  const Eigen::Vector2d a = action.cwiseMax(-1.0).cwiseMin(1.0);

  PointState next = state;
  next.vel = (params.decay * state.vel + params.accel_gain * a).cwiseMax(-params.v_max).cwiseMin(params.v_max);
  next.pos = (state.pos + next.vel).cwiseMax(-1.0).cwiseMin(1.0);
  ++next.steps_elapsed;

  const double dist = (next.pos - next.target).norm();
  StepResult result;
  result.reward = -dist - params.ctrl_cost * a.squaredNorm();
  result.done = dist < params.success_radius;
  result.truncated = !result.done && next.steps_elapsed >= params.horizon;
  result.obs = encode_obs(next);
  return {next, result};
}

Observation encode_obs(const PointState& state) {
  Observation obs(kPointObsDim);
  obs << state.pos, state.vel, state.target - state.pos;
  return obs;
}

// ---------------------------------------------------------------------------

KeyDoorEnv::KeyDoorEnv(int grid_size) : grid_size_(grid_size) {
  state_ = keydoor_reset(grid_size, 0);
}

std::string KeyDoorEnv::id() const { return EnvSpec{EnvKind::keydoor, grid_size_}.id(); }

Observation KeyDoorEnv::reset(std::uint64_t seed) {
  state_ = keydoor_reset(grid_size_, seed);
  return encode_obs(state_);
}

StepResult KeyDoorEnv::step(const Action& action) {
  if (action.size() != 1) throw std::invalid_argument("keydoor: expected a single action index");
  auto [next, result] = keydoor_step(state_, static_cast<int>(std::lround(action[0])));
  state_ = next;
  return result;
}

Observation PointReachEnv::reset(std::uint64_t seed) {
  state_ = point_reset(seed);
  return encode_obs(state_);
}

StepResult PointReachEnv::step(const Action& action) {
  if (action.size() != 2) throw std::invalid_argument("point: expected a 2-vector action");
  auto [next, result] = point_step(state_, Eigen::Vector2d(action[0], action[1]), params_);
  state_ = next;
  return result;
}

std::string EnvSpec::id() const {
  return kind == EnvKind::point ? std::string("point") : "keydoor-" + std::to_string(grid_size);
}

std::unique_ptr<Environment> make_env(const EnvSpec& spec) {
  if (spec.kind == EnvKind::point) return std::make_unique<PointReachEnv>();
  return std::make_unique<KeyDoorEnv>(spec.grid_size);
}

EnvSpec parse_env_id(const std::string& id) {
  if (id == "point") return {EnvKind::point, 0};
  const std::string prefix = "keydoor-";
  if (id.rfind(prefix, 0) == 0) {
    const int size = std::stoi(id.substr(prefix.size()));
    if (size == 8 || size == 10 || size == 12) return {EnvKind::keydoor, size};
  }
  throw std::invalid_argument("unknown environment id: " + id);
}

}  // namespace annealil
