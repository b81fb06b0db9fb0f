#include "annealil/expert.hpp"

#include "annealil/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <tuple>

namespace annealil {

std::size_t Dataset::num_transitions() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.size();
  return n;
}

std::optional<std::vector<int>> astar_path(const GridState& state, Cell from, Cell to, bool door_passable) {
  const int n = state.grid_size;
  auto index = [n](Cell c) { return c.row * n + c.col; };
  auto manhattan = [to](Cell c) { return std::abs(c.row - to.row) + std::abs(c.col - to.col); };
  auto passable = [&](Cell c) {
    if (!state.in_bounds(c) || state.is_wall(c)) return false;
    return !(state.has_wall() && c == state.door) || door_passable;
  };

  // (f, insertion order, cell index); insertion order keeps equal-f expansion FIFO.
  using Entry = std::tuple<int, long, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<int> g(n * n, -1);
  std::vector<int> parent_action(n * n, -1);
  std::vector<bool> closed(n * n, false);

  long counter = 0;
  g[index(from)] = 0;
  open.emplace(manhattan(from), counter++, index(from));
  while (!open.empty()) {
    const auto [f, order, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = true;
    const Cell cur{idx / n, idx % n};
    if (cur == to) break;
    for (int a = 0; a < kGridActions; ++a) {
      const Cell next = move_cell(cur, static_cast<GridAction>(a));
      if (!passable(next)) continue;
      const int ni = index(next);
      const int cost = g[idx] + 1;
      if (closed[ni] || (g[ni] >= 0 && g[ni] <= cost)) continue;
      g[ni] = cost;
      parent_action[ni] = a;
      open.emplace(cost + manhattan(next), counter++, ni);
    }
  }
  if (g[index(to)] < 0) return std::nullopt;

  std::vector<int> actions;
  Cell cur = to;
  while (!(cur == from)) {
    const int a = parent_action[index(cur)];
    actions.push_back(a);
    // Step back along the inverse move.
    static constexpr GridAction inverse[] = {GridAction::down, GridAction::up, GridAction::right, GridAction::left};
    cur = move_cell(cur, inverse[a]);
  }
  std::reverse(actions.begin(), actions.end());
  return actions;
}

std::vector<int> astar_plan(const GridState& state) {
  std::vector<std::pair<Cell, bool>> legs;
  legs.emplace_back(state.key, false);
  if (state.has_wall()) legs.emplace_back(state.door, true);
  legs.emplace_back(state.goal, true);

  std::vector<int> plan;
  Cell at = state.agent;
  for (const auto& [target, door_passable] : legs) {
    auto leg = astar_path(state, at, target, door_passable);
    if (!leg) {
      throw std::logic_error("astar_plan: unreachable waypoint (" + std::to_string(target.row) + ", " +
                             std::to_string(target.col) + ")");
    }
    plan.insert(plan.end(), leg->begin(), leg->end());
    at = target;
  }
  return plan;
}

void AStarExpert::begin_episode(const Environment& env) {
  const auto* grid = dynamic_cast<const KeyDoorEnv*>(&env);
  if (grid == nullptr) throw std::invalid_argument("AStarExpert requires a key-door environment");
  plan_ = astar_plan(grid->state());
  cursor_ = 0;
}

Action AStarExpert::act(const Observation& /*obs*/) {
  if (cursor_ >= plan_.size()) throw std::logic_error("AStarExpert: plan exhausted");
  return Action::Constant(1, plan_[cursor_++]);
}

Eigen::Vector2d point_expert(const Observation& obs, const PointExpertGains& gains) {
  const Eigen::Vector2d vel = obs.segment<2>(2);
  const Eigen::Vector2d to_target = obs.segment<2>(4);
  return (gains.kp * to_target - gains.kd * vel).cwiseMax(-1.0).cwiseMin(1.0);
}

Action RandomPolicy::act(const Observation& /*obs*/) {
  if (spec_.kind == ActionKind::discrete) {
    return Action::Constant(1, std::uniform_int_distribution<int>(0, spec_.size - 1)(rng_));
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Action a(spec_.size);
  for (int i = 0; i < spec_.size; ++i) a[i] = u(rng_);
  return a;
}

Dataset collect(Environment& env, Policy& policy, int n_trajectories, std::uint64_t seed) {
  if (n_trajectories < 1) throw std::invalid_argument("collect: need at least one trajectory");
  Dataset data;
  data.env_id = env.id();
  data.obs_dim = env.obs_dim();
  data.action_spec = env.action_spec();
  data.trajectories.reserve(n_trajectories);
  for (int i = 0; i < n_trajectories; ++i) {
    Observation obs = env.reset(seed + static_cast<std::uint64_t>(i));
    policy.begin_episode(env);
    Trajectory traj;
    while (true) {
      Action action = policy.act(obs);
      StepResult r = env.step(action);
      traj.push_back({std::move(obs), std::move(action), r.reward, r.done});
      obs = std::move(r.obs);
      if (r.done || r.truncated) break;
    }
    data.trajectories.push_back(std::move(traj));
  }
  return data;
}

std::vector<double> episode_returns(const Dataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.trajectories.size());
  for (const auto& traj : dataset.trajectories) {
    double sum = 0.0;
    for (const auto& t : traj) sum += t.reward;
    out.push_back(sum);
  }
  return out;
}

std::pair<Dataset, Dataset> split_bc(const Dataset& dataset, double fraction, std::uint64_t seed) {
  const std::size_t n = dataset.trajectories.size();
  if (n < 2) throw std::invalid_argument("split_bc: need at least two trajectories");
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split_bc: fraction must be in (0, 1)");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto n_train = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  Dataset train{dataset.env_id, dataset.obs_dim, dataset.action_spec, {}};
  Dataset val{dataset.env_id, dataset.obs_dim, dataset.action_spec, {}};
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : val).trajectories.push_back(dataset.trajectories[order[i]]);
  }
  return {std::move(train), std::move(val)};
}

}  // namespace annealil
