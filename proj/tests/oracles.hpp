#pragma once

// Independent reference implementations used to check the real code.

#include "annealil/envsim.hpp"
#include "annealil/imitation/losses.hpp"

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <optional>
#include <vector>

namespace oracle {

// Plain BFS shortest path length between two cells, 4-connected.
inline std::optional<int> bfs_length(const annealil::GridState& s, annealil::Cell from, annealil::Cell to,
                                     bool door_passable) {
  const int n = s.grid_size;
  std::vector<int> dist(n * n, -1);
  auto blocked = [&](annealil::Cell c) {
    if (c.row < 0 || c.col < 0 || c.row >= n || c.col >= n) return true;
    if (c.col == s.wall_col) return !(c == s.door && door_passable);
    return false;
  };
  std::deque<annealil::Cell> q{from};
  dist[from.row * n + from.col] = 0;
  const int dr[] = {-1, 1, 0, 0};
  const int dc[] = {0, 0, -1, 1};
  while (!q.empty()) {
    const annealil::Cell c = q.front();
    q.pop_front();
    if (c == to) return dist[c.row * n + c.col];
    for (int k = 0; k < 4; ++k) {
      const annealil::Cell nb{c.row + dr[k], c.col + dc[k]};
      if (blocked(nb) || dist[nb.row * n + nb.col] >= 0) continue;
      dist[nb.row * n + nb.col] = dist[c.row * n + c.col] + 1;
      q.push_back(nb);
    }
  }
  return std::nullopt;
}

// Same phase decomposition as the planner: agent->key, key->door, door->goal.
inline std::optional<int> bfs_plan_length(const annealil::GridState& s) {
  const auto a = bfs_length(s, s.agent, s.key, false);
  if (!a) return std::nullopt;
  if (!s.has_wall()) {
    const auto b = bfs_length(s, s.key, s.goal, true);
    if (!b) return std::nullopt;
    return *a + *b;
  }
  const auto b = bfs_length(s, s.key, s.door, true);
  const auto c = bfs_length(s, s.door, s.goal, true);
  if (!b || !c) return std::nullopt;
  return *a + *b + *c;
}

// Central finite differences of f at x.
inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                         double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// max_i |a_i - b_i| / max(1, |a_i|, |b_i|) style relative error, robust near zero.
inline double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max({1e-8, analytic.norm(), numeric.norm()});
  return (analytic - numeric).norm() / scale;
}

// GAE by direct summation: A_t = sum_k (gamma lambda)^k delta_{t+k} within a segment.
inline std::vector<double> gae_brute_force(const std::vector<double>& rewards, const std::vector<double>& values,
                                           const std::vector<char>& terminal, const std::vector<char>& segment_end,
                                           const std::vector<double>& bootstrap, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    double next = 0.0;
    if (segment_end[t]) next = terminal[t] ? 0.0 : bootstrap[t];
    else next = values[t + 1];
    delta[t] = rewards[t] + gamma * next - values[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += weight * delta[k];
      if (segment_end[k]) break;
      weight *= gamma * lambda;
    }
  }
  return adv;
}

}  // namespace oracle
