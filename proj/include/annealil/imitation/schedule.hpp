#pragma once

#include <cmath>
#include <stdexcept>

namespace annealil::imitation {

/// Trade-off weight between the cloning term (alpha = 1) and the adversarial
/// policy-gradient term (alpha = 0). Annealed schedules decay as alpha0^t with
/// alpha0 = 0.5^(1/half_life), so alpha crosses 0.5 at t = half_life.
struct AnnealSchedule {
  enum class Mode { annealed, fixed };

  Mode mode = Mode::fixed;
  double alpha0 = 0.0;
  int half_life = 0;
  double fixed_alpha = 0.0;

  static AnnealSchedule annealed(int half_life) {
    if (half_life < 1) throw std::invalid_argument("AnnealSchedule: half-life must be >= 1");
    return {Mode::annealed, std::pow(0.5, 1.0 / half_life), half_life, 0.0};
  }
  static AnnealSchedule fixed(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("AnnealSchedule: alpha must be in [0, 1]");
    return {Mode::fixed, 0.0, 0, alpha};
  }
};

inline double alpha_at(const AnnealSchedule& schedule, long t) {
  if (t < 0) throw std::invalid_argument("alpha_at: negative iteration");
  return schedule.mode == AnnealSchedule::Mode::annealed ? std::pow(schedule.alpha0, static_cast<double>(t))
                                                         : schedule.fixed_alpha;
}

}  // namespace annealil::imitation
