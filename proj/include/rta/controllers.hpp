#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rta/state.hpp"

namespace rta {

struct ScheduleEntry {
  double start_time = 0.0;  // s
  Quaternion q_c;
};

struct PdConfig {
  double kp = 0.2;  // dimensionless
  double kd = 1.5;  // s
  std::vector<ScheduleEntry> schedule{{0.0, Quaternion::identity()}};

  void validate() const {
    if (schedule.empty()) throw std::invalid_argument("PdConfig: schedule must be non-empty");
    for (size_t i = 0; i < schedule.size(); ++i) {
      if (std::abs(schedule[i].q_c.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("PdConfig: commanded quaternion is not unit norm");
      if (i > 0 && !(schedule[i].start_time > schedule[i - 1].start_time))
        throw std::invalid_argument("PdConfig: schedule times must be strictly increasing");
    }
  }

  const Quaternion& commanded(double t) const {
    size_t k = 0;
    for (size_t i = 0; i < schedule.size(); ++i)
      if (schedule[i].start_time <= t) k = i;
    return schedule[k].q_c;
  }
};

// Vector part of the multiplicative attitude error q * q_c^{-1}.
inline Vec3 error_quaternion(const Quaternion& q, const Quaternion& qc) {
  const Quaternion err = quat_multiply(q, quat_inverse(qc));
  return {err.q1, err.q2, err.q3};
}

// Saturating quaternion-tracking law. The tanh output is scaled by the
// per-axis admissible acceleration limit, which keeps the command inside the
// admissible set by construction.
inline Vec3 pd_control(const FullState& state, const PdConfig& cfg, double t,
                       const Vec3& accel_limit) {
  const Vec3 dq = error_quaternion(state.q, cfg.commanded(t));
  Vec3 u;
  for (int i = 0; i < 3; ++i)
    u[i] = accel_limit[i] * std::tanh(-cfg.kp * dq[i] - cfg.kd * state.omega[i]);
  return u;
}

inline Vec3 zero_control() { return {0.0, 0.0, 0.0}; }

}  // namespace rta
