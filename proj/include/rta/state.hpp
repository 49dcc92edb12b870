#pragma once

#include <array>

#include "rta/math.hpp"

namespace rta {

inline constexpr int kStateDim = 13;
inline constexpr int kIdxQ = 0;
inline constexpr int kIdxOmega = 4;
inline constexpr int kIdxPsi = 7;
inline constexpr int kIdxT = 10;
inline constexpr int kIdxE = 11;
inline constexpr int kIdxSun = 12;

inline constexpr std::array<const char*, kStateDim> kStateFieldNames = {
    "q1", "q2", "q3", "q4", "omega1", "omega2", "omega3",
    "psi1", "psi2", "psi3", "temperature", "energy", "theta_s"};

using StateVec = std::array<double, kStateDim>;

template <class S>
using TStateVec = std::array<S, kStateDim>;

struct ControlInput {
  Vec3 wheel_accel{0.0, 0.0, 0.0};  // rad/s^2
};

struct FullState {
  Quaternion q;
  Vec3 omega{0.0, 0.0, 0.0};    // rad/s, body rates
  Vec3 psi{0.0, 0.0, 0.0};      // rad/s, wheel speeds
  double temperature = 273.15;  // K, tracked -y face node
  double energy = 0.0;          // J, battery charge
  double sun_angle = 0.0;       // rad, in [0, 2pi)

  StateVec pack() const {
    return {q.q1, q.q2, q.q3, q.q4,
            omega[0], omega[1], omega[2],
            psi[0], psi[1], psi[2],
            temperature, energy, sun_angle};
  }

  static FullState unpack(const StateVec& x) {
    FullState s;
    s.q = {x[0], x[1], x[2], x[3]};
    s.omega = {x[4], x[5], x[6]};
    s.psi = {x[7], x[8], x[9]};
    s.temperature = x[kIdxT];
    s.energy = x[kIdxE];
    s.sun_angle = x[kIdxSun];
    return s;
  }
};

struct StateDerivative {
  Vec4 q_dot{};
  Vec3 omega_dot{};
  Vec3 psi_dot{};
  double temperature_dot = 0.0;
  double energy_dot = 0.0;
  double sun_angle_dot = 0.0;

  StateVec pack() const {
    return {q_dot[0], q_dot[1], q_dot[2], q_dot[3],
            omega_dot[0], omega_dot[1], omega_dot[2],
            psi_dot[0], psi_dot[1], psi_dot[2],
            temperature_dot, energy_dot, sun_angle_dot};
  }
};

}  // namespace rta
