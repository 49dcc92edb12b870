#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "rta/params.hpp"
#include "rta/state.hpp"

namespace rta {

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Body-face unit vectors.
inline constexpr Vec3 kBoresightBody{1.0, 0.0, 0.0};    // inspection sensor, +x
inline constexpr Vec3 kAntennaBody{0.0, 1.0, 0.0};      // comm antenna, +y
inline constexpr Vec3 kThermalNodeBody{0.0, -1.0, 0.0}; // tracked thermal node, -y
inline constexpr Vec3 kPanelBody{0.0, 0.0, 1.0};        // solar panel, +z

// Earth sits on the -x axis of the Hill frame.
inline constexpr Vec3 kEarthDirection{-1.0, 0.0, 0.0};

inline double pow4(double x) {
  const double x2 = x * x;
  return x2 * x2;
}

// Unit vector from the spacecraft to the sun; the sun circles in the x-y
// plane of the Hill frame.
template <class S>
TVec3<S> sun_vector(const S& theta) {
  using std::cos;
  using std::sin;
  return {cos(theta), sin(theta), S(0.0)};
}

inline Vec3 sun_vector(const FullState& state) { return sun_vector<double>(state.sun_angle); }

// Control-free part of the state derivative. Control enters additively
// through control_matrix().
template <class S>
TStateVec<S> drift(const TStateVec<S>& x, const SpacecraftParams& p) {
  using std::cos;
  using std::sin;
  TStateVec<S> dx{};
  const S& q1 = x[0];
  const S& q2 = x[1];
  const S& q3 = x[2];
  const S& q4 = x[3];
  const S& w1 = x[4];
  const S& w2 = x[5];
  const S& w3 = x[6];

  // quaternion kinematics, expanded form of 1/2 Xi(q) omega
  dx[0] = 0.5 * (q4 * w1 - q3 * w2 + q2 * w3);
  dx[1] = 0.5 * (q3 * w1 + q4 * w2 - q1 * w3);
  dx[2] = 0.5 * (-(q2 * w1) + q1 * w2 + q4 * w3);
  dx[3] = 0.5 * (-(q1 * w1) - q2 * w2 - q3 * w3);

  // torque-free rigid body: J w_dot = -w x (J w)
  dx[4] = ((p.j2 - p.j3) * (w2 * w3)) / p.j1;
  dx[5] = ((p.j3 - p.j1) * (w3 * w1)) / p.j2;
  dx[6] = ((p.j1 - p.j2) * (w1 * w2)) / p.j3;

  // wheels hold speed without a command
  dx[7] = S(0.0);
  dx[8] = S(0.0);
  dx[9] = S(0.0);

  const TVec4<S> q = {x[0], x[1], x[2], x[3]};
  const TVec3<S> sun = sun_vector(x[kIdxSun]);
  const TVec3<S> earth = to_t<S>(kEarthDirection);

  // thermal node on the -y face: solar + albedo + earth IR - rejection
  const TVec3<S> node_n = rotate_body_to_hill<S>(q, to_t<S>(kThermalNodeBody));
  const S cos_ei = dot(node_n, earth);
  const S view_earth = 0.8 * max0(cos_ei);
  const double alpha_as = p.absorptivity * p.node_area * p.solar_constant;
  const double rad_coeff = p.stefan_boltzmann * p.emissivity * p.node_area;
  const S q_solar = alpha_as * max0(dot(node_n, sun));
  const S q_albedo = (alpha_as * p.albedo_factor) * view_earth;
  const S q_ir = (rad_coeff * pow4(p.earth_temp)) * view_earth;
  const S t2 = x[kIdxT] * x[kIdxT];
  const S q_rejected = rad_coeff * (t2 * t2);
  dx[kIdxT] = (q_solar + q_albedo + q_ir - q_rejected) / (p.node_mass * p.specific_heat);

  // battery: panel charging against a constant bus load
  const TVec3<S> panel_n = rotate_body_to_hill<S>(q, to_t<S>(kPanelBody));
  const S p_in = (p.panel_ideal_perf * p.panel_degradation * p.panel_area) * max0(dot(panel_n, sun));
  dx[kIdxE] = p_in - p.power_out;

  dx[kIdxSun] = S(-p.mean_motion);
  return dx;
}

// Input coupling: wheel acceleration u drives the wheel-speed rows directly
// and the body rates through the wheel torque.
struct ControlMatrix {
  Vec3 omega_gain{};  // d(omega_i)/dt += omega_gain[i] * u[i]
};

inline ControlMatrix control_matrix(const SpacecraftParams& p) {
  const double s = p.wheel_reaction_torque ? -1.0 : 1.0;
  return {{s * p.wheel_inertia / p.j1, s * p.wheel_inertia / p.j2, s * p.wheel_inertia / p.j3}};
}

// f(x) + g(x) u split of the full derivative.
struct AffineDynamics {
  StateVec f{};
  std::array<Vec3, kStateDim> g{};  // row i holds d(x_i)/dt coefficients of u
};

inline AffineDynamics full_f_g(const FullState& state, const SpacecraftParams& p) {
  AffineDynamics out;
  out.f = drift<double>(state.pack(), p);
  const ControlMatrix cm = control_matrix(p);
  for (int i = 0; i < 3; ++i) {
    out.g[kIdxOmega + i][i] = cm.omega_gain[i];
    out.g[kIdxPsi + i][i] = 1.0;
  }
  return out;
}

inline StateVec derivative_vec(const StateVec& x, const Vec3& u, const SpacecraftParams& p) {
  StateVec dx = drift<double>(x, p);
  const ControlMatrix cm = control_matrix(p);
  for (int i = 0; i < 3; ++i) {
    dx[kIdxOmega + i] += cm.omega_gain[i] * u[i];
    dx[kIdxPsi + i] += u[i];
  }
  return dx;
}

// --- direct assembly of the same derivative from the individual models ---

struct AttitudeDerivative {
  Vec4 q_dot{};
  Vec3 omega_dot{};
  Vec3 psi_dot{};
};

inline AttitudeDerivative attitude_derivative(const FullState& state, const ControlInput& u,
                                              const SpacecraftParams& p) {
  AttitudeDerivative d;
  const Mat43 xi = xi_matrix(state.q);
  for (int i = 0; i < 4; ++i)
    d.q_dot[i] = 0.5 * (xi[i][0] * state.omega[0] + xi[i][1] * state.omega[1] + xi[i][2] * state.omega[2]);

  const Vec3 j_omega = {p.j1 * state.omega[0], p.j2 * state.omega[1], p.j3 * state.omega[2]};
  const Vec3 gyro = cross(state.omega, j_omega);
  const double s = p.wheel_reaction_torque ? -1.0 : 1.0;
  const Vec3 torque = v_scale(u.wheel_accel, s * p.wheel_inertia);
  d.omega_dot = {(torque[0] - gyro[0]) / p.j1,
                 (torque[1] - gyro[1]) / p.j2,
                 (torque[2] - gyro[2]) / p.j3};
  d.psi_dot = u.wheel_accel;
  return d;
}

struct ThermalFluxes {
  double solar = 0.0;     // W
  double albedo = 0.0;    // W
  double ir = 0.0;        // W
  double rejected = 0.0;  // W
  double total = 0.0;     // W
};

inline ThermalFluxes thermal_fluxes(const FullState& state, const Vec3& sun_hat,
                                    const SpacecraftParams& p) {
  const Vec3 n = rotate_body_to_hill<double>(state.q.as_vec4(), kThermalNodeBody);
  const double view_earth = 0.8 * max0(dot(n, kEarthDirection));
  ThermalFluxes f;
  f.solar = p.absorptivity * p.node_area * p.solar_constant * max0(dot(n, sun_hat));
  f.albedo = p.absorptivity * p.node_area * p.solar_constant * p.albedo_factor * view_earth;
  f.ir = p.stefan_boltzmann * p.emissivity * p.node_area * view_earth * pow4(p.earth_temp);
  f.rejected = p.stefan_boltzmann * p.emissivity * p.node_area * pow4(state.temperature);
  f.total = f.solar + f.albedo + f.ir - f.rejected;
  return f;
}

inline double temperature_derivative(double q_total, const SpacecraftParams& p) {
  return q_total / (p.node_mass * p.specific_heat);
}

inline double energy_derivative(const FullState& state, const Vec3& sun_hat,
                                const SpacecraftParams& p) {
  const Vec3 panel = rotate_body_to_hill<double>(state.q.as_vec4(), kPanelBody);
  const double p_in =
      p.panel_ideal_perf * p.panel_degradation * p.panel_area * max0(dot(panel, sun_hat));
  return p_in - p.power_out;
}

inline StateDerivative direct_derivative(const FullState& state, const ControlInput& u,
                                         const SpacecraftParams& p) {
  StateDerivative d;
  const AttitudeDerivative att = attitude_derivative(state, u, p);
  d.q_dot = att.q_dot;
  d.omega_dot = att.omega_dot;
  d.psi_dot = att.psi_dot;
  const Vec3 sun = sun_vector(state);
  d.temperature_dot = temperature_derivative(thermal_fluxes(state, sun, p).total, p);
  d.energy_dot = energy_derivative(state, sun, p);
  d.sun_angle_dot = -p.mean_motion;
  return d;
}

// Classical fourth-order Runge-Kutta with the control held constant over the
// step. The quaternion is renormalized, the sun angle wrapped, and the stored
// energy clamped at empty.
inline FullState step(const FullState& state, const ControlInput& u, double dt,
                      const SpacecraftParams& p, int substeps = 1) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (substeps < 1) throw std::invalid_argument("step: substeps must be >= 1");

  StateVec x = state.pack();
  const double h = dt / substeps;
  StateVec x2;
  for (int s = 0; s < substeps; ++s) {
    const StateVec k1 = derivative_vec(x, u.wheel_accel, p);
    for (int i = 0; i < kStateDim; ++i) x2[i] = x[i] + 0.5 * h * k1[i];
    const StateVec k2 = derivative_vec(x2, u.wheel_accel, p);
    for (int i = 0; i < kStateDim; ++i) x2[i] = x[i] + 0.5 * h * k2[i];
    const StateVec k3 = derivative_vec(x2, u.wheel_accel, p);
    for (int i = 0; i < kStateDim; ++i) x2[i] = x[i] + h * k3[i];
    const StateVec k4 = derivative_vec(x2, u.wheel_accel, p);
    for (int i = 0; i < kStateDim; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  const double qn = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
  if (!std::isfinite(qn) || !(qn > 0.0))
    throw IntegrationError("step: quaternion norm degenerate after integration");
  for (int i = 0; i < 4; ++i) x[i] /= qn;
  x[kIdxSun] = wrap_angle(x[kIdxSun]);
  if (x[kIdxE] < 0.0) x[kIdxE] = 0.0;

  for (int i = 0; i < kStateDim; ++i)
    if (!std::isfinite(x[i]))
      throw IntegrationError(std::string("step: non-finite state component ") + kStateFieldNames[i]);
  return FullState::unpack(x);
}

}  // namespace rta
