#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rta/dynamics.hpp"

namespace rta {

// Inequality margin h(x) (or Psi(x) for the attitude-augmented constraints).
// Non-negative means safe.
template <class S>
S constraint_value(ConstraintId id, const TStateVec<S>& x, const SpacecraftParams& p) {
  const TVec4<S> q = {x[0], x[1], x[2], x[3]};
  switch (id) {
    case ConstraintId::ExclusionZone: {
      const TVec3<S> bore = rotate_body_to_hill<S>(q, to_t<S>(kBoresightBody));
      const S theta = acos_clamped(dot(bore, sun_vector(x[kIdxSun])));
      return theta - (0.5 * p.ez_fov + p.ez_buffer);
    }
    case ConstraintId::Communication: {
      const TVec3<S> ant = rotate_body_to_hill<S>(q, to_t<S>(kAntennaBody));
      const S theta = acos_clamped(dot(ant, to_t<S>(kEarthDirection)));
      return 0.5 * p.comm_fov - theta;
    }
    case ConstraintId::Temperature: {
      const TVec3<S> n = rotate_body_to_hill<S>(q, to_t<S>(kThermalNodeBody));
      const S th_si = acos_clamped(dot(n, sun_vector(x[kIdxSun])));
      const S th_ei = acos_clamped(dot(n, to_t<S>(kEarthDirection)));
      return (p.t_max - x[kIdxT]) - p.tuning.delta0 * (0.5 * kPi - th_si) -
             p.tuning.delta1 * (0.5 * kPi - th_ei);
    }
    case ConstraintId::Battery: {
      const TVec3<S> panel = rotate_body_to_hill<S>(q, to_t<S>(kPanelBody));
      const S th_si = acos_clamped(dot(panel, sun_vector(x[kIdxSun])));
      return x[kIdxE] - p.e_min - p.tuning.delta2 * th_si;
    }
    case ConstraintId::Omega1:
    case ConstraintId::Omega2:
    case ConstraintId::Omega3: {
      const S& w = x[kIdxOmega + constraint_index(id) - constraint_index(ConstraintId::Omega1)];
      return p.omega_max * p.omega_max - w * w;
    }
    case ConstraintId::Psi1:
    case ConstraintId::Psi2:
    case ConstraintId::Psi3: {
      const S& w = x[kIdxPsi + constraint_index(id) - constraint_index(ConstraintId::Psi1)];
      return p.psi_max * p.psi_max - w * w;
    }
  }
  throw std::invalid_argument("constraint_value: unknown constraint");
}

inline double constraint_margin(ConstraintId id, const FullState& state, const SpacecraftParams& p) {
  return constraint_value<double>(id, state.pack(), p);
}

inline double h_exclusion(const FullState& state, const SpacecraftParams& p) {
  return constraint_margin(ConstraintId::ExclusionZone, state, p);
}
inline double h_comm(const FullState& state, const SpacecraftParams& p) {
  return constraint_margin(ConstraintId::Communication, state, p);
}
inline double psi_temp(const FullState& state, const SpacecraftParams& p) {
  return constraint_margin(ConstraintId::Temperature, state, p);
}
inline double psi_batt(const FullState& state, const SpacecraftParams& p) {
  return constraint_margin(ConstraintId::Battery, state, p);
}
inline double h_omega(const FullState& state, int axis, const SpacecraftParams& p) {
  if (axis < 1 || axis > 3) throw std::invalid_argument("h_omega: axis must be 1..3");
  return constraint_margin(static_cast<ConstraintId>(constraint_index(ConstraintId::Omega1) + axis - 1), state, p);
}
inline double h_psi(const FullState& state, int axis, const SpacecraftParams& p) {
  if (axis < 1 || axis > 3) throw std::invalid_argument("h_psi: axis must be 1..3");
  return constraint_margin(static_cast<ConstraintId>(constraint_index(ConstraintId::Psi1) + axis - 1), state, p);
}

// Gradient of the constraint with respect to the packed state. Rate and
// wheel-speed limits are differentiated by hand, the angle-based constraints
// through forward-mode duals.
inline StateVec constraint_gradient(ConstraintId id, const StateVec& x, const SpacecraftParams& p) {
  StateVec g{};
  switch (id) {
    case ConstraintId::Omega1:
    case ConstraintId::Omega2:
    case ConstraintId::Omega3: {
      const int slot = kIdxOmega + constraint_index(id) - constraint_index(ConstraintId::Omega1);
      g[slot] = -2.0 * x[slot];
      return g;
    }
    case ConstraintId::Psi1:
    case ConstraintId::Psi2:
    case ConstraintId::Psi3: {
      const int slot = kIdxPsi + constraint_index(id) - constraint_index(ConstraintId::Psi1);
      g[slot] = -2.0 * x[slot];
      return g;
    }
    default: {
      using J = Jet<double, kStateDim>;
      TStateVec<J> xx;
      for (int k = 0; k < kStateDim; ++k) xx[k] = J::variable(x[k], k);
      const J h = constraint_value<J>(id, xx, p);
      for (int k = 0; k < kStateDim; ++k) g[k] = h.d[k];
      return g;
    }
  }
}

inline StateVec constraint_gradient(ConstraintId id, const FullState& state, const SpacecraftParams& p) {
  return constraint_gradient(id, state.pack(), p);
}

// First lift of a relative-degree-2 constraint: Psi1 = dh/dt + kappa1 * h,
// with dh/dt taken along the drift (these constraints have no direct control
// dependence). Evaluating with a Jet scalar yields grad(Psi1) as well.
template <class S>
S psi1_value(ConstraintId id, const TStateVec<S>& x, const SpacecraftParams& p) {
  using JS = Jet<S, kStateDim>;
  TStateVec<JS> xx;
  for (int k = 0; k < kStateDim; ++k) xx[k] = JS::variable(x[k], k);
  const JS h = constraint_value<JS>(id, xx, p);
  const TStateVec<S> f = drift<S>(x, p);
  S hdot = h.d[0] * f[0];
  for (int k = 1; k < kStateDim; ++k) hdot = hdot + h.d[k] * f[k];
  return hdot + p.tuning.kappa1[constraint_index(id)] * h.v;
}

inline double psi1_margin(ConstraintId id, const FullState& state, const SpacecraftParams& p) {
  return psi1_value<double>(id, state.pack(), p);
}

// One linear-in-control inequality a.u + b >= 0 obtained from the barrier
// condition of a (possibly lifted) constraint.
struct BarrierRow {
  Vec3 a{0.0, 0.0, 0.0};
  double b = 0.0;
  ConstraintId id{};
  bool active = true;  // false when the control coefficient vanished
};

inline constexpr double kDegenerateRowNorm = 1e-12;

inline BarrierRow lift_and_rowify(ConstraintId id, const FullState& state, const SpacecraftParams& p) {
  const StateVec x = state.pack();
  const ControlMatrix cm = control_matrix(p);
  const int idx = constraint_index(id);

  // Positive sigma demands an inward reserve at the boundary, buffering the
  // constraint against discretization slip.
  StateVec grad{};
  double relax = 0.0;
  if (relative_degree(id) == 1) {
    grad = constraint_gradient(id, x, p);
    relax = p.tuning.kappa1[idx] * constraint_value<double>(id, x, p) - p.tuning.sigma[idx];
  } else {
    using J = Jet<double, kStateDim>;
    TStateVec<J> xx;
    for (int k = 0; k < kStateDim; ++k) xx[k] = J::variable(x[k], k);
    const J psi1 = psi1_value<J>(id, xx, p);
    for (int k = 0; k < kStateDim; ++k) grad[k] = psi1.d[k];
    relax = p.tuning.kappa2[idx] * psi1.v - p.tuning.sigma[idx];
  }

  const StateVec f = drift<double>(x, p);
  BarrierRow row;
  row.id = id;
  for (int j = 0; j < 3; ++j)
    row.a[j] = grad[kIdxOmega + j] * cm.omega_gain[j] + grad[kIdxPsi + j];
  double lie_f = 0.0;
  for (int k = 0; k < kStateDim; ++k) lie_f += grad[k] * f[k];
  row.b = lie_f + relax;
  row.active = norm(row.a) >= kDegenerateRowNorm;
  return row;
}

// Admissible wheel accelerations: the saturation limit intersected with the
// per-axis bounds that keep |omega_dot| within its limit at worst-case rates.
struct ControlBounds {
  Vec3 lower{};
  Vec3 upper{};
};

inline ControlBounds control_bounds(double omega_max, double omega_dot_max, double psi_dot_max,
                                    const SpacecraftParams& p) {
  const double j[3] = {p.j1, p.j2, p.j3};
  ControlBounds cb;
  for (int i = 0; i < 3; ++i) {
    const double coupling = std::abs(j[(i + 1) % 3] - j[(i + 2) % 3]) * omega_max * omega_max;
    const double numer = j[i] * omega_dot_max - coupling;
    if (!(numer > 0.0))
      throw std::invalid_argument("control_bounds: rate limits leave no wheel authority on axis " +
                                  std::to_string(i + 1));
    const double bound = std::min(psi_dot_max, numer / p.wheel_inertia);
    cb.lower[i] = -bound;
    cb.upper[i] = bound;
  }
  return cb;
}

inline ControlBounds control_bounds(const SpacecraftParams& p) {
  return control_bounds(p.omega_max, p.omega_dot_max, p.psi_dot_max, p);
}

}  // namespace rta
