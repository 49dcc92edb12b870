#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "rta/math.hpp"

namespace rta {

enum class ConstraintId : int {
  ExclusionZone = 0,
  Communication,
  Temperature,
  Battery,
  Omega1,
  Omega2,
  Omega3,
  Psi1,
  Psi2,
  Psi3,
};

inline constexpr int kNumConstraints = 10;

inline constexpr std::array<ConstraintId, kNumConstraints> kAllConstraints = {
    ConstraintId::ExclusionZone, ConstraintId::Communication, ConstraintId::Temperature,
    ConstraintId::Battery,       ConstraintId::Omega1,        ConstraintId::Omega2,
    ConstraintId::Omega3,        ConstraintId::Psi1,          ConstraintId::Psi2,
    ConstraintId::Psi3,
};

inline int constraint_index(ConstraintId id) { return static_cast<int>(id); }

// Angle and energy constraints only reach the control after one lift.
inline int relative_degree(ConstraintId id) { return constraint_index(id) < 4 ? 2 : 1; }

inline const char* constraint_name(ConstraintId id) {
  switch (id) {
    case ConstraintId::ExclusionZone: return "exclusion_zone";
    case ConstraintId::Communication: return "communication";
    case ConstraintId::Temperature: return "temperature";
    case ConstraintId::Battery: return "battery";
    case ConstraintId::Omega1: return "omega_x";
    case ConstraintId::Omega2: return "omega_y";
    case ConstraintId::Omega3: return "omega_z";
    case ConstraintId::Psi1: return "psi_x";
    case ConstraintId::Psi2: return "psi_y";
    case ConstraintId::Psi3: return "psi_z";
  }
  return "unknown";
}

inline bool parse_constraint_name(const std::string& name, ConstraintId* out) {
  for (ConstraintId id : kAllConstraints) {
    if (name == constraint_name(id)) {
      *out = id;
      return true;
    }
  }
  return false;
}

// Class-kappa gains (linear, per lift level), boundary biases, and the
// attitude coefficients that make the temperature and battery constraints
// controllable. Defaults come from the calibration search over seeded
// zero-controller episodes (see calibrate_tuning).
struct BarrierTuning {
  std::array<double, kNumConstraints> kappa1{};  // 1/s, level-1 gain
  std::array<double, kNumConstraints> kappa2{};  // 1/s, level-2 gain (degree-2 only)
  std::array<double, kNumConstraints> sigma{};   // bias, same units as the barrier row
  double delta0 = 3.0;                           // K/rad, sun-incidence weight
  double delta1 = 1.0;                           // K/rad, earth-incidence weight
  double delta2 = 300.0;                         // J/rad, panel-incidence weight
  double slack_penalty = 1e12;
};

struct SpacecraftParams {
  // rigid body
  double j1 = 0.022;  // kg m^2
  double j2 = 0.044;  // kg m^2
  double j3 = 0.056;  // kg m^2
  double wheel_inertia = 4.1e-5;  // kg m^2, wheel spin-axis inertia
  bool wheel_reaction_torque = false;  // negate wheel torque on the body

  // thermal node on the -y body face
  double node_mass = 2.0;       // kg
  double node_area = 0.03;      // m^2
  double specific_heat = 900.0; // J/(kg K)
  double absorptivity = 0.13;
  double emissivity = 0.06;
  double solar_constant = 1367.0;  // W/m^2
  double albedo_factor = 0.27;
  double earth_temp = 255.0;       // K
  double stefan_boltzmann = 5.67051e-8;  // W/(m^2 K^4)

  // solar panel on the +z body face
  double panel_area = 0.03;        // m^2
  double panel_ideal_perf = 983.3; // W/m^2
  double panel_degradation = 0.77;
  double power_out = 15.0;         // W, constant bus load

  // environment
  double mean_motion = 0.001027;  // rad/s, sun sweep rate

  // limits
  double omega_max = deg2rad(1.0);      // rad/s
  double omega_dot_max = deg2rad(2.0);  // rad/s^2
  double psi_max = 576.0;               // rad/s
  double psi_dot_max = 181.3;           // rad/s^2

  // constraint geometry and thresholds
  double ez_fov = deg2rad(60.0);     // sensor field of view
  double ez_buffer = deg2rad(10.0);  // extra cone padding
  double comm_fov = deg2rad(180.0);  // antenna field of view
  double t_max = 283.15;             // K
  double e_min = 1000.0;             // J

  BarrierTuning tuning = default_tuning();

  static BarrierTuning default_tuning();
  void validate() const;
};

inline BarrierTuning SpacecraftParams::default_tuning() {
  BarrierTuning t;
  auto set = [&t](ConstraintId id, double k1, double k2, double s) {
    const int i = constraint_index(id);
    t.kappa1[i] = k1;
    t.kappa2[i] = k2;
    t.sigma[i] = s;
  };
  set(ConstraintId::ExclusionZone, 0.2, 0.2, 1e-3);
  set(ConstraintId::Communication, 0.2, 0.2, 1e-3);
  set(ConstraintId::Temperature, 0.02, 0.05, 0.0);
  set(ConstraintId::Battery, 0.01, 0.05, 1.0);
  for (ConstraintId id : {ConstraintId::Omega1, ConstraintId::Omega2, ConstraintId::Omega3})
    set(id, 1.0, 0.0, 5e-5);
  for (ConstraintId id : {ConstraintId::Psi1, ConstraintId::Psi2, ConstraintId::Psi3})
    set(id, 0.5, 0.0, 0.0);
  return t;
}

inline void SpacecraftParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("SpacecraftParams: ") + name + " must be positive");
  };
  positive(j1, "j1");
  positive(j2, "j2");
  positive(j3, "j3");
  positive(wheel_inertia, "wheel_inertia");
  positive(node_mass, "node_mass");
  positive(node_area, "node_area");
  positive(specific_heat, "specific_heat");
  positive(absorptivity, "absorptivity");
  positive(emissivity, "emissivity");
  positive(solar_constant, "solar_constant");
  positive(earth_temp, "earth_temp");
  positive(stefan_boltzmann, "stefan_boltzmann");
  positive(panel_area, "panel_area");
  positive(panel_ideal_perf, "panel_ideal_perf");
  positive(panel_degradation, "panel_degradation");
  positive(omega_max, "omega_max");
  positive(omega_dot_max, "omega_dot_max");
  positive(psi_max, "psi_max");
  positive(psi_dot_max, "psi_dot_max");
  positive(ez_fov, "ez_fov");
  positive(comm_fov, "comm_fov");
  positive(t_max, "t_max");
  positive(tuning.slack_penalty, "tuning.slack_penalty");
  if (albedo_factor < 0.0) throw std::invalid_argument("SpacecraftParams: albedo_factor must be non-negative");
  if (ez_buffer < 0.0) throw std::invalid_argument("SpacecraftParams: ez_buffer must be non-negative");
  if (e_min < 0.0) throw std::invalid_argument("SpacecraftParams: e_min must be non-negative");
  if (power_out < 0.0) throw std::invalid_argument("SpacecraftParams: power_out must be non-negative");
  for (ConstraintId id : kAllConstraints) {
    const int i = constraint_index(id);
    if (!(tuning.kappa1[i] > 0.0))
      throw std::invalid_argument(std::string("SpacecraftParams: tuning.kappa1 for ") + constraint_name(id) + " must be positive");
    if (relative_degree(id) == 2 && !(tuning.kappa2[i] > 0.0))
      throw std::invalid_argument(std::string("SpacecraftParams: tuning.kappa2 for ") + constraint_name(id) + " must be positive");
  }
  if (tuning.delta0 < 0.0 || tuning.delta1 < 0.0 || tuning.delta2 < 0.0)
    throw std::invalid_argument("SpacecraftParams: tuning deltas must be non-negative");
}

}  // namespace rta
