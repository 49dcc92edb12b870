#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>

#include "rta/harness.hpp"
#include "rta/log.hpp"

namespace rta {

using ojson = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a run needs, with every physical constant overridable from the
// config file.
struct RunSetup {
  SpacecraftParams params;
  EpisodeConfig episode;
  CampaignConfig campaign;
};

// The stock single-episode scenario: aggressive quaternion tracking from a
// safe initial state, identity command first, then a flip about +y.
inline FullState default_scenario_state() {
  FullState st;
  st.q = Quaternion{0.680, -0.151, 0.630, 0.343}.normalized();
  st.temperature = 281.65;  // 8.5 C
  st.energy = 7300.0;
  st.sun_angle = wrap_angle(deg2rad(525.0));
  return st;
}

inline std::vector<ScheduleEntry> default_scenario_schedule() {
  return {{0.0, Quaternion::identity()}, {1000.0, Quaternion{0.0, 1.0, 0.0, 0.0}}};
}

inline EpisodeConfig default_episode_config() {
  EpisodeConfig e;
  e.controller = ControllerKind::Pd;
  e.pd.schedule = default_scenario_schedule();
  e.initial = default_scenario_state();
  return e;
}

inline RunSetup default_run_setup() {
  RunSetup s;
  s.episode = default_episode_config();
  s.campaign.n = 200;
  s.campaign.seed = 1;
  s.campaign.workers = 1;
  s.campaign.ranges = SampleRanges::defaults(s.params);
  s.campaign.episode.controller = ControllerKind::Zero;
  s.campaign.episode.record_trajectory = false;
  return s;
}

namespace io_detail {

inline const ojson* find(const ojson& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &it.value();
}

inline void check_keys(const ojson& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(path + "." + it.key() + ": unknown key");
  }
}

inline double get_num(const ojson& obj, const std::string& path, const char* key, double def,
                      double lo = -std::numeric_limits<double>::infinity(),
                      double hi = std::numeric_limits<double>::infinity()) {
  const ojson* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number()) throw ConfigError(path + "." + key + ": expected a number");
  const double d = v->get<double>();
  if (!(d >= lo && d <= hi)) {
    std::ostringstream msg;
    msg << path << "." << key << ": value " << d << " out of range [" << lo << ", " << hi << "]";
    throw ConfigError(msg.str());
  }
  return d;
}

inline double get_pos(const ojson& obj, const std::string& path, const char* key, double def) {
  const double d = get_num(obj, path, key, def);
  if (!(d > 0.0)) throw ConfigError(path + "." + key + ": must be positive");
  return d;
}

inline bool get_bool(const ojson& obj, const std::string& path, const char* key, bool def) {
  const ojson* v = find(obj, key);
  if (!v) return def;
  if (!v->is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
  return v->get<bool>();
}

inline int get_int(const ojson& obj, const std::string& path, const char* key, int def, int lo,
                   int hi) {
  const ojson* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  const long long d = v->get<long long>();
  if (d < lo || d > hi) {
    std::ostringstream msg;
    msg << path << "." << key << ": value " << d << " out of range [" << lo << ", " << hi << "]";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(d);
}

inline uint64_t get_seed(const ojson& obj, const std::string& path, const char* key, uint64_t def) {
  const ojson* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer seed");
  return v->get<uint64_t>();
}

inline std::array<double, 2> get_range(const ojson& obj, const std::string& path, const char* key,
                                       std::array<double, 2> def) {
  const ojson* v = find(obj, key);
  if (!v) return def;
  if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
    throw ConfigError(path + "." + key + ": expected [lo, hi]");
  const std::array<double, 2> r = {(*v)[0].get<double>(), (*v)[1].get<double>()};
  if (!(r[0] < r[1])) throw ConfigError(path + "." + key + ": lo must be below hi");
  return r;
}

inline Vec3 get_vec3(const ojson& obj, const std::string& path, const char* key, Vec3 def) {
  const ojson* v = find(obj, key);
  if (!v) return def;
  if (!v->is_array() || v->size() != 3)
    throw ConfigError(path + "." + key + ": expected an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!(*v)[i].is_number()) throw ConfigError(path + "." + key + ": expected numbers");
    out[i] = (*v)[i].get<double>();
  }
  return out;
}

inline Vec4 get_vec4(const ojson& obj, const std::string& path, const char* key, Vec4 def) {
  const ojson* v = find(obj, key);
  if (!v) return def;
  if (!v->is_array() || v->size() != 4)
    throw ConfigError(path + "." + key + ": expected an array of 4 numbers");
  Vec4 out;
  for (int i = 0; i < 4; ++i) {
    if (!(*v)[i].is_number()) throw ConfigError(path + "." + key + ": expected numbers");
    out[i] = (*v)[i].get<double>();
  }
  return out;
}

inline void parse_constraint_list(const ojson& obj, const std::string& path, const char* key,
                                  std::array<bool, kNumConstraints>& flags) {
  const ojson* v = find(obj, key);
  if (!v) return;
  if (!v->is_array()) throw ConfigError(path + "." + key + ": expected an array of names");
  flags.fill(false);
  for (const auto& e : *v) {
    if (!e.is_string()) throw ConfigError(path + "." + key + ": expected constraint names");
    ConstraintId id;
    if (!parse_constraint_name(e.get<std::string>(), &id))
      throw ConfigError(path + "." + key + ": unknown constraint '" + e.get<std::string>() + "'");
    flags[constraint_index(id)] = true;
  }
}

inline void parse_tuning_map(const ojson& obj, const std::string& path, const char* key,
                             std::array<double, kNumConstraints>& values, bool must_be_positive) {
  const ojson* v = find(obj, key);
  if (!v) return;
  if (!v->is_object()) throw ConfigError(path + "." + key + ": expected a name->value object");
  for (auto it = v->begin(); it != v->end(); ++it) {
    ConstraintId id;
    if (!parse_constraint_name(it.key(), &id))
      throw ConfigError(path + "." + key + "." + it.key() + ": unknown constraint");
    if (!it.value().is_number())
      throw ConfigError(path + "." + key + "." + it.key() + ": expected a number");
    const double d = it.value().get<double>();
    if (must_be_positive && !(d > 0.0))
      throw ConfigError(path + "." + key + "." + it.key() + ": must be positive");
    values[constraint_index(id)] = d;
  }
}

inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace io_detail

inline RunSetup parse_config_json(const ojson& j) {
  using namespace io_detail;
  RunSetup s = default_run_setup();
  SpacecraftParams& p = s.params;

  check_keys(j, "config",
             {"spacecraft", "thermal", "power", "orbit", "limits", "constraints", "filter",
              "episode", "campaign"});

  if (const ojson* o = find(j, "spacecraft")) {
    check_keys(*o, "spacecraft", {"j1", "j2", "j3", "wheel_inertia", "wheel_reaction_torque"});
    p.j1 = get_pos(*o, "spacecraft", "j1", p.j1);
    p.j2 = get_pos(*o, "spacecraft", "j2", p.j2);
    p.j3 = get_pos(*o, "spacecraft", "j3", p.j3);
    p.wheel_inertia = get_pos(*o, "spacecraft", "wheel_inertia", p.wheel_inertia);
    p.wheel_reaction_torque = get_bool(*o, "spacecraft", "wheel_reaction_torque", p.wheel_reaction_torque);
  }

  if (const ojson* o = find(j, "thermal")) {
    check_keys(*o, "thermal",
               {"node_mass_kg", "node_area_m2", "specific_heat", "absorptivity", "emissivity",
                "solar_constant", "albedo_factor", "earth_temp_k", "stefan_boltzmann"});
    p.node_mass = get_pos(*o, "thermal", "node_mass_kg", p.node_mass);
    p.node_area = get_pos(*o, "thermal", "node_area_m2", p.node_area);
    p.specific_heat = get_pos(*o, "thermal", "specific_heat", p.specific_heat);
    p.absorptivity = get_pos(*o, "thermal", "absorptivity", p.absorptivity);
    p.emissivity = get_pos(*o, "thermal", "emissivity", p.emissivity);
    p.solar_constant = get_pos(*o, "thermal", "solar_constant", p.solar_constant);
    p.albedo_factor = get_num(*o, "thermal", "albedo_factor", p.albedo_factor, 0.0, 1.0);
    p.earth_temp = get_pos(*o, "thermal", "earth_temp_k", p.earth_temp);
    p.stefan_boltzmann = get_pos(*o, "thermal", "stefan_boltzmann", p.stefan_boltzmann);
  }

  if (const ojson* o = find(j, "power")) {
    check_keys(*o, "power",
               {"panel_area_m2", "ideal_performance_w_m2", "inherent_degradation", "power_out_w"});
    p.panel_area = get_pos(*o, "power", "panel_area_m2", p.panel_area);
    p.panel_ideal_perf = get_pos(*o, "power", "ideal_performance_w_m2", p.panel_ideal_perf);
    p.panel_degradation = get_num(*o, "power", "inherent_degradation", p.panel_degradation, 0.0, 1.0);
    p.power_out = get_num(*o, "power", "power_out_w", p.power_out, 0.0,
                          std::numeric_limits<double>::infinity());
  }

  if (const ojson* o = find(j, "orbit")) {
    check_keys(*o, "orbit", {"mean_motion_rad_s"});
    p.mean_motion = get_pos(*o, "orbit", "mean_motion_rad_s", p.mean_motion);
  }

  if (const ojson* o = find(j, "limits")) {
    check_keys(*o, "limits",
               {"omega_max_deg_s", "omega_dot_max_deg_s2", "psi_max_rad_s", "psi_dot_max_rad_s2"});
    p.omega_max = deg2rad(get_pos(*o, "limits", "omega_max_deg_s", rad2deg(p.omega_max)));
    p.omega_dot_max = deg2rad(get_pos(*o, "limits", "omega_dot_max_deg_s2", rad2deg(p.omega_dot_max)));
    p.psi_max = get_pos(*o, "limits", "psi_max_rad_s", p.psi_max);
    p.psi_dot_max = get_pos(*o, "limits", "psi_dot_max_rad_s2", p.psi_dot_max);
  }

  if (const ojson* o = find(j, "constraints")) {
    check_keys(*o, "constraints",
               {"ez_fov_deg", "ez_buffer_deg", "comm_fov_deg", "t_max_c", "e_min_j",
                "delta0_k_per_rad", "delta1_k_per_rad", "delta2_j_per_rad", "slack_penalty",
                "kappa1", "kappa2", "sigma"});
    p.ez_fov = deg2rad(get_pos(*o, "constraints", "ez_fov_deg", rad2deg(p.ez_fov)));
    p.ez_buffer = deg2rad(get_num(*o, "constraints", "ez_buffer_deg", rad2deg(p.ez_buffer), 0.0, 180.0));
    p.comm_fov = deg2rad(get_pos(*o, "constraints", "comm_fov_deg", rad2deg(p.comm_fov)));
    p.t_max = get_num(*o, "constraints", "t_max_c", p.t_max - 273.15, -273.15,
                      std::numeric_limits<double>::infinity()) + 273.15;
    p.e_min = get_num(*o, "constraints", "e_min_j", p.e_min, 0.0,
                      std::numeric_limits<double>::infinity());
    p.tuning.delta0 = get_num(*o, "constraints", "delta0_k_per_rad", p.tuning.delta0, 0.0, 1e6);
    p.tuning.delta1 = get_num(*o, "constraints", "delta1_k_per_rad", p.tuning.delta1, 0.0, 1e6);
    p.tuning.delta2 = get_num(*o, "constraints", "delta2_j_per_rad", p.tuning.delta2, 0.0, 1e9);
    p.tuning.slack_penalty = get_pos(*o, "constraints", "slack_penalty", p.tuning.slack_penalty);
    parse_tuning_map(*o, "constraints", "kappa1", p.tuning.kappa1, true);
    parse_tuning_map(*o, "constraints", "kappa2", p.tuning.kappa2, false);
    parse_tuning_map(*o, "constraints", "sigma", p.tuning.sigma, false);
  }

  FilterConfig fc = FilterConfig::defaults();
  if (const ojson* o = find(j, "filter")) {
    check_keys(*o, "filter", {"enabled", "slack", "pass_through_on_failure"});
    parse_constraint_list(*o, "filter", "enabled", fc.enabled);
    parse_constraint_list(*o, "filter", "slack", fc.slacked);
    fc.pass_through_on_failure =
        get_bool(*o, "filter", "pass_through_on_failure", fc.pass_through_on_failure);
  }
  try {
    fc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("filter: ") + e.what());
  }
  s.episode.filter = fc;
  s.campaign.episode.filter = fc;

  if (const ojson* o = find(j, "episode")) {
    check_keys(*o, "episode",
               {"duration_s", "dt_s", "substeps", "rta", "controller", "initial", "sample_seed",
                "sample_buffer"});
    s.episode.duration = get_pos(*o, "episode", "duration_s", s.episode.duration);
    s.episode.dt = get_pos(*o, "episode", "dt_s", s.episode.dt);
    s.episode.substeps = get_int(*o, "episode", "substeps", s.episode.substeps, 1, 1000);
    s.episode.rta_enabled = get_bool(*o, "episode", "rta", s.episode.rta_enabled);
    if (const ojson* c = find(*o, "controller")) {
      check_keys(*c, "episode.controller", {"type", "kp", "kd", "schedule"});
      const ojson* tv = find(*c, "type");
      std::string type = tv ? tv->get<std::string>() : "pd";
      if (tv && !tv->is_string()) throw ConfigError("episode.controller.type: expected a string");
      if (type == "zero") {
        s.episode.controller = ControllerKind::Zero;
      } else if (type == "pd") {
        s.episode.controller = ControllerKind::Pd;
      } else {
        throw ConfigError("episode.controller.type: expected 'pd' or 'zero'");
      }
      s.episode.pd.kp = get_num(*c, "episode.controller", "kp", s.episode.pd.kp, 0.0, 1e6);
      s.episode.pd.kd = get_num(*c, "episode.controller", "kd", s.episode.pd.kd, 0.0, 1e6);
      if (const ojson* sched = find(*c, "schedule")) {
        if (!sched->is_array() || sched->empty())
          throw ConfigError("episode.controller.schedule: expected a non-empty array");
        s.episode.pd.schedule.clear();
        int k = 0;
        for (const auto& entry : *sched) {
          const std::string path = "episode.controller.schedule[" + std::to_string(k++) + "]";
          check_keys(entry, path, {"t", "q"});
          ScheduleEntry se;
          se.start_time = get_num(entry, path, "t", 0.0, 0.0, 1e12);
          const Vec4 qv = get_vec4(entry, path, "q", {0.0, 0.0, 0.0, 1.0});
          se.q_c = Quaternion::from_vec4(qv);
          if (std::abs(se.q_c.norm() - 1.0) > 1e-6)
            throw ConfigError(path + ".q: quaternion must be unit norm");
          s.episode.pd.schedule.push_back(se);
        }
      }
    }
    if (const ojson* init = find(*o, "initial")) {
      check_keys(*init, "episode.initial",
                 {"q", "omega_deg_s", "psi_rad_s", "t_c", "e_j", "theta_s_deg"});
      FullState st = default_scenario_state();
      const Vec4 qv = get_vec4(*init, "episode.initial", "q", st.q.as_vec4());
      st.q = Quaternion::from_vec4(qv);
      if (std::abs(st.q.norm() - 1.0) > 1e-3)
        throw ConfigError("episode.initial.q: quaternion must be close to unit norm");
      st.q = st.q.normalized();
      Vec3 w_deg = {rad2deg(st.omega[0]), rad2deg(st.omega[1]), rad2deg(st.omega[2])};
      w_deg = get_vec3(*init, "episode.initial", "omega_deg_s", w_deg);
      st.omega = {deg2rad(w_deg[0]), deg2rad(w_deg[1]), deg2rad(w_deg[2])};
      st.psi = get_vec3(*init, "episode.initial", "psi_rad_s", st.psi);
      st.temperature =
          get_num(*init, "episode.initial", "t_c", st.temperature - 273.15, -273.15, 1e6) + 273.15;
      st.energy = get_num(*init, "episode.initial", "e_j", st.energy, 0.0, 1e12);
      st.sun_angle = wrap_angle(
          deg2rad(get_num(*init, "episode.initial", "theta_s_deg", rad2deg(st.sun_angle), -1e9, 1e9)));
      s.episode.initial = st;
    }
    if (find(*o, "sample_seed")) {
      s.episode.sample_seed = get_seed(*o, "episode", "sample_seed", s.episode.sample_seed);
      s.episode.initial.reset();  // sampled start overrides the explicit one
    }
    s.episode.sample_buffer =
        get_num(*o, "episode", "sample_buffer", s.episode.sample_buffer, 0.0, 0.49);
  }

  if (const ojson* o = find(j, "campaign")) {
    check_keys(*o, "campaign",
               {"n", "seed", "workers", "buffer", "duration_s", "dt_s", "controller_type", "ranges"});
    s.campaign.n = get_int(*o, "campaign", "n", s.campaign.n, 1, 10000000);
    s.campaign.seed = get_seed(*o, "campaign", "seed", s.campaign.seed);
    s.campaign.workers = get_int(*o, "campaign", "workers", s.campaign.workers, 1, 1024);
    s.campaign.buffer = get_num(*o, "campaign", "buffer", s.campaign.buffer, 0.0, 0.49);
    s.campaign.episode.duration =
        get_pos(*o, "campaign", "duration_s", s.campaign.episode.duration);
    s.campaign.episode.dt = get_pos(*o, "campaign", "dt_s", s.campaign.episode.dt);
    if (const ojson* tv = find(*o, "controller_type")) {
      if (!tv->is_string()) throw ConfigError("campaign.controller_type: expected a string");
      const std::string type = tv->get<std::string>();
      if (type == "zero") {
        s.campaign.episode.controller = ControllerKind::Zero;
      } else if (type == "pd") {
        s.campaign.episode.controller = ControllerKind::Pd;
        s.campaign.episode.pd = s.episode.pd;
      } else {
        throw ConfigError("campaign.controller_type: expected 'pd' or 'zero'");
      }
    }
    SampleRanges r = SampleRanges::defaults(p);
    if (const ojson* rv = find(*o, "ranges")) {
      check_keys(*rv, "campaign.ranges", {"omega_deg_s", "psi_rad_s", "t_c", "e_j", "theta_s_deg"});
      const auto w = get_range(*rv, "campaign.ranges", "omega_deg_s",
                               {rad2deg(r.lo[0]), rad2deg(r.hi[0])});
      const auto ps = get_range(*rv, "campaign.ranges", "psi_rad_s", {r.lo[3], r.hi[3]});
      const auto tc = get_range(*rv, "campaign.ranges", "t_c", {r.lo[6] - 273.15, r.hi[6] - 273.15});
      const auto ej = get_range(*rv, "campaign.ranges", "e_j", {r.lo[7], r.hi[7]});
      const auto th = get_range(*rv, "campaign.ranges", "theta_s_deg",
                                {rad2deg(r.lo[8]), rad2deg(r.hi[8])});
      for (int i = 0; i < 3; ++i) {
        r.lo[i] = deg2rad(w[0]);
        r.hi[i] = deg2rad(w[1]);
        r.lo[3 + i] = ps[0];
        r.hi[3 + i] = ps[1];
      }
      r.lo[6] = tc[0] + 273.15;
      r.hi[6] = tc[1] + 273.15;
      r.lo[7] = ej[0];
      r.hi[7] = ej[1];
      r.lo[8] = deg2rad(th[0]);
      r.hi[8] = deg2rad(th[1]);
    }
    s.campaign.ranges = r;
  } else {
    s.campaign.ranges = SampleRanges::defaults(p);
  }

  try {
    p.validate();
    s.episode.validate();
    s.campaign.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline RunSetup parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) text = "{}";
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config_json(j);
}

inline ojson serialize_config(const RunSetup& s) {
  const SpacecraftParams& p = s.params;
  ojson j;
  j["spacecraft"] = {{"j1", p.j1},
                     {"j2", p.j2},
                     {"j3", p.j3},
                     {"wheel_inertia", p.wheel_inertia},
                     {"wheel_reaction_torque", p.wheel_reaction_torque}};
  j["thermal"] = {{"node_mass_kg", p.node_mass},
                  {"node_area_m2", p.node_area},
                  {"specific_heat", p.specific_heat},
                  {"absorptivity", p.absorptivity},
                  {"emissivity", p.emissivity},
                  {"solar_constant", p.solar_constant},
                  {"albedo_factor", p.albedo_factor},
                  {"earth_temp_k", p.earth_temp},
                  {"stefan_boltzmann", p.stefan_boltzmann}};
  j["power"] = {{"panel_area_m2", p.panel_area},
                {"ideal_performance_w_m2", p.panel_ideal_perf},
                {"inherent_degradation", p.panel_degradation},
                {"power_out_w", p.power_out}};
  j["orbit"] = {{"mean_motion_rad_s", p.mean_motion}};
  j["limits"] = {{"omega_max_deg_s", rad2deg(p.omega_max)},
                 {"omega_dot_max_deg_s2", rad2deg(p.omega_dot_max)},
                 {"psi_max_rad_s", p.psi_max},
                 {"psi_dot_max_rad_s2", p.psi_dot_max}};
  ojson kappa1, kappa2, sigma;
  for (ConstraintId id : kAllConstraints) {
    const int i = constraint_index(id);
    kappa1[constraint_name(id)] = p.tuning.kappa1[i];
    kappa2[constraint_name(id)] = p.tuning.kappa2[i];
    sigma[constraint_name(id)] = p.tuning.sigma[i];
  }
  j["constraints"] = {{"ez_fov_deg", rad2deg(p.ez_fov)},
                      {"ez_buffer_deg", rad2deg(p.ez_buffer)},
                      {"comm_fov_deg", rad2deg(p.comm_fov)},
                      {"t_max_c", p.t_max - 273.15},
                      {"e_min_j", p.e_min},
                      {"delta0_k_per_rad", p.tuning.delta0},
                      {"delta1_k_per_rad", p.tuning.delta1},
                      {"delta2_j_per_rad", p.tuning.delta2},
                      {"slack_penalty", p.tuning.slack_penalty},
                      {"kappa1", kappa1},
                      {"kappa2", kappa2},
                      {"sigma", sigma}};
  ojson enabled = ojson::array();
  ojson slack = ojson::array();
  for (ConstraintId id : kAllConstraints) {
    const int i = constraint_index(id);
    if (s.episode.filter.enabled[i]) enabled.push_back(constraint_name(id));
    if (s.episode.filter.slacked[i]) slack.push_back(constraint_name(id));
  }
  j["filter"] = {{"enabled", enabled},
                 {"slack", slack},
                 {"pass_through_on_failure", s.episode.filter.pass_through_on_failure}};

  ojson ep;
  ep["duration_s"] = s.episode.duration;
  ep["dt_s"] = s.episode.dt;
  ep["substeps"] = s.episode.substeps;
  ep["rta"] = s.episode.rta_enabled;
  ojson ctrl;
  ctrl["type"] = s.episode.controller == ControllerKind::Pd ? "pd" : "zero";
  ctrl["kp"] = s.episode.pd.kp;
  ctrl["kd"] = s.episode.pd.kd;
  ojson sched = ojson::array();
  for (const ScheduleEntry& e : s.episode.pd.schedule)
    sched.push_back({{"t", e.start_time}, {"q", {e.q_c.q1, e.q_c.q2, e.q_c.q3, e.q_c.q4}}});
  ctrl["schedule"] = sched;
  ep["controller"] = ctrl;
  if (s.episode.initial) {
    const FullState& st = *s.episode.initial;
    ep["initial"] = {{"q", {st.q.q1, st.q.q2, st.q.q3, st.q.q4}},
                     {"omega_deg_s", {rad2deg(st.omega[0]), rad2deg(st.omega[1]), rad2deg(st.omega[2])}},
                     {"psi_rad_s", {st.psi[0], st.psi[1], st.psi[2]}},
                     {"t_c", st.temperature - 273.15},
                     {"e_j", st.energy},
                     {"theta_s_deg", rad2deg(st.sun_angle)}};
  } else {
    ep["sample_seed"] = s.episode.sample_seed;
  }
  ep["sample_buffer"] = s.episode.sample_buffer;
  j["episode"] = ep;

  const SampleRanges& r = s.campaign.ranges;
  j["campaign"] = {
      {"n", s.campaign.n},
      {"seed", s.campaign.seed},
      {"workers", s.campaign.workers},
      {"buffer", s.campaign.buffer},
      {"duration_s", s.campaign.episode.duration},
      {"dt_s", s.campaign.episode.dt},
      {"controller_type", s.campaign.episode.controller == ControllerKind::Pd ? "pd" : "zero"},
      {"ranges",
       {{"omega_deg_s", {rad2deg(r.lo[0]), rad2deg(r.hi[0])}},
        {"psi_rad_s", {r.lo[3], r.hi[3]}},
        {"t_c", {r.lo[6] - 273.15, r.hi[6] - 273.15}},
        {"e_j", {r.lo[7], r.hi[7]}},
        {"theta_s_deg", {rad2deg(r.lo[8]), rad2deg(r.hi[8])}}}}};
  return j;
}

// --- output writers ---

inline const char* qp_status_csv(const StepRecord& rec) {
  if (!rec.rta_active) return "none";
  return qp_status_name(rec.qp_status);
}

inline void write_trajectory_csv(const EpisodeResult& res, const std::string& path) {
  using io_detail::fmt_full;
  if (res.trajectory.empty())
    throw std::invalid_argument("write_trajectory_csv: empty trajectory");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);

  out << "t,q1,q2,q3,q4,omega1,omega2,omega3,psi1,psi2,psi3,T_C,E_J,theta_S,"
         "theta_sun_sensor,theta_earth_antenna,"
         "u_des1,u_des2,u_des3,u_act1,u_act2,u_act3";
  for (ConstraintId id : kAllConstraints) out << ",margin_" << constraint_name(id);
  out << ",qp_status\n";

  for (const StepRecord& rec : res.trajectory) {
    const FullState& st = rec.state;
    out << fmt_full(rec.t) << ',' << fmt_full(st.q.q1) << ',' << fmt_full(st.q.q2) << ','
        << fmt_full(st.q.q3) << ',' << fmt_full(st.q.q4);
    for (int i = 0; i < 3; ++i) out << ',' << fmt_full(st.omega[i]);
    for (int i = 0; i < 3; ++i) out << ',' << fmt_full(st.psi[i]);
    out << ',' << fmt_full(st.temperature - 273.15) << ',' << fmt_full(st.energy) << ','
        << fmt_full(st.sun_angle) << ',' << fmt_full(rec.theta_sun_sensor) << ','
        << fmt_full(rec.theta_earth_antenna);
    for (int i = 0; i < 3; ++i) out << ',' << fmt_full(rec.u_des[i]);
    for (int i = 0; i < 3; ++i) out << ',' << fmt_full(rec.u_act[i]);
    for (int i = 0; i < kNumConstraints; ++i) out << ',' << fmt_full(rec.margin[i]);
    out << ',' << qp_status_csv(rec) << '\n';
  }
  if (!out) throw std::runtime_error("write_trajectory_csv: write failed for " + path);
}

inline void write_campaign_json(const CampaignSummary& sum, const CampaignConfig& cfg,
                                const SpacecraftParams& p, const std::string& path) {
  ojson j;
  j["n_episodes"] = sum.n_episodes;
  j["success_rate"] = sum.success_rate;
  ojson pc;
  for (ConstraintId id : kAllConstraints)
    pc[constraint_name(id)] = sum.per_constraint_pct[constraint_index(id)];
  j["per_constraint_pct"] = pc;
  j["per_count_pct"] = {{"1", sum.per_count_pct[0]},
                        {"2", sum.per_count_pct[1]},
                        {"3", sum.per_count_pct[2]},
                        {"4_plus", sum.per_count_pct[3]}};
  ojson slack = ojson::array();
  for (ConstraintId id : kAllConstraints)
    if (cfg.episode.filter.slacked[constraint_index(id)]) slack.push_back(constraint_name(id));
  j["slack"] = slack;
  ojson seeds = ojson::array();
  for (const EpisodeBrief& b : sum.episodes) seeds.push_back(b.seed);
  j["seeds"] = {{"root", sum.root_seed}, {"episodes", seeds}};
  ojson kappa1, kappa2, sigma;
  for (ConstraintId id : kAllConstraints) {
    const int i = constraint_index(id);
    kappa1[constraint_name(id)] = p.tuning.kappa1[i];
    kappa2[constraint_name(id)] = p.tuning.kappa2[i];
    sigma[constraint_name(id)] = p.tuning.sigma[i];
  }
  j["tuning"] = {{"kappa1", kappa1},
                 {"kappa2", kappa2},
                 {"sigma", sigma},
                 {"delta0_k_per_rad", p.tuning.delta0},
                 {"delta1_k_per_rad", p.tuning.delta1},
                 {"delta2_j_per_rad", p.tuning.delta2},
                 {"slack_penalty", p.tuning.slack_penalty}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_campaign_json: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_campaign_json: write failed for " + path);
}

// Per-panel plot files: value traces plus the constant boundary lines, enough
// to redraw every panel with any plotting tool.
inline void emit_plot_data(const EpisodeResult& res, const SpacecraftParams& p,
                           const std::string& dir) {
  using io_detail::fmt_full;
  if (res.trajectory.empty()) throw std::invalid_argument("emit_plot_data: empty trajectory");
  std::filesystem::create_directories(dir);

  auto open = [&dir](const char* name) {
    std::ofstream f(dir + "/" + name, std::ios::binary);
    if (!f) throw std::runtime_error(std::string("emit_plot_data: cannot open ") + name);
    return f;
  };

  {
    auto f = open("vectors.csv");
    f << "t,sun_x,sun_y,sun_z,boresight_x,boresight_y,boresight_z\n";
    for (const StepRecord& r : res.trajectory) {
      const Vec3 sun = sun_vector(r.state);
      const Vec3 bore = rotate_body_to_hill<double>(r.state.q.as_vec4(), kBoresightBody);
      f << fmt_full(r.t);
      for (double v : sun) f << ',' << fmt_full(v);
      for (double v : bore) f << ',' << fmt_full(v);
      f << '\n';
    }
  }
  {
    auto f = open("sun_angle.csv");
    const double bound = rad2deg(0.5 * p.ez_fov + p.ez_buffer);
    f << "t,theta_deg,boundary_deg\n";
    for (const StepRecord& r : res.trajectory)
      f << fmt_full(r.t) << ',' << fmt_full(rad2deg(r.theta_sun_sensor)) << ',' << fmt_full(bound)
        << '\n';
  }
  {
    auto f = open("earth_angle.csv");
    const double bound = rad2deg(0.5 * p.comm_fov);
    f << "t,theta_deg,boundary_deg\n";
    for (const StepRecord& r : res.trajectory)
      f << fmt_full(r.t) << ',' << fmt_full(rad2deg(r.theta_earth_antenna)) << ','
        << fmt_full(bound) << '\n';
  }
  {
    auto f = open("temperature.csv");
    f << "t,T_C,boundary_C\n";
    for (const StepRecord& r : res.trajectory)
      f << fmt_full(r.t) << ',' << fmt_full(r.state.temperature - 273.15) << ','
        << fmt_full(p.t_max - 273.15) << '\n';
  }
  {
    auto f = open("omega.csv");
    const double bound = rad2deg(p.omega_max);
    f << "t,omega1_deg_s,omega2_deg_s,omega3_deg_s,boundary_lo,boundary_hi\n";
    for (const StepRecord& r : res.trajectory) {
      f << fmt_full(r.t);
      for (int i = 0; i < 3; ++i) f << ',' << fmt_full(rad2deg(r.state.omega[i]));
      f << ',' << fmt_full(-bound) << ',' << fmt_full(bound) << '\n';
    }
  }
  {
    auto f = open("omega_dot.csv");
    const double bound = rad2deg(p.omega_dot_max);
    f << "t,omega_dot1_deg_s2,omega_dot2_deg_s2,omega_dot3_deg_s2,boundary_lo,boundary_hi\n";
    for (const StepRecord& r : res.trajectory) {
      const AttitudeDerivative d = attitude_derivative(r.state, ControlInput{r.u_act}, p);
      f << fmt_full(r.t);
      for (int i = 0; i < 3; ++i) f << ',' << fmt_full(rad2deg(d.omega_dot[i]));
      f << ',' << fmt_full(-bound) << ',' << fmt_full(bound) << '\n';
    }
  }
  {
    auto f = open("psi.csv");
    f << "t,psi1,psi2,psi3,boundary_lo,boundary_hi\n";
    for (const StepRecord& r : res.trajectory) {
      f << fmt_full(r.t);
      for (int i = 0; i < 3; ++i) f << ',' << fmt_full(r.state.psi[i]);
      f << ',' << fmt_full(-p.psi_max) << ',' << fmt_full(p.psi_max) << '\n';
    }
  }
  {
    auto f = open("psi_dot.csv");
    f << "t,psi_dot1,psi_dot2,psi_dot3,boundary_lo,boundary_hi\n";
    for (const StepRecord& r : res.trajectory) {
      f << fmt_full(r.t);
      for (int i = 0; i < 3; ++i) f << ',' << fmt_full(r.u_act[i]);
      f << ',' << fmt_full(-p.psi_dot_max) << ',' << fmt_full(p.psi_dot_max) << '\n';
    }
  }
  {
    auto f = open("energy.csv");
    f << "t,E_J,boundary_J\n";
    for (const StepRecord& r : res.trajectory)
      f << fmt_full(r.t) << ',' << fmt_full(r.state.energy) << ',' << fmt_full(p.e_min) << '\n';
  }
}

}  // namespace rta
