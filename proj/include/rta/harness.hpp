#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rta/controllers.hpp"
#include "rta/filter.hpp"
#include "rta/rng.hpp"

namespace rta {

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stratified samples in [0,1): each column, cut into n equal bins, holds
// exactly one sample per bin.
inline std::vector<std::vector<double>> latin_hypercube(int n, int dims, uint64_t seed) {
  if (n < 1 || dims < 1)
    throw std::invalid_argument("latin_hypercube: n and dims must be >= 1");
  Rng rng(seed);
  std::vector<std::vector<double>> out(n, std::vector<double>(dims));
  std::vector<int> perm(n);
  for (int d = 0; d < dims; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1))]);
    for (int i = 0; i < n; ++i)
      out[i][d] = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
  }
  return out;
}

// Box bounds for the nine sampled scalars: omega (3), psi (3), temperature,
// energy, sun angle. Attitude is drawn uniformly over rotations instead,
// unless pinned.
struct SampleRanges {
  std::array<double, 9> lo{};
  std::array<double, 9> hi{};
  std::optional<Quaternion> fixed_attitude;

  static SampleRanges defaults(const SpacecraftParams& p) {
    SampleRanges r;
    for (int i = 0; i < 3; ++i) {
      r.lo[i] = -p.omega_max;
      r.hi[i] = p.omega_max;
      r.lo[3 + i] = -p.psi_max;
      r.hi[3 + i] = p.psi_max;
    }
    r.lo[6] = 273.15;
    r.hi[6] = p.t_max;
    r.lo[7] = p.e_min;
    r.hi[7] = 10000.0;
    r.lo[8] = 0.0;
    r.hi[8] = kTwoPi;
    return r;
  }

  void validate() const {
    for (int i = 0; i < 9; ++i) {
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
        throw std::invalid_argument("SampleRanges: bounds must be finite with lo < hi");
    }
  }
};

inline FullState state_from_sample(const std::array<double, 9>& v, const Quaternion& att) {
  FullState st;
  st.q = att;
  st.omega = {v[0], v[1], v[2]};
  st.psi = {v[3], v[4], v[5]};
  st.temperature = v[6];
  st.energy = v[7];
  st.sun_angle = wrap_angle(v[8]);
  return st;
}

// Natural scale of each constraint margin (and of the lifted margins):
// largest value seen over the sampling box. Rejection thresholds are a
// fraction of these.
struct ConstraintScales {
  std::array<double, kNumConstraints> margin{};
  std::array<double, kNumConstraints> psi1{};
};

inline ConstraintScales estimate_constraint_scales(const SampleRanges& ranges,
                                                   const SpacecraftParams& p, int probes = 512) {
  Rng rng(0x5ca1e5eedULL);
  ConstraintScales sc;
  std::array<double, 9> v;
  for (int k = 0; k < probes; ++k) {
    for (int i = 0; i < 9; ++i) v[i] = rng.uniform(ranges.lo[i], ranges.hi[i]);
    const Quaternion att = ranges.fixed_attitude ? *ranges.fixed_attitude : rng.unit_quaternion();
    const FullState st = state_from_sample(v, att);
    const SafetyReport rep = evaluate_safety(st, p);
    for (int i = 0; i < kNumConstraints; ++i) {
      sc.margin[i] = std::max(sc.margin[i], rep.margin[i]);
      if (relative_degree(kAllConstraints[i]) == 2)
        sc.psi1[i] = std::max(sc.psi1[i], rep.psi1[i]);
    }
  }
  for (int i = 0; i < kNumConstraints; ++i) {
    if (!(sc.margin[i] > 0.0)) sc.margin[i] = 1.0;
    if (!(sc.psi1[i] > 0.0)) sc.psi1[i] = 1.0;
  }
  return sc;
}

inline bool initial_state_acceptable(const FullState& st, const SpacecraftParams& p,
                                     const ConstraintScales& sc, double buffer,
                                     int* rejecting = nullptr) {
  const SafetyReport rep = evaluate_safety(st, p);
  for (int i = 0; i < kNumConstraints; ++i) {
    if (rep.margin[i] < buffer * sc.margin[i]) {
      if (rejecting) *rejecting = i;
      return false;
    }
    if (relative_degree(kAllConstraints[i]) == 2 && rep.psi1[i] < buffer * sc.psi1[i]) {
      if (rejecting) *rejecting = i;
      return false;
    }
  }
  return true;
}

inline constexpr int kMaxSampleAttempts = 10000;

// Draws stratified candidates inside the buffer-shrunk box and keeps the
// first one whose margins (including the lifted ones) clear the buffered
// thresholds.
inline FullState sample_safe_initial(const SampleRanges& ranges, double buffer, uint64_t seed,
                                     const SpacecraftParams& p) {
  ranges.validate();
  const ConstraintScales sc = estimate_constraint_scales(ranges, p);
  SampleRanges shrunk = ranges;
  for (int i = 0; i < 9; ++i) {
    const double pad = buffer * (ranges.hi[i] - ranges.lo[i]);
    shrunk.lo[i] = ranges.lo[i] + pad;
    shrunk.hi[i] = ranges.hi[i] - pad;
  }
  Rng rng(seed);
  constexpr int kBatch = 64;
  int attempts = 0;
  std::array<int, kNumConstraints> rejections{};
  std::array<double, 9> v;
  while (attempts < kMaxSampleAttempts) {
    const auto lhs = latin_hypercube(kBatch, 9, rng.raw());
    for (const auto& row : lhs) {
      ++attempts;
      for (int i = 0; i < 9; ++i) v[i] = shrunk.lo[i] + row[i] * (shrunk.hi[i] - shrunk.lo[i]);
      const Quaternion att =
          ranges.fixed_attitude ? *ranges.fixed_attitude : rng.unit_quaternion();
      const FullState cand = state_from_sample(v, att);
      int rej = -1;
      if (initial_state_acceptable(cand, p, sc, buffer, &rej)) return cand;
      if (rej >= 0) ++rejections[rej];
      if (attempts >= kMaxSampleAttempts) break;
    }
  }
  int worst = 0;
  for (int i = 1; i < kNumConstraints; ++i)
    if (rejections[i] > rejections[worst]) worst = i;
  throw SamplingError(std::string("sample_safe_initial: no acceptable state after ") +
                      std::to_string(kMaxSampleAttempts) +
                      " attempts; most-binding constraint: " +
                      constraint_name(kAllConstraints[worst]));
}

enum class ControllerKind { Zero, Pd };

struct EpisodeConfig {
  double duration = 2000.0;  // s
  double dt = 1.0;           // s
  int substeps = 1;
  ControllerKind controller = ControllerKind::Zero;
  PdConfig pd;
  bool rta_enabled = true;
  FilterConfig filter = FilterConfig::defaults();
  std::optional<FullState> initial;
  uint64_t sample_seed = 0;
  double sample_buffer = 0.05;
  bool record_trajectory = true;

  int num_steps() const { return static_cast<int>(std::llround(duration / dt)); }

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("EpisodeConfig: dt must be positive");
    if (substeps < 1) throw std::invalid_argument("EpisodeConfig: substeps must be >= 1");
    const double steps = duration / dt;
    if (std::abs(steps - std::llround(steps)) > 1e-9 || steps < 1.0)
      throw std::invalid_argument("EpisodeConfig: duration must be a positive multiple of dt");
    filter.validate();
    if (controller == ControllerKind::Pd) pd.validate();
  }
};

struct StepRecord {
  double t = 0.0;
  FullState state;
  Vec3 u_des{};
  Vec3 u_act{};
  std::array<double, kNumConstraints> margin{};
  std::array<double, kNumConstraints> slack{};
  QpStatus qp_status = QpStatus::Optimal;
  bool rta_active = false;
  bool intervened = false;
  double theta_sun_sensor = 0.0;    // boresight-to-sun angle
  double theta_earth_antenna = 0.0; // antenna-to-earth angle
};

inline constexpr double kViolationTol = 1e-6;

struct EpisodeResult {
  std::vector<StepRecord> trajectory;
  bool passed = true;
  std::array<bool, kNumConstraints> violated{};      // non-slacked margins below tolerance
  std::array<bool, kNumConstraints> violated_any{};  // all constraints, slacked included
  std::array<double, kNumConstraints> min_margin{};
  double intervention_rate = 0.0;
  int qp_failures = 0;
  int authority_loss = 0;
  double wall_time_s = 0.0;
  std::string diagnostic;
  FullState final_state;
  uint64_t seed = 0;
};

inline EpisodeResult run_episode(const EpisodeConfig& cfg, const SpacecraftParams& p,
                                 const SampleRanges* ranges = nullptr) {
  cfg.validate();
  p.validate();
  const auto t_start = std::chrono::steady_clock::now();

  EpisodeResult res;
  res.seed = cfg.sample_seed;
  res.min_margin.fill(std::numeric_limits<double>::infinity());

  FullState state;
  if (cfg.initial) {
    state = *cfg.initial;
    state.q = state.q.normalized();
  } else {
    const SampleRanges r = ranges ? *ranges : SampleRanges::defaults(p);
    state = sample_safe_initial(r, cfg.sample_buffer, cfg.sample_seed, p);
  }

  AsifFilter filter(p, cfg.filter);
  const Vec3 accel_limit = filter.bounds().upper;
  const int steps = cfg.num_steps();
  if (cfg.record_trajectory) res.trajectory.reserve(steps);

  int interventions = 0;
  auto score_margins = [&](const SafetyReport& rep) {
    for (int i = 0; i < kNumConstraints; ++i) {
      res.min_margin[i] = std::min(res.min_margin[i], rep.margin[i]);
      if (rep.margin[i] < -kViolationTol) {
        res.violated_any[i] = true;
        if (!cfg.filter.slacked[i]) res.violated[i] = true;
      }
    }
  };

  for (int k = 0; k < steps; ++k) {
    const double t = k * cfg.dt;
    const SafetyReport rep = evaluate_safety(state, p);
    score_margins(rep);

    Vec3 u_des = cfg.controller == ControllerKind::Pd
                     ? pd_control(state, cfg.pd, t, accel_limit)
                     : zero_control();
    Vec3 u_act = u_des;
    QpStatus qp_status = QpStatus::Optimal;
    bool intervened = false;
    std::array<double, kNumConstraints> slack{};
    if (cfg.rta_enabled) {
      const FilterOutcome out = filter.filter(state, u_des);
      u_act = out.u_act;
      qp_status = out.qp_status;
      intervened = out.intervened;
      slack = out.slack;
      if (out.qp_status != QpStatus::Optimal) ++res.qp_failures;
      res.authority_loss += out.authority_loss;
      if (intervened) ++interventions;
    }

    if (cfg.record_trajectory) {
      StepRecord rec;
      rec.t = t;
      rec.state = state;
      rec.u_des = u_des;
      rec.u_act = u_act;
      rec.margin = rep.margin;
      rec.slack = slack;
      rec.qp_status = qp_status;
      rec.rta_active = cfg.rta_enabled;
      rec.intervened = intervened;
      const Vec3 sun = sun_vector(state);
      const Vec3 bore = rotate_body_to_hill<double>(state.q.as_vec4(), kBoresightBody);
      const Vec3 ant = rotate_body_to_hill<double>(state.q.as_vec4(), kAntennaBody);
      rec.theta_sun_sensor = acos_clamped(dot(bore, sun));
      rec.theta_earth_antenna = acos_clamped(dot(ant, kEarthDirection));
      res.trajectory.push_back(rec);
    }

    try {
      state = step(state, ControlInput{u_act}, cfg.dt, p, cfg.substeps);
    } catch (const IntegrationError& e) {
      res.diagnostic = e.what();
      res.passed = false;
      break;
    }
  }

  // the final state also counts toward the violation record
  score_margins(evaluate_safety(state, p));
  res.final_state = state;

  for (int i = 0; i < kNumConstraints; ++i)
    if (res.violated[i]) res.passed = false;
  res.intervention_rate = steps > 0 ? static_cast<double>(interventions) / steps : 0.0;
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

struct EpisodeBrief {
  uint64_t seed = 0;
  bool passed = true;
  std::array<bool, kNumConstraints> violated{};
  double intervention_rate = 0.0;
  int qp_failures = 0;
  FullState initial;
  std::string diagnostic;
};

struct CampaignConfig {
  int n = 200;
  uint64_t seed = 1;
  int workers = 1;
  SampleRanges ranges;
  double buffer = 0.05;
  EpisodeConfig episode;

  void validate() const {
    if (n < 1) throw std::invalid_argument("CampaignConfig: n must be >= 1");
    if (workers < 1) throw std::invalid_argument("CampaignConfig: workers must be >= 1");
    ranges.validate();
    episode.validate();
  }
};

struct CampaignSummary {
  int n_episodes = 0;
  double success_rate = 0.0;
  // Percentage of failed episodes violating each constraint; slacked
  // constraints never enter the failure accounting.
  std::array<double, kNumConstraints> per_constraint_pct{};
  // Of the failed episodes: share that violated exactly 1, 2, 3, or 4+.
  std::array<double, 4> per_count_pct{};
  uint64_t root_seed = 0;
  std::vector<EpisodeBrief> episodes;
  double wall_time_s = 0.0;
};

// Seeded Monte-Carlo campaign. One stratified candidate per episode comes
// from a campaign-level design; rejected candidates fall back to the
// episode's own sampler. All randomness derives from the root seed, so
// results do not depend on the worker count.
inline CampaignSummary run_campaign(const CampaignConfig& cfg, const SpacecraftParams& p) {
  cfg.validate();
  p.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const ConstraintScales scales = estimate_constraint_scales(cfg.ranges, p);
  SampleRanges shrunk = cfg.ranges;
  for (int i = 0; i < 9; ++i) {
    const double pad = cfg.buffer * (cfg.ranges.hi[i] - cfg.ranges.lo[i]);
    shrunk.lo[i] = cfg.ranges.lo[i] + pad;
    shrunk.hi[i] = cfg.ranges.hi[i] - pad;
  }

  const auto design = latin_hypercube(cfg.n, 9, derive_seed(cfg.seed, 0x1c5u));
  Rng att_rng(derive_seed(cfg.seed, 0xa77u));
  std::vector<Quaternion> attitudes(cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    attitudes[i] =
        cfg.ranges.fixed_attitude ? *cfg.ranges.fixed_attitude : att_rng.unit_quaternion();

  std::vector<EpisodeBrief> briefs(cfg.n);
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.n) return;
      EpisodeConfig ecfg = cfg.episode;
      ecfg.record_trajectory = false;
      ecfg.sample_seed = derive_seed(cfg.seed, static_cast<uint64_t>(i) + 1);

      std::array<double, 9> v;
      for (int d = 0; d < 9; ++d)
        v[d] = shrunk.lo[d] + design[i][d] * (shrunk.hi[d] - shrunk.lo[d]);
      FullState cand = state_from_sample(v, attitudes[i]);
      if (initial_state_acceptable(cand, p, scales, cfg.buffer)) {
        ecfg.initial = cand;
      } else {
        ecfg.initial.reset();  // episode draws its own via sample_safe_initial
        ecfg.sample_buffer = cfg.buffer;
      }

      EpisodeBrief brief;
      brief.seed = ecfg.sample_seed;
      try {
        const EpisodeResult r = run_episode(ecfg, p, &cfg.ranges);
        brief.passed = r.passed;
        brief.violated = r.violated;
        brief.intervention_rate = r.intervention_rate;
        brief.qp_failures = r.qp_failures;
        brief.initial = ecfg.initial ? *ecfg.initial : FullState{};
        brief.diagnostic = r.diagnostic;
      } catch (const SamplingError& e) {
        brief.passed = false;
        brief.diagnostic = e.what();
      }
      briefs[i] = brief;
    }
  };

  const int nw = std::min(cfg.workers, cfg.n);
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  CampaignSummary sum;
  sum.n_episodes = cfg.n;
  sum.root_seed = cfg.seed;
  sum.episodes = std::move(briefs);
  int failed = 0;
  std::array<int, kNumConstraints> per_constraint{};
  std::array<int, 4> per_count{};
  for (const EpisodeBrief& b : sum.episodes) {
    if (b.passed) continue;
    ++failed;
    int count = 0;
    for (int i = 0; i < kNumConstraints; ++i) {
      if (b.violated[i]) {
        ++per_constraint[i];
        ++count;
      }
    }
    if (count > 0) ++per_count[std::min(count, 4) - 1];
  }
  sum.success_rate = 1.0 - static_cast<double>(failed) / cfg.n;
  if (failed > 0) {
    for (int i = 0; i < kNumConstraints; ++i)
      sum.per_constraint_pct[i] = 100.0 * per_constraint[i] / failed;
    for (int k = 0; k < 4; ++k) sum.per_count_pct[k] = 100.0 * per_count[k] / failed;
  }
  sum.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return sum;
}

struct CalibrationOptions {
  int episodes = 50;
  double duration = 2000.0;
  int workers = 1;
  int max_rounds = 2;
};

struct CalibrationResult {
  BarrierTuning tuning;
  int violation_episodes = 0;
  bool converged = false;
};

namespace harness_detail {

struct TuningKnob {
  const char* name;
  std::vector<double> candidates;  // ascending magnitude preference
  void (*apply)(BarrierTuning&, double);
};

inline std::vector<TuningKnob> tuning_knobs() {
  auto kpair = [](ConstraintId id) {
    return [id](BarrierTuning& t, double v) {
      t.kappa1[constraint_index(id)] = v;
      t.kappa2[constraint_index(id)] = v;
    };
  };
  // function pointers need captureless lambdas; expand per constraint
  std::vector<TuningKnob> knobs;
  knobs.push_back({"kappa_exclusion", {0.05, 0.1, 0.2, 0.5}, [](BarrierTuning& t, double v) {
                     t.kappa1[0] = v;
                     t.kappa2[0] = v;
                   }});
  knobs.push_back({"kappa_communication", {0.05, 0.1, 0.2, 0.5}, [](BarrierTuning& t, double v) {
                     t.kappa1[1] = v;
                     t.kappa2[1] = v;
                   }});
  knobs.push_back({"kappa_temperature", {0.005, 0.01, 0.02, 0.05}, [](BarrierTuning& t, double v) {
                     t.kappa1[2] = v;
                     t.kappa2[2] = 2.0 * v;
                   }});
  knobs.push_back({"kappa_battery", {0.005, 0.01, 0.02, 0.05}, [](BarrierTuning& t, double v) {
                     t.kappa1[3] = v;
                     t.kappa2[3] = 2.0 * v;
                   }});
  knobs.push_back({"kappa_omega", {0.2, 0.5, 1.0, 2.0}, [](BarrierTuning& t, double v) {
                     for (int i = 4; i < 7; ++i) t.kappa1[i] = v;
                   }});
  knobs.push_back({"kappa_psi", {0.1, 0.2, 0.5, 1.0}, [](BarrierTuning& t, double v) {
                     for (int i = 7; i < 10; ++i) t.kappa1[i] = v;
                   }});
  knobs.push_back({"delta0", {1.0, 2.0, 3.0, 5.0, 10.0}, [](BarrierTuning& t, double v) { t.delta0 = v; }});
  knobs.push_back({"delta1", {0.5, 1.0, 2.0, 5.0}, [](BarrierTuning& t, double v) { t.delta1 = v; }});
  knobs.push_back({"delta2", {100.0, 200.0, 300.0, 500.0, 800.0}, [](BarrierTuning& t, double v) { t.delta2 = v; }});
  knobs.push_back({"sigma_exclusion", {0.0, 1e-3, 5e-3, 2e-2}, [](BarrierTuning& t, double v) { t.sigma[0] = v; }});
  knobs.push_back({"sigma_communication", {0.0, 1e-3, 5e-3}, [](BarrierTuning& t, double v) { t.sigma[1] = v; }});
  return knobs;
}

}  // namespace harness_detail

// Coordinate search over the tuning knobs: prefers the smallest values that
// eliminate non-slacked violations over a fixed set of seeded zero-controller
// episodes. Reports the best found tuning either way.
inline CalibrationResult calibrate_tuning(const SpacecraftParams& base, uint64_t seed,
                                          const CalibrationOptions& opts = {}) {
  SpacecraftParams work = base;

  auto violations = [&](const BarrierTuning& t) {
    work.tuning = t;
    CampaignConfig cc;
    cc.n = opts.episodes;
    cc.seed = seed;
    cc.workers = opts.workers;
    cc.ranges = SampleRanges::defaults(work);
    cc.episode.duration = opts.duration;
    cc.episode.controller = ControllerKind::Zero;
    cc.episode.rta_enabled = true;
    const CampaignSummary s = run_campaign(cc, work);
    int fails = 0;
    for (const auto& b : s.episodes) fails += b.passed ? 0 : 1;
    return fails;
  };

  const auto knobs = harness_detail::tuning_knobs();
  BarrierTuning best = base.tuning;
  int best_fails = violations(best);

  for (int round = 0; round < opts.max_rounds && best_fails > 0; ++round) {
    bool improved = false;
    for (const auto& knob : knobs) {
      for (double cand : knob.candidates) {
        BarrierTuning trial = best;
        knob.apply(trial, cand);
        try {
          work.tuning = trial;
          work.validate();
        } catch (const std::invalid_argument&) {
          continue;  // zero candidate on a gain that must stay positive
        }
        const int fails = violations(trial);
        if (fails < best_fails) {
          best = trial;
          best_fails = fails;
          improved = true;
        }
        if (best_fails == 0) break;
      }
      if (best_fails == 0) break;
    }
    if (!improved) break;
  }

  CalibrationResult out;
  out.tuning = best;
  out.violation_episodes = best_fails;
  out.converged = best_fails == 0;
  return out;
}

}  // namespace rta
