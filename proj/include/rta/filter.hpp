#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rta/qp.hpp"

namespace rta {

struct FilterConfig {
  std::array<bool, kNumConstraints> enabled{};
  std::array<bool, kNumConstraints> slacked{};
  bool pass_through_on_failure = true;  // hand u_des to the plant when the QP fails

  static FilterConfig defaults() {
    FilterConfig cfg;
    cfg.enabled.fill(true);
    cfg.slacked.fill(false);
    cfg.slacked[constraint_index(ConstraintId::Communication)] = true;
    return cfg;
  }

  void validate() const {
    int hard = 0;
    for (int i = 0; i < kNumConstraints; ++i) {
      if (enabled[i] && !slacked[i]) ++hard;
      if (slacked[i] && !enabled[i])
        throw std::invalid_argument("FilterConfig: slack assigned to a disabled constraint");
    }
    if (hard == 0)
      throw std::invalid_argument("FilterConfig: at least one enabled constraint must be slack-free");
  }
};

struct FilterOutcome {
  Vec3 u_des{};    // as handed to the filter
  Vec3 u_act{};    // applied control
  bool intervened = false;
  QpStatus qp_status = QpStatus::Optimal;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  // Barrier-condition value per constraint at u_act; NaN when the constraint
  // produced no row this step.
  std::array<double, kNumConstraints> row_margin{};
  std::array<double, kNumConstraints> slack{};
  int rows_dropped = 0;    // degenerate rows with non-negative offset
  int authority_loss = 0;  // degenerate rows that were already violated
};

// Minimally invasive safety filter: builds barrier rows at the current
// state, solves the slacked QP over the admissible box, and falls back to
// the unmodified desired control if the solver fails.
class AsifFilter {
 public:
  AsifFilter(const SpacecraftParams& params, const FilterConfig& cfg)
      : params_(params), cfg_(cfg), bounds_(control_bounds(params)) {
    params_.validate();
    cfg_.validate();
  }

  const ControlBounds& bounds() const { return bounds_; }
  const FilterConfig& config() const { return cfg_; }

  FilterOutcome filter(const FullState& state, const Vec3& u_des) {
    constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
    FilterOutcome out;
    out.u_des = u_des;
    out.row_margin.fill(kNan);
    out.slack.fill(0.0);

    QpProblem prob;
    prob.box = bounds_;
    for (int j = 0; j < 3; ++j)
      prob.u_des[j] = std::clamp(u_des[j], bounds_.lower[j], bounds_.upper[j]);

    for (ConstraintId id : kAllConstraints) {
      const int i = constraint_index(id);
      if (!cfg_.enabled[i]) continue;
      BarrierRow row = lift_and_rowify(id, state, params_);
      if (!row.active) {
        // No control authority on this row. A non-negative offset means the
        // constraint takes care of itself this step; otherwise record the
        // authority loss.
        out.row_margin[i] = row.b;
        if (row.b >= 0.0)
          ++out.rows_dropped;
        else
          ++out.authority_loss;
        continue;
      }
      if (cfg_.slacked[i]) {
        prob.slack_index.push_back(static_cast<int>(prob.slack_penalty.size()));
        prob.slack_penalty.push_back(params_.tuning.slack_penalty);
      } else {
        prob.slack_index.push_back(-1);
      }
      prob.rows.push_back(row);
    }

    const QpSolution sol = solver_.solve(prob);
    out.qp_status = sol.status;
    out.qp_iterations = sol.iterations;
    out.kkt_residual = sol.kkt_residual;

    if (sol.status == QpStatus::Optimal) {
      out.u_act = sol.u;
      for (size_t k = 0; k < prob.rows.size(); ++k) {
        const int i = constraint_index(prob.rows[k].id);
        out.row_margin[i] = dot(prob.rows[k].a, sol.u) + prob.rows[k].b;
        if (prob.slack_index[k] >= 0) out.slack[i] = sol.slacks[prob.slack_index[k]];
      }
    } else {
      out.u_act = cfg_.pass_through_on_failure ? u_des : prob.u_des;
      for (size_t k = 0; k < prob.rows.size(); ++k) {
        const int i = constraint_index(prob.rows[k].id);
        out.row_margin[i] = dot(prob.rows[k].a, out.u_act) + prob.rows[k].b;
      }
    }

    const Vec3 diff = v_sub(out.u_act, u_des);
    out.intervened = norm(diff) > 1e-9;
    return out;
  }

 private:
  SpacecraftParams params_;
  FilterConfig cfg_;
  ControlBounds bounds_;
  QpSolver solver_;
};

struct SafetyReport {
  std::array<double, kNumConstraints> margin{};  // h or Psi value
  std::array<double, kNumConstraints> psi1{};    // first lift, degree-2 only (NaN otherwise)
  std::array<bool, kNumConstraints> safe{};
  bool all_safe = true;
};

inline SafetyReport evaluate_safety(const FullState& state, const SpacecraftParams& p) {
  SafetyReport rep;
  const StateVec x = state.pack();
  for (ConstraintId id : kAllConstraints) {
    const int i = constraint_index(id);
    rep.margin[i] = constraint_value<double>(id, x, p);
    rep.psi1[i] = relative_degree(id) == 2 ? psi1_value<double>(id, x, p)
                                           : std::numeric_limits<double>::quiet_NaN();
    rep.safe[i] = rep.margin[i] >= 0.0;
    rep.all_safe = rep.all_safe && rep.safe[i];
  }
  return rep;
}

}  // namespace rta
