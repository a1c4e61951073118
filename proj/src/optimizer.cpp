#include "pivot/optimizer.hpp"

#include <cmath>

namespace pivot {

namespace {

constexpr double kDegenerateNorm = 1e-9;

}  // namespace

void OptimizerConfig::validate() const {
  if (alpha <= 0.0 || alpha_rpy <= 0.0) throw ConfigError("optimizer step sizes must be positive");
  if (epsilon <= 0.0 || epsilon_rpy <= 0.0) throw ConfigError("probe perturbations must be positive");
  if (lambda0_mm <= 0.0) throw ConfigError("rotational-slip sweet spot must be positive");
  if (cadence_cycles < 1) throw ConfigError("cadence must be at least one cycle");
}

OptimizerState make_press_direction_optimizer(const Eigen::Vector3d& initial_direction,
                                              const OptimizerConfig& cfg) {
  cfg.validate();
  const double n = initial_direction.norm();
  if (n < kDegenerateNorm) throw ConfigError("initial press direction must be non-zero");
  OptimizerState s;
  s.mode = DecisionMode::PressDirection;
  s.decision = initial_direction / n;
  s.alpha = cfg.alpha;
  s.alpha_floor = cfg.alpha / 8.0;
  s.epsilon = cfg.epsilon;
  return s;
}

OptimizerState make_rotation_rate_optimizer(const Eigen::Vector3d& initial_rate, const OptimizerConfig& cfg) {
  cfg.validate();
  OptimizerState s;
  s.mode = DecisionMode::RotationRate;
  s.decision = initial_rate;
  s.alpha = cfg.alpha_rpy;
  s.alpha_floor = cfg.alpha_rpy / 8.0;
  s.epsilon = cfg.epsilon_rpy;
  return s;
}

double rotational_loss_term(double sigma, double lambda0) {
  if (sigma > 0.0) {
    const double d = lambda0 - sigma;
    return d * d - lambda0 * lambda0;
  }
  return sigma * sigma;
}

double cycle_loss(const SlipMetrics& metrics, double lambda0, int s2_sense) {
  const double sigma = s2_sense * metrics.s2;
  return metrics.s1.squaredNorm() + rotational_loss_term(sigma, lambda0);
}

Eigen::Vector3d finite_difference_gradient(const std::array<double, 6>& losses, double epsilon) {
  Eigen::Vector3d g;
  for (int m = 0; m < 3; ++m) {
    g[m] = (losses[2 * m] - losses[2 * m + 1]) / (2.0 * epsilon);
  }
  return g;
}

UpdateOutcome apply_update(OptimizerState& state, const Eigen::Vector3d& gradient, double rotation_cap_rad) {
  const Eigen::Vector3d candidate = state.decision - state.alpha * gradient;
  state.last_gradient = gradient;

  if (state.mode == DecisionMode::PressDirection) {
    if (candidate.norm() < kDegenerateNorm) {
      // The step collapsed the direction; a unit vector can't be recovered
      // from it.  Keep the previous direction and take smaller steps.
      state.alpha = std::max(state.alpha * 0.5, state.alpha_floor);
      state.last_update = UpdateOutcome::SkippedDegenerate;
      return state.last_update;
    }
    state.decision = candidate.normalized();
  } else {
    state.decision = cap_rpy_increment(candidate, rotation_cap_rad);
  }
  state.last_update = UpdateOutcome::Applied;
  return state.last_update;
}

ProbeTrace optimize_step(ProbePlant& plant, OptimizerState& state, const ControllerConfig& ccfg) {
  ProbeTrace trace;
  trace.decision_before = state.decision;
  const Eigen::Vector3d position_before = plant.gripper_position();
  const Eigen::Matrix3d orientation_before = plant.gripper_orientation();

  state.phase = ProbePhase::Probing;
  // The loss field keeps evolving while the schedule runs, and a trend
  // across the six samples aliases into the same-signed bias on every
  // axis.  Leading with the opposite sign on alternate schedules flips
  // that bias so it cancels over consecutive updates.
  const int lead = state.schedules_run % 2 == 0 ? +1 : -1;
  for (int m = 0; m < 3; ++m) {
    for (int sign : {lead, -lead}) {
      Eigen::Vector3d probe = state.decision;
      probe[m] += sign * state.epsilon;
      const double loss = plant.probe_cycle(probe);
      if (!std::isfinite(loss)) {
        state.phase = ProbePhase::Normal;
        throw ProbeAborted("non-finite loss during probe cycle");
      }
      trace.losses[2 * m + (sign > 0 ? 0 : 1)] = loss;
      ++trace.cycles_used;
    }
  }

  // Restoration: after the six perturbed cycles the gripper must sit where
  // ONE nominal cycle would have put it.
  state.phase = ProbePhase::Restoring;
  if (state.mode == DecisionMode::PressDirection) {
    const double T = plant.cycle_s();
    // The six probe displacements sum to six nominal steps (the +/- epsilon
    // parts cancel), so restoration walks most of that back.
    const Eigen::Vector3d target = position_before + ccfg.v0_mm_s * state.decision * T;
    const double v_max = 2.0 * ccfg.v0_mm_s;
    int cycles = std::max(1, static_cast<int>(std::ceil((target - plant.gripper_position()).norm() /
                                                        (v_max * T) - 1e-12)));
    for (; cycles >= 1; --cycles) {
      const Eigen::Vector3d v = (target - plant.gripper_position()) / (T * cycles);
      plant.restore_cycle(v);
      ++trace.cycles_used;
    }
  } else {
    const Eigen::Vector3d nominal = cap_rpy_increment(state.decision, ccfg.rotation_cap_rad());
    const Eigen::Matrix3d target = rpy_to_rotation(RpyVector::from_vector(nominal)).matrix() * orientation_before;
    int guard = 0;
    for (;;) {
      const Eigen::Matrix3d residual = target * plant.gripper_orientation().transpose();
      const Eigen::Vector3d w = log_so3(residual);
      const double angle = w.norm();
      if (angle < 1e-13 || guard > 64) break;
      const int remaining = std::max(1, static_cast<int>(std::ceil(angle / ccfg.rotation_cap_rad() - 1e-12)));
      const Eigen::Matrix3d step = exp_so3(w / remaining);
      const RpyVector rpy = rotation_to_rpy(step);
      plant.restore_cycle(rpy.as_vector());
      ++trace.cycles_used;
      ++guard;
    }
  }
  state.phase = ProbePhase::Normal;

  trace.gradient = finite_difference_gradient(trace.losses, state.epsilon);
  trace.mean_loss = 0.0;
  for (double l : trace.losses) trace.mean_loss += l;
  trace.mean_loss /= 6.0;

  // Two consecutive schedules with rising mean loss halve the step size.
  // Cycle-to-cycle chatter makes small rises routine, so only count a rise
  // when it clears the noise band, and never decay below the tracking floor.
  const double rise_band = 0.01 + 0.05 * std::abs(state.last_mean_loss);
  if (std::isfinite(state.last_mean_loss) && trace.mean_loss > state.last_mean_loss + rise_band) {
    if (++state.loss_rise_streak >= 2) {
      state.alpha = std::max(state.alpha * 0.5, state.alpha_floor);
      state.loss_rise_streak = 0;
    }
  } else {
    state.loss_rise_streak = 0;
  }
  state.last_mean_loss = trace.mean_loss;
  state.last_losses = trace.losses;

  trace.outcome = apply_update(state, trace.gradient, ccfg.rotation_cap_rad());
  trace.decision_after = state.decision;
  ++state.schedules_run;
  return trace;
}

}  // namespace pivot
