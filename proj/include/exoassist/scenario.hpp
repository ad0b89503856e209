#pragma once

// Closed-loop scenario engine. Gait scenarios prescribe the gear-output angle
// from a signal source (synthetic gait or replayed CSV); the controller's
// torque drives the motor side of the backlash actuator. The pendulum scenario
// integrates a free leg swinging on the actuator with transparency only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exoassist/config.hpp"
#include "exoassist/control.hpp"
#include "exoassist/csv.hpp"
#include "exoassist/error.hpp"
#include "exoassist/gait.hpp"
#include "exoassist/oscillator.hpp"
#include "exoassist/plant.hpp"

namespace exo {

struct JointSeries {
  std::string name;
  std::vector<double> q;
  std::vector<double> q_hat;
  std::vector<double> p;
  std::vector<double> omega;
  std::vector<double> alpha0;
  std::vector<std::vector<double>> alpha;  // [harmonic][tick]
  std::vector<double> q_motor;
  std::vector<double> tau_t;
  std::vector<double> tau_a;
  std::vector<double> weight;
  std::vector<std::uint8_t> active;
  std::vector<double> tau_total;
  std::vector<std::uint8_t> saturated;

  bool operator==(const JointSeries&) const = default;
};

struct Trace {
  std::vector<double> t;
  std::vector<JointSeries> joints;
  std::size_t n_harmonics = 0;

  std::size_t size() const { return t.size(); }
  bool operator==(const Trace&) const = default;
};

struct JointMetrics {
  std::string name;
  std::optional<double> activation_time;   // s after adaptation start
  std::optional<double> activation_cycle;  // gait cycles since walk onset
  std::size_t activation_count = 0;
  std::size_t deactivation_count = 0;
  std::optional<double> rmse_post_activation;  // rad
  std::optional<double> rmse_ratio;            // RMSE / peak-to-peak
  double omega_final = 0.0;
  std::optional<double> omega_true;
  std::optional<double> omega_rel_error;
  std::size_t saturation_ticks = 0;
  double max_abs_tau_total = 0.0;
};

struct PendulumMetrics {
  double final_angle = 0.0;
  double final_error = 0.0;                 // |angle - equilibrium| at the end [rad]
  std::optional<double> settle_time;        // first time after which |error| stays < 0.5 deg
};

struct Metrics {
  ScenarioKind kind = ScenarioKind::kStandToWalk;
  std::size_t ticks = 0;
  double dt = 0.0;
  std::vector<JointMetrics> joints;
  std::optional<PendulumMetrics> pendulum;
};

struct RunResult {
  Trace trace;
  Metrics metrics;
};

inline constexpr double kSettleBand = 0.5 * std::numbers::pi / 180.0;

// ---------------------------------------------------------------------------
// Signal sources

inline bool is_gait_kind(ScenarioKind k) {
  return k == ScenarioKind::kStandToWalk || k == ScenarioKind::kConstantGait || k == ScenarioKind::kSpeedRamp;
}

inline WalkTimeline walk_timeline(const ScenarioConfig& c) {
  if (c.kind == ScenarioKind::kStandToWalk) return {c.stand_duration, c.ramp_duration};
  return {};
}

inline GaitPattern seeded_pattern(const ScenarioConfig& c) {
  GaitPattern p = c.gait;
  p.seed = c.seed;
  return p;
}

// The joint angles a gait scenario feeds to the controller (with encoder
// noise) and the limb motion that drives the plant (without). An injected
// transient is a real movement, so it lands in both. export-gait writes
// exactly this signal.
inline GaitSignal synthetic_signal(const ScenarioConfig& c) {
  if (!is_gait_kind(c.kind)) {
    throw ConfigError("scenario kind " + std::string(to_string(c.kind)) + " has no synthetic gait signal");
  }
  if (c.kind == ScenarioKind::kConstantGait && !c.gait.cadence_profile.is_constant()) {
    throw ConfigError("constant_gait needs a constant gait.cadence");
  }
  if (c.kind == ScenarioKind::kStandToWalk && c.stand_duration + c.ramp_duration > c.duration) {
    throw ConfigError("gait.stand_duration + gait.ramp_duration exceeds scenario.duration");
  }
  GaitSignal signal;
  try {
    signal = sample_gait_signal(seeded_pattern(c), walk_timeline(c), c.duration, c.dt);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  if (c.transient.leg != TransientLeg::kNone) {
    for (auto* series : {&signal.measured, &signal.limb}) {
      for (auto& s : *series) {
        double& q = c.transient.leg == TransientLeg::kRight ? s.q_right : s.q_left;
        q += c.transient.at(s.t);
      }
    }
  }
  return signal;
}

// ---------------------------------------------------------------------------
// Metric helpers

namespace scenario_detail {

inline JointSeries make_series(std::string name, std::size_t n, std::size_t harmonics) {
  JointSeries s;
  s.name = std::move(name);
  for (auto* v : {&s.q, &s.q_hat, &s.p, &s.omega, &s.alpha0, &s.q_motor, &s.tau_t, &s.tau_a, &s.weight,
                  &s.tau_total}) {
    v->reserve(n);
  }
  s.active.reserve(n);
  s.saturated.reserve(n);
  s.alpha.assign(harmonics, {});
  for (auto& a : s.alpha) a.reserve(n);
  return s;
}

inline void record(JointSeries& s, double q, double q_motor, const ControlFrame& f, const OscillatorBank& bank) {
  s.q.push_back(q);
  s.q_hat.push_back(f.q_estimate);
  s.p.push_back(f.perturbation);
  s.omega.push_back(bank.omega);
  s.alpha0.push_back(bank.alpha0);
  for (std::size_t i = 0; i < s.alpha.size(); ++i) s.alpha[i].push_back(bank.alpha[i]);
  s.q_motor.push_back(q_motor);
  s.tau_t.push_back(f.tau_transparency);
  s.tau_a.push_back(f.tau_assist_raw);
  s.weight.push_back(f.weight);
  s.active.push_back(f.active ? 1 : 0);
  s.tau_total.push_back(f.tau_total);
  s.saturated.push_back(f.saturated ? 1 : 0);
}

inline std::size_t start_tick(const std::vector<double>& t, double start) {
  auto it = std::lower_bound(t.begin(), t.end(), start - 1e-9);
  return static_cast<std::size_t>(it - t.begin());
}

// Upward crossings of the signal minus its mean over [from, end), with a
// hysteresis band of 10% of the standard deviation. Returns crossing times.
inline std::vector<double> upward_crossings(const std::vector<double>& t, const std::vector<double>& q,
                                            std::size_t from) {
  std::vector<double> out;
  if (from + 2 >= q.size()) return out;
  const double n = static_cast<double>(q.size() - from);
  double mean = 0.0;
  for (std::size_t k = from; k < q.size(); ++k) mean += q[k];
  mean /= n;
  double var = 0.0;
  for (std::size_t k = from; k < q.size(); ++k) var += (q[k] - mean) * (q[k] - mean);
  const double band = 0.1 * std::sqrt(var / n);
  bool armed = false;
  for (std::size_t k = from + 1; k < q.size(); ++k) {
    const double prev = q[k - 1] - mean;
    const double cur = q[k] - mean;
    if (cur < -band) armed = true;
    if (armed && prev < 0.0 && cur >= 0.0) {
      out.push_back(t[k - 1] + (t[k] - t[k - 1]) * (-prev) / (cur - prev));
      armed = false;
    }
  }
  return out;
}

// Gait cycles elapsed between `origin` and `time`. The stretch before the
// first crossing is scaled by the first measured period.
inline double cycles_from_crossings(const std::vector<double>& crossings, double origin, double time) {
  if (crossings.size() < 2) return 0.0;
  const double first_period = crossings[1] - crossings[0];
  const double lead = std::max(0.0, crossings.front() - origin) / first_period;
  if (time <= crossings.front()) return std::max(0.0, time - origin) / first_period;
  for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
    if (time < crossings[i + 1]) {
      return lead + static_cast<double>(i) + (time - crossings[i]) / (crossings[i + 1] - crossings[i]);
    }
  }
  const std::size_t last = crossings.size() - 1;
  const double period = crossings[last] - crossings[last - 1];
  return lead + static_cast<double>(last) + (time - crossings[last]) / period;
}

}  // namespace scenario_detail

// Ground truth only exists for synthetic signals.
struct GaitTruth {
  GaitPattern pattern;
  WalkTimeline timeline;
};

inline JointMetrics joint_metrics(const Trace& trace, const JointSeries& s, double adaptation_start,
                                  double tau_limit, const std::optional<GaitTruth>& truth) {
  using namespace scenario_detail;
  JointMetrics m;
  m.name = s.name;
  const std::size_t n = trace.size();
  const std::size_t k0 = start_tick(trace.t, adaptation_start);

  std::optional<std::size_t> first_active;
  for (std::size_t k = 0; k < n; ++k) {
    const bool prev = k > 0 && s.active[k - 1];
    if (s.active[k] && !prev) {
      ++m.activation_count;
      if (!first_active) first_active = k;
    }
    if (!s.active[k] && prev) ++m.deactivation_count;
    if (s.saturated[k]) ++m.saturation_ticks;
    m.max_abs_tau_total = std::max(m.max_abs_tau_total, std::abs(s.tau_total[k]));
  }
  (void)tau_limit;

  if (first_active) {
    const double t_act = trace.t[*first_active];
    m.activation_time = t_act - adaptation_start;
    if (truth) {
      m.activation_cycle = stride_phase(truth->pattern, t_act, truth->timeline) / (2.0 * std::numbers::pi);
    } else {
      const auto crossings = upward_crossings(trace.t, s.q, k0);
      m.activation_cycle = cycles_from_crossings(crossings, trace.t[std::min(k0, n - 1)], t_act);
    }
    double se = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = *first_active; k < n; ++k) {
      se += s.p[k] * s.p[k];
      lo = std::min(lo, s.q[k]);
      hi = std::max(hi, s.q[k]);
    }
    m.rmse_post_activation = std::sqrt(se / static_cast<double>(n - *first_active));
    if (hi > lo) m.rmse_ratio = *m.rmse_post_activation / (hi - lo);
  }

  m.omega_final = s.omega.empty() ? 0.0 : s.omega.back();
  if (truth && n > 0) {
    m.omega_true = 2.0 * std::numbers::pi * truth->pattern.cadence_profile(trace.t.back());
    m.omega_rel_error = std::abs(m.omega_final - *m.omega_true) / *m.omega_true;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Closed loops

inline RunResult run_gait_loop(const GaitSignal& signal, const ScenarioConfig& c,
                               const std::optional<GaitTruth>& truth) {
  using namespace scenario_detail;
  validate(c);
  const auto& samples = signal.measured;
  const auto& motion = signal.motion();
  const std::size_t n = samples.size();
  if (motion.size() != n) throw InvalidParameter("limb and measured series differ in length");
  if (n < 2) throw InvalidParameter("gait loop needs at least two samples");
  const double dt = c.dt;

  Trace trace;
  trace.n_harmonics = c.n_harmonics;
  trace.t.reserve(n);
  trace.joints.push_back(make_series("right", n, c.n_harmonics));
  trace.joints.push_back(make_series("left", n, c.n_harmonics));

  const OscillatorBank bank0 = bank_init(c.n_harmonics, c.omega0, c.gains, c.bounds);
  std::vector<JointControllerState> ctrl(2, make_joint_controller(bank0, c.control, false));
  std::vector<ActuatorState> plant(2);
  auto angle = [&](std::size_t k, std::size_t j) { return j == 0 ? samples[k].q_right : samples[k].q_left; };
  auto limb = [&](std::size_t k, std::size_t j) { return j == 0 ? motion[k].q_right : motion[k].q_left; };
  for (std::size_t j = 0; j < 2; ++j) plant[j].q_out = plant[j].q_motor = limb(0, j);

  bool adapting = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = samples[k].t;
    trace.t.push_back(t);
    if (!adapting && t >= c.adaptation_start - 1e-9) {
      adapting = true;
      for (auto& s : ctrl) s = controller_reset(std::move(s), c.control, c.omega0);
    }
    for (std::size_t j = 0; j < 2; ++j) {
      const double q = angle(k, j);
      auto tick = controller_tick(std::move(ctrl[j]), c.control, q, plant[j].q_motor, dt, t);
      ctrl[j] = std::move(tick.state);
      record(trace.joints[j], q, plant[j].q_motor, tick.frame, ctrl[j].bank);
      if (k + 1 < n) {
        const double q_next = limb(k + 1, j);
        plant[j] = actuator_step_prescribed(plant[j], c.actuator, tick.frame.tau_total, q_next,
                                            (q_next - limb(k, j)) / dt, dt);
      }
    }
  }

  RunResult r;
  r.metrics.kind = c.kind;
  r.metrics.ticks = n;
  r.metrics.dt = dt;
  for (const auto& s : trace.joints) {
    r.metrics.joints.push_back(joint_metrics(trace, s, c.adaptation_start, c.control.tau_limit, truth));
  }
  r.trace = std::move(trace);
  return r;
}

inline RunResult run_pendulum(const ScenarioConfig& c) {
  using namespace scenario_detail;
  validate(c);
  const std::size_t n = sample_count(c.duration, c.dt);
  const double dt = c.dt;

  // The leg hangs on the gear output: its inertia adds to the output side.
  ActuatorParams combined = c.actuator;
  combined.output_side_inertia += c.pendulum.inertia;

  Trace trace;
  trace.n_harmonics = c.n_harmonics;
  trace.t.reserve(n);
  trace.joints.push_back(make_series("pendulum", n, c.n_harmonics));

  JointControllerState ctrl =
      make_joint_controller(bank_init(c.n_harmonics, c.omega0, c.gains, c.bounds), c.control, false);
  ActuatorState s;
  s.q_out = s.q_motor = c.pendulum.equilibrium_offset + c.release_angle;

  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    trace.t.push_back(t);
    auto tick = controller_tick(std::move(ctrl), c.control, s.q_out, s.q_motor, dt, t);
    ctrl = std::move(tick.state);
    record(trace.joints[0], s.q_out, s.q_motor, tick.frame, ctrl.bank);
    if (k + 1 < n) {
      const double tau_leg = pendulum_torque(s.q_out, s.qd_out, c.pendulum);
      s = actuator_step(s, combined, tick.frame.tau_total, tau_leg, dt);
    }
  }

  RunResult r;
  r.metrics.kind = c.kind;
  r.metrics.ticks = n;
  r.metrics.dt = dt;
  r.metrics.joints.push_back(joint_metrics(trace, trace.joints[0], std::numeric_limits<double>::infinity(),
                                           c.control.tau_limit, std::nullopt));
  PendulumMetrics pm;
  const auto& q = trace.joints[0].q;
  pm.final_angle = q.back();
  pm.final_error = std::abs(q.back() - c.pendulum.equilibrium_offset);
  std::optional<double> settle = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(q[k] - c.pendulum.equilibrium_offset) >= kSettleBand) {
      settle = k + 1 < n ? std::optional<double>(trace.t[k + 1]) : std::nullopt;
    }
  }
  pm.settle_time = settle;
  r.metrics.pendulum = pm;
  r.trace = std::move(trace);
  return r;
}

inline RunResult replay_signal(const GaitSignal& signal, const ScenarioConfig& c) {
  return run_gait_loop(signal, c, std::nullopt);
}

inline RunResult replay_csv(const std::filesystem::path& path, const ScenarioConfig& c) {
  return replay_signal(read_signal_csv(path, c.dt), c);
}

inline RunResult run_scenario(const ScenarioConfig& c) {
  validate(c);
  switch (c.kind) {
    case ScenarioKind::kPendulumRelease:
      return run_pendulum(c);
    case ScenarioKind::kCsvReplay:
      if (!std::filesystem::exists(c.input_path)) throw IoError("input file not found: " + c.input_path);
      return replay_csv(c.input_path, c);
    default:
      return run_gait_loop(synthetic_signal(c), c, GaitTruth{seeded_pattern(c), walk_timeline(c)});
  }
}

}  // namespace exo
