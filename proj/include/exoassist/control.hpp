#pragma once

// Per-joint controller combining a backlash-based transparency torque with
// oscillator-driven motion assistance:
//
//   tau_T = K_T * (q_out - q_motor)
//   tau_A = K_A * (q_hat(t + delta_t) - q_hat(t))
//   w_A   = 0.5 * (1 - tanh((p_env - p_max) / epsilon))
//   tau   = clamp(tau_T + w_A * tau_A * [active], +-tau_limit)
//
// p_env is a first-order low-pass of |p|. Assistance is gated by a
// per-joint Inactive -> Arming -> Active state machine with hysteresis.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <type_traits>
#include <utility>
#include <variant>

#include "exoassist/error.hpp"
#include "exoassist/oscillator.hpp"

namespace exo {

struct ControlParams {
  double k_t = 31.5;       // N m/rad
  double k_a = 1.0;        // N m/rad
  double delta_t = 0.1;    // s
  double p_max = 0.1;      // rad
  double epsilon = 0.01;   // rad
  double tau_limit = 0.275;  // N m
  double envelope_time_constant = 0.1;  // s
  double activate_threshold = 0.9;
  double deactivate_threshold = 0.5;
  double arm_duration_cycles = 1.0;

  bool operator==(const ControlParams&) const = default;
};

inline void validate(const ControlParams& c) {
  const double all[] = {c.k_t, c.k_a, c.delta_t, c.p_max, c.epsilon, c.tau_limit,
                        c.envelope_time_constant, c.activate_threshold, c.deactivate_threshold,
                        c.arm_duration_cycles};
  for (double v : all)
    if (!std::isfinite(v)) throw InvalidParameter("control parameters must be finite");
  if (c.k_t < 0 || c.k_a < 0) throw InvalidParameter("virtual stiffnesses must be non-negative");
  if (!(c.epsilon > 0) || !(c.p_max > 0) || !(c.tau_limit > 0)) {
    throw InvalidParameter("epsilon, p_max and tau_limit must be positive");
  }
  if (c.delta_t < 0 || !(c.envelope_time_constant > 0) || c.arm_duration_cycles < 0) {
    throw InvalidParameter(
        "delta_t and arm_duration_cycles must be non-negative, envelope time constant positive");
  }
  if (!(0 <= c.deactivate_threshold && c.deactivate_threshold < c.activate_threshold &&
        c.activate_threshold <= 1)) {
    throw InvalidParameter("thresholds require 0 <= deactivate < activate <= 1");
  }
}

// The transparency torque alone must never hit the limit while the gear sits
// inside its backlash.
inline void validate(const ControlParams& c, double backlash_half_width) {
  validate(c);
  if (c.k_t * backlash_half_width > c.tau_limit) {
    throw InvalidParameter("k_t * backlash_half_width exceeds tau_limit");
  }
}

template <std::floating_point Real>
Real transparency_torque(Real q_out, Real q_motor, Real k_t) {
  return k_t * (q_out - q_motor);
}

template <std::floating_point Real>
Real assistance_torque(const BasicOscillatorBank<Real>& bank, Real k_a, Real delta_t) {
  return k_a * (predict(bank, delta_t) - estimate(bank));
}

template <std::floating_point Real>
Real gating_weight(Real p_envelope, Real p_max, Real epsilon) {
  if (!(epsilon > 0)) throw InvalidParameter("gating steepness must be positive");
  return Real{0.5} * (Real{1} - std::tanh((p_envelope - p_max) / epsilon));
}

struct FusedTorque {
  double tau = 0.0;
  bool saturated = false;
};

// Weighted sum of transparency and assistance, saturated as a whole.
inline FusedTorque fuse_torque(double tau_transparency, double tau_assist_raw, double weight, bool active,
                               double tau_limit) {
  const double fused = tau_transparency + (active ? weight * tau_assist_raw : 0.0);
  return {std::clamp(fused, -tau_limit, tau_limit), std::abs(fused) > tau_limit};
}

namespace activation {
struct Inactive {
  bool operator==(const Inactive&) const = default;
};
struct Arming {
  double elapsed = 0.0;  // s of uninterrupted quality
  bool operator==(const Arming&) const = default;
};
struct Active {
  bool operator==(const Active&) const = default;
};
}  // namespace activation

using Activation = std::variant<activation::Inactive, activation::Arming, activation::Active>;

inline bool is_active(const Activation& a) { return std::holds_alternative<activation::Active>(a); }

struct ControlFrame {
  double t = 0.0;
  double tau_transparency = 0.0;
  double tau_assist_raw = 0.0;
  double weight = 0.0;
  bool active = false;
  double tau_total = 0.0;
  // Not part of the fused torque; kept for tracing and metrics.
  double q_estimate = 0.0;
  double perturbation = 0.0;
  bool saturated = false;

  bool operator==(const ControlFrame&) const = default;
};

struct JointControllerState {
  OscillatorBank bank;
  double p_envelope = 0.0;
  Activation activation = activation::Inactive{};
  // While false the oscillator is frozen and only transparency is applied.
  bool adapting = true;
  ControlFrame last_frame;

  bool operator==(const JointControllerState&) const = default;
};

inline JointControllerState make_joint_controller(OscillatorBank bank, const ControlParams& params,
                                                  bool adapting = true) {
  JointControllerState s;
  s.bank = std::move(bank);
  // No evidence of tracking quality yet: start the envelope at the gating
  // midpoint so the joint has to earn its activation.
  s.p_envelope = params.p_max;
  s.activation = activation::Inactive{};
  s.adapting = adapting;
  return s;
}

// Restart adaptation from the oscillator's initial conditions.
inline JointControllerState controller_reset(JointControllerState state, const ControlParams& params,
                                             double omega0) {
  return make_joint_controller(bank_reset(state.bank, omega0), params, true);
}

inline Activation advance_activation(const Activation& current, double weight, const ControlParams& c,
                                     double omega, double dt) {
  using namespace activation;
  return std::visit(
      [&](const auto& s) -> Activation {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Inactive>) {
          if (weight >= c.activate_threshold) return Arming{0.0};
          return Inactive{};
        } else if constexpr (std::is_same_v<S, Arming>) {
          if (weight < c.activate_threshold) return Inactive{};
          const double elapsed = s.elapsed + dt;
          const double required = c.arm_duration_cycles * 2.0 * std::numbers::pi / omega;
          if (elapsed >= required) return Active{};
          return Arming{elapsed};
        } else {
          if (weight < c.deactivate_threshold) return Inactive{};
          return Active{};
        }
      },
      current);
}

struct TickResult {
  JointControllerState state;
  ControlFrame frame;
};

inline TickResult controller_tick(JointControllerState state, const ControlParams& c, double q_out,
                                  double q_motor, double dt, double t = 0.0) {
  if (!std::isfinite(q_out) || !std::isfinite(q_motor) || !std::isfinite(t)) {
    throw NonFiniteInput("non-finite controller input");
  }
  if (!(dt > 0)) throw InvalidParameter("controller step dt must be positive");

  ControlFrame f;
  f.t = t;
  f.tau_transparency = transparency_torque(q_out, q_motor, c.k_t);

  if (state.adapting) {
    // Assistance uses the reconstruction at time t, before this sample is
    // absorbed by the oscillators.
    f.q_estimate = estimate(state.bank);
    f.tau_assist_raw = assistance_torque(state.bank, c.k_a, c.delta_t);
    auto step = bank_step(std::move(state.bank), q_out, dt);
    state.bank = std::move(step.bank);
    f.perturbation = step.perturbation;
    const double blend = 1.0 - std::exp(-dt / c.envelope_time_constant);
    state.p_envelope += blend * (std::abs(step.perturbation) - state.p_envelope);
    f.weight = gating_weight(state.p_envelope, c.p_max, c.epsilon);
    state.activation = advance_activation(state.activation, f.weight, c, state.bank.omega, dt);
  } else {
    f.q_estimate = estimate(state.bank);
    f.perturbation = q_out - f.q_estimate;
    f.weight = gating_weight(state.p_envelope, c.p_max, c.epsilon);
    state.activation = activation::Inactive{};
  }

  f.active = is_active(state.activation);
  const FusedTorque fused = fuse_torque(f.tau_transparency, f.tau_assist_raw, f.weight, f.active, c.tau_limit);
  f.tau_total = fused.tau;
  f.saturated = fused.saturated;
  state.last_frame = f;
  return {std::move(state), f};
}

}  // namespace exo
