#pragma once

// Desk-scale plant models: a two-inertia actuator whose motor and gear output
// are coupled through a backlash dead zone, and a pendulum leg hanging from
// the joint. Motor quantities are expressed on the output side of the gear.
// Both models use semi-implicit Euler (velocity first, then position).

#include <cmath>
#include <numbers>
#include <utility>

#include "exoassist/error.hpp"

namespace exo {

struct ActuatorParams {
  double gear_ratio = 448.0 / 3.0;
  double backlash_half_width = 0.5 * std::numbers::pi / 180.0;  // rad
  double motor_side_inertia = 0.01;                              // kg m^2, reflected
  double output_side_inertia = 0.01;                             // kg m^2
  double motor_side_viscous_friction = 0.05;                     // N m s/rad, reflected
  double output_side_viscous_friction = 0.02;                    // N m s/rad
  double contact_stiffness = 2000.0;                             // N m/rad
  double contact_damping = 5.0;                                  // N m s/rad

  bool operator==(const ActuatorParams&) const = default;
};

struct ActuatorState {
  double q_out = 0.0;
  double qd_out = 0.0;
  double q_motor = 0.0;
  double qd_motor = 0.0;

  bool operator==(const ActuatorState&) const = default;
};

struct PendulumParams {
  double inertia = 0.05;             // kg m^2 about the joint
  double gravity_coefficient = 1.0;  // m g l [N m]
  double equilibrium_offset = 0.0;   // rad
  double viscous_friction = 0.1;     // N m s/rad

  bool operator==(const PendulumParams&) const = default;
};

// Reflected inertia of a rotor seen through the gear.
inline double reflected_inertia(double rotor_inertia, double gear_ratio) {
  return rotor_inertia * gear_ratio * gear_ratio;
}

inline void validate(const ActuatorParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.gear_ratio) || !finite(p.backlash_half_width) || !finite(p.motor_side_inertia) ||
      !finite(p.output_side_inertia) || !finite(p.motor_side_viscous_friction) ||
      !finite(p.output_side_viscous_friction) || !finite(p.contact_stiffness) ||
      !finite(p.contact_damping)) {
    throw InvalidParameter("actuator parameters must be finite");
  }
  if (!(p.gear_ratio > 0) || !(p.backlash_half_width > 0) || !(p.motor_side_inertia > 0) ||
      !(p.output_side_inertia > 0) || !(p.contact_stiffness > 0)) {
    throw InvalidParameter(
        "actuator requires positive gear ratio, backlash, inertias and contact stiffness");
  }
  if (p.motor_side_viscous_friction < 0 || p.output_side_viscous_friction < 0 ||
      p.contact_damping < 0) {
    throw InvalidParameter("actuator friction and damping must be non-negative");
  }
}

inline void validate(const PendulumParams& p) {
  if (!std::isfinite(p.inertia) || !std::isfinite(p.gravity_coefficient) ||
      !std::isfinite(p.equilibrium_offset) || !std::isfinite(p.viscous_friction)) {
    throw InvalidParameter("pendulum parameters must be finite");
  }
  if (!(p.inertia > 0) || p.viscous_friction < 0) {
    throw InvalidParameter("pendulum requires inertia > 0 and friction >= 0");
  }
}

// Displacement beyond the dead-zone edge; zero inside the backlash.
inline double backlash_penetration(double q_out, double q_motor, double half_width) {
  const double d = q_out - q_motor;
  if (d > half_width) return d - half_width;
  if (d < -half_width) return d + half_width;
  return 0.0;
}

// Torque the gear teeth exert on the output side (the motor side receives the
// negative). The contact only pushes: damping cannot make it pull.
inline double coupling_torque(const ActuatorState& s, const ActuatorParams& p) {
  const double pen = backlash_penetration(s.q_out, s.q_motor, p.backlash_half_width);
  if (pen == 0.0) return 0.0;
  const double push = p.contact_stiffness * pen + p.contact_damping * (s.qd_out - s.qd_motor);
  if (pen > 0.0) return -std::max(push, 0.0);
  return -std::min(push, 0.0);
}

inline double actuator_energy(const ActuatorState& s, const ActuatorParams& p) {
  const double pen = backlash_penetration(s.q_out, s.q_motor, p.backlash_half_width);
  return 0.5 * p.output_side_inertia * s.qd_out * s.qd_out +
         0.5 * p.motor_side_inertia * s.qd_motor * s.qd_motor + 0.5 * p.contact_stiffness * pen * pen;
}

namespace detail {
inline void require_finite_step(double dt) {
  if (!std::isfinite(dt) || !(dt > 0)) throw InvalidParameter("plant step dt must be positive");
}
inline bool all_finite(const ActuatorState& s) {
  return std::isfinite(s.q_out) && std::isfinite(s.qd_out) && std::isfinite(s.q_motor) &&
         std::isfinite(s.qd_motor);
}
}  // namespace detail

inline ActuatorState actuator_step(ActuatorState s, const ActuatorParams& p, double tau_motor,
                                   double tau_user, double dt) {
  detail::require_finite_step(dt);
  if (!std::isfinite(tau_motor) || !std::isfinite(tau_user) || !detail::all_finite(s)) {
    throw NonFiniteInput("non-finite actuator input");
  }
  const double tau_c = coupling_torque(s, p);
  s.qd_out += dt * (tau_user + tau_c - p.output_side_viscous_friction * s.qd_out) / p.output_side_inertia;
  s.qd_motor += dt * (tau_motor - tau_c - p.motor_side_viscous_friction * s.qd_motor) / p.motor_side_inertia;
  s.q_out += dt * s.qd_out;
  s.q_motor += dt * s.qd_motor;
  return s;
}

// Output side moved kinematically (the wearer's limb dominates); only the
// motor side is integrated. `q_out`/`qd_out` are the output state at the end of
// the step.
inline ActuatorState actuator_step_prescribed(ActuatorState s, const ActuatorParams& p,
                                              double tau_motor, double q_out, double qd_out,
                                              double dt) {
  detail::require_finite_step(dt);
  if (!std::isfinite(tau_motor) || !std::isfinite(q_out) || !std::isfinite(qd_out) ||
      !detail::all_finite(s)) {
    throw NonFiniteInput("non-finite actuator input");
  }
  const double tau_c = coupling_torque(s, p);
  s.qd_motor += dt * (tau_motor - tau_c - p.motor_side_viscous_friction * s.qd_motor) / p.motor_side_inertia;
  s.q_motor += dt * s.qd_motor;
  s.q_out = q_out;
  s.qd_out = qd_out;
  return s;
}

// Gravity and friction torque acting on the pendulum joint.
inline double pendulum_torque(double angle, double velocity, const PendulumParams& p) {
  return -p.gravity_coefficient * std::sin(angle - p.equilibrium_offset) - p.viscous_friction * velocity;
}

inline double pendulum_energy(double angle, double velocity, const PendulumParams& p) {
  // 1 - cos x written as 2 sin^2(x/2) to stay accurate near equilibrium.
  const double half = std::sin(0.5 * (angle - p.equilibrium_offset));
  return 0.5 * p.inertia * velocity * velocity + 2.0 * p.gravity_coefficient * half * half;
}

// Step-consistent energy of `pendulum_step`; see coupled_modified_energy.
inline double pendulum_modified_energy(double angle, double velocity, const PendulumParams& p, double dt) {
  const double f = -p.gravity_coefficient * std::sin(angle - p.equilibrium_offset);
  return pendulum_energy(angle, velocity, p) + 0.5 * dt * velocity * f;
}

// Energy of a pendulum leg hanging on the actuator output; `p` carries the
// combined output-side inertia.
inline double coupled_energy(const ActuatorState& s, const ActuatorParams& p, const PendulumParams& leg) {
  return actuator_energy(s, p) + pendulum_energy(s.q_out, 0.0, leg);
}

// The quantity semi-implicit Euler preserves to second order:
// H + dt/2 * sum(v_i * F_i(q)) over the position-dependent forces. Plain H
// oscillates by O(omega * dt) per step around stiff contact; this one only
// decreases under friction and contact damping.
inline double coupled_modified_energy(const ActuatorState& s, const ActuatorParams& p,
                                      const PendulumParams& leg, double dt) {
  const double pen = backlash_penetration(s.q_out, s.q_motor, p.backlash_half_width);
  const double f_out = -leg.gravity_coefficient * std::sin(s.q_out - leg.equilibrium_offset) -
                       p.contact_stiffness * pen;
  const double f_motor = p.contact_stiffness * pen;
  return coupled_energy(s, p, leg) + 0.5 * dt * (s.qd_out * f_out + s.qd_motor * f_motor);
}

inline std::pair<double, double> pendulum_step(double angle, double velocity, const PendulumParams& p,
                                               double tau_applied, double dt) {
  detail::require_finite_step(dt);
  if (!std::isfinite(angle) || !std::isfinite(velocity) || !std::isfinite(tau_applied)) {
    throw NonFiniteInput("non-finite pendulum input");
  }
  velocity += dt * (pendulum_torque(angle, velocity, p) + tau_applied) / p.inertia;
  angle += dt * velocity;
  return {angle, velocity};
}

}  // namespace exo
