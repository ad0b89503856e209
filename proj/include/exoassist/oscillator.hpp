#pragma once

// Pool of adaptive oscillators at harmonic multiples of a shared fundamental.
// Together they act as an online Fourier series of a quasi-periodic signal:
//
//   q_hat = alpha0 + sum_i alpha_i * sin(phi_i),  i = 1..N
//
// Every tick the perturbation p = q - q_hat drives
//
//   phi_i'  = i * omega + kappa_phi * p * cos(phi_i)
//   omega'  = kappa_omega * p * cos(phi_1)
//   alpha0' = kappa_alpha * p
//   alpha_i'= kappa_alpha * p * sin(phi_i)
//
// integrated with explicit Euler. omega and the coefficients are clamped into
// ParameterBounds after each step and the phases are kept in [0, 2*pi).

#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "exoassist/error.hpp"

namespace exo {

template <std::floating_point Real>
struct BasicOscillatorGains {
  Real kappa_phi{};
  Real kappa_omega{};
  Real kappa_alpha{};

  bool operator==(const BasicOscillatorGains&) const = default;
};

template <std::floating_point Real>
struct BasicParameterBounds {
  Real omega_min{};
  Real omega_max{};
  Real alpha_abs_max{};
  Real alpha0_min{};
  Real alpha0_max{};

  bool operator==(const BasicParameterBounds&) const = default;
};

// Stride frequencies 0.3 to 2 Hz, harmonic amplitudes up to 0.7 rad, offset
// within +/-0.5 rad.
template <std::floating_point Real = double>
constexpr BasicParameterBounds<Real> default_bounds() {
  constexpr Real two_pi = Real(2) * std::numbers::pi_v<Real>;
  return {two_pi * Real(0.3), two_pi * Real(2.0), Real(0.7), Real(-0.5), Real(0.5)};
}

template <std::floating_point Real>
struct BasicOscillatorBank {
  Real omega{};
  std::vector<Real> phi;
  Real alpha0{};
  std::vector<Real> alpha;
  BasicOscillatorGains<Real> gains;
  BasicParameterBounds<Real> bounds;
  Real last_perturbation{};

  std::size_t n_harmonics() const { return phi.size(); }

  bool operator==(const BasicOscillatorBank&) const = default;
};

using OscillatorGains = BasicOscillatorGains<double>;
using ParameterBounds = BasicParameterBounds<double>;
using OscillatorBank = BasicOscillatorBank<double>;

// Largest admissible integration step for bank_step.
inline constexpr double kMaxOscillatorStep = 0.01;

namespace detail {

template <std::floating_point Real>
Real wrap_phase(Real phase) {
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  Real wrapped = std::fmod(phase, two_pi);
  if (wrapped < 0) wrapped += two_pi;
  // fmod of a value just below a multiple of 2*pi can round up to exactly
  // 2*pi after the negative correction.
  if (wrapped >= two_pi) wrapped = 0;
  return wrapped;
}

template <std::floating_point Real>
Real clamp(Real value, Real lo, Real hi) {
  return value < lo ? lo : (value > hi ? hi : value);
}

}  // namespace detail

template <std::floating_point Real>
void validate(const BasicOscillatorGains<Real>& gains) {
  auto ok = [](Real g) { return std::isfinite(g) && g > 0; };
  if (!ok(gains.kappa_phi) || !ok(gains.kappa_omega) || !ok(gains.kappa_alpha)) {
    throw InvalidParameter("oscillator gains must be finite and strictly positive");
  }
}

template <std::floating_point Real>
void validate(const BasicParameterBounds<Real>& bounds) {
  const bool finite = std::isfinite(bounds.omega_min) && std::isfinite(bounds.omega_max) &&
                      std::isfinite(bounds.alpha_abs_max) && std::isfinite(bounds.alpha0_min) &&
                      std::isfinite(bounds.alpha0_max);
  if (!finite || !(bounds.omega_min > 0) || !(bounds.omega_min < bounds.omega_max)) {
    throw InvalidParameter("oscillator bounds require 0 < omega_min < omega_max");
  }
  if (!(bounds.alpha_abs_max > 0) || !(bounds.alpha0_min < bounds.alpha0_max)) {
    throw InvalidParameter(
        "oscillator bounds require alpha_abs_max > 0 and alpha0_min < alpha0_max");
  }
}

template <std::floating_point Real>
BasicOscillatorBank<Real> bank_init(std::size_t n_harmonics, Real omega0,
                                    const BasicOscillatorGains<Real>& gains,
                                    const BasicParameterBounds<Real>& bounds) {
  validate(gains);
  validate(bounds);
  if (n_harmonics < 1) throw InvalidParameter("oscillator bank needs at least one harmonic");
  if (!(omega0 >= bounds.omega_min && omega0 <= bounds.omega_max)) {
    throw InvalidParameter("initial frequency " + std::to_string(omega0) +
                           " rad/s outside [" + std::to_string(bounds.omega_min) + ", " +
                           std::to_string(bounds.omega_max) + "]");
  }
  BasicOscillatorBank<Real> bank;
  bank.omega = omega0;
  bank.phi.assign(n_harmonics, Real{0});
  bank.alpha0 = 0;
  bank.alpha.assign(n_harmonics, Real{0});
  bank.gains = gains;
  bank.bounds = bounds;
  bank.last_perturbation = 0;
  return bank;
}

// Back to the initial conditions; gains and bounds are kept.
template <std::floating_point Real>
BasicOscillatorBank<Real> bank_reset(const BasicOscillatorBank<Real>& bank, Real omega0) {
  return bank_init(bank.n_harmonics(), omega0, bank.gains, bank.bounds);
}

template <std::floating_point Real>
Real estimate(const BasicOscillatorBank<Real>& bank) {
  Real q = bank.alpha0;
  for (std::size_t i = 0; i < bank.phi.size(); ++i) q += bank.alpha[i] * std::sin(bank.phi[i]);
  return q;
}

// Reconstruction delta_t ahead: phases advanced at the current fundamental,
// coefficients frozen.
template <std::floating_point Real>
Real predict(const BasicOscillatorBank<Real>& bank, Real delta_t) {
  if (!(delta_t >= 0)) throw InvalidParameter("prediction horizon must be non-negative");
  Real q = bank.alpha0;
  for (std::size_t i = 0; i < bank.phi.size(); ++i) {
    const Real harmonic = static_cast<Real>(i + 1);
    q += bank.alpha[i] * std::sin(bank.phi[i] + harmonic * bank.omega * delta_t);
  }
  return q;
}

template <std::floating_point Real>
bool is_finite(const BasicOscillatorBank<Real>& bank) {
  if (!std::isfinite(bank.omega) || !std::isfinite(bank.alpha0) ||
      !std::isfinite(bank.last_perturbation)) {
    return false;
  }
  for (Real v : bank.phi)
    if (!std::isfinite(v)) return false;
  for (Real v : bank.alpha)
    if (!std::isfinite(v)) return false;
  return true;
}

template <std::floating_point Real>
struct BasicBankStep {
  BasicOscillatorBank<Real> bank;
  Real perturbation;
};

// One explicit Euler step of the update laws. The perturbation is evaluated
// once against the pre-step reconstruction and shared by all four laws.
template <std::floating_point Real>
BasicBankStep<Real> bank_step(BasicOscillatorBank<Real> bank, Real q_measured, Real dt) {
  if (!(dt > 0) || dt > static_cast<Real>(kMaxOscillatorStep)) {
    throw InvalidParameter("oscillator step dt must lie in (0, 0.01] s");
  }
  if (!std::isfinite(q_measured)) throw NonFiniteInput("non-finite oscillator input");
  if (!is_finite(bank)) throw NonFiniteInput("non-finite oscillator state");

  const auto& g = bank.gains;
  const auto& b = bank.bounds;
  const Real p = q_measured - estimate(bank);
  const Real cos_phi1 = std::cos(bank.phi[0]);

  for (std::size_t i = 0; i < bank.phi.size(); ++i) {
    const Real s = std::sin(bank.phi[i]);
    const Real c = std::cos(bank.phi[i]);
    const Real harmonic = static_cast<Real>(i + 1);
    bank.phi[i] = detail::wrap_phase(bank.phi[i] + dt * (harmonic * bank.omega + g.kappa_phi * p * c));
    bank.alpha[i] =
        detail::clamp(bank.alpha[i] + dt * g.kappa_alpha * p * s, -b.alpha_abs_max, b.alpha_abs_max);
  }
  bank.omega = detail::clamp(bank.omega + dt * g.kappa_omega * p * cos_phi1, b.omega_min, b.omega_max);
  bank.alpha0 = detail::clamp(bank.alpha0 + dt * g.kappa_alpha * p, b.alpha0_min, b.alpha0_max);
  bank.last_perturbation = p;
  return {std::move(bank), p};
}

}  // namespace exo
