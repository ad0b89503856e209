#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "exoassist/config.hpp"
#include "exoassist/plant.hpp"
#include "test_support.hpp"

namespace {

using namespace exo;

constexpr double kPi = std::numbers::pi;
constexpr double kDt = 0.001;

TEST(ActuatorDefaults, GearAndBacklash) {
  const ActuatorParams p;
  EXPECT_EQ(p.gear_ratio, 448.0 / 3.0);
  EXPECT_EQ(p.backlash_half_width, 0.5 * kPi / 180.0);
  EXPECT_EQ(ScenarioConfig{}.actuator, p);
  EXPECT_EQ(exo::testing::shipped_config("default.cfg").actuator, p);
  const auto parsed = parse_config("plant.gear_ratio = 149.33333333333334\n"
                                   "plant.backlash_half_width = 0.008726646259971648\n");
  EXPECT_EQ(parsed.actuator.gear_ratio, 448.0 / 3.0);
  EXPECT_EQ(parsed.actuator.backlash_half_width, 0.5 * kPi / 180.0);
}

TEST(ActuatorDefaults, ValidateRejectsNonPhysical) {
  ActuatorParams p;
  EXPECT_NO_THROW(validate(p));
  p.contact_stiffness = 0.0;
  EXPECT_THROW(validate(p), InvalidParameter);
  p = ActuatorParams{};
  p.motor_side_viscous_friction = -0.1;
  EXPECT_THROW(validate(p), InvalidParameter);
  p = ActuatorParams{};
  p.backlash_half_width = 0.0;
  EXPECT_THROW(validate(p), InvalidParameter);
  PendulumParams leg;
  leg.inertia = 0.0;
  EXPECT_THROW(validate(leg), InvalidParameter);
  EXPECT_EQ(reflected_inertia(2e-7, 448.0 / 3.0), 2e-7 * (448.0 / 3.0) * (448.0 / 3.0));
}

TEST(BacklashPenetration, DeadZoneAndEdges) {
  const double h = 0.01;
  EXPECT_EQ(backlash_penetration(0.005, 0.0, h), 0.0);
  EXPECT_EQ(backlash_penetration(-0.0099, 0.0, h), 0.0);
  EXPECT_NEAR(backlash_penetration(0.013, 0.0, h), 0.003, 1e-15);
  EXPECT_NEAR(backlash_penetration(0.0, 0.012, h), -0.002, 1e-15);
}

TEST(CouplingTorque, OneSidedContact) {
  ActuatorParams p;
  ActuatorState s;
  s.q_out = p.backlash_half_width + 0.001;
  EXPECT_NEAR(coupling_torque(s, p), -p.contact_stiffness * 0.001, 1e-12);
  // Separating faster than the spring pushes: contact cannot pull.
  s.qd_out = -10.0;
  EXPECT_EQ(coupling_torque(s, p), 0.0);
  s = ActuatorState{};
  s.q_out = 0.001;
  s.qd_out = 5.0;
  EXPECT_EQ(coupling_torque(s, p), 0.0);
}

TEST(ActuatorStep, EquilibriumIsFixedPoint) {
  const ActuatorParams p;
  ActuatorState s;
  s.q_out = 0.3;
  s.q_motor = 0.3002;
  for (int k = 0; k < 1000; ++k) s = actuator_step(s, p, 0.0, 0.0, kDt);
  EXPECT_EQ(s.q_out, 0.3);
  EXPECT_EQ(s.q_motor, 0.3002);
  EXPECT_EQ(s.qd_out, 0.0);
  EXPECT_EQ(s.qd_motor, 0.0);
}

TEST(ActuatorStep, MotorStillUntilEdgeReached) {
  const ActuatorParams p;
  ActuatorState s;
  bool engaged = false;
  for (int k = 0; k < 200; ++k) {
    const double before = s.q_out - s.q_motor;
    s = actuator_step(s, p, 0.0, 0.05, kDt);
    if (!engaged && std::abs(before) < p.backlash_half_width) {
      ASSERT_EQ(s.q_motor, 0.0) << "tick " << k;
      ASSERT_EQ(s.qd_motor, 0.0);
    }
    if (std::abs(s.q_out - s.q_motor) >= p.backlash_half_width) engaged = true;
  }
  EXPECT_TRUE(engaged);
  EXPECT_GT(s.q_motor, 0.0);
}

TEST(ActuatorStep, TraverseTimeMatchesRigidBody) {
  const ActuatorParams p;
  const double tau = 0.1;
  const double expected = std::sqrt(2.0 * p.output_side_inertia * p.backlash_half_width / tau);
  ActuatorState s;
  int k = 0;
  while (s.q_out < p.backlash_half_width) {
    s = actuator_step(s, p, 0.0, tau, kDt);
    ++k;
    ASSERT_LT(k, 10000);
  }
  // First crossing lies within the last step.
  const double t = k * kDt;
  EXPECT_LT(std::abs(t - expected) / expected, 0.05) << "t=" << t << " expected " << expected;
}

TEST(ActuatorStep, DeadZoneTransparencyProperty) {
  // Random user motion inside the dead zone, prescribed or force driven:
  // the motor angle never changes at all.
  const ActuatorParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amp(0.05, 0.98), freq(0.5, 8.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = amp(rng) * p.backlash_half_width, w = 2 * kPi * freq(rng);
    ActuatorState s;
    for (int k = 1; k <= 3000; ++k) {
      const double t = k * kDt;
      s = actuator_step_prescribed(s, p, 0.0, a * std::sin(w * t), a * w * std::cos(w * t), kDt);
      ASSERT_EQ(s.q_motor, 0.0);
      ASSERT_EQ(s.qd_motor, 0.0);
    }
  }
}

TEST(ActuatorStep, PenetrationSmallUnderNominalTorque) {
  const ActuatorParams p;
  const double tau = 0.275;
  for (double sign : {1.0, -1.0}) {
    ActuatorState s;
    double worst = 0.0;
    for (int k = 0; k < 3000; ++k) {
      s = actuator_step(s, p, sign * tau, -sign * tau, kDt);
      worst = std::max(worst, std::abs(backlash_penetration(s.q_out, s.q_motor, p.backlash_half_width)));
    }
    EXPECT_LT(worst, 0.1 * p.backlash_half_width) << "sign " << sign;
    EXPECT_NEAR(std::abs(backlash_penetration(s.q_out, s.q_motor, p.backlash_half_width)),
                tau / p.contact_stiffness, 1e-9);
  }
}

TEST(ActuatorStep, RejectsNonFinite) {
  const ActuatorParams p;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(actuator_step({}, p, nan, 0.0, kDt), NonFiniteInput);
  EXPECT_THROW(actuator_step({}, p, 0.0, std::numeric_limits<double>::infinity(), kDt), NonFiniteInput);
  EXPECT_THROW(actuator_step({}, p, 0.0, 0.0, 0.0), InvalidParameter);
  EXPECT_THROW(actuator_step_prescribed({}, p, 0.0, nan, 0.0, kDt), NonFiniteInput);
  ActuatorState bad;
  bad.qd_motor = nan;
  EXPECT_THROW(actuator_step(bad, p, 0.0, 0.0, kDt), NonFiniteInput);
}

TEST(ActuatorStep, PassiveEnergyNonIncreasing) {
  // Free actuator after an impact: contact damping and friction only remove
  // energy. Checked on the step-consistent energy.
  const ActuatorParams p;
  const PendulumParams no_leg{1.0, 0.0, 0.0, 0.0};
  ActuatorState s;
  s.qd_out = 2.0;
  s.qd_motor = -1.0;
  const double e0 = coupled_modified_energy(s, p, no_leg, kDt);
  double prev = e0;
  for (int k = 0; k < 5000; ++k) {
    s = actuator_step(s, p, 0.0, 0.0, kDt);
    const double e = coupled_modified_energy(s, p, no_leg, kDt);
    ASSERT_LE(e - prev, 1e-6 * e0) << "tick " << k;
    prev = e;
  }
  EXPECT_LT(prev, 0.5 * e0);
}

TEST(PendulumStep, EquilibriumIsFixedPoint) {
  const PendulumParams p{0.05, 1.0, 0.0872, 0.1};
  auto [q, v] = pendulum_step(0.0872, 0.0, p, 0.0, kDt);
  EXPECT_EQ(q, 0.0872);
  EXPECT_EQ(v, 0.0);
}

TEST(PendulumStep, SmallAngleFrequency) {
  const PendulumParams p{0.05, 1.0, 0.1, 0.0};
  const double f_expected = std::sqrt(p.gravity_coefficient / p.inertia) / (2 * kPi);
  double q = p.equilibrium_offset + 10.0 * kPi / 180.0, v = 0.0;
  std::vector<double> crossings;
  double prev = q - p.equilibrium_offset;
  for (int k = 1; k <= 20000; ++k) {
    std::tie(q, v) = pendulum_step(q, v, p, 0.0, kDt);
    const double x = q - p.equilibrium_offset;
    if (prev < 0 && x >= 0) crossings.push_back((k - 1 + (-prev) / (x - prev)) * kDt);
    prev = x;
  }
  ASSERT_GE(crossings.size(), 5u);
  const double period = (crossings.back() - crossings.front()) / (crossings.size() - 1);
  EXPECT_LT(std::abs(1.0 / period - f_expected) / f_expected, 0.01);
}

TEST(PendulumStep, EnergyNonIncreasingPerStep) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-1.2, 1.2), friction(0.0, 0.3), offset(-0.2, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    const PendulumParams p{0.05, 1.0, offset(rng), trial == 0 ? 0.0 : friction(rng)};
    double q = p.equilibrium_offset + angle(rng), v = 0.0;
    const double e0 = pendulum_modified_energy(q, v, p, kDt);
    double prev = e0;
    for (int k = 0; k < 10000; ++k) {
      std::tie(q, v) = pendulum_step(q, v, p, 0.0, kDt);
      const double e = pendulum_modified_energy(q, v, p, kDt);
      ASSERT_LE(e - prev, 1e-6 * e0) << "trial " << trial << " tick " << k;
      prev = e;
    }
  }
}

TEST(PendulumStep, CoupledEnergyNonIncreasingPerStep) {
  const PendulumParams leg{0.05, 1.0, 5.0 * kPi / 180.0, 0.1};
  ActuatorParams combined;
  combined.output_side_inertia += leg.inertia;
  ActuatorState s;
  s.q_out = s.q_motor = leg.equilibrium_offset + 20.0 * kPi / 180.0;
  const double e0 = coupled_modified_energy(s, combined, leg, kDt);
  double prev = e0;
  for (int k = 0; k < 10000; ++k) {
    s = actuator_step(s, combined, 0.0, pendulum_torque(s.q_out, s.qd_out, leg), kDt);
    const double e = coupled_modified_energy(s, combined, leg, kDt);
    ASSERT_LE(e - prev, 1e-6 * e0) << "tick " << k;
    prev = e;
  }
}

TEST(PendulumStep, RejectsBadInputs) {
  const PendulumParams p;
  EXPECT_THROW(pendulum_step(std::numeric_limits<double>::quiet_NaN(), 0.0, p, 0.0, kDt), NonFiniteInput);
  EXPECT_THROW(pendulum_step(0.0, 0.0, p, 0.0, -kDt), InvalidParameter);
}

}  // namespace
