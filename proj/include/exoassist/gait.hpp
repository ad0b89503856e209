#pragma once

// Synthetic hip-angle trajectories: a truncated Fourier series over the stride
// phase, with piecewise-linear cadence and amplitude profiles and optional
// seeded Gaussian measurement noise. The left leg runs half a stride behind
// the right leg.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "exoassist/error.hpp"

namespace exo {

// Piecewise-linear function of time. Held constant before the first and after
// the last knot.
class PiecewiseLinear {
 public:
  struct Knot {
    double t;
    double value;
    bool operator==(const Knot&) const = default;
  };

  PiecewiseLinear() = default;
  explicit PiecewiseLinear(double constant) : knots_{{0.0, constant}} {}
  explicit PiecewiseLinear(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw InvalidParameter("piecewise-linear profile needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i].t) || !std::isfinite(knots_[i].value)) {
        throw InvalidParameter("piecewise-linear profile has a non-finite knot");
      }
      if (i > 0 && !(knots_[i].t > knots_[i - 1].t)) {
        throw InvalidParameter("piecewise-linear knot times must be strictly increasing");
      }
    }
  }

  const std::vector<Knot>& knots() const { return knots_; }
  bool is_constant() const { return knots_.size() == 1; }

  double operator()(double t) const {
    if (t <= knots_.front().t) return knots_.front().value;
    if (t >= knots_.back().t) return knots_.back().value;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double x, const Knot& k) { return x < k.t; });
    auto lo = hi - 1;
    const double u = (t - lo->t) / (hi->t - lo->t);
    return lo->value + u * (hi->value - lo->value);
  }

  // Exact integral over [a, b], a <= b.
  double integral(double a, double b) const {
    if (b <= a) return 0.0;
    // Breakpoints inside (a, b) split the integrand into linear pieces; the
    // trapezoid rule is exact on each.
    double total = 0.0;
    double left = a;
    for (const Knot& k : knots_) {
      if (k.t <= left) continue;
      if (k.t >= b) break;
      total += 0.5 * ((*this)(left) + (*this)(k.t)) * (k.t - left);
      left = k.t;
    }
    total += 0.5 * ((*this)(left) + (*this)(b)) * (b - left);
    return total;
  }

  double min_value() const {
    double m = knots_.front().value;
    for (const Knot& k : knots_) m = std::min(m, k.value);
    return m;
  }
  double max_value() const {
    double m = knots_.front().value;
    for (const Knot& k : knots_) m = std::max(m, k.value);
    return m;
  }

  bool operator==(const PiecewiseLinear&) const = default;

 private:
  std::vector<Knot> knots_{{0.0, 0.0}};
};

struct Harmonic {
  double amplitude;  // rad
  double phase;      // rad
  bool operator==(const Harmonic&) const = default;
};

struct GaitPattern {
  std::vector<Harmonic> base_harmonics;
  double offset = 0.0;
  PiecewiseLinear cadence_profile{1.0};          // stride frequency [Hz]
  PiecewiseLinear amplitude_scale_profile{1.0};  // dimensionless
  double noise_std = 0.0;                        // rad
  std::uint64_t seed = 0;

  bool operator==(const GaitPattern&) const = default;
};

struct SignalSample {
  double t;
  double q_right;
  double q_left;
  bool operator==(const SignalSample&) const = default;
};

enum class Leg { kRight, kLeft };

inline constexpr double kMinCadence = 0.1;
inline constexpr double kMaxCadence = 3.0;

inline void validate(const GaitPattern& pattern) {
  if (pattern.base_harmonics.empty()) throw InvalidParameter("gait pattern needs at least one harmonic");
  for (const Harmonic& h : pattern.base_harmonics) {
    if (!std::isfinite(h.amplitude) || !std::isfinite(h.phase)) {
      throw InvalidParameter("gait harmonic amplitude and phase must be finite");
    }
  }
  if (!std::isfinite(pattern.offset)) throw InvalidParameter("gait offset must be finite");
  if (!(pattern.cadence_profile.min_value() > kMinCadence) ||
      !(pattern.cadence_profile.max_value() < kMaxCadence)) {
    throw InvalidParameter("cadence profile must stay within (0.1, 3.0) Hz");
  }
  if (!std::isfinite(pattern.noise_std) || pattern.noise_std < 0) {
    throw InvalidParameter("noise standard deviation must be finite and non-negative");
  }
}

// Documented stand-in pattern: three harmonics roughly shaped like a hip
// flexion/extension trace at a relaxed walking cadence.
inline GaitPattern default_gait_pattern() {
  GaitPattern p;
  p.base_harmonics = {{0.35, 0.0}, {0.10, std::numbers::pi / 2}, {0.04, std::numbers::pi}};
  p.offset = 0.05;
  p.cadence_profile = PiecewiseLinear(0.9);
  p.amplitude_scale_profile = PiecewiseLinear(1.0);
  p.noise_std = 0.005;
  p.seed = 0;
  return p;
}

// Stride timeline: walking starts at `onset`; the amplitude ramps in with a
// raised cosine over `ramp` seconds. onset = ramp = 0 is continuous walking.
struct WalkTimeline {
  double onset = 0.0;
  double ramp = 0.0;
};

// Stride phase Phi(t) = integral of 2*pi*cadence from the walk onset.
inline double stride_phase(const GaitPattern& pattern, double t, const WalkTimeline& timeline = {}) {
  if (t <= timeline.onset) return 0.0;
  return 2.0 * std::numbers::pi * pattern.cadence_profile.integral(timeline.onset, t);
}

inline double onset_envelope(double t, const WalkTimeline& timeline) {
  if (t < timeline.onset) return 0.0;
  if (timeline.ramp <= 0.0 || t >= timeline.onset + timeline.ramp) return 1.0;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * (t - timeline.onset) / timeline.ramp));
}

// Noiseless hip angle for one leg.
inline double gait_angle(const GaitPattern& pattern, double t, Leg leg,
                         const WalkTimeline& timeline = {}) {
  const double scale = onset_envelope(t, timeline) * pattern.amplitude_scale_profile(t);
  double phase = stride_phase(pattern, t, timeline);
  if (leg == Leg::kLeft) phase += std::numbers::pi;
  double q = 0.0;
  for (std::size_t i = 0; i < pattern.base_harmonics.size(); ++i) {
    const Harmonic& h = pattern.base_harmonics[i];
    q += h.amplitude * std::sin(static_cast<double>(i + 1) * phase + h.phase);
  }
  return pattern.offset + scale * q;
}

// Number of samples covering [0, duration] at step dt, both ends included.
inline std::size_t sample_count(double duration, double dt) {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

// What the encoder reports alongside the motion the limb actually performs.
// An empty `limb` means the measurement is taken as the limb motion.
struct GaitSignal {
  std::vector<SignalSample> measured;
  std::vector<SignalSample> limb;

  const std::vector<SignalSample>& motion() const { return limb.empty() ? measured : limb; }
  bool operator==(const GaitSignal&) const = default;
};

inline GaitSignal sample_gait_signal(const GaitPattern& pattern, const WalkTimeline& timeline,
                                     double duration, double dt) {
  validate(pattern);
  if (!(duration > 0) || !(dt > 0) || !std::isfinite(duration) || !std::isfinite(dt)) {
    throw InvalidParameter("gait series needs duration > 0 and dt > 0");
  }
  const std::size_t n = sample_count(duration, dt);
  GaitSignal out;
  out.limb.reserve(n);
  out.measured.reserve(n);
  std::mt19937_64 rng(pattern.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const bool noisy = pattern.noise_std > 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const SignalSample clean{t, gait_angle(pattern, t, Leg::kRight, timeline),
                             gait_angle(pattern, t, Leg::kLeft, timeline)};
    SignalSample s = clean;
    if (noisy) {
      s.q_right += pattern.noise_std * noise(rng);
      s.q_left += pattern.noise_std * noise(rng);
    }
    out.limb.push_back(clean);
    out.measured.push_back(s);
  }
  return out;
}

inline std::vector<SignalSample> sample_gait(const GaitPattern& pattern, const WalkTimeline& timeline,
                                             double duration, double dt) {
  return sample_gait_signal(pattern, timeline, duration, dt).measured;
}

inline std::vector<SignalSample> synth_series(const GaitPattern& pattern, double duration, double dt) {
  return sample_gait(pattern, WalkTimeline{}, duration, dt);
}

inline std::vector<SignalSample> stand_to_walk(const GaitPattern& pattern, double stand_duration,
                                               double ramp_duration, double total, double dt) {
  if (!(stand_duration >= 0) || !(ramp_duration >= 0)) {
    throw InvalidParameter("stand and ramp durations must be non-negative");
  }
  if (stand_duration + ramp_duration > total) {
    throw InvalidParameter("stand + ramp duration exceeds the total duration");
  }
  return sample_gait(pattern, WalkTimeline{stand_duration, ramp_duration}, total, dt);
}

}  // namespace exo
