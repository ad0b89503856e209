#pragma once

// Scenario configuration: a flat `section.key = value` text format. Every key
// is listed in config_keys(); unknown keys, duplicates and malformed values are
// hard errors. Keys that are absent keep their compiled-in defaults, which
// mirror config/default.cfg.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "exoassist/control.hpp"
#include "exoassist/error.hpp"
#include "exoassist/gait.hpp"
#include "exoassist/oscillator.hpp"
#include "exoassist/plant.hpp"
#include "exoassist/text.hpp"

namespace exo {

enum class ScenarioKind { kStandToWalk, kConstantGait, kSpeedRamp, kPendulumRelease, kCsvReplay };

enum class TransientLeg { kNone, kRight, kLeft };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::kStandToWalk: return "stand_to_walk";
    case ScenarioKind::kConstantGait: return "constant_gait";
    case ScenarioKind::kSpeedRamp: return "speed_ramp";
    case ScenarioKind::kPendulumRelease: return "pendulum_release";
    case ScenarioKind::kCsvReplay: return "csv_replay";
  }
  return "?";
}

inline std::string_view to_string(TransientLeg l) {
  switch (l) {
    case TransientLeg::kNone: return "none";
    case TransientLeg::kRight: return "right";
    case TransientLeg::kLeft: return "left";
  }
  return "?";
}

// Half-sine bump added to one leg's measured angle.
struct TransientSpec {
  TransientLeg leg = TransientLeg::kNone;
  double start = 0.0;      // s
  double duration = 0.3;   // s
  double amplitude = 0.0;  // rad

  double at(double t) const {
    if (leg == TransientLeg::kNone || t < start || t > start + duration) return 0.0;
    return amplitude * std::sin(std::numbers::pi * (t - start) / duration);
  }
  bool operator==(const TransientSpec&) const = default;
};

struct TuneSettings {
  std::vector<double> kappa_phi{15.0, 20.0, 25.0, 30.0};
  std::vector<double> kappa_omega{10.0, 15.0, 20.0, 30.0};
  std::vector<double> kappa_alpha{1.5, 2.0, 3.0};
  std::vector<double> cadences{0.7, 0.9, 1.1};          // Hz
  std::vector<double> amplitude_scales{0.8, 1.0};
  double rmse_ratio_limit = 0.10;

  bool operator==(const TuneSettings&) const = default;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kStandToWalk;
  double dt = 0.001;
  double duration = 20.0;
  std::uint64_t seed = 1;
  std::string input_path;
  std::string output_dir = "out";
  // Oscillators are reset and adaptation begins at this time.
  double adaptation_start = 1.0;
  TransientSpec transient;
  double release_angle = 20.0 * std::numbers::pi / 180.0;  // pendulum release, rad

  GaitPattern gait = default_gait_pattern();
  double stand_duration = 1.0;
  double ramp_duration = 1.0;

  std::size_t n_harmonics = 3;
  double omega0 = 2.0 * std::numbers::pi * 0.9;
  OscillatorGains gains{30.0, 10.0, 3.0};
  ParameterBounds bounds = default_bounds();

  ControlParams control;
  ActuatorParams actuator;
  PendulumParams pendulum{0.05, 1.0, 5.0 * std::numbers::pi / 180.0, 0.1};

  TuneSettings tune;

  bool operator==(const ScenarioConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Value codecs

namespace config_detail {

[[noreturn]] inline void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  throw ConfigError(std::string(key) + ": cannot parse '" + std::string(value) + "' as " +
                    std::string(what));
}

inline double parse_num(std::string_view key, std::string_view v) {
  auto d = text::parse_number(v);
  if (!d || !std::isfinite(*d)) bad_value(key, v, "a finite number");
  return *d;
}

inline std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (auto part : text::split(v, ',')) out.push_back(parse_num(key, part));
  return out;
}

inline std::string format_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += text::format_double(xs[i]);
  }
  return s;
}

inline std::pair<double, double> parse_pair(std::string_view key, std::string_view v) {
  auto parts = text::split(v, ':');
  if (parts.size() != 2) bad_value(key, v, "a 'x:y' pair");
  return {parse_num(key, parts[0]), parse_num(key, parts[1])};
}

inline PiecewiseLinear parse_profile(std::string_view key, std::string_view v) {
  if (text::trim(v).find(':') == std::string_view::npos) return PiecewiseLinear(parse_num(key, v));
  std::vector<PiecewiseLinear::Knot> knots;
  for (auto part : text::split(v, ',')) {
    auto [t, value] = parse_pair(key, part);
    knots.push_back({t, value});
  }
  try {
    return PiecewiseLinear(std::move(knots));
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

inline std::string format_profile(const PiecewiseLinear& p) {
  if (p.is_constant() && p.knots().front().t == 0.0) return text::format_double(p.knots().front().value);
  std::string s;
  for (std::size_t i = 0; i < p.knots().size(); ++i) {
    if (i) s += ", ";
    s += text::format_double(p.knots()[i].t) + ":" + text::format_double(p.knots()[i].value);
  }
  return s;
}

inline std::vector<Harmonic> parse_harmonics(std::string_view key, std::string_view v) {
  std::vector<Harmonic> out;
  for (auto part : text::split(v, ',')) {
    auto [amp, phase] = parse_pair(key, part);
    out.push_back({amp, phase});
  }
  return out;
}

inline std::string format_harmonics(const std::vector<Harmonic>& hs) {
  std::string s;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (i) s += ", ";
    s += text::format_double(hs[i].amplitude) + ":" + text::format_double(hs[i].phase);
  }
  return s;
}

inline ScenarioKind parse_kind(std::string_view key, std::string_view v) {
  v = text::trim(v);
  for (auto k : {ScenarioKind::kStandToWalk, ScenarioKind::kConstantGait, ScenarioKind::kSpeedRamp,
                 ScenarioKind::kPendulumRelease, ScenarioKind::kCsvReplay}) {
    if (v == to_string(k)) return k;
  }
  bad_value(key, v, "a scenario kind");
}

inline TransientLeg parse_leg(std::string_view key, std::string_view v) {
  v = text::trim(v);
  for (auto l : {TransientLeg::kNone, TransientLeg::kRight, TransientLeg::kLeft}) {
    if (v == to_string(l)) return l;
  }
  bad_value(key, v, "none|right|left");
}

}  // namespace config_detail

// ---------------------------------------------------------------------------
// Key table

struct ConfigKey {
  std::string_view name;
  std::string_view doc;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

namespace config_detail {

template <typename Access>
ConfigKey number_key(std::string_view name, std::string_view doc, Access access) {
  return {name, doc,
          [access, name](ScenarioConfig& c, std::string_view v) { access(c) = parse_num(name, v); },
          [access](const ScenarioConfig& c) { return text::format_double(access(c)); }};
}

template <typename Access>
ConfigKey list_key(std::string_view name, std::string_view doc, Access access) {
  return {name, doc,
          [access, name](ScenarioConfig& c, std::string_view v) { access(c) = parse_list(name, v); },
          [access](const ScenarioConfig& c) { return format_list(access(c)); }};
}

template <typename Access>
ConfigKey profile_key(std::string_view name, std::string_view doc, Access access) {
  return {name, doc,
          [access, name](ScenarioConfig& c, std::string_view v) { access(c) = parse_profile(name, v); },
          [access](const ScenarioConfig& c) { return format_profile(access(c)); }};
}

}  // namespace config_detail

inline const std::vector<ConfigKey>& config_keys() {
  using namespace config_detail;
  static const std::vector<ConfigKey> keys = {
      {"scenario.kind", "stand_to_walk | constant_gait | speed_ramp | pendulum_release | csv_replay",
       [](ScenarioConfig& c, std::string_view v) { c.kind = parse_kind("scenario.kind", v); },
       [](const ScenarioConfig& c) { return std::string(to_string(c.kind)); }},
      number_key("scenario.dt", "integration and controller step [s], in (0, 0.01]",
                 [](auto& c) -> auto& { return c.dt; }),
      number_key("scenario.duration", "simulated time [s]", [](auto& c) -> auto& { return c.duration; }),
      {"scenario.seed", "seed for the gait measurement noise (overridden by --seed)",
       [](ScenarioConfig& c, std::string_view v) {
         const double d = parse_num("scenario.seed", v);
         if (d < 0 || d != std::floor(d) || d > 9007199254740992.0) {
           bad_value("scenario.seed", v, "a non-negative integer");
         }
         c.seed = static_cast<std::uint64_t>(d);
       },
       [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
      {"scenario.input", "input CSV for csv_replay (relative to the config file)",
       [](ScenarioConfig& c, std::string_view v) { c.input_path = std::string(text::trim(v)); },
       [](const ScenarioConfig& c) { return c.input_path; }},
      {"scenario.output", "output directory (overridden by --out)",
       [](ScenarioConfig& c, std::string_view v) { c.output_dir = std::string(text::trim(v)); },
       [](const ScenarioConfig& c) { return c.output_dir; }},
      number_key("scenario.adaptation_start",
                 "time at which the oscillators are reset and adaptation starts [s]",
                 [](auto& c) -> auto& { return c.adaptation_start; }),
      {"scenario.transient_leg", "leg receiving an injected transient: none | right | left",
       [](ScenarioConfig& c, std::string_view v) {
         c.transient.leg = parse_leg("scenario.transient_leg", v);
       },
       [](const ScenarioConfig& c) { return std::string(to_string(c.transient.leg)); }},
      number_key("scenario.transient_start", "transient start time [s]",
                 [](auto& c) -> auto& { return c.transient.start; }),
      number_key("scenario.transient_duration", "transient (half-sine) duration [s]",
                 [](auto& c) -> auto& { return c.transient.duration; }),
      number_key("scenario.transient_amplitude", "transient peak [rad]",
                 [](auto& c) -> auto& { return c.transient.amplitude; }),
      number_key("scenario.release_angle", "pendulum release angle relative to equilibrium [rad]",
                 [](auto& c) -> auto& { return c.release_angle; }),

      {"gait.harmonics", "amplitude:phase pairs [rad:rad] for harmonics 1..M",
       [](ScenarioConfig& c, std::string_view v) {
         c.gait.base_harmonics = parse_harmonics("gait.harmonics", v);
       },
       [](const ScenarioConfig& c) { return format_harmonics(c.gait.base_harmonics); }},
      number_key("gait.offset", "mean hip angle [rad]", [](auto& c) -> auto& { return c.gait.offset; }),
      profile_key("gait.cadence", "stride frequency [Hz]: constant or t:value knots",
                  [](auto& c) -> auto& { return c.gait.cadence_profile; }),
      profile_key("gait.amplitude_scale", "dimensionless amplitude scale: constant or t:value knots",
                  [](auto& c) -> auto& { return c.gait.amplitude_scale_profile; }),
      number_key("gait.noise_std", "additive Gaussian measurement noise [rad]",
                 [](auto& c) -> auto& { return c.gait.noise_std; }),
      number_key("gait.stand_duration", "stance before walking (stand_to_walk) [s]",
                 [](auto& c) -> auto& { return c.stand_duration; }),
      number_key("gait.ramp_duration", "raised-cosine amplitude ramp (stand_to_walk) [s]",
                 [](auto& c) -> auto& { return c.ramp_duration; }),

      {"oscillator.n_harmonics", "number of oscillators N",
       [](ScenarioConfig& c, std::string_view v) {
         const double d = parse_num("oscillator.n_harmonics", v);
         if (d < 1 || d != std::floor(d) || d > 64) bad_value("oscillator.n_harmonics", v, "an integer in [1, 64]");
         c.n_harmonics = static_cast<std::size_t>(d);
       },
       [](const ScenarioConfig& c) { return std::to_string(c.n_harmonics); }},
      number_key("oscillator.omega0", "initial fundamental frequency [rad/s]",
                 [](auto& c) -> auto& { return c.omega0; }),
      number_key("oscillator.kappa_phi", "phase learning gain", [](auto& c) -> auto& { return c.gains.kappa_phi; }),
      number_key("oscillator.kappa_omega", "frequency learning gain",
                 [](auto& c) -> auto& { return c.gains.kappa_omega; }),
      number_key("oscillator.kappa_alpha", "amplitude learning gain",
                 [](auto& c) -> auto& { return c.gains.kappa_alpha; }),
      number_key("oscillator.omega_min", "lower frequency bound [rad/s]",
                 [](auto& c) -> auto& { return c.bounds.omega_min; }),
      number_key("oscillator.omega_max", "upper frequency bound [rad/s]",
                 [](auto& c) -> auto& { return c.bounds.omega_max; }),
      number_key("oscillator.alpha_abs_max", "per-harmonic amplitude cap [rad]",
                 [](auto& c) -> auto& { return c.bounds.alpha_abs_max; }),
      number_key("oscillator.alpha0_min", "lower offset bound [rad]",
                 [](auto& c) -> auto& { return c.bounds.alpha0_min; }),
      number_key("oscillator.alpha0_max", "upper offset bound [rad]",
                 [](auto& c) -> auto& { return c.bounds.alpha0_max; }),

      number_key("control.k_t", "transparency virtual stiffness [N m/rad]",
                 [](auto& c) -> auto& { return c.control.k_t; }),
      number_key("control.k_a", "assistance virtual stiffness [N m/rad]",
                 [](auto& c) -> auto& { return c.control.k_a; }),
      number_key("control.delta_t", "prediction horizon [s]", [](auto& c) -> auto& { return c.control.delta_t; }),
      number_key("control.p_max", "allowed perturbation envelope [rad]",
                 [](auto& c) -> auto& { return c.control.p_max; }),
      number_key("control.epsilon", "gating steepness [rad]", [](auto& c) -> auto& { return c.control.epsilon; }),
      number_key("control.tau_limit", "total torque saturation [N m]",
                 [](auto& c) -> auto& { return c.control.tau_limit; }),
      number_key("control.envelope_time_constant", "|p| envelope low-pass time constant [s]",
                 [](auto& c) -> auto& { return c.control.envelope_time_constant; }),
      number_key("control.activate_threshold", "weight needed to arm assistance",
                 [](auto& c) -> auto& { return c.control.activate_threshold; }),
      number_key("control.deactivate_threshold", "weight below which assistance drops",
                 [](auto& c) -> auto& { return c.control.deactivate_threshold; }),
      number_key("control.arm_duration_cycles", "fundamental periods of sustained quality before activation",
                 [](auto& c) -> auto& { return c.control.arm_duration_cycles; }),

      number_key("plant.gear_ratio", "motor turns per output turn",
                 [](auto& c) -> auto& { return c.actuator.gear_ratio; }),
      number_key("plant.backlash_half_width", "backlash half width at the output [rad]",
                 [](auto& c) -> auto& { return c.actuator.backlash_half_width; }),
      number_key("plant.motor_side_inertia", "motor inertia reflected to the output [kg m^2]",
                 [](auto& c) -> auto& { return c.actuator.motor_side_inertia; }),
      number_key("plant.output_side_inertia", "gear output inertia [kg m^2]",
                 [](auto& c) -> auto& { return c.actuator.output_side_inertia; }),
      number_key("plant.motor_side_viscous_friction", "reflected motor friction [N m s/rad]",
                 [](auto& c) -> auto& { return c.actuator.motor_side_viscous_friction; }),
      number_key("plant.output_side_viscous_friction", "output friction [N m s/rad]",
                 [](auto& c) -> auto& { return c.actuator.output_side_viscous_friction; }),
      number_key("plant.contact_stiffness", "gear contact stiffness outside the backlash [N m/rad]",
                 [](auto& c) -> auto& { return c.actuator.contact_stiffness; }),
      number_key("plant.contact_damping", "gear contact damping [N m s/rad]",
                 [](auto& c) -> auto& { return c.actuator.contact_damping; }),

      number_key("pendulum.inertia", "leg inertia about the joint [kg m^2]",
                 [](auto& c) -> auto& { return c.pendulum.inertia; }),
      number_key("pendulum.gravity_coefficient", "m g l [N m]",
                 [](auto& c) -> auto& { return c.pendulum.gravity_coefficient; }),
      number_key("pendulum.equilibrium_offset", "equilibrium angle from the vertical [rad]",
                 [](auto& c) -> auto& { return c.pendulum.equilibrium_offset; }),
      number_key("pendulum.viscous_friction", "joint friction [N m s/rad]",
                 [](auto& c) -> auto& { return c.pendulum.viscous_friction; }),

      list_key("tune.kappa_phi", "grid values for kappa_phi", [](auto& c) -> auto& { return c.tune.kappa_phi; }),
      list_key("tune.kappa_omega", "grid values for kappa_omega",
               [](auto& c) -> auto& { return c.tune.kappa_omega; }),
      list_key("tune.kappa_alpha", "grid values for kappa_alpha",
               [](auto& c) -> auto& { return c.tune.kappa_alpha; }),
      list_key("tune.cadences", "corpus cadences [Hz]", [](auto& c) -> auto& { return c.tune.cadences; }),
      list_key("tune.amplitude_scales", "corpus amplitude scales",
               [](auto& c) -> auto& { return c.tune.amplitude_scales; }),
      number_key("tune.rmse_ratio_limit", "feasibility bound on post-activation RMSE / peak-to-peak",
                 [](auto& c) -> auto& { return c.tune.rmse_ratio_limit; }),
  };
  return keys;
}

// ---------------------------------------------------------------------------

inline void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(c.dt > 0 && c.dt <= kMaxOscillatorStep)) fail("scenario.dt must lie in (0, 0.01]");
  if (!(c.duration > 0) || !std::isfinite(c.duration)) fail("scenario.duration must be positive");
  if (c.adaptation_start < 0) fail("scenario.adaptation_start must be non-negative");
  if (c.transient.leg != TransientLeg::kNone && !(c.transient.duration > 0)) {
    fail("scenario.transient_duration must be positive");
  }
  if (c.stand_duration < 0 || c.ramp_duration < 0) fail("gait stand/ramp durations must be non-negative");
  if (c.kind == ScenarioKind::kStandToWalk && c.stand_duration + c.ramp_duration > c.duration) {
    fail("gait.stand_duration + gait.ramp_duration exceeds scenario.duration");
  }
  if (c.kind == ScenarioKind::kCsvReplay && c.input_path.empty()) fail("csv_replay needs scenario.input");
  try {
    validate(c.gait);
    (void)bank_init(c.n_harmonics, c.omega0, c.gains, c.bounds);
    validate(c.control, c.actuator.backlash_half_width);
    validate(c.actuator);
    validate(c.pendulum);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  if (c.tune.kappa_phi.empty() || c.tune.kappa_omega.empty() || c.tune.kappa_alpha.empty()) {
    fail("tune grid lists must not be empty");
  }
  if (c.tune.cadences.empty() || c.tune.amplitude_scales.empty()) fail("tune corpus lists must not be empty");
}

// Applies `text` on top of `base`. `origin` prefixes error messages.
inline ScenarioConfig parse_config(std::string_view text_in, ScenarioConfig base = {},
                                   std::string_view origin = "config") {
  const auto& keys = config_keys();
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : text::split(text_in, '\n')) {
    ++line_no;
    const auto hash = raw.find('#');
    auto line = text::trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
    if (it == keys.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    }
    try {
      it->set(base, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return base;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ScenarioConfig cfg = parse_config(buf.str(), ScenarioConfig{}, path.string());
  if (!cfg.input_path.empty() && std::filesystem::path(cfg.input_path).is_relative()) {
    cfg.input_path = (path.parent_path() / cfg.input_path).lexically_normal().string();
  }
  return cfg;
}

inline std::string to_text(const ScenarioConfig& c) {
  std::string out;
  for (const auto& k : config_keys()) {
    out += std::string(k.name) + " = " + k.get(c) + "\n";
  }
  return out;
}

}  // namespace exo
