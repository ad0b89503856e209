#pragma once

// Grid search over oscillator gains. Every grid point runs the base scenario
// once per corpus pattern; a point is feasible when every leg of every run
// activates and keeps its post-activation RMSE ratio under the limit. The
// winner minimizes mean activation time; ties go to lower mean RMSE ratio,
// then to the lexicographically smaller gain triple.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <future>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "exoassist/config.hpp"
#include "exoassist/error.hpp"
#include "exoassist/gait.hpp"
#include "exoassist/oscillator.hpp"
#include "exoassist/scenario.hpp"
#include "exoassist/text.hpp"

namespace exo {

struct GainGrid {
  std::vector<double> kappa_phi;
  std::vector<double> kappa_omega;
  std::vector<double> kappa_alpha;

  std::size_t size() const { return kappa_phi.size() * kappa_omega.size() * kappa_alpha.size(); }

  // Row-major over (kappa_phi, kappa_omega, kappa_alpha).
  OscillatorGains at(std::size_t index) const {
    const std::size_t na = kappa_alpha.size();
    const std::size_t nw = kappa_omega.size();
    return {kappa_phi[index / (nw * na)], kappa_omega[(index / na) % nw], kappa_alpha[index % na]};
  }
};

struct TuneRow {
  OscillatorGains gains;
  bool feasible = false;
  std::size_t activated_legs = 0;
  std::size_t total_legs = 0;
  std::optional<double> mean_activation_time;  // s, over activated legs
  std::optional<double> mean_rmse_ratio;       // over activated legs
  std::optional<double> max_rmse_ratio;
};

struct TuneResult {
  OscillatorGains best;
  std::size_t best_index = 0;
  std::vector<TuneRow> table;  // grid order
};

inline GainGrid grid_from(const TuneSettings& s) { return {s.kappa_phi, s.kappa_omega, s.kappa_alpha}; }

// The configured gait with each cadence and amplitude scale of the settings.
inline std::vector<GaitPattern> default_corpus(const ScenarioConfig& base) {
  std::vector<GaitPattern> corpus;
  for (double cadence : base.tune.cadences) {
    for (double scale : base.tune.amplitude_scales) {
      GaitPattern p = base.gait;
      p.cadence_profile = PiecewiseLinear(cadence);
      p.amplitude_scale_profile = PiecewiseLinear(scale);
      corpus.push_back(std::move(p));
    }
  }
  return corpus;
}

inline TuneRow evaluate_gains(const OscillatorGains& gains, const std::vector<GaitPattern>& corpus,
                              const ScenarioConfig& base) {
  TuneRow row;
  row.gains = gains;
  double time_sum = 0.0;
  double ratio_sum = 0.0;
  double ratio_max = 0.0;
  bool all_within = true;
  for (const GaitPattern& pattern : corpus) {
    ScenarioConfig c = base;
    c.gains = gains;
    c.gait = pattern;
    c.omega0 = 2.0 * std::numbers::pi * pattern.cadence_profile(c.adaptation_start);
    const RunResult r = run_scenario(c);
    for (const JointMetrics& m : r.metrics.joints) {
      ++row.total_legs;
      if (!m.activation_time || !m.rmse_ratio) {
        all_within = false;
        continue;
      }
      ++row.activated_legs;
      time_sum += *m.activation_time;
      ratio_sum += *m.rmse_ratio;
      ratio_max = std::max(ratio_max, *m.rmse_ratio);
      if (!(*m.rmse_ratio < base.tune.rmse_ratio_limit)) all_within = false;
    }
  }
  if (row.activated_legs > 0) {
    const double n = static_cast<double>(row.activated_legs);
    row.mean_activation_time = time_sum / n;
    row.mean_rmse_ratio = ratio_sum / n;
    row.max_rmse_ratio = ratio_max;
  }
  row.feasible = all_within && row.activated_legs == row.total_legs && row.total_legs > 0;
  return row;
}

// Evaluates grid points concurrently; results are stored by grid index so the
// thread count never changes the outcome.
inline TuneResult tune_gains(const std::vector<GaitPattern>& corpus, const GainGrid& grid,
                             const ScenarioConfig& base, unsigned threads = 0) {
  if (corpus.empty()) throw InvalidParameter("tuning corpus is empty");
  if (grid.size() == 0) throw InvalidParameter("tuning grid is empty");
  if (!is_gait_kind(base.kind)) throw ConfigError("tuning needs a synthetic gait scenario kind");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  TuneResult result;
  result.table.resize(grid.size());
  std::vector<std::future<void>> workers;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < std::min<std::size_t>(threads, grid.size()); ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < grid.size(); i = next++) {
        try {
          result.table[i] = evaluate_gains(grid.at(i), corpus, base);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    }));
  }
  for (auto& w : workers) w.get();
  if (failure) std::rethrow_exception(failure);

  std::optional<std::size_t> best;
  auto key = [&](std::size_t i) {
    const TuneRow& r = result.table[i];
    return std::make_tuple(*r.mean_activation_time, *r.mean_rmse_ratio, r.gains.kappa_phi, r.gains.kappa_omega,
                           r.gains.kappa_alpha);
  };
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    if (!result.table[i].feasible) continue;
    if (!best || key(i) < key(*best)) best = i;
  }
  if (!best) throw NoFeasiblePoint("no grid point keeps every leg active with RMSE ratio below the limit");
  result.best_index = *best;
  result.best = result.table[*best].gains;
  return result;
}

inline std::string tune_table_csv(const TuneResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); };
  std::string out =
      "kappa_phi,kappa_omega,kappa_alpha,feasible,activated_legs,total_legs,mean_activation_time,"
      "mean_rmse_ratio,max_rmse_ratio,selected\n";
  for (std::size_t i = 0; i < r.table.size(); ++i) {
    const TuneRow& row = r.table[i];
    out += text::format_double(row.gains.kappa_phi) + "," + text::format_double(row.gains.kappa_omega) + "," +
           text::format_double(row.gains.kappa_alpha) + "," + (row.feasible ? "1" : "0") + "," +
           std::to_string(row.activated_legs) + "," + std::to_string(row.total_legs) + "," +
           opt(row.mean_activation_time) + "," + opt(row.mean_rmse_ratio) + "," + opt(row.max_rmse_ratio) + "," +
           (i == r.best_index ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace exo
