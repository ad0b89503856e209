// Command-line front end: run scenarios, replay recorded CSV, tune oscillator
// gains and export synthetic gait series.
//
// Exit codes: 0 success, 2 config/schema error, 3 numerical error, 4 I/O error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "exoassist/exoassist.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "scenario config file (built-in defaults when omitted)");
  cmd->add_option("--out", o.out_dir, "output directory (overrides scenario.output)");
  cmd->add_option("--seed", o.seed, "noise seed (overrides scenario.seed)");
  cmd->add_flag("--quiet", o.quiet, "print nothing on success");
}

exo::ScenarioConfig load(const CommonOptions& o) {
  exo::ScenarioConfig c = o.config_path.empty() ? exo::ScenarioConfig{} : exo::load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  exo::validate(c);
  return c;
}

void report(const exo::RunResult& r, const exo::ScenarioConfig& c, const CommonOptions& o, double seconds) {
  const auto files = exo::emit_outputs(r, c.control.tau_limit, c.output_dir);
  if (o.quiet) return;
  std::cout << exo::metrics_to_text(r.metrics) << "\n";
  std::cout << "simulated " << r.metrics.ticks << " ticks in " << exo::text::format_fixed(seconds, 3) << " s\n";
  std::cout << "wrote " << files.trace_csv.string() << ", " << files.metrics_txt.filename().string() << ", "
            << files.metrics_kv.filename().string() << ", " << files.angles_svg.filename().string() << ", "
            << files.frequency_svg.filename().string() << "\n";
}

template <typename F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const CommonOptions& o) {
  const exo::ScenarioConfig c = load(o);
  exo::RunResult r;
  const double seconds = timed([&] { r = exo::run_scenario(c); });
  report(r, c, o, seconds);
  return 0;
}

int cmd_replay(const CommonOptions& o, const std::string& input) {
  exo::ScenarioConfig c = load(o);
  if (!input.empty()) c.input_path = input;
  if (c.input_path.empty()) throw exo::ConfigError("replay needs --input or scenario.input");
  c.kind = exo::ScenarioKind::kCsvReplay;
  exo::RunResult r;
  const double seconds = timed([&] { r = exo::run_scenario(c); });
  report(r, c, o, seconds);
  return 0;
}

int cmd_tune(const CommonOptions& o) {
  const exo::ScenarioConfig c = load(o);
  exo::TuneResult t;
  const double seconds = timed([&] { t = exo::tune_gains(exo::default_corpus(c), exo::grid_from(c.tune), c); });
  std::filesystem::create_directories(c.output_dir);
  const std::filesystem::path table = std::filesystem::path(c.output_dir) / "tuning_table.csv";
  exo::write_text_file(table, exo::tune_table_csv(t));
  const auto& row = t.table[t.best_index];
  const std::string gains = "oscillator.kappa_phi = " + exo::text::format_double(t.best.kappa_phi) +
                            "\noscillator.kappa_omega = " + exo::text::format_double(t.best.kappa_omega) +
                            "\noscillator.kappa_alpha = " + exo::text::format_double(t.best.kappa_alpha) + "\n";
  exo::write_text_file(std::filesystem::path(c.output_dir) / "tuned_gains.cfg", gains);
  if (!o.quiet) {
    std::cout << gains;
    std::cout << "mean activation time " << exo::text::format_fixed(*row.mean_activation_time, 4)
              << " s, mean RMSE ratio " << exo::text::format_fixed(*row.mean_rmse_ratio, 4) << "\n";
    std::cout << t.table.size() << " grid points evaluated in " << exo::text::format_fixed(seconds, 2)
              << " s; table written to " << table.string() << "\n";
  }
  return 0;
}

int cmd_export(const CommonOptions& o, const std::string& file) {
  const exo::ScenarioConfig c = load(o);
  std::filesystem::path path = file;
  if (path.empty()) {
    std::filesystem::create_directories(c.output_dir);
    path = std::filesystem::path(c.output_dir) / "gait.csv";
  }
  const exo::GaitSignal signal = exo::synthetic_signal(c);
  exo::write_text_file(path, exo::signal_to_csv(signal));
  if (!o.quiet) std::cout << "wrote " << signal.measured.size() << " samples to " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-oscillator exoskeleton assistance simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts, replay_opts, tune_opts, export_opts;
  std::string replay_input, export_file;

  auto* run = app.add_subcommand("run", "run the scenario described by the config");
  add_common(run, run_opts);

  auto* replay = app.add_subcommand("replay", "drive the controller from a recorded joint-angle CSV");
  add_common(replay, replay_opts);
  replay->add_option("--input", replay_input, "CSV with columns t, q_right, q_left");

  auto* tune = app.add_subcommand("tune", "grid-search oscillator gains over the tuning corpus");
  add_common(tune, tune_opts);

  auto* exp = app.add_subcommand("export-gait", "write the scenario's synthetic joint angles to CSV");
  add_common(exp, export_opts);
  exp->add_option("--file", export_file, "output CSV path (default <out>/gait.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*replay) return cmd_replay(replay_opts, replay_input);
    if (*tune) return cmd_tune(tune_opts);
    if (*exp) return cmd_export(export_opts, export_file);
  } catch (const exo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const exo::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const exo::InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitConfig;
  } catch (const exo::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const exo::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
