#pragma once

// Run outputs: per-tick trace CSV, metrics as readable text and as flat
// key=value lines, and two standalone SVG figures (angles/torques/activation
// per joint, and learned frequency/coefficients per joint).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exoassist/csv.hpp"
#include "exoassist/error.hpp"
#include "exoassist/scenario.hpp"
#include "exoassist/text.hpp"

namespace exo {

inline std::string trace_to_csv(const Trace& trace) {
  std::string out = "t";
  for (const auto& j : trace.joints) {
    const std::string& n = j.name;
    out += ",q_" + n + ",qhat_" + n + ",p_" + n + ",omega_" + n + ",alpha0_" + n;
    for (std::size_t i = 0; i < trace.n_harmonics; ++i) out += ",alpha" + std::to_string(i + 1) + "_" + n;
    out += ",q_motor_" + n + ",tau_t_" + n + ",tau_a_" + n + ",w_" + n + ",active_" + n + ",tau_total_" + n;
  }
  out += '\n';
  auto put = [&](double v) {
    out += ',';
    out += text::format_double(v);
  };
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out += text::format_double(trace.t[k]);
    for (const auto& j : trace.joints) {
      put(j.q[k]);
      put(j.q_hat[k]);
      put(j.p[k]);
      put(j.omega[k]);
      put(j.alpha0[k]);
      for (std::size_t i = 0; i < trace.n_harmonics; ++i) put(j.alpha[i][k]);
      put(j.q_motor[k]);
      put(j.tau_t[k]);
      put(j.tau_a[k]);
      put(j.weight[k]);
      out += j.active[k] ? ",1" : ",0";
      put(j.tau_total[k]);
    }
    out += '\n';
  }
  return out;
}

namespace report_detail {

inline std::string opt(const std::optional<double>& v) { return v ? text::format_double(*v) : "none"; }

inline std::string opt_fixed(const std::optional<double>& v, int precision) {
  return v ? text::format_fixed(*v, precision) : "n/a";
}

}  // namespace report_detail

// Flat key=value document. Absent values are written as `none`.
inline std::string metrics_to_kv(const Metrics& m) {
  using report_detail::opt;
  std::string out;
  auto kv = [&](std::string_view key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  kv("scenario.kind", std::string(to_string(m.kind)));
  kv("ticks", std::to_string(m.ticks));
  kv("dt", text::format_double(m.dt));
  for (const auto& j : m.joints) {
    const std::string p = "joint." + j.name + ".";
    kv(p + "activation_time", opt(j.activation_time));
    kv(p + "activation_cycle", opt(j.activation_cycle));
    kv(p + "activation_count", std::to_string(j.activation_count));
    kv(p + "deactivation_count", std::to_string(j.deactivation_count));
    kv(p + "rmse_post_activation", opt(j.rmse_post_activation));
    kv(p + "rmse_ratio", opt(j.rmse_ratio));
    kv(p + "omega_final", text::format_double(j.omega_final));
    kv(p + "omega_true", opt(j.omega_true));
    kv(p + "omega_rel_error", opt(j.omega_rel_error));
    kv(p + "saturation_ticks", std::to_string(j.saturation_ticks));
    kv(p + "max_abs_tau_total", text::format_double(j.max_abs_tau_total));
  }
  if (m.pendulum) {
    kv("pendulum.final_angle", text::format_double(m.pendulum->final_angle));
    kv("pendulum.final_error", text::format_double(m.pendulum->final_error));
    kv("pendulum.settle_time", opt(m.pendulum->settle_time));
  }
  return out;
}

inline std::string metrics_to_text(const Metrics& m) {
  using report_detail::opt_fixed;
  constexpr double kDeg = 180.0 / std::numbers::pi;
  std::string out = "scenario: " + std::string(to_string(m.kind)) + "\n";
  out += "ticks:    " + std::to_string(m.ticks) + " (dt " + text::format_double(m.dt) + " s)\n";
  for (const auto& j : m.joints) {
    out += "\njoint " + j.name + "\n";
    out += "  activation time      " + opt_fixed(j.activation_time, 3) + " s after adaptation start\n";
    out += "  activation cycle     " + opt_fixed(j.activation_cycle, 2) + "\n";
    out += "  activations          " + std::to_string(j.activation_count) + " (deactivations " +
           std::to_string(j.deactivation_count) + ")\n";
    std::optional<double> rmse_deg;
    if (j.rmse_post_activation) rmse_deg = *j.rmse_post_activation * kDeg;
    out += "  post-activation RMSE " + opt_fixed(rmse_deg, 3) + " deg";
    std::optional<double> pct;
    if (j.rmse_ratio) pct = *j.rmse_ratio * 100.0;
    out += " (" + opt_fixed(pct, 2) + " % of peak-to-peak)\n";
    out += "  final omega          " + text::format_fixed(j.omega_final, 4) + " rad/s";
    if (j.omega_true) {
      out += " (true " + text::format_fixed(*j.omega_true, 4) + ", error " +
             text::format_fixed(*j.omega_rel_error * 100.0, 3) + " %)";
    }
    out += "\n";
    out += "  saturated ticks      " + std::to_string(j.saturation_ticks) + "\n";
    out += "  max |tau_total|      " + text::format_fixed(j.max_abs_tau_total, 4) + " N m\n";
  }
  if (m.pendulum) {
    out += "\npendulum\n";
    out += "  final angle          " + text::format_fixed(m.pendulum->final_angle * kDeg, 4) + " deg\n";
    out += "  final error          " + text::format_fixed(m.pendulum->final_error * kDeg, 4) + " deg\n";
    out += "  settled (0.5 deg) at " + opt_fixed(m.pendulum->settle_time, 3) + " s\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG figures

namespace svg {

struct Series {
  const std::vector<double>* y;
  std::string color;
  std::string label;
  bool dashed = false;
  double scale = 1.0;
};

struct Panel {
  std::string title;
  std::string y_label;
  std::vector<Series> series;
  std::vector<double> hlines;  // dotted reference levels
};

inline std::string num(double v) { return text::format_fixed(v, 2); }

inline std::string escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Tick step giving roughly `target` intervals over `span`.
inline double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

inline std::string tick_label(double v, double step) {
  const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  if (std::abs(v) < step * 1e-9) v = 0.0;
  return text::format_fixed(v, std::min(digits, 6));
}

// Plots `panels` in a grid of `columns`, laid out row-major.
inline std::string figure(std::string_view title, const std::vector<double>& t, const std::vector<Panel>& panels,
                          std::size_t columns) {
  constexpr double kPanelW = 560, kPanelH = 220, kMarginL = 70, kMarginR = 20, kMarginT = 50, kGap = 60;
  const std::size_t rows = (panels.size() + columns - 1) / columns;
  const double width = columns * (kMarginL + kPanelW + kMarginR);
  const double height = kMarginT + rows * (kPanelH + kGap) + 10;
  const double t0 = t.empty() ? 0.0 : t.front();
  const double t1 = t.empty() || t.back() <= t0 ? t0 + 1.0 : t.back();
  const std::size_t stride = std::max<std::size_t>(1, t.size() / 2000);

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(width / 2) + "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">" + escape(title) +
         "</text>\n";

  for (std::size_t idx = 0; idx < panels.size(); ++idx) {
    const Panel& panel = panels[idx];
    const double x0 = (idx % columns) * (kMarginL + kPanelW + kMarginR) + kMarginL;
    const double y0 = kMarginT + (idx / columns) * (kPanelH + kGap);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Series& s : panel.series) {
      for (double v : *s.y) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v * s.scale);
        hi = std::max(hi, v * s.scale);
      }
    }
    for (double h : panel.hlines) {
      lo = std::min(lo, h);
      hi = std::max(hi, h);
    }
    if (!(hi > lo)) {
      lo = (std::isfinite(lo) ? lo : 0.0) - 1.0;
      hi = lo + 2.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto px = [&](double tv) { return x0 + (tv - t0) / (t1 - t0) * kPanelW; };
    auto py = [&](double v) { return y0 + (hi - v) / (hi - lo) * kPanelH; };

    out += "<g>\n";
    out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(kPanelW) + "\" height=\"" +
           num(kPanelH) + "\" fill=\"none\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(x0 + kPanelW / 2) + "\" y=\"" + num(y0 - 8) +
           "\" font-size=\"13\" text-anchor=\"middle\">" + escape(panel.title) + "</text>\n";
    out += "<text transform=\"translate(" + num(x0 - 52) + "," + num(y0 + kPanelH / 2) +
           ") rotate(-90)\" font-size=\"11\" text-anchor=\"middle\">" + escape(panel.y_label) + "</text>\n";

    const double ystep = nice_step(hi - lo, 5);
    for (double v = std::ceil(lo / ystep) * ystep; v <= hi; v += ystep) {
      out += "<text x=\"" + num(x0 - 4) + "\" y=\"" + num(py(v) + 4) + "\" font-size=\"10\" text-anchor=\"end\">" +
             tick_label(v, ystep) + "</text>\n";
      out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(py(v)) + "\" x2=\"" + num(x0 + kPanelW) + "\" y2=\"" +
             num(py(v)) + "\" stroke=\"#e0e0e0\"/>\n";
    }
    const double xstep = nice_step(t1 - t0, 8);
    for (double v = std::ceil(t0 / xstep) * xstep; v <= t1 + 1e-9; v += xstep) {
      out += "<text x=\"" + num(px(v)) + "\" y=\"" + num(y0 + kPanelH + 14) +
             "\" font-size=\"10\" text-anchor=\"middle\">" + tick_label(v, xstep) + "</text>\n";
    }
    out += "<text x=\"" + num(x0 + kPanelW / 2) + "\" y=\"" + num(y0 + kPanelH + 28) +
           "\" font-size=\"11\" text-anchor=\"middle\">t [s]</text>\n";

    for (double h : panel.hlines) {
      out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(py(h)) + "\" x2=\"" + num(x0 + kPanelW) + "\" y2=\"" +
             num(py(h)) + "\" stroke=\"gray\" stroke-dasharray=\"2,3\"/>\n";
    }
    double legend_x = x0 + 6;
    for (const Series& s : panel.series) {
      out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1\"";
      if (s.dashed) out += " stroke-dasharray=\"5,3\"";
      out += " points=\"";
      for (std::size_t k = 0; k < s.y->size() && k < t.size(); k += stride) {
        const double v = (*s.y)[k] * s.scale;
        if (!std::isfinite(v)) continue;
        out += num(px(t[k]));
        out += ',';
        out += num(py(v));
        out += ' ';
      }
      out += "\"/>\n";
      out += "<text x=\"" + num(legend_x) + "\" y=\"" + num(y0 + 12) + "\" font-size=\"10\" fill=\"" + s.color +
             "\">" + escape(s.label) + "</text>\n";
      legend_x += 8.0 + 6.0 * static_cast<double>(s.label.size());
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace svg

namespace report_detail {

inline std::vector<double> activation_marker(const JointSeries& j) {
  std::vector<double> out(j.active.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = j.active[k] ? 1.0 : -1.0;
  return out;
}

}  // namespace report_detail

// Angles measured (solid) and estimated (dashed) on top, torques below with
// the activation state drawn as +/- the torque limit.
inline std::string angles_torques_svg(const Trace& trace, double tau_limit) {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  std::vector<std::vector<double>> markers;
  markers.reserve(trace.joints.size());
  for (const auto& j : trace.joints) markers.push_back(report_detail::activation_marker(j));

  std::vector<svg::Panel> panels;
  for (const auto& j : trace.joints) {
    panels.push_back({"joint angle, " + j.name, "angle [deg]",
                      {{&j.q, "#1f4e9c", "measured", false, kDeg}, {&j.q_hat, "#d1495b", "estimated", true, kDeg}},
                      {}});
  }
  for (std::size_t i = 0; i < trace.joints.size(); ++i) {
    const auto& j = trace.joints[i];
    panels.push_back({"torque, " + j.name,
                      "torque [N m]",
                      {{&j.tau_t, "#2a9d8f", "transparency", false},
                       {&j.tau_a, "#e9a03b", "assistance", false},
                       {&j.tau_total, "black", "total", false},
                       {&markers[i], "#7b2cbf", "active", true, tau_limit}},
                      {-tau_limit, tau_limit}});
  }
  return svg::figure("Angles, torques and activation", trace.t, panels, trace.joints.size());
}

// Learned fundamental frequency on top, Fourier coefficients below.
inline std::string frequency_coefficients_svg(const Trace& trace) {
  static const char* const kColors[] = {"#1f4e9c", "#d1495b", "#2a9d8f", "#e9a03b", "#7b2cbf", "#6c757d"};
  std::vector<svg::Panel> panels;
  for (const auto& j : trace.joints) {
    panels.push_back({"learned frequency, " + j.name, "omega [rad/s]", {{&j.omega, "#1f4e9c", "omega", false}}, {}});
  }
  for (const auto& j : trace.joints) {
    svg::Panel p{"coefficients, " + j.name, "coefficient [rad]", {{&j.alpha0, "black", "alpha0", false}}, {}};
    for (std::size_t i = 0; i < j.alpha.size(); ++i) {
      p.series.push_back({&j.alpha[i], kColors[i % 6], "alpha" + std::to_string(i + 1), false});
    }
    panels.push_back(std::move(p));
  }
  return svg::figure("Frequency and coefficients", trace.t, panels, trace.joints.size());
}

struct OutputFiles {
  std::filesystem::path trace_csv;
  std::filesystem::path metrics_txt;
  std::filesystem::path metrics_kv;
  std::filesystem::path angles_svg;
  std::filesystem::path frequency_svg;
};

inline OutputFiles emit_outputs(const RunResult& r, double tau_limit, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  OutputFiles f{dir / "trace.csv", dir / "metrics.txt", dir / "metrics.kv", dir / "angles_torques.svg",
                dir / "frequency_coefficients.svg"};
  write_text_file(f.trace_csv, trace_to_csv(r.trace));
  write_text_file(f.metrics_txt, metrics_to_text(r.metrics));
  write_text_file(f.metrics_kv, metrics_to_kv(r.metrics));
  write_text_file(f.angles_svg, angles_torques_svg(r.trace, tau_limit));
  write_text_file(f.frequency_svg, frequency_coefficients_svg(r.trace));
  return f;
}

}  // namespace exo
