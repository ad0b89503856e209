#pragma once

// Joint-angle CSV interchange. Schema: a header line naming at least the
// columns `t`, `q_right` and `q_left` (any order, unknown columns ignored),
// then one comma-separated row of decimal numbers per controller tick.
// Optional `q_right_true` and `q_left_true` columns carry the noise-free limb
// motion when it is known; both or neither must be present.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "exoassist/error.hpp"
#include "exoassist/gait.hpp"
#include "exoassist/text.hpp"

namespace exo {

inline std::string samples_to_csv(const std::vector<SignalSample>& samples) {
  std::string out = "t,q_right,q_left\n";
  out.reserve(samples.size() * 64);
  for (const auto& s : samples) {
    out += text::format_double(s.t);
    out += ',';
    out += text::format_double(s.q_right);
    out += ',';
    out += text::format_double(s.q_left);
    out += '\n';
  }
  return out;
}

inline std::string signal_to_csv(const GaitSignal& signal) {
  if (signal.limb.empty()) return samples_to_csv(signal.measured);
  if (signal.limb.size() != signal.measured.size()) throw InvalidParameter("limb and measured series differ in length");
  std::string out = "t,q_right,q_left,q_right_true,q_left_true\n";
  out.reserve(signal.measured.size() * 112);
  for (std::size_t k = 0; k < signal.measured.size(); ++k) {
    const auto& s = signal.measured[k];
    const auto& l = signal.limb[k];
    for (double v : {s.t, s.q_right, s.q_left, l.q_right}) {
      out += text::format_double(v);
      out += ',';
    }
    out += text::format_double(l.q_left);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Parses CSV text. When `expected_dt` > 0 every time step must match it to
// within one part in 1e6.
inline GaitSignal signal_from_csv(std::string_view csv, double expected_dt, std::string_view origin = "input") {
  auto where = [&](std::size_t line) { return std::string(origin) + ":" + std::to_string(line) + ": "; };
  auto lines = text::split(csv, '\n');
  if (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw SchemaError(where(1) + "missing header line");

  const auto header = text::split(text::trim(lines[0]), ',');
  auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](std::string_view h) { return text::trim(h) == name; });
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto column = [&](std::string_view name) -> std::size_t {
    auto c = find(name);
    if (!c) throw SchemaError(where(1) + "header lacks column '" + std::string(name) + "'");
    return *c;
  };
  const std::size_t ct = column("t");
  const std::size_t cr = column("q_right");
  const std::size_t cl = column("q_left");
  const auto cr_true = find("q_right_true");
  const auto cl_true = find("q_left_true");
  if (cr_true.has_value() != cl_true.has_value()) {
    throw SchemaError(where(1) + "q_right_true and q_left_true must appear together");
  }

  GaitSignal sig;
  auto& out = sig.measured;
  out.reserve(lines.size() - 1);
  if (cr_true) sig.limb.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto fields = text::split(text::trim(lines[i]), ',');
    if (fields.size() != header.size()) {
      throw SchemaError(where(line_no) + "expected " + std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    auto num = [&](std::size_t c) {
      auto v = text::parse_double(fields[c]);
      if (!v || !std::isfinite(*v)) {
        throw SchemaError(where(line_no) + "column '" + std::string(text::trim(header[c])) +
                          "' is not a finite number: '" + std::string(fields[c]) + "'");
      }
      return *v;
    };
    SignalSample s{num(ct), num(cr), num(cl)};
    if (!out.empty()) {
      const double step = s.t - out.back().t;
      if (!(step > 0)) {
        throw SchemaError(where(line_no) + "time is not strictly increasing (" + text::format_double(out.back().t) +
                          " then " + text::format_double(s.t) + ")");
      }
      if (expected_dt > 0 && std::abs(step - expected_dt) > 1e-6 * expected_dt) {
        throw SchemaError(where(line_no) + "time step " + text::format_double(step) +
                          " s differs from configured dt " + text::format_double(expected_dt) + " s");
      }
    }
    out.push_back(s);
    if (cr_true) sig.limb.push_back({s.t, num(*cr_true), num(*cl_true)});
  }
  if (out.empty()) throw SchemaError(where(2) + "no data rows");
  return sig;
}

inline std::vector<SignalSample> samples_from_csv(std::string_view csv, double expected_dt,
                                                  std::string_view origin = "input") {
  return signal_from_csv(csv, expected_dt, origin).measured;
}

inline GaitSignal read_signal_csv(const std::filesystem::path& path, double expected_dt) {
  return signal_from_csv(read_text_file(path), expected_dt, path.string());
}

}  // namespace exo
