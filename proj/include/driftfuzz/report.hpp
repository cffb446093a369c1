#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "driftfuzz/csv.hpp"
#include "driftfuzz/error.hpp"
#include "driftfuzz/harness.hpp"
#include "driftfuzz/json_io.hpp"

namespace driftfuzz {

enum class ReportFormat { Csv, Json, Svg };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "svg") return ReportFormat::Svg;
  fail(ErrorCode::InvalidArgument, "unknown report format '" + std::string(s) + "' (csv, json or svg)");
}

/// One row per (config, drift kind, level).
inline void write_curves_csv(std::ostream& out, std::span<const DriftCurve> curves) {
  if (curves.empty()) fail(ErrorCode::EmptyInput, "no curves to report");
  out << "config,drift,family,level,trials,detections,ratio,ci_low,ci_high\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.levels.size(); ++i)
      out << c.config << ',' << to_string(c.drift) << ',' << to_string(c.family) << ',' << c.levels[i] << ','
          << c.trials[i] << ',' << c.detections[i] << ',' << format_double(c.ratios[i]) << ','
          << format_double(c.intervals[i].low) << ',' << format_double(c.intervals[i].high) << '\n';
}

inline void write_curves_json(std::ostream& out, std::span<const DriftCurve> curves) {
  if (curves.empty()) fail(ErrorCode::EmptyInput, "no curves to report");
  json arr = json::array();
  for (const auto& c : curves) arr.push_back(to_json(c));
  out << json{{"kind", "curves"}, {"curves", std::move(arr)}}.dump(2) << '\n';
}

namespace report_detail {

inline std::string xml_escape(std::string_view s) {
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

inline const char* palette(std::size_t i) {
  static constexpr const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % std::size(colors)];
}

inline std::string fixed(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

}  // namespace report_detail

/// Detection ratio against severity on an 800 x 500 canvas, one polyline
/// per curve, legend on the right.
inline void write_curves_svg(std::ostream& out, std::span<const DriftCurve> curves) {
  using report_detail::fixed;
  if (curves.empty()) fail(ErrorCode::EmptyInput, "no curves to report");
  constexpr double W = 800, H = 500, left = 60, right = 200, top = 30, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  int lmin = curves[0].levels.empty() ? 0 : curves[0].levels.front(), lmax = lmin;
  for (const auto& c : curves)
    for (int l : c.levels) {
      lmin = std::min(lmin, l);
      lmax = std::max(lmax, l);
    }
  const double span_x = lmax > lmin ? static_cast<double>(lmax - lmin) : 1.0;
  const auto px = [&](int l) { return left + pw * (l - lmin) / span_x; };
  const auto py = [&](double r) { return top + ph * (1.0 - r); };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n"
      << "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n"
      << "  <g stroke=\"#999\" stroke-width=\"1\">\n"
      << "    <line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(left + pw)
      << "\" y2=\"" << fixed(top + ph) << "\"/>\n"
      << "    <line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(left) << "\" y2=\""
      << fixed(top + ph) << "\"/>\n"
      << "  </g>\n"
      << "  <g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double r = t / 4.0;
    out << "    <text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(r) + 4) << "\" text-anchor=\"end\">"
        << fixed(r) << "</text>\n";
  }
  for (int l = lmin; l <= lmax; ++l)
    out << "    <text x=\"" << fixed(px(l)) << "\" y=\"" << fixed(top + ph + 18) << "\" text-anchor=\"middle\">"
        << l << "</text>\n";
  out << "    <text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(H - 12)
      << "\" text-anchor=\"middle\">drift severity</text>\n"
      << "    <text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed(top + ph / 2) << ")\">detection ratio</text>\n"
      << "  </g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    out << "  <polyline fill=\"none\" stroke=\"" << report_detail::palette(i) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < c.levels.size(); ++k)
      out << (k ? " " : "") << fixed(px(c.levels[k])) << ',' << fixed(py(c.ratios[k]));
    out << "\"/>\n";
  }
  out << "  <g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double y = top + 10 + 18.0 * static_cast<double>(i);
    const double x = W - right + 15;
    std::string label = curves[i].config;
    if (curves.size() > 1 && curves[i].drift != curves[0].drift) label += " (" + std::string(to_string(curves[i].drift)) + ")";
    out << "    <line x1=\"" << fixed(x) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(x + 20) << "\" y2=\""
        << fixed(y) << "\" stroke=\"" << report_detail::palette(i) << "\" stroke-width=\"2\"/>\n"
        << "    <text x=\"" << fixed(x + 26) << "\" y=\"" << fixed(y + 4) << "\">"
        << report_detail::xml_escape(label) << "</text>\n";
  }
  out << "  </g>\n</svg>\n";
}

inline void write_curves(std::ostream& out, std::span<const DriftCurve> curves, ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::Csv: write_curves_csv(out, curves); break;
    case ReportFormat::Json: write_curves_json(out, curves); break;
    case ReportFormat::Svg: write_curves_svg(out, curves); break;
  }
}

/// method x family table of mean and standard deviation.
inline void write_distance_table(std::ostream& out, const DistanceBenchmarkResult& r, ReportFormat fmt) {
  if (r.cells.empty()) fail(ErrorCode::EmptyInput, "no benchmark cells to report");
  switch (fmt) {
    case ReportFormat::Csv:
      out << "family,method,trials,mae_mean,mae_std,rmse_mean,rmse_std,failures\n";
      for (const auto& c : r.cells)
        out << to_string(c.family) << ',' << c.method << ',' << c.mae.size() << ',' << format_double(c.mae_mean)
            << ',' << format_double(c.mae_std) << ',' << format_double(c.rmse_mean) << ','
            << format_double(c.rmse_std) << ',' << c.failures.size() << '\n';
      break;
    case ReportFormat::Json: out << to_json(r).dump(2) << '\n'; break;
    case ReportFormat::Svg: fail(ErrorCode::InvalidArgument, "svg output is only available for drift curves");
  }
}

template <class Writer>
void write_report_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  writer(out);
  if (!out) fail(ErrorCode::IoError, "failed writing '" + path + "'");
}

/// Writes curves to `path` in the given format.
inline void emit_report(std::span<const DriftCurve> curves, ReportFormat fmt, const std::string& path) {
  if (curves.empty()) fail(ErrorCode::EmptyInput, "no curves to report");
  write_report_file(path, [&](std::ostream& o) { write_curves(o, curves, fmt); });
}

inline void emit_report(const DistanceBenchmarkResult& table, ReportFormat fmt, const std::string& path) {
  if (table.cells.empty()) fail(ErrorCode::EmptyInput, "no benchmark cells to report");
  write_report_file(path, [&](std::ostream& o) { write_distance_table(o, table, fmt); });
}

}  // namespace driftfuzz
