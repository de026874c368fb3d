#ifndef NGCS_HARNESS_PLOT_HPP
#define NGCS_HARNESS_PLOT_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ngcs/error.hpp"
#include "ngcs/harness/experiment.hpp"

namespace ngcs::harness {

enum class PlotKind { FdrVsMu, ErrorVsMu, HcCurve };

inline PlotKind parse_plot_kind(std::string_view s) {
  if (s == "fdr_vs_mu") return PlotKind::FdrVsMu;
  if (s == "error_vs_mu") return PlotKind::ErrorVsMu;
  if (s == "hc_curve") return PlotKind::HcCurve;
  throw InvalidArgument("plot: unknown kind '" + std::string(s) + "' (expected fdr_vs_mu, error_vs_mu or hc_curve)");
}

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // sorted by x
};

namespace detail_plot {

inline std::string fixed2(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, ptr);
}

inline std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, ptr);
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[i % 10];
}

}  // namespace detail_plot

/// Groups the table rows relevant to `kind` into series. A series is one
/// method, or one (scenario, method) pair when the table has several
/// scenarios. Rows with a non-finite mean are skipped.
inline std::vector<PlotSeries> plot_series(const ResultTable& table, PlotKind kind) {
  std::vector<std::string> metrics;
  switch (kind) {
    case PlotKind::FdrVsMu: metrics = {"fdr"}; break;
    case PlotKind::ErrorVsMu: metrics = {"error", "mse"}; break;
    case PlotKind::HcCurve: metrics = {"hc"}; break;
  }
  std::string metric;
  for (const auto& m : metrics) {
    for (const auto& r : table.rows)
      if (r.metric == m) {
        metric = m;
        break;
      }
    if (!metric.empty()) break;
  }
  if (metric.empty()) throw InvalidArgument("plot: the table has no '" + metrics.front() + "' rows");

  std::vector<std::string> scenarios;
  for (const auto& r : table.rows)
    if (r.metric == metric && std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end())
      scenarios.push_back(r.scenario);
  const bool tag_scenario = scenarios.size() > 1;

  std::vector<PlotSeries> out;
  for (const auto& r : table.rows) {
    if (r.metric != metric || !std::isfinite(r.mean) || !std::isfinite(r.mu)) continue;
    const std::string label = tag_scenario ? r.scenario + ": " + r.method : r.method;
    auto it = std::find_if(out.begin(), out.end(), [&](const PlotSeries& s) { return s.label == label; });
    if (it == out.end()) {
      out.push_back({label, {}});
      it = out.end() - 1;
    }
    it->points.emplace_back(r.mu, r.mean);
  }
  for (auto& s : out) std::stable_sort(s.points.begin(), s.points.end(),
                                       [](const auto& a, const auto& b) { return a.first < b.first; });
  if (out.empty()) throw InvalidArgument("plot: no finite points to draw");
  return out;
}

/// Standalone SVG: axes with ticks, one polyline plus one circle per point
/// for every series, and a legend. The output depends only on the input.
inline std::string render_svg(const ResultTable& table, PlotKind kind) {
  using detail_plot::fixed2;
  const auto series = plot_series(table, kind);

  const double W = 720, H = 440, left = 70, right = 220, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmin = series[0].points[0].first, xmax = xmin;
  double ymin = series[0].points[0].second, ymax = ymin;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (kind != PlotKind::HcCurve) ymin = std::min(ymin, 0.0);
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymax += ypad;
  if (ymin < 0.0 || kind == PlotKind::HcCurve) ymin -= ypad;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string title, xlabel, ylabel;
  switch (kind) {
    case PlotKind::FdrVsMu: title = "FDR versus signal strength"; xlabel = "mu"; ylabel = "mean FDR"; break;
    case PlotKind::ErrorVsMu: title = "Error versus signal strength"; xlabel = "mu"; ylabel = "mean error"; break;
    case PlotKind::HcCurve: title = "Higher-criticism curve"; xlabel = "rank j"; ylabel = "HC(j)"; break;
  }

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
    << "<text x=\"" << fixed2(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << detail_plot::escape(title) << "</text>\n";

  // Axes and ticks.
  o << "<g stroke=\"black\" stroke-width=\"1\">\n"
    << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top + ph) << "\" x2=\"" << fixed2(left + pw)
    << "\" y2=\"" << fixed2(top + ph) << "\"/>\n"
    << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top) << "\" x2=\"" << fixed2(left)
    << "\" y2=\"" << fixed2(top + ph) << "\"/>\n";
  constexpr int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = xmin + (xmax - xmin) * t / ticks, fy = ymin + (ymax - ymin) * t / ticks;
    o << "<line x1=\"" << fixed2(sx(fx)) << "\" y1=\"" << fixed2(top + ph) << "\" x2=\"" << fixed2(sx(fx))
      << "\" y2=\"" << fixed2(top + ph + 5) << "\"/>\n"
      << "<line x1=\"" << fixed2(left - 5) << "\" y1=\"" << fixed2(sy(fy)) << "\" x2=\"" << fixed2(left)
      << "\" y2=\"" << fixed2(sy(fy)) << "\"/>\n";
  }
  o << "</g>\n<g fill=\"black\">\n";
  for (int t = 0; t <= ticks; ++t) {
    const double fx = xmin + (xmax - xmin) * t / ticks, fy = ymin + (ymax - ymin) * t / ticks;
    o << "<text x=\"" << fixed2(sx(fx)) << "\" y=\"" << fixed2(top + ph + 18)
      << "\" text-anchor=\"middle\">" << detail_plot::tick_label(fx) << "</text>\n"
      << "<text x=\"" << fixed2(left - 8) << "\" y=\"" << fixed2(sy(fy) + 4) << "\" text-anchor=\"end\">"
      << detail_plot::tick_label(fy) << "</text>\n";
  }
  o << "<text x=\"" << fixed2(left + pw / 2) << "\" y=\"" << fixed2(H - 15) << "\" text-anchor=\"middle\">"
    << detail_plot::escape(xlabel) << "</text>\n"
    << "<text x=\"18\" y=\"" << fixed2(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << fixed2(top + ph / 2) << ")\">" << detail_plot::escape(ylabel) << "</text>\n</g>\n";

  // Series.
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = detail_plot::color(k);
    o << "<g class=\"series\" stroke=\"" << c << "\">\n<polyline fill=\"none\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i)
      o << (i ? " " : "") << fixed2(sx(s.points[i].first)) << ',' << fixed2(sy(s.points[i].second));
    o << "\"/>\n";
    for (auto [x, y] : s.points)
      o << "<circle cx=\"" << fixed2(sx(x)) << "\" cy=\"" << fixed2(sy(y)) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    o << "</g>\n";
  }

  // Legend (swatches are rectangles so that circles count data points only).
  const double lx = left + pw + 20;
  o << "<g class=\"legend\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double ly = top + 10 + 18.0 * static_cast<double>(k);
    o << "<rect x=\"" << fixed2(lx) << "\" y=\"" << fixed2(ly - 8) << "\" width=\"14\" height=\"10\" fill=\""
      << detail_plot::color(k) << "\"/>\n"
      << "<text x=\"" << fixed2(lx + 20) << "\" y=\"" << fixed2(ly + 1) << "\">"
      << detail_plot::escape(series[k].label) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

inline void emit_plot(const ResultTable& table, PlotKind kind, const std::string& path) {
  if (table.rows.empty()) throw InvalidArgument("plot: empty result table");
  const std::string svg = render_svg(table, kind);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << svg;
}

/// HC curve of a selection as a plottable table (x = rank j, metric "hc").
inline ResultTable hc_curve_table(const SelectionResult& sel, const std::string& label = "NGCS") {
  ResultTable t;
  for (std::size_t j = 0; j < sel.hc.size(); ++j)
    t.rows.push_back({"select", static_cast<double>(j + 1), label, "hc", sel.hc[j], 0.0, 1, 0});
  return t;
}

}  // namespace ngcs::harness

#endif  // NGCS_HARNESS_PLOT_HPP
