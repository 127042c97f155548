#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "cmapf/geometry.hpp"
#include "cmapf/planners.hpp"
#include "cmapf/world.hpp"

namespace cmapf {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline const char* agent_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[i % 10];
}

}  // namespace detail

/// Snapshot: landmarks as grey discs, goals as open rings, agents as filled
/// discs in matching colours, optional planned paths as polylines. World y
/// points up.
inline void render_snapshot(std::ostream& os, const Bounds& bounds, const std::vector<Circle>& landmarks,
                            const std::vector<AgentKinematics>& agents, const std::vector<Vec2>& goals,
                            const std::vector<Path>& paths = {}, double pixels_per_unit = 80.0) {
  using detail::num;
  const double w = bounds.width() * pixels_per_unit;
  const double h = bounds.height() * pixels_per_unit;
  const auto X = [&](double x) { return (x - bounds.min.x) * pixels_per_unit; };
  const auto Y = [&](double y) { return (bounds.max.y - y) * pixels_per_unit; };
  const auto R = [&](double r) { return r * pixels_per_unit; };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"white\"/>\n";
  for (const Circle& c : landmarks) {
    os << "<circle cx=\"" << num(X(c.center.x)) << "\" cy=\"" << num(Y(c.center.y)) << "\" r=\"" << num(R(c.radius))
       << "\" fill=\"#555555\"/>\n";
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].waypoints.size() < 2) continue;
    os << "<polyline fill=\"none\" stroke=\"" << detail::agent_color(i) << "\" stroke-width=\"1.5\" points=\"";
    for (const Vec2& p : paths[i].waypoints) os << num(X(p.x)) << ',' << num(Y(p.y)) << ' ';
    os << "\"/>\n";
  }
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const double r = i < agents.size() ? agents[i].radius : 0.1;
    os << "<circle cx=\"" << num(X(goals[i].x)) << "\" cy=\"" << num(Y(goals[i].y)) << "\" r=\"" << num(R(r))
       << "\" fill=\"none\" stroke=\"" << detail::agent_color(i) << "\" stroke-width=\"2\"/>\n";
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    os << "<circle cx=\"" << num(X(agents[i].position.x)) << "\" cy=\"" << num(Y(agents[i].position.y)) << "\" r=\""
       << num(R(agents[i].radius)) << "\" fill=\"" << detail::agent_color(i) << "\"/>\n";
  }
  os << "</svg>\n";
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with axes, ticks at the data range ends and a legend.
inline void render_line_chart(std::ostream& os, const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<Series>& series) {
  using detail::num;
  constexpr double W = 640, H = 420, L = 70, Rm = 160, T = 40, B = 60;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (first) {
        x0 = x1 = s.x[i];
        y0 = y1 = s.y[i];
        first = false;
      }
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - Rm); };
  const auto Y = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - Rm << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (L + W - Rm) / 2 << "\" y=\"" << H - 20 << "\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 18 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << num(x0) << "</text>\n";
  os << "<text x=\"" << W - Rm << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << num(x1) << "</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << num(y0) << "</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\">" << num(y1) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    os << "<polyline fill=\"none\" stroke=\"" << detail::agent_color(s) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      os << num(X(series[s].x[i])) << ',' << num(Y(series[s].y[i])) << ' ';
    }
    os << "\"/>\n";
    const double ly = T + 20.0 * static_cast<double>(s);
    os << "<line x1=\"" << W - Rm + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - Rm + 32 << "\" y2=\"" << ly
       << "\" stroke=\"" << detail::agent_color(s) << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - Rm + 38 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << series[s].label
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace cmapf
