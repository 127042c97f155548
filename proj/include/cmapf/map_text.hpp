#pragma once

// Text map formats.
//
// string grid: one line per row, all lines the same length.
//   '.' free   '#' obstacle   'a' free, allowed start   'g' free, allowed goal
//   When any 'a' (resp. 'g') is present, starts (goals) are drawn only from
//   those cells; otherwise from every free cell.
//
// MovingAI .map:
//   type octile
//   height H
//   width W
//   map
//   <H rows of W glyphs>
//   '.', 'G' free; '@', 'O', 'T', 'S', 'W' obstacle.

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cmapf/error.hpp"
#include "cmapf/map_spec.hpp"

namespace cmapf {

namespace detail {

/// Splits on '\n', strips a trailing '\r' per line and drops trailing
/// empty lines.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::string location(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace detail

inline MapSpec parse_string_grid(std::string_view text, const GeneratorConfig& cfg,
                                 std::string layout_id = "string_grid") {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines.front().empty()) {
    throw Error(ErrorCode::RaggedGrid, "string grid is empty");
  }
  const std::size_t width = lines.front().size();
  BoolGrid grid(lines.size(), width);
  std::vector<GridCell> starts;
  std::vector<GridCell> goals;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].size() != width) {
      throw Error(ErrorCode::RaggedGrid, "line " + std::to_string(r + 1) + " has " +
                                             std::to_string(lines[r].size()) + " glyphs, expected " +
                                             std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      switch (lines[r][c]) {
        case '.': break;
        case '#': grid.set(r, c, true); break;
        case 'a': starts.push_back({r, c}); break;
        case 'g': goals.push_back({r, c}); break;
        default:
          throw Error(ErrorCode::UnknownGlyph, std::string("glyph '") + lines[r][c] + "' at " +
                                                   detail::location(r + 1, c + 1));
      }
    }
  }
  MapSpec m = map_from_grid(std::move(grid), cfg.cell_size, cfg.granularity, std::move(layout_id));
  if (!starts.empty()) m.start_cells = std::move(starts);
  if (!goals.empty()) m.goal_cells = std::move(goals);
  return m;
}

inline bool movingai_blocked(char g) { return g == '@' || g == 'O' || g == 'T' || g == 'S' || g == 'W'; }
inline bool movingai_free(char g) { return g == '.' || g == 'G'; }

inline MapSpec parse_movingai(std::string_view text, const GeneratorConfig& cfg, std::string layout_id = "movingai") {
  const auto lines = detail::split_lines(text);
  const auto header_value = [&](std::size_t idx, std::string_view keyword) -> std::size_t {
    if (idx >= lines.size()) {
      throw Error(ErrorCode::HeaderMismatch, "missing '" + std::string(keyword) + "' header line");
    }
    std::string_view line = lines[idx];
    if (line.substr(0, keyword.size()) != keyword || line.size() <= keyword.size() || line[keyword.size()] != ' ') {
      throw Error(ErrorCode::HeaderMismatch, "line " + std::to_string(idx + 1) + ": expected '" +
                                                 std::string(keyword) + " <n>', got '" + std::string(line) + "'");
    }
    std::string_view digits = line.substr(keyword.size() + 1);
    while (!digits.empty() && digits.back() == ' ') digits.remove_suffix(1);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw Error(ErrorCode::HeaderMismatch, "line " + std::to_string(idx + 1) + ": bad number '" +
                                                 std::string(digits) + "'");
    }
    return value;
  };
  if (lines.empty() || lines[0].substr(0, 5) != "type ") {
    throw Error(ErrorCode::HeaderMismatch, "line 1: expected 'type <name>'");
  }
  const std::size_t height = header_value(1, "height");
  const std::size_t width = header_value(2, "width");
  if (lines.size() < 4 || lines[3] != "map") {
    throw Error(ErrorCode::HeaderMismatch, "line 4: expected 'map'");
  }
  const std::size_t rows = lines.size() - 4;
  if (rows != height) {
    throw Error(ErrorCode::HeaderMismatch, "header height " + std::to_string(height) + " but " +
                                               std::to_string(rows) + " rows follow");
  }
  BoolGrid grid(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    const std::string_view row = lines[4 + r];
    if (row.size() != width) {
      throw Error(ErrorCode::HeaderMismatch, "line " + std::to_string(r + 5) + " has " +
                                                 std::to_string(row.size()) + " glyphs, header width " +
                                                 std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      const char g = row[c];
      if (movingai_blocked(g)) {
        grid.set(r, c, true);
      } else if (!movingai_free(g)) {
        throw Error(ErrorCode::UnknownGlyph, std::string("glyph '") + g + "' at " + detail::location(r + 5, c + 1));
      }
    }
  }
  return map_from_grid(std::move(grid), cfg.cell_size, cfg.granularity, std::move(layout_id));
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Canonical text for a generated map: grid glyphs for grid-derived maps,
/// an explicit landmark list otherwise, then the placement.
inline std::string to_canonical_text(const GeneratedMap& g) {
  using detail::fmt_double;
  const MapSpec& m = g.map;
  std::ostringstream os;
  os << "map " << m.layout_id << "\n";
  os << "cell_size " << fmt_double(m.cell_size) << "\n";
  os << "bounds " << fmt_double(m.bounds.min.x) << ' ' << fmt_double(m.bounds.min.y) << ' '
     << fmt_double(m.bounds.max.x) << ' ' << fmt_double(m.bounds.max.y) << "\n";
  if (m.grid) {
    os << "grid " << m.grid->height << ' ' << m.grid->width << "\n";
    for (std::size_t r = 0; r < m.grid->height; ++r) {
      for (std::size_t c = 0; c < m.grid->width; ++c) os << (m.grid->at(r, c) ? '#' : '.');
      os << "\n";
    }
  } else {
    os << "landmarks " << m.landmarks.size() << "\n";
    for (const Circle& c : m.landmarks) {
      os << fmt_double(c.center.x) << ' ' << fmt_double(c.center.y) << ' ' << fmt_double(c.radius) << "\n";
    }
  }
  const PlacementSpec& p = g.placement;
  os << "agents " << p.num_agents() << "\n";
  for (std::size_t i = 0; i < p.num_agents(); ++i) {
    os << fmt_double(p.agent_starts[i].x) << ' ' << fmt_double(p.agent_starts[i].y) << ' '
       << fmt_double(p.agent_radii[i]) << ' ' << to_string(p.agent_models[i]) << ' ' << fmt_double(p.goals[i].x)
       << ' ' << fmt_double(p.goals[i].y) << "\n";
  }
  return os.str();
}

}  // namespace cmapf
