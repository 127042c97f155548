#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cmapf {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(Vec2 v) { return dot(v, v); }
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Rescales `v` so that norm(v) <= limit holds exactly under `norm`.
/// Vectors already within the limit are returned unchanged.
inline Vec2 clamp_norm(Vec2 v, double limit) {
  const double n = norm(v);
  if (!(n > limit)) return v;
  v = v * (limit / n);
  // One or two ulps of rounding can leave the norm just above the limit.
  while (norm(v) > limit) v = v * std::nextafter(1.0, 0.0);
  return v;
}

struct Circle {
  Vec2 center;
  double radius = 0.0;
  friend constexpr bool operator==(const Circle&, const Circle&) = default;
};

/// Gap between the two circle boundaries; negative iff the discs overlap.
inline double surface_distance(const Circle& a, const Circle& b) {
  return norm(a.center - b.center) - (a.radius + b.radius);
}

/// Closest point of segment [p0, p1] to `q`.
inline Vec2 closest_point_on_segment(Vec2 p0, Vec2 p1, Vec2 q) {
  const Vec2 d = p1 - p0;
  const double len2 = norm2(d);
  if (len2 == 0.0) return p0;
  const double t = std::clamp(dot(q - p0, d) / len2, 0.0, 1.0);
  return p0 + d * t;
}

/// Minimum distance from the segment to the circle boundary (negative when
/// the segment enters the disc).
inline double segment_circle_clearance(Vec2 p0, Vec2 p1, const Circle& c) {
  const Vec2 closest = closest_point_on_segment(p0, p1, c.center);
  return norm(closest - c.center) - (0.0 + c.radius);
}

/// Row-major occupancy grid; true marks an obstacle cell.
struct BoolGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> cells;

  BoolGrid() = default;
  BoolGrid(std::size_t h, std::size_t w, bool fill = false)
      : height(h), width(w), cells(h * w, fill ? 1 : 0) {}

  bool at(std::size_t row, std::size_t col) const { return cells[row * width + col] != 0; }
  void set(std::size_t row, std::size_t col, bool value) { cells[row * width + col] = value ? 1 : 0; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
  }
  bool in_bounds(long row, long col) const {
    return row >= 0 && col >= 0 && static_cast<std::size_t>(row) < height &&
           static_cast<std::size_t>(col) < width;
  }

  friend bool operator==(const BoolGrid&, const BoolGrid&) = default;
};

struct GridCell {
  std::size_t row = 0;
  std::size_t col = 0;
  friend constexpr bool operator==(GridCell, GridCell) = default;
};

/// Tiles every obstacle cell with granularity^2 inscribed circles. Cell
/// (row, col) covers x in [col*s, (col+1)*s] and y in [row*s, (row+1)*s].
/// Output order: row-major over cells, then row-major over sub-cells.
inline std::vector<Circle> grid_to_circles(const BoolGrid& grid, double cell_size,
                                           std::size_t granularity) {
  std::vector<Circle> out;
  if (granularity == 0) return out;
  const double sub = cell_size / static_cast<double>(granularity);
  const double radius = cell_size / (2.0 * static_cast<double>(granularity));
  out.reserve(grid.count() * granularity * granularity);
  for (std::size_t r = 0; r < grid.height; ++r) {
    for (std::size_t c = 0; c < grid.width; ++c) {
      if (!grid.at(r, c)) continue;
      for (std::size_t sr = 0; sr < granularity; ++sr) {
        for (std::size_t sc = 0; sc < granularity; ++sc) {
          const double x = (static_cast<double>(c * granularity + sc) + 0.5) * sub;
          const double y = (static_cast<double>(r * granularity + sr) + 0.5) * sub;
          out.push_back({{x, y}, radius});
        }
      }
    }
  }
  return out;
}

/// Axis-aligned rectangle.
struct Bounds {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double diagonal() const { return norm(max - min); }
  bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
  friend constexpr bool operator==(const Bounds&, const Bounds&) = default;
};

}  // namespace cmapf
