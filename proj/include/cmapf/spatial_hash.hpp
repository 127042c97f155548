#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "cmapf/geometry.hpp"

namespace cmapf {

/// Uniform-grid broad phase over circles. A body is listed in every cell its
/// bounding box touches; cells are hashed into a power-of-two bucket table
/// stored as flat arrays, so rebuilds reuse storage. Bucket collisions only
/// add candidates, which a superset query allows.
///
/// The static layer (set_static) survives clear() and is only re-bucketed
/// when its contents or index offset change.
class SpatialHash {
 public:
  explicit SpatialHash(double cell_size = 0.5) : cell_size_(cell_size), inv_cell_(1.0 / cell_size) {}

  double cell_size() const { return cell_size_; }
  std::size_t size() const { return dynamic_bodies_.size() + static_bodies_.size(); }
  bool empty() const { return size() == 0; }

  void clear() {
    dynamic_bodies_.clear();
    dynamic_ids_.clear();
    dynamic_.reset();
  }

  void insert(std::uint32_t index, const Circle& c) {
    dynamic_bodies_.push_back(c);
    dynamic_ids_.push_back(index);
    dynamic_.build(*this, dynamic_bodies_, dynamic_ids_);
  }

  /// Replaces the dynamic layer with body_of(i) listed as index i, i < n.
  template <typename BodyOf>
  void assign(std::size_t n, BodyOf&& body_of) {
    dynamic_bodies_.resize(n);
    dynamic_ids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      dynamic_bodies_[i] = body_of(i);
      dynamic_ids_[i] = static_cast<std::uint32_t>(i);
    }
    dynamic_.build(*this, dynamic_bodies_, dynamic_ids_);
  }

  /// Static layer: bodies[j] listed as index offset + j.
  void set_static(std::uint32_t offset, std::span<const Circle> bodies) {
    if (offset == static_offset_ && std::equal(bodies.begin(), bodies.end(), static_bodies_.begin(),
                                               static_bodies_.end())) {
      return;
    }
    static_offset_ = offset;
    static_bodies_.assign(bodies.begin(), bodies.end());
    std::vector<std::uint32_t> ids(bodies.size());
    for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = offset + static_cast<std::uint32_t>(j);
    static_.build(*this, static_bodies_, ids);
  }

  /// Clears both layers, then inserts bodies[i] as index i.
  void build(std::span<const Circle> bodies) {
    set_static(0, {});
    assign(bodies.size(), [&](std::size_t i) { return bodies[i]; });
  }

  /// Indices of every body whose surface distance to `c` may be below
  /// `range` (a superset), ascending and without duplicates.
  void query(const Circle& c, double range, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (empty()) return;
    const CellRange cr = cells_for(c.center, c.radius + std::max(range, 0.0));
    dynamic_.gather(cr, out);
    static_.gather(cr, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  std::vector<std::uint32_t> query(const Circle& c, double range) const {
    std::vector<std::uint32_t> out;
    query(c, range, out);
    return out;
  }

 private:
  struct CellRange {
    std::int64_t x0, y0, x1, y1;
  };

  static constexpr std::int64_t kLimit = (std::int64_t{1} << 30) - 1;

  std::int64_t cell_of(double v) const {
    const double f = std::floor(v * inv_cell_);
    return static_cast<std::int64_t>(std::clamp(f, -static_cast<double>(kLimit), static_cast<double>(kLimit)));
  }

  CellRange cells_for(Vec2 center, double extent) const {
    return {cell_of(center.x - extent), cell_of(center.y - extent), cell_of(center.x + extent),
            cell_of(center.y + extent)};
  }

  // Buckets are contiguous slices items[start[b], start[b + 1]).
  struct Layer {
    unsigned shift = 64;
    std::vector<std::uint32_t> start;
    std::vector<std::uint32_t> items;
    std::vector<std::uint32_t> cursor;
    std::vector<std::uint64_t> spans;

    void reset() {
      start.clear();
      items.clear();
    }

    std::size_t bucket(std::int64_t cx, std::int64_t cy) const {
      const std::uint64_t h = static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ull ^
                              static_cast<std::uint64_t>(cy) * 0xC2B2AE3D27D4EB4Full;
      return shift >= 64 ? 0 : static_cast<std::size_t>(h >> shift);
    }

    void build(const SpatialHash& grid, std::span<const Circle> bodies, std::span<const std::uint32_t> ids) {
      reset();
      if (bodies.empty()) return;
      spans.resize(bodies.size());
      std::uint64_t total = 0;
      for (std::size_t i = 0; i < bodies.size(); ++i) {
        const CellRange r = grid.cells_for(bodies[i].center, bodies[i].radius);
        spans[i] = static_cast<std::uint64_t>(r.x1 - r.x0 + 1) * static_cast<std::uint64_t>(r.y1 - r.y0 + 1);
        total += spans[i];
      }
      const std::uint64_t buckets = std::bit_ceil(std::max<std::uint64_t>(2 * total, 16));
      shift = 64 - static_cast<unsigned>(std::countr_zero(buckets));
      start.assign(buckets + 1, 0);
      const auto each_cell = [&](std::size_t i, auto&& fn) {
        const CellRange r = grid.cells_for(bodies[i].center, bodies[i].radius);
        for (std::int64_t cx = r.x0; cx <= r.x1; ++cx) {
          for (std::int64_t cy = r.y0; cy <= r.y1; ++cy) fn(bucket(cx, cy));
        }
      };
      for (std::size_t i = 0; i < bodies.size(); ++i) each_cell(i, [&](std::size_t b) { ++start[b + 1]; });
      for (std::size_t b = 0; b < buckets; ++b) start[b + 1] += start[b];
      items.resize(start[buckets]);
      cursor.assign(start.begin(), start.end() - 1);
      for (std::size_t i = 0; i < bodies.size(); ++i) {
        each_cell(i, [&](std::size_t b) { items[cursor[b]++] = ids[i]; });
      }
    }

    void gather(const CellRange& cr, std::vector<std::uint32_t>& out) const {
      if (items.empty()) return;
      const std::size_t buckets = start.size() - 1;
      if (static_cast<double>(cr.x1 - cr.x0 + 1) * static_cast<double>(cr.y1 - cr.y0 + 1) >=
          static_cast<double>(buckets)) {
        out.insert(out.end(), items.begin(), items.end());
        return;
      }
      for (std::int64_t cx = cr.x0; cx <= cr.x1; ++cx) {
        for (std::int64_t cy = cr.y0; cy <= cr.y1; ++cy) {
          const std::size_t b = bucket(cx, cy);
          out.insert(out.end(), items.begin() + start[b], items.begin() + start[b + 1]);
        }
      }
    }
  };

  double cell_size_;
  double inv_cell_;
  std::vector<Circle> dynamic_bodies_;
  std::vector<std::uint32_t> dynamic_ids_;
  Layer dynamic_;
  std::vector<Circle> static_bodies_;
  std::uint32_t static_offset_ = 0;
  Layer static_;
};

inline std::vector<std::uint32_t> query_neighbors(const SpatialHash& hash, const Circle& c, double range) {
  return hash.query(c, range);
}

}  // namespace cmapf
