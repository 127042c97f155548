#pragma once

// 2D gradient (Perlin) noise.
//
// Lattice corners hash through a 256-entry permutation (shuffled with the
// caller's stream, duplicated to 512) to one of eight gradients: the four
// axis directions and the four unit diagonals. Corner contributions
// dot(gradient, offset) are blended with the quintic fade 6t^5 - 15t^4 + 10t^3.
// Output lies in [-sqrt(2)/2, sqrt(2)/2] and is exactly 0 on lattice points.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "cmapf/rng.hpp"

namespace cmapf {

class PerlinNoise {
 public:
  explicit PerlinNoise(RandomStream& rs) {
    std::vector<int> p(256);
    for (int i = 0; i < 256; ++i) p[static_cast<std::size_t>(i)] = i;
    rs.shuffle(p);
    for (std::size_t i = 0; i < 512; ++i) perm_[i] = p[i & 255u];
  }

  double operator()(double x, double y) const {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int xi = static_cast<int>(static_cast<long long>(fx) & 255);
    const int yi = static_cast<int>(static_cast<long long>(fy) & 255);
    const double dx = x - fx;
    const double dy = y - fy;
    const double u = fade(dx);
    const double v = fade(dy);
    const int aa = perm_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(xi)] + yi)];
    const int ab = perm_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(xi)] + yi + 1)];
    const int ba = perm_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(xi + 1)] + yi)];
    const int bb = perm_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(xi + 1)] + yi + 1)];
    const double x0 = lerp(grad(aa, dx, dy), grad(ba, dx - 1.0, dy), u);
    const double x1 = lerp(grad(ab, dx, dy - 1.0), grad(bb, dx - 1.0, dy - 1.0), u);
    return lerp(x0, x1, v);
  }

 private:
  static double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }
  static double lerp(double a, double b, double t) { return a + t * (b - a); }

  static double grad(int hash, double x, double y) {
    constexpr double d = std::numbers::sqrt2 / 2.0;
    switch (hash & 7) {
      case 0: return x;
      case 1: return -x;
      case 2: return y;
      case 3: return -y;
      case 4: return d * (x + y);
      case 5: return d * (x - y);
      case 6: return d * (-x + y);
      default: return d * (-x - y);
    }
  }

  std::array<int, 512> perm_{};
};

}  // namespace cmapf
