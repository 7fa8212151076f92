// Shared helpers for the unit and acceptance suites. Oracles here are kept
// independent of the library's own geometry paths: membership tests use
// plain half-plane sign checks, not Region2.
#pragma once

#include <modesel/geometry.hpp>

#include <random>
#include <vector>

namespace testutil {

using modesel::Polygon2;
using modesel::Vec2;
using modesel::Vec3;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  int below(int n) { return int(eng_() % std::uint64_t(n)); }
  std::uint64_t u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Strictly convex CCW polygon as the hull of n random points in a box.
inline Polygon2 random_convex_polygon(Rng& rng, double x0, double y0, double x1,
                                      double y1, int n = 8) {
  std::vector<Vec2> pts;
  pts.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i)
    pts.push_back({rng.uniform(x0, x1), rng.uniform(y0, y1)});
  return modesel::convex_hull(pts);
}

// Half-plane membership for convex CCW polygons; boundary counts as inside.
inline bool in_convex(const Polygon2& poly, const Vec2& p) {
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % n];
    if ((b - a).cross(p - a) < 0.0) return false;
  }
  return true;
}

}  // namespace testutil
