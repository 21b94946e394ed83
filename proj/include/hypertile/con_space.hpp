#pragma once

#include "hypertile/space.hpp"

#include <cmath>

namespace hypertile {

struct ConPoint {
  Point base;
  double height = 1.0;

  Point coords() const;
  static ConPoint from_coords(const Point& c);
};

struct RaySpec {
  enum class Kind { Downward, Vertical };
  Kind kind = Kind::Downward;
  Point x;

  static RaySpec downward(Point x) { return {Kind::Downward, std::move(x)}; }
  static RaySpec vertical(Point x0) { return {Kind::Vertical, std::move(x0)}; }
};

// 2 log((d + max(t, t')) / sqrt(t t')), written with log1p so that nearby
// points keep their digits.
inline double con_formula(double d_base, double t, double tq) {
  if (!(t > 0.0) || !(tq > 0.0)) throw DomainError("con_distance: height must be positive");
  double lo = std::min(t, tq), hi = std::max(t, tq);
  double g = std::sqrt(lo * hi);
  double sh = std::sqrt(hi);
  double excess = sh * (hi - lo) / (sh + std::sqrt(lo));  // hi - sqrt(lo hi)
  return 2.0 * std::log1p((d_base + excess) / g);
}

double con_distance(const SpaceHandle& base, const ConPoint& p, const ConPoint& q);

ConPoint ray_point(const RaySpec& ray, double s);

struct QuasimetricValue {
  double value = 0.0;
  double value_half = 0.0;  // same expression at s_max / 2
  bool converged = false;   // agree to 1e-6 relative
};

QuasimetricValue visual_quasimetric(const SpaceHandle& base, double a, const ConPoint& basepoint,
                                    const RaySpec& r1, const RaySpec& r2, double s_max);

QuasimetricValue parabolic_quasimetric(const SpaceHandle& base, double a, const RaySpec& eta,
                                       const RaySpec& r1, const RaySpec& r2, double s_max);

}  // namespace hypertile
