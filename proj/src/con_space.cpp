#include "hypertile/con_space.hpp"

namespace hypertile {

Point ConPoint::coords() const {
  Point c(base.size() + 1);
  c << base, height;
  return c;
}

ConPoint ConPoint::from_coords(const Point& c) {
  if (c.size() < 2) throw InputError("ConPoint: need base coordinates and a height");
  return {c.head(c.size() - 1), c(c.size() - 1)};
}

double con_distance(const SpaceHandle& base, const ConPoint& p, const ConPoint& q) {
  if (!(p.height > 0.0) || !(q.height > 0.0)) throw DomainError("con_distance: height must be positive");
  return con_formula(base.distance(p.base, q.base), p.height, q.height);
}

ConPoint ray_point(const RaySpec& ray, double s) {
  if (!(s >= 0.0)) throw InputError("ray_point: s must be >= 0");
  return {ray.x, ray.kind == RaySpec::Kind::Downward ? std::exp(-s) : std::exp(s)};
}

namespace {

double product(const SpaceHandle& base, const ConPoint& x, const ConPoint& x2, const ConPoint& y) {
  return 0.5 * (con_distance(base, x, y) + con_distance(base, y, x2) - con_distance(base, x, x2));
}

QuasimetricValue finish(double v, double vh) {
  QuasimetricValue out{v, vh, false};
  double scale = std::max(std::abs(v), std::abs(vh));
  out.converged = std::abs(v - vh) <= 1e-6 * scale || scale == 0.0;
  return out;
}

void require_downward(const RaySpec& r, const char* who) {
  if (r.kind != RaySpec::Kind::Downward)
    throw InputError(std::string(who) + ": rays must be downward (boundary points other than infinity)");
}

}  // namespace

QuasimetricValue visual_quasimetric(const SpaceHandle& base, double a, const ConPoint& basepoint,
                                    const RaySpec& r1, const RaySpec& r2, double s_max) {
  require_downward(r1, "visual_quasimetric");
  require_downward(r2, "visual_quasimetric");
  if (!(a > 1.0)) throw InputError("visual_quasimetric: a must exceed 1");
  if (!(s_max >= 10.0)) throw InputError("visual_quasimetric: s_max must be >= 10");
  auto at = [&](double s) {
    return std::pow(a, -product(base, ray_point(r1, s), ray_point(r2, s), basepoint));
  };
  return finish(at(s_max), at(0.5 * s_max));
}

QuasimetricValue parabolic_quasimetric(const SpaceHandle& base, double a, const RaySpec& eta,
                                       const RaySpec& r1, const RaySpec& r2, double s_max) {
  if (eta.kind != RaySpec::Kind::Vertical) throw InputError("parabolic_quasimetric: eta must be vertical");
  require_downward(r1, "parabolic_quasimetric");
  require_downward(r2, "parabolic_quasimetric");
  if (!(a > 1.0)) throw InputError("parabolic_quasimetric: a must exceed 1");
  if (!(s_max >= 10.0)) throw InputError("parabolic_quasimetric: s_max must be >= 10");
  auto at = [&](double s) {
    return std::pow(a, s - product(base, ray_point(r1, s), ray_point(r2, s), ray_point(eta, s)));
  };
  return finish(at(s_max), at(0.5 * s_max));
}

}  // namespace hypertile
