#pragma once

#include "hypertile/core.hpp"
#include "hypertile/metric.hpp"
#include "hypertile/space.hpp"

#include <string>
#include <vector>

namespace hypertile {

enum class MapFamily { Affine, Power1d, HeisLeftTranslation, HeisDilation, Table };

std::string to_string(MapFamily f);

// x -> shift * delta_scale(x). On R^n that is scale x + shift; on the
// Heisenberg group shift is a left translation. Empty shift means none.
struct BaseSimilarity {
  double scale = 1.0;
  Point shift;
};

Point apply_similarity(const SpaceHandle& base, const BaseSimilarity& g, const Point& x);
// (x, t) -> (g x, scale t)
Point extend_similarity(const SpaceHandle& base, const BaseSimilarity& g, const Point& p);

// Homeomorphism of the base with a known inverse. Optional similarities are
// composed on either side: post o f o pre.
class BoundaryMap {
 public:
  static BoundaryMap affine(Eigen::MatrixXd A, Eigen::VectorXd b);
  static BoundaryMap identity(int n) { return affine(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)); }
  static BoundaryMap power1d(double p);
  static BoundaryMap heis_left_translation(const Point& g);
  static BoundaryMap heis_dilation(double s);
  // piecewise linear through (xs, ys), xs strictly increasing, ys strictly
  // monotone; the end segments are extended
  static BoundaryMap table(std::vector<double> xs, std::vector<double> ys);

  MapFamily family() const { return family_; }
  const SpaceHandle& base() const { return base_; }
  int dimension() const { return base_.point_dimension(); }
  bool heisenberg() const { return base_.model() == ModelTag::Heisenberg; }
  bool monotone_1d() const { return dimension() == 1 && !heisenberg(); }
  std::string describe() const;

  BoundaryMap post(const BaseSimilarity& g) const;  // g o f
  BoundaryMap pre(const BaseSimilarity& g) const;   // f o g

  Point operator()(const Point& x) const;
  Point inverse(const Point& y) const;

  const Eigen::MatrixXd& matrix() const { return A_; }
  const Eigen::VectorXd& translation() const { return b_; }
  double exponent() const { return p_; }
  double dilation() const { return s_; }
  const Point& heis_element() const { return g_; }
  const std::vector<double>& table_x() const { return xs_; }
  const std::vector<double>& table_y() const { return ys_; }

 private:
  Point core(const Point& x) const;
  Point core_inverse(const Point& y) const;

  MapFamily family_ = MapFamily::Affine;
  SpaceHandle base_ = SpaceHandle::euclidean(1);
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  double p_ = 1.0;
  double s_ = 1.0;
  Point g_;
  std::vector<double> xs_, ys_;
  std::vector<BaseSimilarity> pre_, post_;  // pre_ applied first-to-last, then core, then post_
};

struct LiftParams {
  int ball_samples = 64;
  bool refine = true;
  void validate() const;
};

struct LiftedMap {
  BoundaryMap boundary;
  LiftParams params;

  // half-space-real(n) over R^n, heisenberg-half-space over the Heisenberg group
  SpaceHandle hplus() const;
};

// max over d(x, y) <= t of d(f x, f y). Exact in 1d (two points, f monotone).
// Otherwise the max is taken on the sphere d(x, y) = t, which is where it
// sits for every built-in family: affine maps and Heisenberg similarities
// are dilations up to a linear map, so the displacement grows radially.
double tau(const LiftedMap& lift, const Point& x, double t);
// sphere sampling (plus refinement when set), also for 1d maps
double tau_sampled(const LiftedMap& lift, const Point& x, double t);

// p = (x..., t) -> (f x, tau(x, t))
Point lift_eval(const LiftedMap& lift, const Point& p);
PointMap lift_as_map(const LiftedMap& lift);

// Pairs (p, q) of a half-space model at distance r, r log-uniform in [s/1000, s],
// direction uniform. The local constant at scale s is then a sup over
// d(p, q) <= s, as for a locally bi-Lipschitz map. Pair i uses stream
// derive_seed(seed, i).
std::vector<std::pair<Point, Point>> local_pairs(const SpaceHandle& hplus, const Sampler& sampler, double s);

// Ratio extremes at each scale plus a global (L, C) fit on the sampler.
DistortionReport lift_distortion(const LiftedMap& lift, const SpaceHandle& hplus, const Sampler& sampler,
                                 const std::vector<double>& scales);
DistortionReport map_distortion(const SpaceHandle& space, const PointMap& map, const Sampler& sampler,
                                const std::vector<double>& scales);

}  // namespace hypertile
