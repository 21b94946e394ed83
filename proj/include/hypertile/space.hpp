#pragma once

#include "hypertile/core.hpp"
#include "hypertile/models.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace hypertile {

enum class ModelTag {
  Euclidean,
  Twisted,
  Heisenberg,
  HalfSpaceReal,
  HalfSpaceTwisted,
  ComplexHyperbolic,
  ConOf,
  BumpHalfPlane,
  HeisenbergHalfSpace,
};

std::string to_string(ModelTag tag);

class SpaceHandle;

// Coordinate layouts:
//   euclidean(n), twisted(lambda): n coordinates
//   heisenberg: (Re zeta, Im zeta, u)
//   half-space-real(n), half-space-twisted(lambda), bump: (x..., t)
//   complex-hyperbolic: horospherical (Re zeta, Im zeta, u, v)
//   heisenberg-half-space: (Re zeta, Im zeta, u, t), complex hyperbolic at v = t^2,
//     so (x, t) -> (delta_s x, s t) and left translations are isometries
//   con-of(X): (base coordinates..., t)
class SpaceHandle {
 public:
  static SpaceHandle euclidean(int n);
  static SpaceHandle twisted(std::vector<int> lambda);
  static SpaceHandle heisenberg();
  static SpaceHandle half_space_real(int n);
  static SpaceHandle half_space_twisted(std::vector<int> lambda, GridWindow window);
  static SpaceHandle complex_hyperbolic();
  static SpaceHandle heisenberg_half_space();
  static SpaceHandle con_of(const SpaceHandle& base);
  static SpaceHandle bump_half_plane(BumpParams params, GridWindow window);

  ModelTag model() const { return tag_; }
  int point_dimension() const { return dim_; }
  bool exact() const;  // closed-form metric, no grid
  bool has_height() const;  // last coordinate must be positive
  const std::vector<int>& lambda() const { return lambda_; }
  const SpaceHandle& base() const;  // con-of only
  const GridMetric* grid() const { return grid_.get(); }
  const BumpParams& bump() const { return bump_; }
  std::string describe() const;  // e.g. "half-space-real(n=1)"

  double distance(const Point& p, const Point& q) const;
  void validate(const Point& p) const;

 private:
  ModelTag tag_ = ModelTag::Euclidean;
  int dim_ = 0;
  std::vector<int> lambda_;
  std::shared_ptr<const SpaceHandle> base_;
  std::shared_ptr<const GridMetric> grid_;
  BumpParams bump_;
};

double distance(const SpaceHandle& space, const Point& p, const Point& q);

}  // namespace hypertile
