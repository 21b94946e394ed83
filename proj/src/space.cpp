#include "hypertile/space.hpp"

#include "hypertile/con_space.hpp"

#include <sstream>

namespace hypertile {

std::string to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::Euclidean: return "euclidean";
    case ModelTag::Twisted: return "twisted";
    case ModelTag::Heisenberg: return "heisenberg";
    case ModelTag::HalfSpaceReal: return "half-space-real";
    case ModelTag::HalfSpaceTwisted: return "half-space-twisted";
    case ModelTag::ComplexHyperbolic: return "complex-hyperbolic";
    case ModelTag::ConOf: return "con-of";
    case ModelTag::BumpHalfPlane: return "bump-half-plane";
    case ModelTag::HeisenbergHalfSpace: return "heisenberg-half-space";
  }
  return "unknown";
}

namespace {

std::string lambda_string(const std::vector<int>& lambda) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < lambda.size(); ++i) os << (i ? "," : "") << lambda[i];
  os << ")";
  return os.str();
}

}  // namespace

SpaceHandle SpaceHandle::euclidean(int n) {
  if (n < 1) throw InputError("euclidean: n must be >= 1");
  SpaceHandle s;
  s.tag_ = ModelTag::Euclidean;
  s.dim_ = n;
  return s;
}

SpaceHandle SpaceHandle::twisted(std::vector<int> lambda) {
  if (lambda.empty()) throw InputError("twisted: lambda must be nonempty");
  for (int l : lambda)
    if (l < 1) throw InputError("twisted: lambda entries must be >= 1");
  SpaceHandle s;
  s.tag_ = ModelTag::Twisted;
  s.dim_ = static_cast<int>(lambda.size());
  s.lambda_ = std::move(lambda);
  return s;
}

SpaceHandle SpaceHandle::heisenberg() {
  SpaceHandle s;
  s.tag_ = ModelTag::Heisenberg;
  s.dim_ = 3;
  return s;
}

SpaceHandle SpaceHandle::half_space_real(int n) {
  if (n < 1) throw InputError("half-space-real: n must be >= 1");
  SpaceHandle s;
  s.tag_ = ModelTag::HalfSpaceReal;
  s.dim_ = n + 1;
  return s;
}

SpaceHandle SpaceHandle::half_space_twisted(std::vector<int> lambda, GridWindow window) {
  SpaceHandle s;
  s.tag_ = ModelTag::HalfSpaceTwisted;
  s.dim_ = static_cast<int>(lambda.size()) + 1;
  s.grid_ = make_twisted_halfspace_grid(lambda, std::move(window));
  s.lambda_ = std::move(lambda);
  return s;
}

SpaceHandle SpaceHandle::complex_hyperbolic() {
  SpaceHandle s;
  s.tag_ = ModelTag::ComplexHyperbolic;
  s.dim_ = 4;
  return s;
}

SpaceHandle SpaceHandle::heisenberg_half_space() {
  SpaceHandle s;
  s.tag_ = ModelTag::HeisenbergHalfSpace;
  s.dim_ = 4;
  return s;
}

SpaceHandle SpaceHandle::con_of(const SpaceHandle& base) {
  SpaceHandle s;
  s.tag_ = ModelTag::ConOf;
  s.dim_ = base.point_dimension() + 1;
  s.base_ = std::make_shared<const SpaceHandle>(base);
  return s;
}

SpaceHandle SpaceHandle::bump_half_plane(BumpParams params, GridWindow window) {
  SpaceHandle s;
  s.tag_ = ModelTag::BumpHalfPlane;
  s.dim_ = 2;
  s.bump_ = params;
  s.grid_ = make_bump_halfplane_grid(params, std::move(window));
  return s;
}

bool SpaceHandle::exact() const {
  switch (tag_) {
    case ModelTag::HalfSpaceTwisted:
    case ModelTag::BumpHalfPlane: return false;
    case ModelTag::ConOf: return base_->exact();
    default: return true;
  }
}

bool SpaceHandle::has_height() const {
  switch (tag_) {
    case ModelTag::Euclidean:
    case ModelTag::Twisted:
    case ModelTag::Heisenberg: return false;
    default: return true;
  }
}

const SpaceHandle& SpaceHandle::base() const {
  if (!base_) throw InputError("space has no base: " + describe());
  return *base_;
}

std::string SpaceHandle::describe() const {
  switch (tag_) {
    case ModelTag::Euclidean: return "euclidean(n=" + std::to_string(dim_) + ")";
    case ModelTag::Twisted: return "twisted(lambda=" + lambda_string(lambda_) + ")";
    case ModelTag::Heisenberg: return "heisenberg(gauge)";
    case ModelTag::HalfSpaceReal: return "half-space-real(n=" + std::to_string(dim_ - 1) + ")";
    case ModelTag::HalfSpaceTwisted: return "half-space-twisted(lambda=" + lambda_string(lambda_) + ",grid)";
    case ModelTag::ComplexHyperbolic: return "complex-hyperbolic(horospherical,n=2)";
    case ModelTag::ConOf: return "con-of(" + base_->describe() + ")";
    case ModelTag::BumpHalfPlane: return "bump-half-plane(a=" + std::to_string(bump_.a) + ",grid)";
    case ModelTag::HeisenbergHalfSpace: return "heisenberg-half-space(complex-hyperbolic,v=t^2)";
  }
  return "unknown";
}

void SpaceHandle::validate(const Point& p) const {
  if (p.size() != dim_)
    throw InputError(describe() + ": expected " + std::to_string(dim_) + " coordinates, got " +
                     std::to_string(p.size()));
  if (!p.allFinite()) throw InputError(describe() + ": non-finite coordinate");
  if (has_height() && !(p(dim_ - 1) > 0.0)) throw DomainError(describe() + ": height must be positive");
}

double SpaceHandle::distance(const Point& p, const Point& q) const {
  validate(p);
  validate(q);
  switch (tag_) {
    case ModelTag::Euclidean: return (p - q).norm();
    case ModelTag::Twisted: return twisted_distance(lambda_, p, q);
    case ModelTag::Heisenberg:
      return heis_gauge_distance(Heis::from_coords(p), Heis::from_coords(q));
    case ModelTag::HalfSpaceReal: return halfspace_distance(p, q);
    case ModelTag::HalfSpaceTwisted:
    case ModelTag::BumpHalfPlane: return grid_->distance(p, q);
    case ModelTag::ComplexHyperbolic: {
      HoroPoint<double> a{{p(0), p(1)}, p(2), p(3)};
      HoroPoint<double> b{{q(0), q(1)}, q(2), q(3)};
      return horo_distance(a, b);
    }
    case ModelTag::HeisenbergHalfSpace: {
      HoroPoint<double> a{{p(0), p(1)}, p(2), p(3) * p(3)};
      HoroPoint<double> b{{q(0), q(1)}, q(2), q(3) * q(3)};
      return horo_distance(a, b);
    }
    case ModelTag::ConOf: {
      const int n = dim_ - 1;
      double db = base_->distance(p.head(n), q.head(n));
      return con_formula(db, p(n), q(n));
    }
  }
  throw InputError("unknown model");
}

double distance(const SpaceHandle& space, const Point& p, const Point& q) {
  return space.distance(p, q);
}

}  // namespace hypertile
