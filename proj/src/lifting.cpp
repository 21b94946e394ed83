#include "hypertile/lifting.hpp"

#include "hypertile/models.hpp"
#include "hypertile/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace hypertile {

std::string to_string(MapFamily f) {
  switch (f) {
    case MapFamily::Affine: return "affine";
    case MapFamily::Power1d: return "power1d";
    case MapFamily::HeisLeftTranslation: return "heis-left-translation";
    case MapFamily::HeisDilation: return "heis-dilation";
    case MapFamily::Table: return "table";
  }
  return "?";
}

Point apply_similarity(const SpaceHandle& base, const BaseSimilarity& g, const Point& x) {
  if (base.model() == ModelTag::Heisenberg) {
    Heis h = heis_dilate(g.scale, Heis::from_coords(x));
    if (g.shift.size() > 0) h = heis_multiply(Heis::from_coords(g.shift), h);
    return h.coords();
  }
  Point y = g.scale * x;
  if (g.shift.size() > 0) y += g.shift;
  return y;
}

Point extend_similarity(const SpaceHandle& base, const BaseSimilarity& g, const Point& p) {
  const int n = base.point_dimension();
  if (p.size() != n + 1) throw InputError("extend_similarity: expected " + std::to_string(n + 1) + " coordinates");
  Point out(n + 1);
  out.head(n) = apply_similarity(base, g, p.head(n));
  out(n) = g.scale * p(n);
  return out;
}

// ---------------------------------------------------------------- BoundaryMap

BoundaryMap BoundaryMap::affine(Eigen::MatrixXd A, Eigen::VectorXd b) {
  if (A.rows() != A.cols() || A.rows() < 1) throw InputError("affine: matrix must be square");
  if (b.size() != A.rows()) throw InputError("affine: translation size mismatch");
  if (!A.allFinite() || !b.allFinite()) throw InputError("affine: non-finite entries");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw InputError("affine: matrix is singular");
  BoundaryMap m;
  m.family_ = MapFamily::Affine;
  m.base_ = SpaceHandle::euclidean(static_cast<int>(A.rows()));
  m.A_ = std::move(A);
  m.b_ = std::move(b);
  return m;
}

BoundaryMap BoundaryMap::power1d(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InputError("power1d: exponent must be positive");
  BoundaryMap m;
  m.family_ = MapFamily::Power1d;
  m.p_ = p;
  return m;
}

BoundaryMap BoundaryMap::heis_left_translation(const Point& g) {
  if (g.size() != 3 || !g.allFinite()) throw InputError("heis-left-translation: need 3 finite coordinates");
  BoundaryMap m;
  m.family_ = MapFamily::HeisLeftTranslation;
  m.base_ = SpaceHandle::heisenberg();
  m.g_ = g;
  return m;
}

BoundaryMap BoundaryMap::heis_dilation(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InputError("heis-dilation: s must be positive");
  BoundaryMap m;
  m.family_ = MapFamily::HeisDilation;
  m.base_ = SpaceHandle::heisenberg();
  m.s_ = s;
  return m;
}

BoundaryMap BoundaryMap::table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InputError("table: need at least two (x, y) pairs");
  bool up = ys[1] > ys[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw InputError("table: non-finite entry");
    if (i == 0) continue;
    if (!(xs[i] > xs[i - 1])) throw InputError("table: x values must be strictly increasing");
    if (up ? !(ys[i] > ys[i - 1]) : !(ys[i] < ys[i - 1])) throw InputError("table: y values must be strictly monotone");
  }
  BoundaryMap m;
  m.family_ = MapFamily::Table;
  m.xs_ = std::move(xs);
  m.ys_ = std::move(ys);
  return m;
}

std::string BoundaryMap::describe() const {
  std::ostringstream os;
  os << to_string(family_);
  switch (family_) {
    case MapFamily::Affine: os << "(n=" << A_.rows() << ")"; break;
    case MapFamily::Power1d: os << "(p=" << p_ << ")"; break;
    case MapFamily::HeisLeftTranslation: os << "(" << g_(0) << "," << g_(1) << "," << g_(2) << ")"; break;
    case MapFamily::HeisDilation: os << "(s=" << s_ << ")"; break;
    case MapFamily::Table: os << "(" << xs_.size() << " knots)"; break;
  }
  if (!pre_.empty() || !post_.empty()) os << "+similarities(" << pre_.size() << "," << post_.size() << ")";
  return os.str();
}

namespace {

void check_similarity(const SpaceHandle& base, const BaseSimilarity& g) {
  if (!(g.scale > 0.0) || !std::isfinite(g.scale)) throw InputError("similarity: scale must be positive");
  if (g.shift.size() != 0 && g.shift.size() != base.point_dimension())
    throw InputError("similarity: shift has the wrong dimension");
}

BaseSimilarity invert(const SpaceHandle& base, const BaseSimilarity& g) {
  // x = delta_{1/s}(shift^-1 y) = (-delta_{1/s} shift) * delta_{1/s} y
  BaseSimilarity inv{1.0 / g.scale, Point()};
  if (g.shift.size() > 0) {
    BaseSimilarity d{inv.scale, Point()};
    inv.shift = -apply_similarity(base, d, g.shift);
  }
  return inv;
}

double table_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  std::size_t n = xs.size();
  std::size_t i;
  if (x <= xs[1]) {
    i = 0;
  } else if (x >= xs[n - 2]) {
    i = n - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
  }
  double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + w * (ys[i + 1] - ys[i]);
}

}  // namespace

BoundaryMap BoundaryMap::post(const BaseSimilarity& g) const {
  check_similarity(base_, g);
  BoundaryMap m = *this;
  m.post_.push_back(g);
  return m;
}

BoundaryMap BoundaryMap::pre(const BaseSimilarity& g) const {
  check_similarity(base_, g);
  BoundaryMap m = *this;
  m.pre_.insert(m.pre_.begin(), g);
  return m;
}

Point BoundaryMap::core(const Point& x) const {
  switch (family_) {
    case MapFamily::Affine: return A_ * x + b_;
    case MapFamily::Power1d: {
      Point y(1);
      y(0) = std::copysign(std::pow(std::abs(x(0)), p_), x(0));
      return y;
    }
    case MapFamily::HeisLeftTranslation:
      return heis_multiply(Heis::from_coords(g_), Heis::from_coords(x)).coords();
    case MapFamily::HeisDilation: return heis_dilate(s_, Heis::from_coords(x)).coords();
    case MapFamily::Table: {
      Point y(1);
      y(0) = table_eval(xs_, ys_, x(0));
      return y;
    }
  }
  throw InternalError("BoundaryMap: unknown family");
}

Point BoundaryMap::core_inverse(const Point& y) const {
  switch (family_) {
    case MapFamily::Affine: return A_.fullPivLu().solve(y - b_);
    case MapFamily::Power1d: {
      Point x(1);
      x(0) = std::copysign(std::pow(std::abs(y(0)), 1.0 / p_), y(0));
      return x;
    }
    case MapFamily::HeisLeftTranslation:
      return heis_multiply(heis_inverse(Heis::from_coords(g_)), Heis::from_coords(y)).coords();
    case MapFamily::HeisDilation: return heis_dilate(1.0 / s_, Heis::from_coords(y)).coords();
    case MapFamily::Table: {
      Point x(1);
      if (ys_[1] > ys_[0]) {
        x(0) = table_eval(ys_, xs_, y(0));
      } else {
        std::vector<double> ry(ys_.rbegin(), ys_.rend()), rx(xs_.rbegin(), xs_.rend());
        x(0) = table_eval(ry, rx, y(0));
      }
      return x;
    }
  }
  throw InternalError("BoundaryMap: unknown family");
}

Point BoundaryMap::operator()(const Point& x) const {
  if (x.size() != dimension()) throw InputError("BoundaryMap: point has the wrong dimension");
  Point y = x;
  for (const auto& g : pre_) y = apply_similarity(base_, g, y);
  y = core(y);
  for (const auto& g : post_) y = apply_similarity(base_, g, y);
  return y;
}

Point BoundaryMap::inverse(const Point& y) const {
  if (y.size() != dimension()) throw InputError("BoundaryMap: point has the wrong dimension");
  Point x = y;
  for (auto it = post_.rbegin(); it != post_.rend(); ++it) x = apply_similarity(base_, invert(base_, *it), x);
  x = core_inverse(x);
  for (auto it = pre_.rbegin(); it != pre_.rend(); ++it) x = apply_similarity(base_, invert(base_, *it), x);
  return x;
}

// ---------------------------------------------------------------- tau

void LiftParams::validate() const {
  if (ball_samples < 16) throw InputError("lift: ball_samples must be at least 16");
}

SpaceHandle LiftedMap::hplus() const {
  if (boundary.heisenberg()) return SpaceHandle::heisenberg_half_space();
  return SpaceHandle::half_space_real(boundary.dimension());
}

namespace {

// Sphere of radius t about x, parametrized by up to two angles.
//   n = 1: the two points x +- t
//   n = 2: angle theta
//   n = 3: polar, azimuth
//   Heisenberg: x * delta_t(omega), omega = (sqrt(cos psi) e^{i phi}, sin psi)
//   n >= 4: fixed direction list, no angles
class Sphere {
 public:
  Sphere(const BoundaryMap& f, const Point& x, double t, int samples) : f_(f), x_(x), t_(t) {
    const int n = f.dimension();
    if (f.heisenberg()) {
      kind_ = Kind::Heis;
      int mp = std::max(4, static_cast<int>(std::lround(std::sqrt(samples / 2.0))));
      int ma = (samples + mp - 1) / mp;
      grid2(ma, 2 * kPi / ma, mp, kPi / (mp - 1), -kPi / 2);
    } else if (n == 1) {
      kind_ = Kind::Line;
      grid_ = {{0.0, 0.0}, {kPi, 0.0}};
    } else if (n == 2) {
      kind_ = Kind::Circle;
      step_ = {2 * kPi / samples, 0.0};
      for (int i = 0; i < samples; ++i) grid_.push_back({i * step_[0], 0.0});
    } else if (n == 3) {
      kind_ = Kind::Sphere3;
      int mp = std::max(4, static_cast<int>(std::lround(std::sqrt(samples / 2.0))));
      int ma = (samples + mp - 1) / mp;
      grid2(ma, 2 * kPi / ma, mp, kPi / (mp - 1), 0.0);
    } else {
      kind_ = Kind::List;
      for (int i = 0; i < n; ++i) {
        Point e = Point::Zero(n);
        e(i) = 1.0;
        dirs_.push_back(e);
        dirs_.push_back(-e);
      }
      SampleRng rng(0x5eed0000u + static_cast<std::uint64_t>(n));
      while (static_cast<int>(dirs_.size()) < samples) {
        Point v(n);
        for (int i = 0; i < n; ++i) v(i) = rng.normal();
        dirs_.push_back(v / v.norm());
      }
    }
  }

  int angles() const { return kind_ == Kind::Sphere3 || kind_ == Kind::Heis ? 2 : kind_ == Kind::Circle ? 1 : 0; }

  double value(const std::array<double, 2>& a) const {
    return f_.base().distance(fx_, f_(point(a)));
  }

  double maximize(bool refine) {
    fx_ = f_(x_);
    double best = 0.0;
    if (kind_ == Kind::List) {
      for (const Point& d : dirs_) best = std::max(best, f_.base().distance(fx_, f_(x_ + t_ * d)));
      return best;
    }
    std::array<double, 2> arg = grid_[0];
    for (const auto& a : grid_) {
      double v = value(a);
      if (v > best) {
        best = v;
        arg = a;
      }
    }
    if (!refine) return best;
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (int k = 0; k < angles(); ++k) {
        double lo = arg[k] - step_[k], hi = arg[k] + step_[k];
        if (kind_ == Kind::Sphere3 && k == 1) lo = std::max(lo, 0.0), hi = std::min(hi, kPi);
        if (kind_ == Kind::Heis && k == 1) lo = std::max(lo, -kPi / 2), hi = std::min(hi, kPi / 2);
        auto at = [&](double v) {
          auto a = arg;
          a[k] = v;
          return value(a);
        };
        // golden-section, maximizing
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
        double fc = at(c), fd = at(d);
        for (int it = 0; it < 40 && hi - lo > 1e-10; ++it) {
          if (fc > fd) {
            hi = d, d = c, fd = fc;
            c = hi - g * (hi - lo), fc = at(c);
          } else {
            lo = c, c = d, fc = fd;
            d = lo + g * (hi - lo), fd = at(d);
          }
        }
        double m = fc > fd ? c : d, fm = std::max(fc, fd);
        if (fm > best) {
          best = fm;
          arg[k] = m;
        }
      }
    }
    return best;
  }

 private:
  enum class Kind { Line, Circle, Sphere3, Heis, List };

  void grid2(int ma, double sa, int mp, double sp, double p0) {
    step_ = {sa, sp};
    for (int j = 0; j < mp; ++j)
      for (int i = 0; i < ma; ++i) grid_.push_back({i * sa, p0 + j * sp});
  }

  Point point(const std::array<double, 2>& a) const {
    switch (kind_) {
      case Kind::Line: {
        Point y = x_;
        y(0) += t_ * std::cos(a[0]);
        return y;
      }
      case Kind::Circle: {
        Point y = x_;
        y(0) += t_ * std::cos(a[0]);
        y(1) += t_ * std::sin(a[0]);
        return y;
      }
      case Kind::Sphere3: {
        Point y = x_;
        y(0) += t_ * std::sin(a[1]) * std::cos(a[0]);
        y(1) += t_ * std::sin(a[1]) * std::sin(a[0]);
        y(2) += t_ * std::cos(a[1]);
        return y;
      }
      case Kind::Heis: {
        double r = std::sqrt(std::max(0.0, std::cos(a[1])));
        Heis w{{r * std::cos(a[0]), r * std::sin(a[0])}, std::sin(a[1])};
        return heis_multiply(Heis::from_coords(x_), heis_dilate(t_, w)).coords();
      }
      case Kind::List: break;
    }
    throw InternalError("sphere: no angle parametrization");
  }

  const BoundaryMap& f_;
  Point x_;
  double t_;
  Kind kind_ = Kind::Line;
  std::vector<std::array<double, 2>> grid_;
  std::array<double, 2> step_{0.0, 0.0};
  std::vector<Point> dirs_;
  Point fx_;
};

void check_tau_args(const LiftedMap& lift, const Point& x, double t) {
  lift.params.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw InputError("tau: t must be positive");
  if (x.size() != lift.boundary.dimension()) throw InputError("tau: base point has the wrong dimension");
}

}  // namespace

double tau_sampled(const LiftedMap& lift, const Point& x, double t) {
  check_tau_args(lift, x, t);
  Sphere s(lift.boundary, x, t, lift.params.ball_samples);
  return s.maximize(lift.params.refine);
}

double tau(const LiftedMap& lift, const Point& x, double t) {
  check_tau_args(lift, x, t);
  if (!lift.boundary.monotone_1d()) return tau_sampled(lift, x, t);
  Point a = x, b = x;
  a(0) += t;
  b(0) -= t;
  Point fx = lift.boundary(x);
  return std::max(std::abs(lift.boundary(a)(0) - fx(0)), std::abs(fx(0) - lift.boundary(b)(0)));
}

Point lift_eval(const LiftedMap& lift, const Point& p) {
  const int n = lift.boundary.dimension();
  if (p.size() != n + 1) throw InputError("lift_eval: expected " + std::to_string(n + 1) + " coordinates");
  Point out(n + 1);
  out.head(n) = lift.boundary(p.head(n));
  out(n) = tau(lift, p.head(n), p(n));
  return out;
}

PointMap lift_as_map(const LiftedMap& lift) {
  return [lift](const Point& p) { return lift_eval(lift, p); };
}

// ---------------------------------------------------------------- distortion

std::vector<std::pair<Point, Point>> local_pairs(const SpaceHandle& hplus, const Sampler& sampler, double s) {
  if (!(s > 0.0)) throw InputError("local_pairs: scale must be positive");
  sampler.region.validate();
  const int n = hplus.point_dimension() - 1;
  if (sampler.region.dimension() != n + 1) throw InputError("local_pairs: region must match the half-space dimension");
  const bool heis = hplus.model() == ModelTag::HeisenbergHalfSpace;
  if (!heis && hplus.model() != ModelTag::HalfSpaceReal) throw InputError("local_pairs: expected a half-space model");
  std::vector<std::pair<Point, Point>> out(sampler.count);
  parallel_fill(out, [&](std::size_t i) {
    SampleRng rng(derive_seed(sampler.seed, i));
    Point p = sampler.region.sample(rng);
    double r = s * std::exp(rng.uniform(std::log(1e-3), 0.0));
    Point v(n + 1);
    for (int k = 0; k <= n; ++k) v(k) = rng.normal();
    v /= v.norm();
    const double t = p(n);
    const double m = std::sqrt(std::max(0.0, 1.0 - v(n) * v(n)));
    Heis w{};
    if (heis) {
      w = {{v(0), v(1)}, v(2)};
      double g = heis_gauge(w);
      w = g > 0.0 ? heis_dilate(1.0 / g, w) : Heis{};
    }
    // horizontal 2t sinh(lm/2), vertical t e^{lw}: about hyperbolic length l
    auto at = [&](double l) {
      Point q(n + 1);
      q(n) = t * std::exp(l * v(n));
      double h = 2.0 * t * std::sinh(0.5 * l * m);
      if (heis) {
        q.head(3) = h > 0.0 ? heis_multiply(Heis::from_coords(p.head(3)), heis_dilate(h, w)).coords()
                            : Point(p.head(3));
      } else {
        q.head(n) = m > 0.0 ? Point(p.head(n) + (h / m) * v.head(n)) : Point(p.head(n));
      }
      return q;
    };
    // then pin d(p, q) = r
    double lo = 0.0, hi = r;
    for (int k = 0; k < 60 && hplus.distance(p, at(hi)) < r; ++k) hi *= 2.0;
    for (int k = 0; k < 60; ++k) {
      double mid = 0.5 * (lo + hi);
      (hplus.distance(p, at(mid)) < r ? lo : hi) = mid;
    }
    return std::make_pair(p, at(lo));
  });
  return out;
}

DistortionReport map_distortion(const SpaceHandle& space, const PointMap& map, const Sampler& sampler,
                                const std::vector<double>& scales) {
  for (double s : scales)
    if (!(s > 0.0)) throw InputError("distortion: scales must be positive");
  DistortionReport rep;
  rep.sample_count = sampler.count;
  rep.seed = sampler.seed;
  for (double s : scales) rep.local_bilip.push_back(measure_ratios(space, space, map, local_pairs(space, sampler, s), s));
  rep.qi = fit_qi_constants(space, space, map, sampler);
  return rep;
}

DistortionReport lift_distortion(const LiftedMap& lift, const SpaceHandle& hplus, const Sampler& sampler,
                                 const std::vector<double>& scales) {
  lift.params.validate();
  if (hplus.point_dimension() != lift.boundary.dimension() + 1)
    throw InputError("lift_distortion: half-space dimension does not match the boundary map");
  return map_distortion(hplus, lift_as_map(lift), sampler, scales);
}

}  // namespace hypertile
