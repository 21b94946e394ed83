#pragma once

#include "hypertile/core.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <vector>

namespace hypertile {

// ---------------------------------------------------------------- twisted d_A

// sum_i |x_i - y_i|^(1/lambda_i)
template <typename DA, typename DB>
typename DA::Scalar twisted_distance(const std::vector<int>& lambda,
                                     const Eigen::MatrixBase<DA>& x,
                                     const Eigen::MatrixBase<DB>& y) {
  using S = typename DA::Scalar;
  if (x.size() != y.size() || static_cast<std::size_t>(x.size()) != lambda.size())
    throw InputError("twisted_distance: dimension mismatch");
  S acc(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    S d = std::abs(x(i) - y(i));
    const int l = lambda[static_cast<std::size_t>(i)];
    acc += (l == 1) ? d : (l == 2 ? std::sqrt(d) : std::pow(d, S(1) / S(l)));
  }
  return acc;
}

// alpha = diag(2^lambda_i)
template <typename Derived>
Vec<typename Derived::Scalar> twisted_alpha(const std::vector<int>& lambda,
                                            const Eigen::MatrixBase<Derived>& x,
                                            int power = 1) {
  Vec<typename Derived::Scalar> out = x;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out(i) = std::ldexp(x(i), power * lambda[static_cast<std::size_t>(i)]);
  return out;
}

// ---------------------------------------------------------------- Heisenberg

template <typename Scalar>
struct HeisPoint {
  std::complex<Scalar> zeta{};
  Scalar u{};

  static HeisPoint from_coords(const Eigen::Ref<const Vec<Scalar>>& c) {
    if (c.size() < 3) throw InputError("HeisPoint: need 3 coordinates");
    return {{c(0), c(1)}, c(2)};
  }
  Vec<Scalar> coords() const {
    Vec<Scalar> c(3);
    c << zeta.real(), zeta.imag(), u;
    return c;
  }
};

using Heis = HeisPoint<double>;

// Pairing <z, w> = z * conj(w), so the centre increment is 2 Im(z conj w).
template <typename Scalar>
HeisPoint<Scalar> heis_multiply(const HeisPoint<Scalar>& p, const HeisPoint<Scalar>& q) {
  return {p.zeta + q.zeta, p.u + q.u + Scalar(2) * std::imag(p.zeta * std::conj(q.zeta))};
}

template <typename Scalar>
HeisPoint<Scalar> heis_inverse(const HeisPoint<Scalar>& p) {
  return {-p.zeta, -p.u};
}

template <typename Scalar>
HeisPoint<Scalar> heis_dilate(Scalar s, const HeisPoint<Scalar>& p) {
  if (!(s > Scalar(0))) throw DomainError("heis_dilate: s must be positive");
  return {s * p.zeta, s * s * p.u};
}

template <typename Scalar>
Scalar heis_gauge(const HeisPoint<Scalar>& p) {
  Scalar r2 = std::norm(p.zeta);
  return std::sqrt(std::sqrt(r2 * r2 + p.u * p.u));
}

// |q^-1 p|; written out so that no intermediate point is formed.
template <typename Scalar>
Scalar heis_gauge_distance(const HeisPoint<Scalar>& p, const HeisPoint<Scalar>& q) {
  std::complex<Scalar> dz = p.zeta - q.zeta;
  Scalar du = p.u - q.u - Scalar(2) * std::imag(q.zeta * std::conj(p.zeta));
  return heis_gauge(HeisPoint<Scalar>{dz, du});
}

// ---------------------------------------------------------------- real half-space

template <typename Scalar>
struct HalfSpacePoint {
  Vec<Scalar> x;
  Scalar t{1};

  static HalfSpacePoint from_coords(const Eigen::Ref<const Vec<Scalar>>& c) {
    return {c.head(c.size() - 1), c(c.size() - 1)};
  }
  Vec<Scalar> coords() const {
    Vec<Scalar> c(x.size() + 1);
    c << x, t;
    return c;
  }
};

// Last coordinate is the height. 2 asinh(|p-q| / (2 sqrt(t t'))) equals
// arccosh(1 + |p-q|^2 / (2 t t')) without the cancellation near the diagonal.
template <typename DA, typename DB>
typename DA::Scalar halfspace_distance(const Eigen::MatrixBase<DA>& p,
                                       const Eigen::MatrixBase<DB>& q) {
  using S = typename DA::Scalar;
  if (p.size() != q.size() || p.size() < 2) throw InputError("halfspace_distance: dimension mismatch");
  const S t = p(p.size() - 1), tq = q(q.size() - 1);
  if (!(t > S(0)) || !(tq > S(0))) throw DomainError("halfspace_distance: height must be positive");
  S chord = (p - q).norm();
  return S(2) * std::asinh(chord / (S(2) * std::sqrt(t * tq)));
}

template <typename Scalar>
Scalar halfspace_distance(const HalfSpacePoint<Scalar>& p, const HalfSpacePoint<Scalar>& q) {
  return halfspace_distance(p.coords(), q.coords());
}

// ---------------------------------------------------------------- complex hyperbolic

enum class HermitianForm { J1Ball, J2Siegel };

template <typename Scalar>
using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
struct HoroPoint {
  std::complex<Scalar> zeta{};
  Scalar u{};
  Scalar v{1};
};

template <typename Scalar>
struct SiegelPoint {
  std::complex<Scalar> z1{};
  std::complex<Scalar> z2{};

  // homogeneous coordinates in the patch z0 = 1
  CVec<Scalar> homogeneous() const {
    CVec<Scalar> z(3);
    z << std::complex<Scalar>(1), z1, z2;
    return z;
  }
};

// J(z, w) = sum eta_i z_i conj(w_i) for J1; J2 mixes the first two slots.
template <typename Scalar>
std::complex<Scalar> hermitian_pairing(HermitianForm form, const CVec<Scalar>& z, const CVec<Scalar>& w) {
  std::complex<Scalar> acc(0);
  Eigen::Index k0 = 2;
  if (form == HermitianForm::J1Ball) {
    acc = -z(0) * std::conj(w(0)) + z(1) * std::conj(w(1));
  } else {
    acc = z(0) * std::conj(w(1)) + z(1) * std::conj(w(0));
  }
  for (Eigen::Index i = k0; i < z.size(); ++i) acc += z(i) * std::conj(w(i));
  return acc;
}

// Siegel -> ball change of basis, inverse of
//   z0 = (w0 + w1)/sqrt2, z1 = (w1 - w0)/sqrt2, z_k = w_k,
// which carries J1(w) to J2(z).
template <typename Scalar>
CVec<Scalar> siegel_to_ball(const CVec<Scalar>& z) {
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  CVec<Scalar> w = z;
  w(0) = (z(0) - z(1)) * r;
  w(1) = (z(0) + z(1)) * r;
  return w;
}

template <typename Scalar>
CVec<Scalar> ball_to_siegel(const CVec<Scalar>& w) {
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  CVec<Scalar> z = w;
  z(0) = (w(0) + w(1)) * r;
  z(1) = (w(1) - w(0)) * r;
  return z;
}

// cosh^2 d = J(z,w)J(w,z) / (J(z,z)J(w,w)). The numerator of sinh^2 d is the
// negated Gram determinant, expanded into 2x2 minors so that nearby points
// do not lose all their digits.
template <typename Scalar>
Scalar cplx_hyp_distance(HermitianForm form, const CVec<Scalar>& z_in, const CVec<Scalar>& w_in) {
  if (z_in.size() != w_in.size() || z_in.size() < 2)
    throw InputError("cplx_hyp_distance: dimension mismatch");
  CVec<Scalar> z = form == HermitianForm::J1Ball ? z_in : siegel_to_ball(z_in);
  CVec<Scalar> w = form == HermitianForm::J1Ball ? w_in : siegel_to_ball(w_in);
  const Scalar jz = std::real(hermitian_pairing(HermitianForm::J1Ball, z, z));
  const Scalar jw = std::real(hermitian_pairing(HermitianForm::J1Ball, w, w));
  if (!(jz < Scalar(0)) || !(jw < Scalar(0)))
    throw DomainError("cplx_hyp_distance: point outside complex hyperbolic space");
  Scalar num(0);
  const Eigen::Index n = z.size();
  for (Eigen::Index j = 1; j < n; ++j) num += std::norm(z(0) * w(j) - z(j) * w(0));
  for (Eigen::Index i = 1; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) num -= std::norm(z(i) * w(j) - z(j) * w(i));
  if (num < Scalar(0)) num = Scalar(0);
  return std::asinh(std::sqrt(num / (jz * jw)));
}

// Note the sign of |zeta|^2: -2 Re z1 = 2v + 2|zeta|^2 > |z2|^2 = 2|zeta|^2,
// so every horospherical point lands strictly inside the Siegel domain.
template <typename Scalar>
SiegelPoint<Scalar> horo_to_siegel(const HoroPoint<Scalar>& p) {
  if (!(p.v > Scalar(0))) throw DomainError("horo_to_siegel: v must be positive");
  return {{-p.v - std::norm(p.zeta), p.u}, std::sqrt(Scalar(2)) * p.zeta};
}

template <typename Scalar>
HoroPoint<Scalar> horo_dilation(Scalar s, const HoroPoint<Scalar>& p) {
  if (!(s > Scalar(0))) throw DomainError("horo_dilation: s must be positive");
  return {s * p.zeta, s * s * p.u, s * s * p.v};
}

// Heisenberg left translation, extended trivially in v.
template <typename Scalar>
HoroPoint<Scalar> horo_translate(const HeisPoint<Scalar>& g, const HoroPoint<Scalar>& p) {
  HeisPoint<Scalar> b = heis_multiply(g, HeisPoint<Scalar>{p.zeta, p.u});
  return {b.zeta, b.u, p.v};
}

template <typename Scalar>
Scalar horo_distance(const HoroPoint<Scalar>& p, const HoroPoint<Scalar>& q) {
  return cplx_hyp_distance(HermitianForm::J2Siegel, horo_to_siegel(p).homogeneous(),
                           horo_to_siegel(q).homogeneous());
}

// ---------------------------------------------------------------- grid metrics

// Raised cosine bump on the log_a-period, zero near both ends.
struct BumpParams {
  double a = 2.0;
  double amplitude = 1.0;

  double profile(double t) const;  // f(t) >= 1, a-periodic in log t, f = 1 near t = a^k
};

// Box window for a grid metric, in point coordinates (x_1..x_n, t).
struct GridWindow {
  Point lo;
  Point hi;
  std::vector<int> cells;  // per axis; the last axis is uniform in log t
  int stencil_radius = 4;
};

// Shortest paths on a lattice in (x, log t) with all primitive offsets up to
// the stencil radius. Edge length: sqrt(sum e^{-2 lambda_i s} dx_i^2 + ds^2)
// times sqrt(conformal(t)), midpoint rule.
class GridMetric {
 public:
  GridMetric(std::vector<int> lambda, std::function<double(double)> conformal, GridWindow window);

  double distance(const Point& p, const Point& q) const;
  bool contains(const Point& p) const;
  const GridWindow& window() const { return window_; }
  const std::vector<int>& lambda() const { return lambda_; }
  std::size_t node_count() const { return node_count_; }

  // Distance field from p to every lattice node (cached, most recent 8).
  std::shared_ptr<const std::vector<double>> field_from(const Point& p) const;
  double distance_in_field(const std::vector<double>& field, const Point& p, const Point& q) const;

 private:
  struct Offset {
    std::vector<int> d;
  };
  std::vector<double> to_lattice(const Point& p) const;  // fractional lattice coords
  std::shared_ptr<const std::vector<double>> cached_field(const Point& p) const;
  double segment_length(const std::vector<double>& a, const std::vector<double>& b) const;
  double line_integral(const std::vector<double>& dx, double s_mid, int pieces) const;
  void attach(const std::vector<double>& frac, std::vector<std::pair<std::size_t, double>>& out) const;
  std::size_t index_of(const std::vector<int>& idx) const;

  std::vector<int> lambda_;
  std::function<double(double)> conformal_;
  GridWindow window_;
  int dim_ = 0;
  std::vector<double> step_;  // lattice step per axis (x units, log-t units)
  std::vector<std::size_t> stride_;
  std::size_t node_count_ = 0;
  std::vector<Offset> offsets_;
  std::vector<double> weight_;  // [offset][2*s_index + parity] edge length table

  mutable std::mutex cache_mutex_;
  mutable std::list<std::pair<Point, std::shared_ptr<const std::vector<double>>>> cache_;
};

GridWindow default_halfplane_window(int n_base = 1);

// Window whose x spacing matches the log-height spacing at the geometric
// middle height, so that lattice cells are roughly square in the metric.
GridWindow balanced_window(const std::vector<int>& lambda, double x_lo, double x_hi, double t_lo,
                           double t_hi, int cells_log_t, int stencil_radius);

std::shared_ptr<const GridMetric> make_twisted_halfspace_grid(const std::vector<int>& lambda,
                                                              GridWindow window);
std::shared_ptr<const GridMetric> make_bump_halfplane_grid(const BumpParams& params,
                                                           GridWindow window);

double twisted_halfspace_distance(const GridMetric& grid, const Point& p, const Point& q);
double bump_halfplane_distance(const GridMetric& grid, const Point& p, const Point& q);

}  // namespace hypertile
