#include "hypertile/metric.hpp"

#include "hypertile/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace hypertile {

// ---------------------------------------------------------------- sampling

void Region::validate() const {
  if (axes.empty()) throw InputError("region: no axes");
  for (const Axis& a : axes) {
    if (!(a.hi >= a.lo)) throw InputError("region: empty axis");
    if (a.log_scale && !(a.lo > 0.0)) throw InputError("region: log axis must be positive");
  }
}

Region Region::scaled(double factor) const {
  Region out = *this;
  for (Axis& a : out.axes) {
    if (a.log_scale) {
      double c = 0.5 * (std::log(a.lo) + std::log(a.hi));
      double h = 0.5 * (std::log(a.hi) - std::log(a.lo));
      a.lo = std::exp(c - factor * h);
      a.hi = std::exp(c + factor * h);
    } else {
      double c = 0.5 * (a.lo + a.hi), h = 0.5 * (a.hi - a.lo);
      a.lo = c - factor * h;
      a.hi = c + factor * h;
    }
  }
  return out;
}

Point Region::sample(SampleRng& rng) const {
  Point p(dimension());
  for (int i = 0; i < dimension(); ++i) {
    const Axis& a = axes[static_cast<std::size_t>(i)];
    p(i) = a.log_scale ? std::exp(rng.uniform(std::log(a.lo), std::log(a.hi))) : rng.uniform(a.lo, a.hi);
  }
  return p;
}

std::vector<Point> sample_points(const Sampler& sampler) {
  sampler.region.validate();
  std::vector<Point> out(sampler.count);
  parallel_fill(out, [&](std::size_t i) {
    SampleRng rng(derive_seed(sampler.seed, i));
    return sampler.region.sample(rng);
  });
  return out;
}

// ---------------------------------------------------------------- Gromov / delta

double gromov_product(const SpaceHandle& space, const Point& x, const Point& x2, const Point& y) {
  return 0.5 * (space.distance(x, y) + space.distance(y, x2) - space.distance(x, x2));
}

namespace {

// Best role assignment for one 4-set. d is the symmetric 4x4 distance table.
double four_point_defect(const std::array<std::array<double, 4>, 4>& d, std::array<int, 4>& roles) {
  double best = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < 4; ++y) {
    int o[3], k = 0;
    for (int i = 0; i < 4; ++i)
      if (i != y) o[k++] = i;
    auto g = [&](int a, int b) { return 0.5 * (d[a][y] + d[b][y] - d[a][b]); };
    for (int m = 0; m < 3; ++m) {
      int e1 = o[(m + 1) % 3], e2 = o[(m + 2) % 3], mid = o[m];
      double v = std::min(g(e1, mid), g(mid, e2)) - g(e1, e2);
      if (v > best) {
        best = v;
        roles = {e1, mid, e2, y};
      }
    }
  }
  return best;
}

DeltaEstimate delta_over(std::size_t n, const std::function<std::array<Point, 4>(std::size_t)>& quad,
                         const SpaceHandle& space) {
  auto eval = [&](std::size_t i, std::array<int, 4>* roles_out) {
    std::array<Point, 4> q = quad(i);
    std::array<std::array<double, 4>, 4> d{};
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) d[a][b] = d[b][a] = space.distance(q[a], q[b]);
    std::array<int, 4> roles{};
    double v = four_point_defect(d, roles);
    if (roles_out) *roles_out = roles;
    return v;
  };
  ArgMax best = parallel_argmax(n, [&](std::size_t i) { return eval(i, nullptr); });
  DeltaEstimate out;
  out.quadruples = n;
  if (!best.found()) return out;
  std::array<int, 4> roles{};
  eval(best.index, &roles);
  std::array<Point, 4> q = quad(best.index);
  out.delta = std::max(0.0, best.value);
  out.witness.value = out.delta;
  for (int r : roles) out.witness.points.push_back(q[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace

DeltaEstimate delta_four_point_estimate(const SpaceHandle& space, const Sampler& sampler) {
  if (sampler.count < 4) throw InputError("delta estimate: count must be >= 4");
  sampler.region.validate();
  if (sampler.region.dimension() != space.point_dimension())
    throw InputError("delta estimate: region dimension does not match space");
  return delta_over(
      sampler.count,
      [&](std::size_t i) {
        SampleRng rng(derive_seed(sampler.seed, i));
        std::array<Point, 4> q;
        for (auto& p : q) p = sampler.region.sample(rng);
        return q;
      },
      space);
}

DeltaEstimate delta_four_point_estimate(const SpaceHandle& space, const std::vector<Point>& points) {
  const std::size_t n = points.size();
  if (n < 4) throw InputError("delta estimate: need at least 4 points");
  std::vector<std::array<std::size_t, 4>> subsets;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t e = c + 1; e < n; ++e) subsets.push_back({a, b, c, e});
  return delta_over(
      subsets.size(),
      [&](std::size_t i) {
        const auto& s = subsets[i];
        return std::array<Point, 4>{points[s[0]], points[s[1]], points[s[2]], points[s[3]]};
      },
      space);
}

// ---------------------------------------------------------------- quasi-isometry

std::vector<double> qi_L_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 96; ++k) g.push_back(std::exp2(k / 16.0));
  return g;
}

QiFit fit_qi_from_distances(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputError("qi fit: distance lists differ in length");
  const std::vector<double> grid = qi_L_grid();
  QiFit fit;
  fit.pairs = a.size();
  double best = std::numeric_limits<double>::infinity();
  for (double L : grid) {
    double C = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) C = std::max({C, b[i] - L * a[i], a[i] / L - b[i]});
    if (L + C < best) {
      best = L + C;
      fit.constants = {L, C};
    }
  }
  fit.saturated = fit.constants.L == grid.back();
  return fit;
}

QiFit fit_qi_constants(const SpaceHandle& source, const SpaceHandle& target, const PointMap& map,
                       const Sampler& sampler) {
  sampler.region.validate();
  const std::size_t n = sampler.count;
  std::vector<std::array<Point, 2>> pts(n);
  parallel_fill(pts, [&](std::size_t i) {
    SampleRng rng(derive_seed(sampler.seed, i));
    Point p = sampler.region.sample(rng);
    Point q = sampler.region.sample(rng);
    return std::array<Point, 2>{p, q};
  });
  std::vector<double> a(n), b(n);
  std::vector<int> dummy(n);
  parallel_fill(dummy, [&](std::size_t i) {
    a[i] = source.distance(pts[i][0], pts[i][1]);
    b[i] = target.distance(map(pts[i][0]), map(pts[i][1]));
    return 0;
  });
  QiFit fit = fit_qi_from_distances(a, b);
  const double L = fit.constants.L;
  // witness: the binding pair at the chosen L
  ArgMax w = parallel_argmax(n, [&](std::size_t i) {
    return std::max(b[i] - L * a[i], a[i] / L - b[i]);
  });
  if (w.found()) {
    fit.witness.points = {pts[w.index][0], pts[w.index][1]};
    fit.witness.value = std::max(0.0, w.value);
  }
  return fit;
}

// ---------------------------------------------------------------- quasi-symmetry

double QsModulus::operator()(double t) const {
  return c * std::max(std::pow(t, alpha), std::pow(t, 1.0 / alpha));
}

void QsModulus::validate() const {
  if (!(alpha >= 1.0) || !(c >= 1.0)) throw InputError("QsModulus: need alpha >= 1 and c >= 1");
}

std::vector<Triple> sample_triples(const SpaceHandle& space, const Sampler& sampler) {
  sampler.region.validate();
  std::vector<Triple> out(sampler.count);
  parallel_fill(out, [&](std::size_t i) {
    SampleRng rng(derive_seed(sampler.seed, i));
    Triple t;
    for (int attempt = 0; attempt < 64; ++attempt) {
      t = {sampler.region.sample(rng), sampler.region.sample(rng), sampler.region.sample(rng)};
      if (space.distance(t.x, t.z) > 0.0) return t;
    }
    throw InputError("sample_triples: region too degenerate for nondegenerate triples");
  });
  return out;
}

namespace {

struct TripleRatios {
  double lhs = 0.0;  // d(gx, gy) / d(gx, gz), +inf on collapse
  double rhs = 0.0;  // d(x, y) / d(x, z)
};

std::vector<TripleRatios> triple_ratios(const SpaceHandle& space, const PointMap& map,
                                        const std::vector<Triple>& triples) {
  std::vector<TripleRatios> out(triples.size());
  parallel_fill(out, [&](std::size_t i) {
    const Triple& t = triples[i];
    double dxz = space.distance(t.x, t.z);
    if (!(dxz > 0.0)) throw InputError("quasi-symmetry: degenerate triple with d(x,z) = 0");
    Point gx = map(t.x), gy = map(t.y), gz = map(t.z);
    double gxz = space.distance(gx, gz);
    TripleRatios r;
    r.rhs = space.distance(t.x, t.y) / dxz;
    r.lhs = gxz > 0.0 ? space.distance(gx, gy) / gxz : std::numeric_limits<double>::infinity();
    return r;
  });
  return out;
}

}  // namespace

QsCheck check_quasi_symmetry(const SpaceHandle& space, const PointMap& map, const QsModulus& eta,
                             const std::vector<Triple>& triples) {
  eta.validate();
  auto r = triple_ratios(space, map, triples);
  ArgMax worst = parallel_argmax(r.size(), [&](std::size_t i) { return r[i].lhs / eta(r[i].rhs); });
  QsCheck out;
  out.triples = triples.size();
  if (!worst.found()) return out;
  const Triple& t = triples[worst.index];
  out.worst_ratio = worst.value;
  out.collapsed = std::isinf(worst.value);
  out.pass = !out.collapsed && worst.value <= 1.0 + 1e-12;
  out.witness = {{t.x, t.y, t.z}, worst.value};
  return out;
}

QsCheck check_quasi_symmetry(const SpaceHandle& space, const PointMap& map, const QsModulus& eta,
                             const Sampler& sampler) {
  return check_quasi_symmetry(space, map, eta, sample_triples(space, sampler));
}

QsFit fit_qs_modulus(const SpaceHandle& space, const PointMap& map, const std::vector<double>& alpha_grid,
                     const std::vector<Triple>& triples) {
  if (alpha_grid.empty()) throw InputError("fit_qs_modulus: empty alpha grid");
  auto r = triple_ratios(space, map, triples);
  QsFit fit;
  double best_c = std::numeric_limits<double>::infinity();
  for (double alpha : alpha_grid) {
    if (!(alpha >= 1.0)) throw InputError("fit_qs_modulus: alpha must be >= 1");
    QsModulus unit{alpha, 1.0};
    ArgMax m = parallel_argmax(r.size(), [&](std::size_t i) { return r[i].lhs / unit(r[i].rhs); });
    double c = m.found() ? std::max(1.0, m.value) : 1.0;
    fit.per_alpha.emplace_back(alpha, c);
    if (c < best_c) {
      best_c = c;
      fit.modulus = {alpha, c};
      if (m.found()) {
        const Triple& t = triples[m.index];
        fit.witness = {{t.x, t.y, t.z}, m.value};
      }
    }
  }
  return fit;
}

QsFit fit_qs_modulus(const SpaceHandle& space, const PointMap& map, const std::vector<double>& alpha_grid,
                     const Sampler& sampler) {
  return fit_qs_modulus(space, map, alpha_grid, sample_triples(space, sampler));
}

// ---------------------------------------------------------------- injectivity

InjectivityReport injectivity_scale_check(const SpaceHandle& source, const SpaceHandle& target,
                                          const std::vector<Point>& points, const std::vector<Point>& images,
                                          double r, double epsilon) {
  if (!(r > 0.0)) throw InputError("injectivity_scale_check: r must be positive");
  if (!(epsilon > 0.0)) throw InputError("injectivity_scale_check: epsilon must be positive");
  if (points.size() != images.size()) throw InputError("injectivity_scale_check: size mismatch");
  const std::size_t n = points.size();
  // Per row i: worst (a) collapse and closest far image pair.
  struct Row {
    double collapse = -1.0;  // d(p,q) of a collapsed near pair, -1 if none
    std::size_t collapse_j = 0;
    double far_gap = std::numeric_limits<double>::infinity();
    std::size_t far_j = 0;
    std::size_t pairs = 0;
  };
  std::vector<Row> rows(n);
  parallel_fill(rows, [&](std::size_t i) {
    Row row;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = source.distance(points[i], points[j]);
      double e = target.distance(images[i], images[j]);
      ++row.pairs;
      if (d < r) {
        if (d > 0.0 && !(e > 0.0) && d > row.collapse) row.collapse = d, row.collapse_j = j;
      } else if (e < row.far_gap) {
        row.far_gap = e;
        row.far_j = j;
      }
    }
    return row;
  });
  InjectivityReport out;
  out.min_image_gap_far = std::numeric_limits<double>::infinity();
  std::size_t far_i = n, col_i = n;
  double col_d = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.pairs += rows[i].pairs;
    if (rows[i].far_gap < out.min_image_gap_far) out.min_image_gap_far = rows[i].far_gap, far_i = i;
    if (rows[i].collapse > col_d) col_d = rows[i].collapse, col_i = i;
  }
  if (col_i < n) {
    out.small_scale_ok = false;
    out.small_scale_witness = {{points[col_i], points[rows[col_i].collapse_j]}, col_d};
  }
  if (far_i < n) {
    out.large_scale_witness = {{points[far_i], points[rows[far_i].far_j]}, out.min_image_gap_far};
    out.large_scale_ok = out.min_image_gap_far >= epsilon;
  }
  out.pass = out.small_scale_ok && out.large_scale_ok;
  return out;
}

InjectivityReport injectivity_scale_check(const SpaceHandle& space, const PointMap& map, double r,
                                          double epsilon, const Sampler& sampler) {
  std::vector<Point> pts = sample_points(sampler);
  std::vector<Point> img(pts.size());
  parallel_fill(img, [&](std::size_t i) { return map(pts[i]); });
  return injectivity_scale_check(space, space, pts, img, r, epsilon);
}

// ---------------------------------------------------------------- distortion

LocalBilip measure_ratios(const SpaceHandle& source, const SpaceHandle& target, const PointMap& map,
                          const std::vector<std::pair<Point, Point>>& pairs, double scale) {
  std::vector<double> ratio(pairs.size());
  parallel_fill(ratio, [&](std::size_t i) {
    double d = source.distance(pairs[i].first, pairs[i].second);
    if (!(d > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return target.distance(map(pairs[i].first), map(pairs[i].second)) / d;
  });
  LocalBilip out;
  out.scale = scale;
  out.pairs = pairs.size();
  ArgMax hi = parallel_argmax(ratio.size(), [&](std::size_t i) { return ratio[i]; });
  ArgMax lo = parallel_argmax(ratio.size(), [&](std::size_t i) { return -ratio[i]; });
  if (!hi.found()) return out;
  out.max_ratio = hi.value;
  out.min_ratio = -lo.value;
  out.max_witness = {{pairs[hi.index].first, pairs[hi.index].second}, hi.value};
  out.min_witness = {{pairs[lo.index].first, pairs[lo.index].second}, -lo.value};
  out.constant = std::max(out.max_ratio, out.min_ratio > 0.0 ? 1.0 / out.min_ratio
                                                             : std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace hypertile
