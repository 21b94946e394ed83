#include "hypertile/pipeline.hpp"

#include "hypertile/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace hypertile {

namespace {

std::int64_t dyadic_key(int layer, std::int64_t gamma) {
  return (static_cast<std::int64_t>(layer) + 1024) * (std::int64_t(1) << 44) + (gamma + (std::int64_t(1) << 43));
}

Point as_point(const Vec2& v) {
  Point p(2);
  p << v.x(), v.y();
  return p;
}

Vec2 as_vec(const Point& p) { return {p(0), p(1)}; }

}  // namespace

double h2_distance(const Vec2& a, const Vec2& b) {
  double e = (a - b).norm();
  return 2.0 * std::asinh(e / (2.0 * std::sqrt(a.y() * b.y())));
}

// ---------------------------------------------------------------- PLMap2D

bool PLMap2D::Block::contains(const Vec2& p, double tol) const {
  return p.x() >= x0 - tol * w && p.x() <= x0 + w + tol * w && p.y() >= t0 - tol * h && p.y() <= t0 + h + tol * h;
}

int PLMap2D::add_vertex(const Vec2& v, const Vec2& image) {
  vertices_.push_back(v);
  images_.push_back(image);
  return static_cast<int>(vertices_.size()) - 1;
}

int PLMap2D::add_triangle(int a, int b, int c) {
  triangles_.push_back({a, b, c});
  return static_cast<int>(triangles_.size()) - 1;
}

std::size_t PLMap2D::add_block(Block b) {
  if (b.cells.size() != static_cast<std::size_t>(b.nx) * static_cast<std::size_t>(b.ny))
    throw InternalError("PLMap2D: block cell table has the wrong size");
  blocks_.push_back(std::move(b));
  return blocks_.size() - 1;
}

void PLMap2D::index_block(std::size_t block, std::int64_t key) { keyed_[key] = block; }

Eigen::Vector3d PLMap2D::barycentric(int k, const Vec2& p) const {
  const auto& tr = triangles_[static_cast<std::size_t>(k)];
  const Vec2& a = vertices_[tr[0]];
  const Vec2& b = vertices_[tr[1]];
  const Vec2& c = vertices_[tr[2]];
  Vec2 v0 = b - a, v1 = c - a, v2 = p - a;
  double den = v0.x() * v1.y() - v1.x() * v0.y();
  double l1 = (v2.x() * v1.y() - v1.x() * v2.y()) / den;
  double l2 = (v0.x() * v2.y() - v2.x() * v0.y()) / den;
  return {1.0 - l1 - l2, l1, l2};
}

Vec2 PLMap2D::eval_in(int k, const Vec2& p) const {
  Eigen::Vector3d l = barycentric(k, p);
  const auto& tr = triangles_[static_cast<std::size_t>(k)];
  return l(0) * images_[tr[0]] + l(1) * images_[tr[1]] + l(2) * images_[tr[2]];
}

std::optional<int> PLMap2D::locate_in(const Block& b, const Vec2& p) const {
  if (!b.contains(p, 1e-12)) return std::nullopt;
  int i = std::clamp(static_cast<int>(std::floor((p.x() - b.x0) / b.w * b.nx)), 0, b.nx - 1);
  int j = std::clamp(static_cast<int>(std::floor((p.y() - b.t0) / b.h * b.ny)), 0, b.ny - 1);
  int best = -1;
  double score = -std::numeric_limits<double>::infinity();
  for (int k : b.cells[static_cast<std::size_t>(j) * b.nx + i]) {
    double m = barycentric(k, p).minCoeff();
    if (m > score) score = m, best = k;
  }
  if (best < 0 || score < -1e-9) return std::nullopt;
  return best;
}

std::optional<int> PLMap2D::locate(const Vec2& p) const {
  if (!(p.y() > 0.0) || !p.allFinite()) return std::nullopt;
  if (!keyed_.empty()) {
    int n = static_cast<int>(std::floor(std::log2(p.y())));
    auto g = static_cast<std::int64_t>(std::floor(std::ldexp(p.x(), -n)));
    auto it = keyed_.find(dyadic_key(n, g));
    if (it != keyed_.end())
      if (auto k = locate_in(blocks_[it->second], p)) return k;
  }
  for (const Block& b : blocks_)
    if (auto k = locate_in(b, p)) return k;
  return std::nullopt;
}

std::optional<Vec2> PLMap2D::eval(const Vec2& p) const {
  auto k = locate(p);
  if (!k) return std::nullopt;
  return eval_in(*k, p);
}

double PLMap2D::signed_area(int k) const {
  const auto& tr = triangles_[static_cast<std::size_t>(k)];
  Vec2 u = vertices_[tr[1]] - vertices_[tr[0]], v = vertices_[tr[2]] - vertices_[tr[0]];
  return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

double PLMap2D::image_signed_area(int k) const {
  const auto& tr = triangles_[static_cast<std::size_t>(k)];
  Vec2 u = images_[tr[1]] - images_[tr[0]], v = images_[tr[2]] - images_[tr[0]];
  return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

void PLMap2D::write_mesh(std::ostream& os) const {
  auto flags = os.flags();
  auto prec = os.precision();
  os << std::setprecision(17);
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    os << "v " << vertices_[i].x() << ' ' << vertices_[i].y() << ' ' << images_[i].x() << ' ' << images_[i].y() << '\n';
  for (const auto& t : triangles_) os << "f " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os.flags(flags);
  os.precision(prec);
}

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const {
  if (!(x_min < x_max)) throw InputError("pipeline: x_min must be below x_max");
  if (layer_min > layer_max) throw InputError("pipeline: layer_min must not exceed layer_max");
  if (layer_max - layer_min > 12) throw InputError("pipeline: at most 13 layers");
  double top = std::ldexp(1.0, layer_max);
  if (std::fmod(x_min, top) != 0.0 || std::fmod(x_max, top) != 0.0)
    throw InputError("pipeline: window ends must be multiples of the top layer's tile width");
  if (grid_density < 1 || grid_density > 512) throw InputError("pipeline: grid_density must be in [1, 512]");
  if (!(epsilon > 0.0)) throw InputError("pipeline: epsilon must be positive");
  if (!(collar_width > 0.0 && collar_width < 0.5)) throw InputError("pipeline: collar_width must be in (0, 1/2)");
  if (!(r_scale > 0.0)) throw InputError("pipeline: r_scale must be positive");
  if (max_refinements < 0 || max_refinements > 5) throw InputError("pipeline: max_refinements must be in [0, 5]");
  if (injectivity_samples < 2 || distortion_samples < 2) throw InputError("pipeline: need at least two samples");
  if (ball_samples < 16) throw InputError("pipeline: ball_samples must be at least 16");
  if (!(critical_band >= 0.0)) throw InputError("pipeline: critical_band must be non-negative");
  if (!(critical_x >= x_min && critical_x <= x_max)) throw InputError("pipeline: critical_x must lie in the window");
  if (critical_anchors < 1) throw InputError("pipeline: need at least one critical anchor");
}

std::vector<double> PipelineConfig::epsilon_ladder(int colors) const {
  std::vector<double> out;
  for (int i = 1; i <= colors; ++i) out.push_back(epsilon * std::ldexp(1.0, i - colors));
  return out;
}

// ---------------------------------------------------------------- tiles

bool TileRect::enlarged_meets(const TileRect& o) const {
  return x0 - cx <= o.x1 + o.cx && o.x0 - o.cx <= x1 + cx && t0 - ct <= o.t1 + o.ct && o.t0 - o.ct <= t1 + ct;
}

double TileRect::ramp(const Vec2& p) const {
  double dx = std::max({0.0, x0 - p.x(), p.x() - x1}) / cx;
  double dt = std::max({0.0, t0 - p.y(), p.y() - t1}) / ct;
  double s = std::max(dx, dt);
  if (s >= 1.0) return 0.0;
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

TileRect tile_rect(const TileId& q, double collar_width) {
  if (q.gamma.size() != 1) throw InputError("tile_rect: expects a tile of the dyadic tiling of H^2");
  double w = std::ldexp(1.0, q.layer);
  double x0 = static_cast<double>(q.gamma(0)) * w;
  return {x0, x0 + w, w, 2.0 * w, collar_width * w, collar_width * w};
}

namespace {

// triangle centroids and edge midpoints
std::vector<Vec2> probe_points(const PLMap2D& m, const std::vector<int>& tris) {
  std::vector<Vec2> out;
  out.reserve(tris.size() * 4);
  for (int k : tris) {
    const auto& t = m.triangles()[static_cast<std::size_t>(k)];
    const Vec2 &a = m.vertices()[t[0]], &b = m.vertices()[t[1]], &c = m.vertices()[t[2]];
    out.push_back((a + b + c) / 3.0);
    out.push_back(0.5 * (a + b));
    out.push_back(0.5 * (b + c));
    out.push_back(0.5 * (c + a));
  }
  return out;
}

struct Deviation {
  double value = 0.0;
  Vec2 where = Vec2::Zero();
};

Deviation max_deviation(const PLMap2D& m, const std::vector<int>& tris, const LiftedMap& lift) {
  auto pts = probe_points(m, tris);
  std::vector<double> dev(pts.size());
  parallel_fill(dev, [&](std::size_t i) {
    auto k = m.locate(pts[i]);
    if (!k) return std::numeric_limits<double>::infinity();
    return h2_distance(m.eval_in(*k, pts[i]), as_vec(lift_eval(lift, as_point(pts[i]))));
  });
  ArgMax a = parallel_argmax(dev.size(), [&](std::size_t i) { return dev[i]; });
  if (!a.found()) return {};
  return {a.value, pts[a.index]};
}

}  // namespace

TileApprox pl_approximate_tile(const LiftedMap& lift, const TileId& tile, int density, double collar_width) {
  if (lift.boundary.dimension() != 1 || lift.boundary.heisenberg())
    throw InputError("pl_approximate_tile: the pipeline works over the real line");
  if (density < 1) throw InputError("pl_approximate_tile: density must be positive");
  TileRect r = tile_rect(tile, collar_width);
  // same spacing as the tile's own cells, so dyadic points (where the lift
  // may have a kink, x = 0 for power maps) are always vertices
  const int k = static_cast<int>(std::ceil(collar_width * density - 1e-9));
  const int n = density + 2 * k;
  const double h = (r.x1 - r.x0) / density;
  const double X0 = r.x0 - k * h, X1 = r.x1 + k * h, T0 = r.t0 - k * h, T1 = r.t1 + k * h;
  if (!(T0 > 0.0)) throw InputError("pl_approximate_tile: collar reaches t = 0");

  TileApprox out;
  out.tile = tile;
  out.density = density;
  PLMap2D& m = out.map;
  std::vector<Vec2> verts;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) verts.push_back({X0 + i * h, T0 + j * h});
  std::vector<Vec2> img(verts.size());
  parallel_fill(img, [&](std::size_t i) { return as_vec(lift_eval(lift, as_point(verts[i]))); });
  for (std::size_t i = 0; i < verts.size(); ++i) m.add_vertex(verts[i], img[i]);

  PLMap2D::Block b{X0, T0, X1 - X0, T1 - T0, n, n, {}};
  b.cells.resize(static_cast<std::size_t>(n) * n);
  std::vector<int> all;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int k1 = m.add_triangle(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      int k2 = m.add_triangle(id(i, j), id(i + 1, j + 1), id(i, j + 1));
      b.cells[static_cast<std::size_t>(j) * n + i] = {k1, k2};
      all.push_back(k1);
      all.push_back(k2);
    }
  m.add_block(std::move(b));
  Deviation d = max_deviation(m, all, lift);
  out.deviation = d.value;
  out.witness = d.where;
  return out;
}

// ---------------------------------------------------------------- window mesh

Patchwork window_mesh(const std::vector<TileId>& tiles, int density) {
  if (tiles.empty()) throw InputError("window_mesh: no tiles");
  if (density < 1) throw InputError("window_mesh: density must be positive");
  int n_min = tiles.front().layer;
  double x_lo = std::numeric_limits<double>::infinity();
  for (const auto& q : tiles) {
    if (q.gamma.size() != 1) throw InputError("window_mesh: expects dyadic tiles of H^2");
    n_min = std::min(n_min, q.layer);
  }
  for (const auto& q : tiles) x_lo = std::min(x_lo, std::ldexp(static_cast<double>(q.gamma(0)), q.layer));
  // all coordinates are integer multiples of u
  const double u = std::ldexp(1.0, n_min) / density;

  Patchwork pw;
  pw.tiles = tiles;
  std::sort(pw.tiles.begin(), pw.tiles.end());
  std::map<std::pair<std::int64_t, std::int64_t>, int> ids;
  auto vid = [&](std::int64_t X, std::int64_t T) {
    auto [it, fresh] = ids.try_emplace({X, T}, 0);
    if (fresh) it->second = pw.mesh.add_vertex({x_lo + static_cast<double>(X) * u, static_cast<double>(T) * u});
    return it->second;
  };
  const std::int64_t T_bottom = density;
  for (const auto& q : pw.tiles) {
    const std::int64_t s = std::int64_t(1) << (q.layer - n_min);
    const std::int64_t X0 = std::llround((std::ldexp(static_cast<double>(q.gamma(0)), q.layer) - x_lo) / u);
    const std::int64_t T0 = static_cast<std::int64_t>(density) * s;
    const bool split = q.layer > n_min;
    double w = std::ldexp(1.0, q.layer);
    PLMap2D::Block b{std::ldexp(static_cast<double>(q.gamma(0)), q.layer), w, w, w, density, density, {}};
    b.cells.resize(static_cast<std::size_t>(density) * density);
    std::set<int> tv;
    for (int j = 0; j < density; ++j)
      for (int i = 0; i < density; ++i) {
        std::int64_t X = X0 + i * s, T = T0 + j * s;
        int bl = vid(X, T), br = vid(X + s, T), tr = vid(X + s, T + s), tl = vid(X, T + s);
        auto& cell = b.cells[static_cast<std::size_t>(j) * density + i];
        if (j == 0 && split) {
          int bm = vid(X + s / 2, T);
          cell = {pw.mesh.add_triangle(bl, bm, tl), pw.mesh.add_triangle(bm, tr, tl), pw.mesh.add_triangle(bm, br, tr)};
          tv.insert(bm);
        } else {
          cell = {pw.mesh.add_triangle(bl, br, tr), pw.mesh.add_triangle(bl, tr, tl)};
        }
        tv.insert({bl, br, tr, tl});
      }
    std::size_t bi = pw.mesh.add_block(std::move(b));
    pw.mesh.index_block(bi, dyadic_key(q.layer, q.gamma(0)));
    pw.tile_vertices.emplace_back(tv.begin(), tv.end());
  }
  pw.placed.assign(pw.mesh.vertices().size(), 0);
  pw.vertex_bottom.assign(pw.mesh.vertices().size(), 0);
  for (const auto& [key, v] : ids)
    if (key.second == T_bottom) pw.vertex_bottom[static_cast<std::size_t>(v)] = 1;
  return pw;
}

BlendResult blend_collar(Patchwork& pw, const TileApprox& next, const TileRect& rect) {
  BlendResult res;
  auto& img = pw.mesh.images();
  const auto& verts = pw.mesh.vertices();
  std::vector<char> touched(verts.size(), 0);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    if (!rect.in_enlarged(verts[v])) continue;
    auto val = next.map.eval(verts[v]);
    if (!val) throw InternalError("blend_collar: tile approximant does not cover its enlarged tile");
    double phi = rect.ramp(verts[v]);
    Vec2 out = pw.placed[v] ? Vec2((1.0 - phi) * img[v] + phi * *val) : *val;
    if (!pw.placed[v] || out != img[v]) ++res.vertices_changed;
    img[v] = out;
    pw.placed[v] = 1;
    touched[v] = 1;
  }
  const auto& tris = pw.mesh.triangles();
  for (std::size_t k = 0; k < tris.size(); ++k) {
    const auto& t = tris[k];
    if (!(touched[t[0]] || touched[t[1]] || touched[t[2]])) continue;
    if (!(pw.placed[t[0]] && pw.placed[t[1]] && pw.placed[t[2]])) continue;
    if (!(pw.mesh.image_signed_area(static_cast<int>(k)) > 0.0)) {
      res.ok = false;
      if (res.degenerate_triangle < 0) res.degenerate_triangle = static_cast<int>(k);
    }
  }
  return res;
}

// ---------------------------------------------------------------- checks

double seam_discontinuity(const PLMap2D& map) {
  std::map<std::pair<int, int>, std::vector<int>> edges;
  const auto& tris = map.triangles();
  for (std::size_t k = 0; k < tris.size(); ++k)
    for (int e = 0; e < 3; ++e) {
      int a = tris[k][e], b = tris[k][(e + 1) % 3];
      edges[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(k));
    }
  double worst = 0.0;
  for (const auto& [e, ks] : edges) {
    if (ks.size() != 2) continue;
    for (double l : {0.25, 0.5, 0.75}) {
      Vec2 p = (1 - l) * map.vertices()[e.first] + l * map.vertices()[e.second];
      worst = std::max(worst, (map.eval_in(ks[0], p) - map.eval_in(ks[1], p)).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

std::size_t count_t_junctions(const PLMap2D& map, double x0, double x1, double t0, double t1) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : map.triangles())
    for (int e = 0; e < 3; ++e) ++count[{std::min(t[e], t[(e + 1) % 3]), std::max(t[e], t[(e + 1) % 3])}];
  std::size_t bad = 0;
  const auto& V = map.vertices();
  auto on = [](double a, double b) { return a == b; };
  for (const auto& [e, c] : count) {
    if (c > 2) ++bad;
    if (c != 1) continue;
    const Vec2 &a = V[e.first], &b = V[e.second];
    bool outer = (on(a.x(), x0) && on(b.x(), x0)) || (on(a.x(), x1) && on(b.x(), x1)) ||
                 (on(a.y(), t0) && on(b.y(), t0)) || (on(a.y(), t1) && on(b.y(), t1));
    if (!outer) ++bad;
  }
  return bad;
}

namespace {

std::vector<std::pair<Point, Point>> covered_pairs(const PLMap2D& map, double scale, const Sampler& sampler) {
  auto pairs = local_pairs(SpaceHandle::half_space_real(1), sampler, scale);
  std::vector<std::pair<Point, Point>> out;
  for (auto& pq : pairs)
    if (map.locate(as_vec(pq.first)) && map.locate(as_vec(pq.second))) out.push_back(std::move(pq));
  return out;
}

PointMap pl_as_map(const PLMap2D& map) {
  return [&map](const Point& p) {
    auto v = map.eval(as_vec(p));
    if (!v) throw DomainError("PL map evaluated outside its mesh");
    return as_point(*v);
  };
}

}  // namespace

LocalBilip measure_bilipschitz(const PLMap2D& map, double scale, const Sampler& sampler) {
  auto h2 = SpaceHandle::half_space_real(1);
  return measure_ratios(h2, h2, pl_as_map(map), covered_pairs(map, scale, sampler), scale);
}

std::vector<LocalBilip> measure_bilipschitz(const PLMap2D& map, const std::vector<double>& scales,
                                            const Sampler& sampler) {
  std::vector<LocalBilip> out;
  for (double s : scales) out.push_back(measure_bilipschitz(map, s, sampler));
  return out;
}

PlaneMap plane_map(const PLMap2D& map) {
  return [&map](const Vec2& p) { return map.eval(p); };
}

PlaneMap plane_map(const LiftedMap& lift) {
  return [lift](const Vec2& p) -> std::optional<Vec2> { return as_vec(lift_eval(lift, as_point(p))); };
}

LocalBilip directional_extremes(const PlaneMap& map, const std::vector<Point>& anchors, double scale, int lengths) {
  if (!(scale > 0.0)) throw InputError("directional_extremes: scale must be positive");
  if (lengths < 1) throw InputError("directional_extremes: need at least one length");
  struct Best {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    Vec2 lo_p, lo_q, hi_p, hi_q;
    std::size_t pairs = 0;
  };
  std::vector<Best> per(anchors.size());
  const int dirs = 64;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  parallel_fill(per, [&](std::size_t i) {
    Best b;
    const Vec2 p = as_vec(anchors[i]);
    auto fp = map(p);
    if (!fp) return b;
    for (int l = 0; l < lengths; ++l) {
      // hyperbolic circle of radius r about p
      const double r = lengths == 1 ? scale : scale * std::pow(1e-3, 1.0 - double(l) / (lengths - 1));
      auto end = [&](double th) {
        return Vec2{p.x() + p.y() * std::sinh(r) * std::cos(th), p.y() * std::cosh(r) + p.y() * std::sinh(r) * std::sin(th)};
      };
      auto ratio = [&](double th) -> std::optional<double> {
        Vec2 q = end(th);
        auto fq = map(q);
        if (!fq) return std::nullopt;
        return h2_distance(*fp, *fq) / h2_distance(p, q);
      };
      auto note = [&](double th, double v) {
        ++b.pairs;
        if (v < b.lo) b.lo = v, b.lo_p = p, b.lo_q = end(th);
        if (v > b.hi) b.hi = v, b.hi_p = p, b.hi_q = end(th);
      };
      int klo = -1, khi = -1;
      double vlo = std::numeric_limits<double>::infinity(), vhi = -1.0;
      for (int k = 0; k < dirs; ++k) {
        double th = 2 * kPi * k / dirs;
        auto v = ratio(th);
        if (!v) continue;
        note(th, *v);
        if (*v < vlo) vlo = *v, klo = k;
        if (*v > vhi) vhi = *v, khi = k;
      }
      // golden-section within one sweep step of the best direction; sign
      // flips the search between min and max
      auto refine = [&](int k, double sign) {
        double a = 2 * kPi * (k - 1) / dirs, c = 2 * kPi * (k + 1) / dirs;
        auto f = [&](double th) {
          auto v = ratio(th);
          if (!v) return std::numeric_limits<double>::infinity();
          note(th, *v);
          return sign * *v;
        };
        double x1 = c - g * (c - a), x2 = a + g * (c - a), f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 40; ++it) {
          if (f1 < f2) {
            c = x2, x2 = x1, f2 = f1, x1 = c - g * (c - a), f1 = f(x1);
          } else {
            a = x1, x1 = x2, f1 = f2, x2 = a + g * (c - a), f2 = f(x2);
          }
        }
      };
      if (klo >= 0) refine(klo, 1.0);
      if (khi >= 0) refine(khi, -1.0);
    }
    return b;
  });
  LocalBilip out;
  out.scale = scale;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = 0.0;
  for (const Best& b : per) {
    out.pairs += b.pairs;
    if (b.pairs == 0) continue;
    if (b.lo < out.min_ratio) out.min_ratio = b.lo, out.min_witness = {{as_point(b.lo_p), as_point(b.lo_q)}, b.lo};
    if (b.hi > out.max_ratio) out.max_ratio = b.hi, out.max_witness = {{as_point(b.hi_p), as_point(b.hi_q)}, b.hi};
  }
  if (out.pairs == 0) {
    out.min_ratio = out.max_ratio = 1.0;
    return out;
  }
  out.constant = std::max(out.max_ratio, out.min_ratio > 0.0 ? 1.0 / out.min_ratio : std::numeric_limits<double>::infinity());
  return out;
}

// ---------------------------------------------------------------- run

PipelineResult run_pipeline(const BoundaryMap& f, const PipelineConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  cfg.validate();
  if (!f.monotone_1d()) throw InputError("run_pipeline: the boundary map must be a map of the real line");
  const LiftedMap lift{f, {cfg.ball_samples, true}};
  const auto h2 = SpaceHandle::half_space_real(1);
  const auto spec = StackedTilingSpec::dyadic(1);

  PipelineResult res;
  ApproxReport& rep = res.report;
  rep.blending_note =
      "collar blending (partition of unity) stands in for the Sullivan extension step; "
      "bi-Lipschitz behaviour is measured on samples, not guaranteed";
  auto fail = [&](const std::string& stage, const std::string& msg) {
    if (rep.stage.empty()) rep.stage = stage;
    rep.messages.push_back(stage + ": " + msg);
  };

  // tiles and colors
  Point lo(1), hi(1);
  lo << cfg.x_min;
  hi << cfg.x_max;
  auto tiles = tiles_in_window(spec, cfg.layer_min, cfg.layer_max, {lo, hi});
  TileGraph graph = greedy_coloring(adjacency_graph(spec, tiles));
  if (!graph.coloring_proper()) throw InternalError("run_pipeline: coloring is not proper");
  rep.color_count = graph.color_count();
  rep.epsilon_ladder = cfg.epsilon_ladder(rep.color_count);
  const auto& gt = graph.tiles();
  const auto& color = graph.coloring();

  // normalization of f on every tile
  for (const auto& q : gt) {
    const double w = std::ldexp(1.0, q.layer);
    const double g = static_cast<double>(q.gamma(0));
    PointMap fq = [&, w, g](const Point& x) { return f(Point::Constant(1, w * (x(0) + g))); };
    if (normalize_map(spec, fq, Point::Zero(1), Point::Ones(1)).normalized) ++rep.normalized_tiles;
  }
  if (rep.normalized_tiles != gt.size()) fail("normalization", "some tile maps did not normalize into K");

  // same-colored enlarged tiles must stay apart
  std::vector<TileRect> rects;
  for (const auto& q : gt) rects.push_back(tile_rect(q, cfg.collar_width));
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = i + 1; j < gt.size(); ++j)
      if (color[i] == color[j] && rects[i].enlarged_meets(rects[j])) {
        rep.collar_overlap = true;
        std::ostringstream os;
        os << "enlarged tiles " << gt[i] << " and " << gt[j] << " share color " << color[i];
        fail("collar", os.str());
      }

  // base approximation, density doubled until every tile meets eps_1
  const double eps1 = rep.epsilon_ladder.front();
  int density = cfg.grid_density;
  std::vector<TileApprox> approx;
  for (rep.refinements = 0;; ++rep.refinements) {
    approx.clear();
    for (const auto& q : gt) approx.push_back(pl_approximate_tile(lift, q, density, cfg.collar_width));
    bool ok = std::all_of(approx.begin(), approx.end(), [&](const TileApprox& a) { return a.deviation <= eps1; });
    if (ok || rep.refinements == cfg.max_refinements) {
      if (!ok) {
        auto worst = std::max_element(approx.begin(), approx.end(),
                                      [](const TileApprox& a, const TileApprox& b) { return a.deviation < b.deviation; });
        std::ostringstream os;
        os << "tile " << worst->tile << " deviation " << worst->deviation << " > " << eps1 << " at density " << density
           << ", witness (" << worst->witness.x() << ", " << worst->witness.y() << ")";
        fail("approximation", os.str());
      }
      break;
    }
    density *= 2;
  }
  rep.density_used = density;

  // colors in order, blending each into the patchwork
  res.patchwork = window_mesh(gt, density);
  Patchwork& pw = res.patchwork;
  std::vector<std::vector<int>> tile_tris(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (const auto& cell : pw.mesh.blocks()[i].cells) tile_tris[i].insert(tile_tris[i].end(), cell.begin(), cell.end());
  // window_mesh sorts its tiles; the graph's tiles are sorted too
  if (pw.tiles != gt) throw InternalError("run_pipeline: tile order mismatch");

  rep.tiles.resize(gt.size());
  std::vector<char> done(gt.size(), 0);
  for (int c = 0; c < rep.color_count; ++c) {
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (color[i] != c) continue;
      for (std::size_t nb : graph.adjacency()[i])
        if (done[nb] && color[nb] >= c) fail("schedule", "a placed neighbor has a color not below the current one");
      BlendResult b = blend_collar(pw, approx[i], rects[i]);
      if (!b.ok) fail("blend", "degenerate image triangle " + std::to_string(b.degenerate_triangle));
      done[i] = 1;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (!done[i]) continue;
      double d = max_deviation(pw.mesh, tile_tris[i], lift).value;
      if (color[i] == c) rep.tiles[i].placed_deviation = d;
      worst = std::max(worst, d);
    }
    rep.ladder_deviation.push_back(worst);
    if (worst > rep.epsilon_ladder[static_cast<std::size_t>(c)]) {
      std::ostringstream os;
      os << "after color " << c + 1 << " deviation " << worst << " > " << rep.epsilon_ladder[static_cast<std::size_t>(c)];
      fail("ladder", os.str());
    }
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    rep.tiles[i].tile = gt[i];
    rep.tiles[i].color = color[i];
    rep.tiles[i].budget = rep.epsilon_ladder[static_cast<std::size_t>(color[i])];
    rep.tiles[i].approx_deviation = approx[i].deviation;
    rep.tiles[i].final_deviation = max_deviation(pw.mesh, tile_tris[i], lift).value;
  }

  // mesh checks
  const double t_lo = std::ldexp(1.0, cfg.layer_min), t_hi = std::ldexp(1.0, cfg.layer_max + 1);
  rep.vertex_count = pw.mesh.vertices().size();
  rep.triangle_count = pw.mesh.triangles().size();
  rep.seam_max = seam_discontinuity(pw.mesh);
  rep.t_junctions = count_t_junctions(pw.mesh, cfg.x_min, cfg.x_max, t_lo, t_hi);
  for (std::size_t k = 0; k < rep.triangle_count; ++k) {
    if (!(pw.mesh.signed_area(static_cast<int>(k)) > 0.0)) ++rep.degenerate_triangles;
    if (!(pw.mesh.image_signed_area(static_cast<int>(k)) > 0.0)) {
      if (rep.orientation_failures++ == 0) rep.orientation_witness = static_cast<int>(k);
    }
  }
  if (rep.seam_max > 1e-12) fail("seam", "evaluation jumps across a shared edge");
  if (rep.t_junctions) fail("mesh", std::to_string(rep.t_junctions) + " non-conforming edges");
  if (rep.degenerate_triangles) fail("mesh", "degenerate domain triangles");
  if (rep.orientation_failures)
    fail("orientation", std::to_string(rep.orientation_failures) + " image triangles not positively oriented");
  if (std::find(pw.placed.begin(), pw.placed.end(), 0) != pw.placed.end())
    throw InternalError("run_pipeline: vertex left unplaced");

  // bottom layer against f
  for (std::size_t v = 0; v < rep.vertex_count; ++v) {
    if (!pw.vertex_bottom[v]) continue;
    const Vec2& p = pw.mesh.vertices()[v];
    Vec2 F = pw.mesh.images()[v];
    rep.boundary_x_max = std::max(rep.boundary_x_max, std::abs(F.x() - f(Point::Constant(1, p.x()))(0)));
    rep.boundary_hyperbolic_max =
        std::max(rep.boundary_hyperbolic_max, h2_distance(F, as_vec(lift_eval(lift, as_point(p)))));
  }
  if (rep.boundary_x_max > cfg.epsilon || rep.boundary_hyperbolic_max > cfg.epsilon)
    fail("boundary", "bottom layer is farther than epsilon from the lift");

  // injectivity: eps = 1/3 min d(lift z, lift w) over d(z, w) = r
  Region region{{{cfg.x_min, cfg.x_max, false}, {t_lo, t_hi, true}}};
  {
    auto zs = sample_points({region, 400, derive_seed(cfg.seed, 1)});
    const int dirs = 64;
    std::vector<double> m(zs.size());
    const double r = cfg.r_scale;
    parallel_fill(m, [&](std::size_t i) {
      Vec2 z = as_vec(zs[i]);
      Vec2 fz = as_vec(lift_eval(lift, zs[i]));
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < dirs; ++k) {
        double th = 2 * kPi * k / dirs;
        Vec2 w{z.x() + z.y() * std::sinh(r) * std::cos(th), z.y() * std::cosh(r) + z.y() * std::sinh(r) * std::sin(th)};
        best = std::min(best, h2_distance(fz, as_vec(lift_eval(lift, as_point(w)))));
      }
      return best;
    });
    rep.injectivity_epsilon = *std::min_element(m.begin(), m.end()) / 3.0;
  }
  auto pts = sample_points({region, cfg.injectivity_samples, derive_seed(cfg.seed, 2)});
  std::vector<Point> imgs(pts.size());
  PointMap F = pl_as_map(pw.mesh);
  parallel_fill(imgs, [&](std::size_t i) { return F(pts[i]); });
  rep.injectivity = injectivity_scale_check(h2, h2, pts, imgs, cfg.r_scale, rep.injectivity_epsilon);
  if (!rep.injectivity.pass) fail("injectivity", "sampled pair violates scale-r injectivity");

  // distortion at r/4, r, 4r against the raw lift on the same pairs
  Sampler ds{region, cfg.distortion_samples, derive_seed(cfg.seed, 3)};
  PointMap raw = lift_as_map(lift);
  for (double s : {cfg.r_scale / 4, cfg.r_scale, 4 * cfg.r_scale}) {
    auto pairs = covered_pairs(pw.mesh, s, ds);
    rep.bilipschitz.push_back({s, measure_ratios(h2, h2, F, pairs, s), measure_ratios(h2, h2, raw, pairs, s)});
  }
  rep.qi = fit_qi_constants(h2, h2, F, ds);

  // near the critical line: anchors on it and in the band around it
  {
    Region band{{{cfg.critical_x - cfg.critical_band, cfg.critical_x + cfg.critical_band, false}, {t_lo, t_hi, true}}};
    auto anchors = sample_points({band, cfg.critical_anchors, derive_seed(cfg.seed, 4)});
    for (std::size_t i = 0; i < anchors.size(); i += 2) anchors[i](0) = cfg.critical_x;
    const double s = cfg.r_scale / 4;
    rep.critical = {s, directional_extremes(plane_map(pw.mesh), anchors, s), directional_extremes(plane_map(lift), anchors, s)};
  }

  rep.success = rep.stage.empty();
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace hypertile
