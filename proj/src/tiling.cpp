#include "hypertile/tiling.hpp"

#include "hypertile/parallel.hpp"
#include "hypertile/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <regex>
#include <set>
#include <sstream>

namespace hypertile {

bool lattice_less(const LatticeVec& a, const LatticeVec& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

namespace {


std::int64_t floor_to_int(double v) { return static_cast<std::int64_t>(std::floor(v)); }

std::int64_t mod2(std::int64_t v) { return ((v % 2) + 2) % 2; }

int log2_exact(std::int64_t v) {
  int k = 0;
  while ((std::int64_t{1} << k) < v) ++k;
  return k;
}

// every integer vector with 0 <= v_i < bound_i, lexicographic
std::vector<LatticeVec> box_points(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi) {
  std::vector<LatticeVec> out;
  const std::size_t n = lo.size();
  for (std::size_t i = 0; i < n; ++i)
    if (hi[i] < lo[i]) return out;
  LatticeVec v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = lo[i];
  while (true) {
    out.push_back(v);
    int i = static_cast<int>(n) - 1;
    while (i >= 0 && v(i) == hi[static_cast<std::size_t>(i)]) {
      v(i) = lo[static_cast<std::size_t>(i)];
      --i;
    }
    if (i < 0) break;
    ++v(i);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- specs

StackedTilingSpec StackedTilingSpec::dyadic(int n) {
  if (n < 1) throw InputError("dyadic: n must be >= 1");
  StackedTilingSpec s;
  s.name_ = "dyadic-euclidean(" + std::to_string(n) + ")";
  s.base_ = SpaceHandle::euclidean(n);
  s.scale_ = LatticeVec::Constant(n, 2);
  s.gamma_prime_ = box_points(std::vector<std::int64_t>(static_cast<std::size_t>(n), 0),
                              std::vector<std::int64_t>(static_cast<std::size_t>(n), 1));
  s.compute_neighbors();
  return s;
}

StackedTilingSpec StackedTilingSpec::twisted(std::vector<int> lambda) {
  if (lambda.empty()) throw InputError("twisted: empty lambda");
  for (int l : lambda)
    if (l < 1 || l > 20) throw InputError("twisted: lambda entries must be in [1, 20]");
  StackedTilingSpec s;
  std::ostringstream nm;
  nm << "twisted(";
  for (std::size_t i = 0; i < lambda.size(); ++i) nm << (i ? "," : "") << lambda[i];
  nm << ")";
  s.name_ = nm.str();
  s.base_ = SpaceHandle::twisted(lambda);
  s.scale_.resize(static_cast<Eigen::Index>(lambda.size()));
  std::vector<std::int64_t> lo(lambda.size(), 0), hi(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    s.scale_(static_cast<Eigen::Index>(i)) = std::int64_t{1} << lambda[i];
    hi[i] = (std::int64_t{1} << lambda[i]) - 1;
  }
  s.gamma_prime_ = box_points(lo, hi);
  s.compute_neighbors();
  return s;
}

StackedTilingSpec StackedTilingSpec::heisenberg() {
  StackedTilingSpec s;
  s.name_ = "heisenberg";
  s.base_ = SpaceHandle::heisenberg();
  s.lattice_ = LatticeKind::Heisenberg;
  s.scale_.resize(3);
  s.scale_ << 2, 2, 4;
  for (int m2 = 0; m2 <= 1; ++m2)
    for (int m1 = 0; m1 <= 1; ++m1)
      for (int j = 0; j < 4; ++j) {
        LatticeVec g(3);
        g << m1, m2, s.heis_.k[static_cast<std::size_t>(m1 + 2 * m2)] + j;
        s.gamma_prime_.push_back(g);
      }
  std::sort(s.gamma_prime_.begin(), s.gamma_prime_.end(), lattice_less);
  s.compute_neighbors();
  return s;
}

StackedTilingSpec StackedTilingSpec::heisenberg_box() {
  StackedTilingSpec s = heisenberg();
  s.name_ = "heisenberg-box";
  s.heis_.flat = true;
  s.gamma_prime_ = box_points({0, 0, 0}, {1, 1, 3});
  s.compute_neighbors();
  return s;
}

void StackedTilingSpec::compute_neighbors() {
  if (lattice_ == LatticeKind::Heisenberg) {
    neighbors_ = heis_neighbor_set(heis_);
  } else {
    const auto n = static_cast<std::size_t>(dimension());
    neighbors_.clear();
    for (auto& v : box_points(std::vector<std::int64_t>(n, -1), std::vector<std::int64_t>(n, 1)))
      if (!v.isZero()) neighbors_.push_back(v);
  }
  set_gamma_prime(gamma_prime_);
}

void StackedTilingSpec::set_gamma_prime(std::vector<LatticeVec> g) {
  gamma_prime_ = std::move(g);
  steps_.clear();
  for (const auto& gp : gamma_prime_) {
    steps_.push_back(gp);
    for (const auto& nu : neighbors_) steps_.push_back(multiply(gp, nu));
  }
  std::sort(steps_.begin(), steps_.end(), lattice_less);
  steps_.erase(std::unique(steps_.begin(), steps_.end()), steps_.end());
}

StackedTilingSpec builtin_spec(const std::string& name) {
  std::smatch m;
  static const std::regex dy(R"(\s*dyadic(?:-euclidean)?\(\s*(\d+)\s*\)\s*)");
  static const std::regex tw(R"(\s*twisted\(\s*([\d\s,]+)\)\s*)");
  if (std::regex_match(name, m, dy)) return StackedTilingSpec::dyadic(std::stoi(m[1]));
  if (std::regex_match(name, m, tw)) {
    std::vector<int> lambda;
    std::stringstream ss(m[1].str());
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.find_first_not_of(" \t") == std::string::npos) throw InputError("twisted: empty lambda entry");
      lambda.push_back(std::stoi(tok));
    }
    return StackedTilingSpec::twisted(lambda);
  }
  if (name == "heisenberg") return StackedTilingSpec::heisenberg();
  if (name == "heisenberg-box") return StackedTilingSpec::heisenberg_box();
  throw InputError("unsupported tiling spec '" + name + "'");
}

// ---------------------------------------------------------------- group

LatticeVec StackedTilingSpec::multiply(const LatticeVec& a, const LatticeVec& b) const {
  LatticeVec c = a + b;
  if (lattice_ == LatticeKind::Heisenberg) c(2) += 2 * (a(1) * b(0) - a(0) * b(1));
  return c;
}

LatticeVec StackedTilingSpec::conj(const LatticeVec& g, int times) const {
  if (times < 0) {
    auto r = unconj(g, -times);
    if (!r) throw DomainError("conj: element not in alpha^k Gamma alpha^-k");
    return *r;
  }
  LatticeVec out = g;
  for (int t = 0; t < times; ++t) out = out.cwiseProduct(scale_);
  return out;
}

std::optional<LatticeVec> StackedTilingSpec::unconj(const LatticeVec& g, int times) const {
  if (times < 0) return conj(g, -times);
  LatticeVec out = g;
  for (int t = 0; t < times; ++t)
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (out(i) % scale_(i) != 0) return std::nullopt;
      out(i) /= scale_(i);
    }
  return out;
}

std::vector<LatticeVec> StackedTilingSpec::generators() const {
  std::vector<LatticeVec> out;
  for (int i = 0; i < dimension(); ++i) out.push_back(LatticeVec::Unit(dimension(), i));
  return out;
}

Point StackedTilingSpec::act(const LatticeVec& g, const Point& x) const {
  if (x.size() != dimension()) throw InputError("act: dimension mismatch");
  Point y = x + g.cast<double>();
  if (lattice_ == LatticeKind::Heisenberg)
    y(2) += 2.0 * (static_cast<double>(g(1)) * x(0) - static_cast<double>(g(0)) * x(1));
  return y;
}

Point StackedTilingSpec::alpha(const Point& x, int power) const {
  if (x.size() != dimension()) throw InputError("alpha: dimension mismatch");
  Point y = x;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = std::ldexp(x(i), power * log2_exact(scale_(i)));
  return y;
}

// ---------------------------------------------------------------- K

bool StackedTilingSpec::in_domain(const Point& x, double tol) const {
  if (x.size() != dimension()) throw InputError("in_domain: dimension mismatch");
  auto axis_ok = [tol](double v) { return tol > 0.0 ? (v >= -tol && v <= 1.0 + tol) : (v >= 0.0 && v < 1.0); };
  if (lattice_ == LatticeKind::Translation) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!axis_ok(x(i))) return false;
    return true;
  }
  if (!axis_ok(x(0)) || !axis_ok(x(1))) return false;
  auto clamp = [](double v) { return std::min(std::max(v, 0.0), 1.0 - 0x1.0p-53); };
  double c = heis_.height(clamp(x(0)), clamp(x(1)));
  return tol > 0.0 ? (x(2) >= c - tol && x(2) <= c + 1.0 + tol) : (x(2) >= c && x(2) < c + 1.0);
}

LatticeVec StackedTilingSpec::address(const Point& x) const {
  if (x.size() != dimension()) throw InputError("address: dimension mismatch");
  LatticeVec g(dimension());
  if (lattice_ == LatticeKind::Translation) {
    for (Eigen::Index i = 0; i < x.size(); ++i) g(i) = floor_to_int(x(i));
    return g;
  }
  g(0) = floor_to_int(x(0));
  g(1) = floor_to_int(x(1));
  double xp = x(0) - static_cast<double>(g(0)), yp = x(1) - static_cast<double>(g(1));
  double shear = 2.0 * (static_cast<double>(g(1)) * xp - static_cast<double>(g(0)) * yp);
  g(2) = floor_to_int(x(2) - shear - heis_.height(xp, yp));
  return g;
}

Point StackedTilingSpec::domain_center() const {
  Point c = Point::Constant(dimension(), 0.5);
  if (lattice_ == LatticeKind::Heisenberg) c(2) = heis_.height(0.5, 0.5) + 0.5;
  return c;
}

Point StackedTilingSpec::sample_domain(SampleRng& rng) const {
  Point p(dimension());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform();
  if (lattice_ == LatticeKind::Heisenberg) p(2) += heis_.height(p(0), p(1));
  return p;
}

// ---------------------------------------------------------------- verify

namespace {

struct Probe {
  bool bad = false;
  double excess = 0.0;
  Point where;
};

ConditionCheck collect(const std::vector<Probe>& probes) {
  ConditionCheck c;
  c.samples = probes.size();
  for (const auto& p : probes) {
    if (!p.bad) continue;
    ++c.failures;
    if (c.witness.empty() || p.excess > c.worst) {
      c.worst = p.excess;
      c.witness = {p.where};
    }
  }
  c.pass = c.failures == 0;
  return c;
}

}  // namespace

TilingReport verify_stacked_tiling(const StackedTilingSpec& spec, std::size_t sample_count, std::uint64_t seed) {
  TilingReport rep;
  const auto& gp = spec.gamma_prime();
  const double a = spec.alpha_factor();
  if (gp.empty()) {
    rep.covering.pass = rep.containment.pass = false;
    return rep;
  }
  std::vector<Probe> probes(sample_count);

  // gamma' K inside alpha K, to boundary tolerance
  parallel_fill(probes, [&](std::size_t i) {
    SampleRng rng(derive_seed(seed, 4 * i));
    Point x = spec.act(gp[i % gp.size()], spec.sample_domain(rng));
    return Probe{!spec.in_domain(spec.alpha(x, -1), 1e-9), 0.0, x};
  });
  rep.containment = collect(probes);

  // alpha K covered by the gamma' translates, at most one containing each point;
  // and, for all of H, the translates of K around the address
  std::vector<Probe> overlap(sample_count);
  parallel_fill(probes, [&](std::size_t i) {
    SampleRng rng(derive_seed(seed, 4 * i + 1));
    Point y = spec.alpha(spec.sample_domain(rng));
    int hits = 0;
    for (const auto& g : gp)
      if (spec.in_domain(spec.act(spec.inverse(g), y))) ++hits;
    Point z(spec.dimension());
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.uniform(-4.0, 4.0);
    LatticeVec home = spec.address(z);
    int hz = spec.in_domain(spec.act(spec.inverse(home), z)) ? 1 : 0;
    for (const auto& nb : spec.neighbors())
      if (spec.in_domain(spec.act(spec.inverse(spec.multiply(home, nb)), z))) ++hz;
    overlap[i] = Probe{hits > 1 || hz > 1, static_cast<double>(std::max(hits, hz)), hits > 1 ? y : z};
    return Probe{hits == 0 || hz == 0, 1.0, hits == 0 ? y : z};
  });
  rep.covering = collect(probes);
  rep.disjoint = collect(overlap);

  // homothety
  parallel_fill(probes, [&](std::size_t i) {
    SampleRng rng(derive_seed(seed, 4 * i + 2));
    Point x(spec.dimension()), y(spec.dimension());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(-3.0, 3.0);
    for (Eigen::Index k = 0; k < y.size(); ++k) y(k) = rng.uniform(-3.0, 3.0);
    double d = spec.base().distance(x, y);
    double e = std::abs(spec.base().distance(spec.alpha(x), spec.alpha(y)) - a * d);
    double tol = 1e-9 * std::max(1.0, a * d);
    return Probe{e > tol, e, x};
  });
  rep.homothety = collect(probes);

  // alpha gamma alpha^-1 acts as conj(gamma)
  const auto gens = spec.generators();
  parallel_fill(probes, [&](std::size_t i) {
    SampleRng rng(derive_seed(seed, 4 * i + 3));
    Point x(spec.dimension());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(-3.0, 3.0);
    const auto& g = gens[i % gens.size()];
    Point lhs = spec.alpha(spec.act(g, spec.alpha(x, -1)));
    Point rhs = spec.act(spec.conj(g), x);
    double e = (lhs - rhs).cwiseAbs().maxCoeff();
    return Probe{e > 1e-9 * (1.0 + x.cwiseAbs().maxCoeff()), e, x};
  });
  rep.conjugation = collect(probes);
  return rep;
}

// ---------------------------------------------------------------- tiles

std::ostream& operator<<(std::ostream& os, const TileId& t) {
  os << t.layer;
  for (Eigen::Index i = 0; i < t.gamma.size(); ++i) os << ' ' << t.gamma(i);
  return os;
}

namespace {

int layer_of(double t, double a) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("height must be positive and finite");
  int n = static_cast<int>(std::floor(std::log(t) / std::log(a)));
  while (std::pow(a, n) > t) --n;
  while (std::pow(a, n + 1) <= t) ++n;
  return n;
}

Point base_part(const Point& p) { return p.head(p.size() - 1); }

}  // namespace

TileId tile_of(const StackedTilingSpec& spec, const Point& p) {
  if (p.size() != spec.dimension() + 1) throw InputError("tile_of: dimension mismatch");
  int n = layer_of(p(p.size() - 1), spec.alpha_factor());
  return {n, spec.address(spec.alpha(base_part(p), -n))};
}

bool tile_contains(const StackedTilingSpec& spec, const TileId& q, const Point& p, double tol) {
  if (p.size() != spec.dimension() + 1) throw InputError("tile_contains: dimension mismatch");
  const double a = spec.alpha_factor();
  double t = p(p.size() - 1) / std::pow(a, q.layer);
  if (t < 1.0 - tol || t > a * (1.0 + tol)) return false;
  Point k = spec.act(spec.inverse(q.gamma), spec.alpha(base_part(p), -q.layer));
  if (tol > 0.0) return spec.in_domain(k, tol);
  // closed in t: the top face belongs to the tile as well
  return spec.in_domain(k);
}

Point tile_center(const StackedTilingSpec& spec, const TileId& q) {
  Point c(spec.dimension() + 1);
  c.head(spec.dimension()) = spec.alpha(spec.act(q.gamma, spec.domain_center()), q.layer);
  c(spec.dimension()) = std::pow(spec.alpha_factor(), q.layer) * std::sqrt(spec.alpha_factor());
  return c;
}

std::vector<TileId> tiles_in_window(const StackedTilingSpec& spec, int n_min, int n_max, const BaseWindow& w) {
  if (n_min > n_max) throw InputError("tiles_in_window: n_min > n_max");
  const int d = spec.dimension();
  if (w.lo.size() != d || w.hi.size() != d) throw InputError("tiles_in_window: window dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (!(w.hi(i) >= w.lo(i))) return {};  // empty
  std::set<TileId> out;
  for (int n = n_min; n <= n_max; ++n) {
    Point lo = spec.alpha(w.lo, -n), hi = spec.alpha(w.hi, -n);
    std::vector<std::int64_t> mlo(static_cast<std::size_t>(d)), mhi(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      auto ui = static_cast<std::size_t>(i);
      mlo[ui] = floor_to_int(lo(i));
      mhi[ui] = hi(i) > lo(i) ? static_cast<std::int64_t>(std::ceil(hi(i))) - 1 : mlo[ui];
    }
    if (spec.lattice() == LatticeKind::Translation) {
      for (auto& g : box_points(mlo, mhi)) out.insert({n, g});
      continue;
    }
    // Heisenberg: walk the zeta cells, sample each overlap and read off the
    // fiber stack over every sample exactly.
    const double ulo = lo(2), uhi = hi(2);
    const bool upoint = !(uhi > ulo);
    const int G = 17;
    for (std::int64_t m1 = mlo[0]; m1 <= mhi[0]; ++m1)
      for (std::int64_t m2 = mlo[1]; m2 <= mhi[1]; ++m2) {
        double a0[2], a1[2];
        bool pt[2];
        const std::int64_t mm[2] = {m1, m2};
        for (int i = 0; i < 2; ++i) {
          pt[i] = !(hi(i) > lo(i));
          a0[i] = std::max(lo(i) - static_cast<double>(mm[i]), 0.0);
          a1[i] = std::min(hi(i) - static_cast<double>(mm[i]), 1.0);
        }
        for (int jx = 0; jx < (pt[0] ? 1 : G); ++jx)
          for (int jy = 0; jy < (pt[1] ? 1 : G); ++jy) {
            double s[2];
            const int j[2] = {jx, jy};
            for (int i = 0; i < 2; ++i) {
              if (pt[i]) s[i] = a0[i];
              else if (j[i] == G - 1) s[i] = a1[i] - (a1[i] - a0[i]) * 1e-9;
              else s[i] = a0[i] + (a1[i] - a0[i]) * j[i] / (G - 1);
            }
            double base = 2.0 * (static_cast<double>(m2) * s[0] - static_cast<double>(m1) * s[1]) +
                          spec.heis_domain().height(s[0], s[1]);
            std::int64_t k0 = floor_to_int(ulo - base);
            std::int64_t k1 = upoint ? k0 : static_cast<std::int64_t>(std::ceil(uhi - base)) - 1;
            for (std::int64_t m3 = k0; m3 <= k1; ++m3) {
              LatticeVec g(3);
              g << m1, m2, m3;
              out.insert({n, g});
            }
          }
      }
  }
  return {out.begin(), out.end()};
}

std::vector<TileId> tile_neighbors(const StackedTilingSpec& spec, const TileId& q) {
  std::vector<TileId> out;
  out.reserve(spec.neighbors().size() + 2 * spec.layer_steps().size());
  for (const auto& nu : spec.neighbors()) out.push_back({q.layer, spec.multiply(q.gamma, nu)});
  const LatticeVec down = spec.conj(q.gamma);
  for (const auto& step : spec.layer_steps()) {
    // layer above: q.gamma = conj(g2) step
    if (auto g2 = spec.unconj(spec.multiply(q.gamma, spec.inverse(step)))) out.push_back({q.layer + 1, *g2});
    // layer below: g1 = conj(q.gamma) step
    out.push_back({q.layer - 1, spec.multiply(down, step)});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool tiles_intersect(const StackedTilingSpec& spec, const TileId& a, const TileId& b) {
  if (a == b) return false;
  if (std::abs(a.layer - b.layer) > 1) return false;
  auto nb = tile_neighbors(spec, a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

// ---------------------------------------------------------------- graph

TileGraph::TileGraph(std::vector<TileId> tiles, std::vector<std::vector<std::size_t>> adjacency)
    : tiles_(std::move(tiles)), adj_(std::move(adjacency)) {
  if (adj_.size() != tiles_.size()) throw InputError("TileGraph: adjacency size mismatch");
  for (std::size_t i = 0; i < tiles_.size(); ++i)
    if (!index_.emplace(tiles_[i], i).second) throw InputError("TileGraph: duplicate tile");
  for (auto& a : adj_) std::sort(a.begin(), a.end());
  for (std::size_t i = 0; i < adj_.size(); ++i)
    for (std::size_t j : adj_[i]) {
      if (j >= tiles_.size() || j == i) throw InputError("TileGraph: bad edge");
      if (!std::binary_search(adj_[j].begin(), adj_[j].end(), i))
        throw InputError("TileGraph: adjacency not symmetric");
    }
}

std::vector<std::pair<std::size_t, std::size_t>> TileGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < adj_.size(); ++i)
    for (std::size_t j : adj_[i])
      if (i < j) e.emplace_back(i, j);
  return e;
}

std::size_t TileGraph::edge_count() const {
  std::size_t s = 0;
  for (const auto& a : adj_) s += a.size();
  return s / 2;
}

std::size_t TileGraph::max_degree() const {
  std::size_t m = 0;
  for (const auto& a : adj_) m = std::max(m, a.size());
  return m;
}

std::optional<std::size_t> TileGraph::index_of(const TileId& t) const {
  auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int TileGraph::color_count() const {
  int m = -1;
  for (int c : colors_) m = std::max(m, c);
  return m + 1;
}

bool TileGraph::coloring_proper() const {
  if (colors_.size() != tiles_.size()) return false;
  for (std::size_t i = 0; i < adj_.size(); ++i)
    for (std::size_t j : adj_[i])
      if (colors_[i] == colors_[j]) return false;
  return true;
}

void TileGraph::set_coloring(std::vector<int> colors) {
  if (colors.size() != tiles_.size()) throw InputError("set_coloring: size mismatch");
  colors_ = std::move(colors);
  if (!coloring_proper()) {
    colors_.clear();
    throw InternalError("set_coloring: monochromatic edge");
  }
}

TileGraph adjacency_graph(const StackedTilingSpec& spec, std::vector<TileId> tiles) {
  std::sort(tiles.begin(), tiles.end());
  if (std::adjacent_find(tiles.begin(), tiles.end()) != tiles.end())
    throw InputError("adjacency_graph: tiles must be distinct");
  std::map<TileId, std::size_t> idx;
  for (std::size_t i = 0; i < tiles.size(); ++i) idx.emplace(tiles[i], i);
  std::vector<std::vector<std::size_t>> adj(tiles.size());
  for (std::size_t i = 0; i < tiles.size(); ++i)
    for (const auto& nb : tile_neighbors(spec, tiles[i])) {
      auto it = idx.find(nb);
      if (it != idx.end()) adj[i].push_back(it->second);
    }
  return TileGraph(std::move(tiles), std::move(adj));
}

std::vector<int> graph_distances_from(const TileGraph& g, std::size_t source) {
  std::vector<int> dist(g.tiles().size(), kUnreachable);
  if (source >= dist.size()) throw InputError("graph_distances_from: bad source");
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : g.adjacency()[v])
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

int graph_distance(const TileGraph& g, const TileId& a, const TileId& b) {
  auto ia = g.index_of(a), ib = g.index_of(b);
  if (!ia || !ib) throw InputError("graph_distance: tile not in graph");
  return graph_distances_from(g, *ia)[*ib];
}

std::vector<std::size_t> bfs_order(const TileGraph& g) {
  const std::size_t n = g.tiles().size();
  std::vector<std::size_t> order;
  std::vector<char> seen(n, 0);
  auto run = [&](std::size_t s) {
    std::deque<std::size_t> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
      std::size_t v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (std::size_t w : g.adjacency()[v])
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
    }
  };
  if (n == 0) return order;
  TileId q0{0, LatticeVec::Zero(g.tiles()[0].gamma.size())};
  run(g.index_of(q0).value_or(0));
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) run(i);
  return order;
}

TileGraph greedy_coloring(TileGraph g) {
  std::vector<int> color(g.tiles().size(), -1);
  std::vector<char> used;
  for (std::size_t v : bfs_order(g)) {
    used.assign(g.adjacency()[v].size() + 1, 0);
    for (std::size_t w : g.adjacency()[v])
      if (color[w] >= 0 && static_cast<std::size_t>(color[w]) < used.size()) used[static_cast<std::size_t>(color[w])] = 1;
    int c = 0;
    while (used[static_cast<std::size_t>(c)]) ++c;
    color[v] = c;
  }
  g.set_coloring(std::move(color));
  return g;
}

TileGraph periodic_coloring(const StackedTilingSpec& spec, TileGraph g) {
  std::vector<int> color(g.tiles().size());
  const int d = spec.dimension();
  for (std::size_t i = 0; i < color.size(); ++i) {
    const auto& t = g.tiles()[i];
    int c = static_cast<int>(mod2(t.layer)) << d;
    for (int k = 0; k < d; ++k) c |= static_cast<int>(mod2(t.gamma(k))) << k;
    color[i] = c;
  }
  g.set_coloring(std::move(color));
  return g;
}

// ---------------------------------------------------------------- Gamma_alpha

// alpha^n h alpha^m beta = alpha^(n+m) (alpha^-m h alpha^m) beta
std::optional<TileId> apply(const StackedTilingSpec& spec, const GammaAlpha& g, const TileId& q) {
  auto h = spec.unconj(g.gamma, q.layer);
  if (!h) return std::nullopt;
  return TileId{g.layer + q.layer, spec.multiply(*h, q.gamma)};
}

// h^-1 alpha^(m-n) beta = alpha^(m-n) (alpha^(n-m) h^-1 alpha^(m-n)) beta
std::optional<TileId> apply_inverse(const StackedTilingSpec& spec, const GammaAlpha& g, const TileId& q) {
  auto h = spec.unconj(spec.inverse(g.gamma), q.layer - g.layer);
  if (!h) return std::nullopt;
  return TileId{q.layer - g.layer, spec.multiply(*h, q.gamma)};
}

Decomposition decompose_tile(const StackedTilingSpec& spec, const TileId& q) {
  const auto& gp = spec.gamma_prime();
  // gamma' in lexicographic order; the first that works is kept
  std::vector<std::size_t> order(gp.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lattice_less(gp[a], gp[b]); });
  for (std::size_t i : order) {
    LatticeVec h = spec.multiply(q.gamma, spec.inverse(gp[i]));
    if (!spec.unconj(h)) continue;  // h must be alpha gamma1 alpha^-1
    Decomposition d;
    d.g = {q.layer, h};
    d.gamma_prime_index = i;
    auto back = apply(spec, d.g, TileId{0, gp[i]});
    if (!back || *back != q) throw InternalError("decompose_tile: g gamma' Q0 != q");
    d.combinatorial_isometry = true;
    for (const auto& nb : tile_neighbors(spec, q))
      if (!apply_inverse(spec, d.g, nb)) {
        d.combinatorial_isometry = false;
        break;
      }
    return d;
  }
  throw InternalError("decompose_tile: no gamma' decomposes the tile");
}

Normalization normalize_map(const StackedTilingSpec& spec, const PointMap& f, const Point& x0, const Point& y0) {
  const auto& base = spec.base();
  double d0 = base.distance(x0, y0);
  if (!(d0 > 0.0)) throw InputError("normalize_map: x0 and y0 must differ");
  Point fx0 = f(x0), fy0 = f(y0);
  double d1 = base.distance(fx0, fy0);
  if (!(d1 > 0.0)) throw DomainError("normalize_map: degenerate map, f(x0) = f(y0)");
  const double a = spec.alpha_factor();
  double r = d1 / d0;
  int k = static_cast<int>(std::floor(std::log(r) / std::log(a)));
  while (std::pow(a, k) > r) --k;
  while (std::pow(a, k + 1) <= r) ++k;
  Normalization out;
  out.n = -k;
  out.gamma = spec.inverse(spec.address(spec.alpha(fx0, out.n)));
  out.fx0 = spec.act(out.gamma, spec.alpha(fx0, out.n));
  out.fy0 = spec.act(out.gamma, spec.alpha(fy0, out.n));
  double dn = base.distance(out.fx0, out.fy0);
  out.normalized = spec.in_domain(out.fx0, 1e-12) && dn >= d0 * (1 - 1e-12) && dn <= a * d0 * (1 + 1e-12);
  return out;
}

void write_edge_list(std::ostream& os, const StackedTilingSpec& spec, const TileGraph& g) {
  os << "# tile graph " << spec.name() << ": " << g.tiles().size() << " tiles, " << g.edge_count()
     << " edges\n# n gamma -- n gamma color color\n";
  auto col = [&](std::size_t i) { return g.colored() ? std::to_string(g.coloring()[i]) : std::string("-"); };
  for (auto [i, j] : g.edges())
    os << g.tiles()[i] << " -- " << g.tiles()[j] << ' ' << col(i) << ' ' << col(j) << '\n';
}

}  // namespace hypertile
