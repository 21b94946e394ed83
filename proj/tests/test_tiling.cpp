#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hypertile/con_space.hpp"
#include "hypertile/tiling.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace hypertile;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

LatticeVec lv(std::initializer_list<std::int64_t> v) {
  LatticeVec g(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (auto x : v) g(i++) = x;
  return g;
}

TileId tile(int n, std::initializer_list<std::int64_t> g) { return {n, lv(g)}; }

BaseWindow box(std::initializer_list<double> lo, std::initializer_list<double> hi) { return {pt(lo), pt(hi)}; }

// closed boxes of a dyadic tile, straight from the definition
struct Box {
  std::vector<double> lo, hi;
};
Box dyadic_box(const TileId& q) {
  Box b;
  double s = std::ldexp(1.0, q.layer);
  for (Eigen::Index i = 0; i < q.gamma.size(); ++i) {
    b.lo.push_back(s * static_cast<double>(q.gamma(i)));
    b.hi.push_back(s * static_cast<double>(q.gamma(i) + 1));
  }
  b.lo.push_back(s);
  b.hi.push_back(2 * s);
  return b;
}
bool boxes_meet(const Box& a, const Box& b) {
  for (std::size_t i = 0; i < a.lo.size(); ++i)
    if (a.hi[i] < b.lo[i] || b.hi[i] < a.lo[i]) return false;
  return true;
}

std::vector<StackedTilingSpec> all_specs() {
  return {StackedTilingSpec::dyadic(1), StackedTilingSpec::dyadic(2), StackedTilingSpec::twisted({1, 2}),
          StackedTilingSpec::heisenberg()};
}

BaseWindow window_for(const StackedTilingSpec& s, double half) {
  Point lo = Point::Constant(s.dimension(), -half), hi = Point::Constant(s.dimension(), half);
  return {lo, hi};
}

}  // namespace

TEST_CASE("builtin specs") {
  CHECK(builtin_spec("dyadic-euclidean(1)").gamma_prime().size() == 2);
  CHECK(builtin_spec("dyadic(2)").gamma_prime().size() == 4);
  CHECK(builtin_spec("dyadic-euclidean(3)").gamma_prime().size() == 8);
  CHECK(builtin_spec("twisted(1,2)").gamma_prime().size() == 8);
  CHECK(builtin_spec("twisted(2, 1, 1)").gamma_prime().size() == 16);
  CHECK(builtin_spec("heisenberg").gamma_prime().size() == 16);
  CHECK(builtin_spec("heisenberg").alpha_factor() == 2.0);
  CHECK(builtin_spec("twisted(1,2)").name() == "twisted(1,2)");
  CHECK_THROWS_AS(builtin_spec("hexagonal"), InputError);
  CHECK_THROWS_AS(builtin_spec("twisted()"), InputError);
  CHECK_THROWS_AS(builtin_spec("dyadic(0)"), InputError);
  CHECK(StackedTilingSpec::dyadic(2).neighbors().size() == 8);
}

TEST_CASE("verify stacked tiling") {
  for (const auto& s : all_specs()) {
    auto r = verify_stacked_tiling(s, 20000, 5);
    INFO(s.name());
    CHECK(r.conforming());
    CHECK(r.covering.samples == 20000);
    CHECK(r.homothety.worst <= 1e-9 * 20);
  }
  // drop one gamma'
  auto d2 = StackedTilingSpec::dyadic(2);
  auto gp = d2.gamma_prime();
  gp.pop_back();
  d2.set_gamma_prime(gp);
  auto bad = verify_stacked_tiling(d2, 4000, 5);
  CHECK_FALSE(bad.covering.pass);
  CHECK(bad.containment.pass);
  REQUIRE(bad.covering.witness.size() == 1);
  const Point& w = bad.covering.witness[0];
  CHECK(w(0) >= 1.0);
  CHECK(w(1) >= 1.0);
  for (const auto& g : gp) CHECK_FALSE(d2.in_domain(d2.act(-g, w)));

  // coordinate box in the Heisenberg group: delta_2 K is not a union of
  // lattice translates of it
  auto hb = verify_stacked_tiling(StackedTilingSpec::heisenberg_box(), 4000, 5);
  CHECK_FALSE(hb.conforming());
  CHECK_FALSE(hb.covering.pass);
  CHECK(hb.homothety.pass);
  CHECK(hb.conjugation.pass);
}

TEST_CASE("heisenberg fundamental domain") {
  const auto s = StackedTilingSpec::heisenberg();
  const auto& dom = s.heis_domain();
  SampleRng rng(11);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 20000; ++i) {
    double x = rng.uniform(), y = rng.uniform();
    int m1 = x >= 0.5, m2 = y >= 0.5;
    double xp = 2 * x - m1, yp = 2 * y - m2;
    double rhs = (dom.height(xp, yp) + 2 * (m2 * xp - m1 * yp) + static_cast<double>(dom.k[m1 + 2 * m2])) / 4;
    CHECK(std::abs(dom.height(x, y) - rhs) <= 1e-14);
    lo = std::min(lo, dom.height(x, y));
    hi = std::max(hi, dom.height(x, y));
  }
  CHECK(lo >= -1.0);
  CHECK(hi <= 1.0);

  // neighbor set: symmetric, without identity, contains the fiber neighbors
  const auto& nb = s.neighbors();
  std::set<LatticeVec, decltype(&lattice_less)> ns(nb.begin(), nb.end(), &lattice_less);
  CHECK(ns.count(lv({0, 0, 1})) == 1);
  CHECK(ns.count(lv({0, 0, 2})) == 0);
  CHECK(ns.count(lv({0, 0, 0})) == 0);
  for (const auto& g : nb) {
    CHECK(ns.count(-g) == 1);
    CHECK(std::abs(g(0)) <= 1);
    CHECK(std::abs(g(1)) <= 1);
  }
  MESSAGE("heisenberg |N| = " << nb.size());
  CHECK(nb.size() == 28);

  // every point sits in exactly one translate of K
  for (int i = 0; i < 5000; ++i) {
    Point p = pt({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-20, 20)});
    LatticeVec g = s.address(p);
    CHECK(s.in_domain(s.act(-g, p)));
    int others = 0;
    for (const auto& n : nb)
      if (s.in_domain(s.act(s.inverse(s.multiply(g, n)), p))) ++others;
    CHECK(others == 0);
  }
}

TEST_CASE("tiles in window") {
  auto d1 = StackedTilingSpec::dyadic(1);
  auto t00 = tiles_in_window(d1, 0, 0, box({0}, {2}));
  REQUIRE(t00.size() == 2);
  CHECK(t00[0] == tile(0, {0}));
  CHECK(t00[1] == tile(0, {1}));
  auto t01 = tiles_in_window(d1, 0, 1, box({0}, {2}));
  REQUIRE(t01.size() == 3);
  CHECK(t01[2] == tile(1, {0}));
  CHECK(tiles_in_window(d1, 0, 0, box({2}, {0})).empty());
  CHECK_THROWS_AS(tiles_in_window(d1, 1, 0, box({0}, {2})), InputError);

  for (const auto& s : all_specs()) {
    Point c = s.domain_center();
    auto one = tiles_in_window(s, 0, 0, {c, c});
    INFO(s.name());
    REQUIRE(one.size() == 1);
    CHECK(one[0] == TileId{0, s.identity()});
  }
  auto tw = StackedTilingSpec::twisted({1, 2});
  CHECK(tiles_in_window(tw, 1, 1, box({0, 0}, {2, 4})).size() == 1);
  CHECK(tiles_in_window(tw, 0, 0, box({0, 0}, {2, 4})).size() == 8);
}

TEST_CASE("tiles cover the window, interiors disjoint") {
  for (const auto& s : all_specs()) {
    INFO(s.name());
    auto w = window_for(s, 2.0);
    auto tiles = tiles_in_window(s, -2, 1, w);
    std::set<TileId> in(tiles.begin(), tiles.end());
    SampleRng rng(3);
    for (int i = 0; i < 1000; ++i) {
      Point p(s.dimension() + 1);
      for (int k = 0; k < s.dimension(); ++k) p(k) = rng.uniform(-2, 2);
      p(s.dimension()) = std::exp2(rng.uniform(-2, 2));
      TileId q = tile_of(s, p);
      CHECK(in.count(q) == 1);
      CHECK(tile_contains(s, q, p));
      int hits = 0;
      for (const auto& t : tiles) hits += tile_contains(s, t, p);
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("adjacency") {
  auto d1 = StackedTilingSpec::dyadic(1);
  CHECK(tiles_intersect(d1, tile(0, {0}), tile(0, {1})));
  CHECK_FALSE(tiles_intersect(d1, tile(0, {0}), tile(0, {4})));
  CHECK(tiles_intersect(d1, tile(0, {0}), tile(1, {0})));
  CHECK(tiles_intersect(d1, tile(1, {0}), tile(0, {0})));
  CHECK_FALSE(tiles_intersect(d1, tile(0, {0}), tile(0, {0})));
  CHECK_FALSE(tiles_intersect(d1, tile(0, {0}), tile(2, {0})));

  // exact interval oracle for box tilings
  for (const auto& s : {StackedTilingSpec::dyadic(1), StackedTilingSpec::dyadic(2)}) {
    auto tiles = tiles_in_window(s, -2, 2, window_for(s, 3.0));
    auto g = adjacency_graph(s, tiles);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < tiles.size(); ++i)
      for (std::size_t j = i + 1; j < tiles.size(); ++j) {
        bool oracle = boxes_meet(dyadic_box(tiles[i]), dyadic_box(tiles[j]));
        bool edge = std::binary_search(g.adjacency()[i].begin(), g.adjacency()[i].end(), j);
        mismatches += oracle != edge;
      }
    CHECK(mismatches == 0);
  }

  // graph shape: symmetric, irreflexive (the constructor rejects anything else)
  for (const auto& s : all_specs()) {
    auto g = adjacency_graph(s, tiles_in_window(s, -1, 1, window_for(s, 2.0)));
    for (std::size_t i = 0; i < g.adjacency().size(); ++i)
      for (std::size_t j : g.adjacency()[i]) {
        CHECK(j != i);
        CHECK(tiles_intersect(s, g.tiles()[i], g.tiles()[j]));
      }
  }

  // Heisenberg: two points closer than 1e-7 lie in the same or adjacent tiles
  auto h = StackedTilingSpec::heisenberg();
  SampleRng rng(8);
  for (int i = 0; i < 20000; ++i) {
    Point p = pt({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-4, 4), std::exp2(rng.uniform(-2, 2))});
    Point q = p;
    for (int k = 0; k < 4; ++k) q(k) += 1e-7 * rng.uniform(-1, 1);
    TileId a = tile_of(h, p), b = tile_of(h, q);
    if (a != b) CHECK(tiles_intersect(h, a, b));
  }
  CHECK_THROWS_AS(adjacency_graph(d1, {tile(0, {0}), tile(0, {0})}), InputError);
}

TEST_CASE("graph distance") {
  auto d1 = StackedTilingSpec::dyadic(1);
  auto row = adjacency_graph(d1, tiles_in_window(d1, 0, 0, box({0}, {5})));
  CHECK(graph_distance(row, tile(0, {0}), tile(0, {0})) == 0);
  CHECK(graph_distance(row, tile(0, {0}), tile(0, {1})) == 1);
  CHECK(graph_distance(row, tile(0, {0}), tile(0, {4})) == 4);
  CHECK_THROWS_AS(graph_distance(row, tile(0, {0}), tile(0, {9})), InputError);
  auto split = adjacency_graph(d1, {tile(0, {0}), tile(0, {5})});
  CHECK(graph_distance(split, tile(0, {0}), tile(0, {5})) == kUnreachable);

  // metric axioms, exact integers
  for (const auto& s : all_specs()) {
    auto g = adjacency_graph(s, tiles_in_window(s, -1, 1, window_for(s, 1.5)));
    const std::size_t n = g.tiles().size();
    std::vector<std::vector<int>> D(n);
    for (std::size_t i = 0; i < n; ++i) D[i] = graph_distances_from(g, i);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        bad += D[i][j] != D[j][i];
        bad += (D[i][j] == 0) != (i == j);
        for (std::size_t k = 0; k < n; k += 7) bad += D[i][j] > D[i][k] + D[k][j];
      }
    INFO(s.name());
    CHECK(bad == 0);
    CHECK(D[0][n - 1] != kUnreachable);
  }
}

TEST_CASE("colorings") {
  auto d1 = StackedTilingSpec::dyadic(1);
  auto single = greedy_coloring(adjacency_graph(d1, {tile(0, {0})}));
  CHECK(single.color_count() == 1);
  auto row = greedy_coloring(adjacency_graph(d1, tiles_in_window(d1, 0, 0, box({0}, {5}))));
  CHECK(row.color_count() == 2);

  for (const auto& s : all_specs()) {
    auto g = adjacency_graph(s, tiles_in_window(s, -2, 2, window_for(s, 2.0)));
    auto gc = greedy_coloring(g);
    auto pc = periodic_coloring(s, g);
    INFO(s.name());
    CHECK(gc.coloring_proper());
    CHECK(pc.coloring_proper());
    CHECK(static_cast<std::size_t>(gc.color_count()) <= g.max_degree() + 1);
    CHECK(pc.color_count() <= 2 << s.dimension());
    MESSAGE(s.name() << ": max degree " << g.max_degree() << ", greedy colors " << gc.color_count());
  }

  // frozen census (first computed with this code; degree bounds come from the
  // box oracle above)
  {
    auto d2 = StackedTilingSpec::dyadic(2);
    auto g1 = adjacency_graph(d1, tiles_in_window(d1, -3, 3, box({-8}, {8})));
    auto g2 = adjacency_graph(d2, tiles_in_window(d2, -2, 2, box({-4, -4}, {4, 4})));
    CHECK(g1.max_degree() == 8);
    CHECK(g2.max_degree() == 28);
    CHECK(greedy_coloring(g1).color_count() <= 8);
    CHECK(greedy_coloring(g2).color_count() <= 13);
  }

  // a colored window extends the coloring of a BFS ball around Q0
  for (const auto& s : all_specs()) {
    auto big = adjacency_graph(s, tiles_in_window(s, -2, 2, window_for(s, 2.0)));
    auto dist = graph_distances_from(big, big.index_of(TileId{0, s.identity()}).value());
    auto colored = greedy_coloring(big);
    for (int r : {1, 2, 3}) {
      std::vector<TileId> ball;
      for (std::size_t i = 0; i < dist.size(); ++i)
        if (dist[i] <= r) ball.push_back(big.tiles()[i]);
      auto sub = greedy_coloring(adjacency_graph(s, ball));
      std::size_t differ = 0;
      for (std::size_t i = 0; i < sub.tiles().size(); ++i)
        differ += sub.coloring()[i] != colored.coloring()[*big.index_of(sub.tiles()[i])];
      INFO(s.name() << " r=" << r);
      CHECK(differ == 0);
    }
    // periodic coloring does not look at the window at all
    auto small = periodic_coloring(s, adjacency_graph(s, tiles_in_window(s, 0, 0, window_for(s, 1.0))));
    auto pb = periodic_coloring(s, big);
    for (std::size_t i = 0; i < small.tiles().size(); ++i)
      CHECK(small.coloring()[i] == pb.coloring()[*pb.index_of(small.tiles()[i])]);
  }
}

TEST_CASE("decompose tile") {
  auto d1 = StackedTilingSpec::dyadic(1);
  auto q0 = decompose_tile(d1, tile(0, {0}));
  CHECK(q0.g.layer == 0);
  CHECK(q0.g.gamma == lv({0}));
  CHECK(d1.gamma_prime()[q0.gamma_prime_index] == lv({0}));
  auto q1 = decompose_tile(d1, tile(0, {1}));
  CHECK(q1.g.gamma == lv({0}));
  CHECK(d1.gamma_prime()[q1.gamma_prime_index] == lv({1}));
  CHECK(q1.combinatorial_isometry);
  auto q5 = decompose_tile(d1, tile(3, {5}));
  CHECK(q5.g.layer == 3);
  CHECK(q5.g.gamma == lv({4}));

  // generator translations keep layer <= 0 tiles as tiles
  for (const auto& s : all_specs())
    for (const auto& gen : s.generators()) {
      auto r = apply(s, GammaAlpha{0, gen}, TileId{-1, s.identity()});
      REQUIRE(r.has_value());
      CHECK(r->layer == -1);
    }
  CHECK_FALSE(apply(d1, GammaAlpha{0, lv({1})}, tile(1, {0})).has_value());

  for (const auto& s : all_specs()) {
    auto tiles = tiles_in_window(s, -2, 2, window_for(s, 2.0));
    std::size_t ok = 0;
    for (const auto& q : tiles) {
      auto d = decompose_tile(s, q);
      ok += d.combinatorial_isometry;
      auto back = apply(s, d.g, TileId{0, s.gamma_prime()[d.gamma_prime_index]});
      CHECK(back.has_value());
      if (back) CHECK(*back == q);
      auto there = apply_inverse(s, d.g, q);
      CHECK(there.has_value());
      if (there) CHECK(*there == (TileId{0, s.gamma_prime()[d.gamma_prime_index]}));
    }
    INFO(s.name());
    CHECK(ok == tiles.size());
  }
}

TEST_CASE("normalize map") {
  auto d1 = StackedTilingSpec::dyadic(1);
  auto id = normalize_map(d1, [](const Point& p) { return p; }, pt({0}), pt({1}));
  CHECK(id.n == 0);
  CHECK(id.gamma == lv({0}));
  CHECK(id.normalized);
  auto e8 = normalize_map(d1, [](const Point& p) { return Point(8 * p); }, pt({0}), pt({1}));
  CHECK(e8.n == -3);
  CHECK(e8.gamma == lv({0}));
  auto sh = normalize_map(d1, [](const Point& p) { return Point(p.array() + 7.5); }, pt({0}), pt({1}));
  CHECK(sh.n == 0);
  CHECK(sh.gamma == lv({-7}));
  CHECK_THROWS_AS(normalize_map(d1, [](const Point&) { return pt({3}); }, pt({0}), pt({1})), DomainError);
  CHECK_THROWS_AS(normalize_map(d1, [](const Point& p) { return p; }, pt({0}), pt({0})), InputError);

  SampleRng rng(9);
  auto h = StackedTilingSpec::heisenberg();
  for (int i = 0; i < 500; ++i) {
    double a = std::exp(rng.uniform(-6, 6)), b = rng.uniform(-50, 50);
    auto r = normalize_map(d1, [=](const Point& p) { return Point(a * p.array() + b); }, pt({0}), pt({1}));
    CHECK(r.normalized);
    Heis g{{rng.uniform(-9, 9), rng.uniform(-9, 9)}, rng.uniform(-30, 30)};
    double s = std::exp(rng.uniform(-4, 4));
    auto hm = [=](const Point& p) { return heis_multiply(g, heis_dilate(s, Heis::from_coords(p))).coords(); };
    auto rh = normalize_map(h, hm, pt({0, 0, 0}), pt({1, 0, 0}));
    CHECK(rh.normalized);
  }
}

TEST_CASE("graph metric against the cone and hyperbolic metrics") {
  auto d1 = StackedTilingSpec::dyadic(1);
  auto h2 = SpaceHandle::half_space_real(1);
  auto con = SpaceHandle::con_of(SpaceHandle::euclidean(1));
  auto fit = [&](int layers, double half) {
    auto g = adjacency_graph(d1, tiles_in_window(d1, -layers, layers, box({-half}, {half})));
    const std::size_t n = g.tiles().size();
    std::vector<double> dg, dh, dc;
    for (std::size_t i = 0; i < n; ++i) {
      auto row = graph_distances_from(g, i);
      Point pi = tile_center(d1, g.tiles()[i]);
      for (std::size_t j = i + 1; j < n; ++j) {
        Point pj = tile_center(d1, g.tiles()[j]);
        dg.push_back(row[j]);
        dh.push_back(h2.distance(pi, pj));
        dc.push_back(con.distance(pi, pj));
      }
    }
    return std::make_pair(fit_qi_from_distances(dh, dg), fit_qi_from_distances(dc, dg));
  };
  auto [h1, c1] = fit(3, 8);
  auto [h2f, c2] = fit(4, 16);
  MESSAGE("graph vs H2: L=" << h1.constants.L << " C=" << h1.constants.C << " -> L=" << h2f.constants.L
                            << " C=" << h2f.constants.C);
  MESSAGE("graph vs Con: L=" << c1.constants.L << " C=" << c1.constants.C << " -> L=" << c2.constants.L
                             << " C=" << c2.constants.C);
  CHECK_FALSE(h1.saturated);
  CHECK_FALSE(c1.saturated);
  CHECK(h2f.constants.C <= 1.5 * h1.constants.C + 0.5);
  CHECK(c2.constants.C <= 1.5 * c1.constants.C + 0.5);
}

TEST_CASE("edge list export") {
  auto d1 = StackedTilingSpec::dyadic(1);
  auto g = greedy_coloring(adjacency_graph(d1, tiles_in_window(d1, 0, 0, box({0}, {3}))));
  std::ostringstream os;
  write_edge_list(os, d1, g);
  CHECK(os.str() ==
        "# tile graph dyadic-euclidean(1): 3 tiles, 2 edges\n# n gamma -- n gamma color color\n"
        "0 0 -- 0 1 0 1\n0 1 -- 0 2 1 0\n");
}
