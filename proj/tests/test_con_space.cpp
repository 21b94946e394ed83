#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hypertile/con_space.hpp"
#include "hypertile/metric.hpp"

#include <cmath>

using namespace hypertile;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

// direct transcription, no log1p
double naive_con(double d, double t, double tq) { return 2.0 * std::log((d + std::max(t, tq)) / std::sqrt(t * tq)); }

}  // namespace

TEST_CASE("cone distance") {
  auto r = SpaceHandle::euclidean(1);
  CHECK(con_distance(r, {pt({2}), 0.7}, {pt({2}), 0.7}) == 0.0);
  CHECK(con_distance(r, {pt({0}), 1.0}, {pt({0}), std::exp(1.0)}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(con_distance(r, {pt({3}), 1.0}, {pt({0}), 1.0}) == doctest::Approx(2.772589).epsilon(1e-6));
  CHECK_THROWS_AS(con_distance(r, {pt({3}), 0.0}, {pt({0}), 1.0}), DomainError);

  SampleRng rng(1);
  for (int i = 0; i < 2000; ++i) {
    double d = std::exp(rng.uniform(-5, 3)), t = std::exp(rng.uniform(-4, 4)), tq = std::exp(rng.uniform(-4, 4));
    CHECK(std::abs(con_formula(d, t, tq) - naive_con(d, t, tq)) <= 1e-12 * (1 + naive_con(d, t, tq)));
  }
}

TEST_CASE("cone metric axioms on sampled triples") {
  for (const SpaceHandle& base : {SpaceHandle::euclidean(1), SpaceHandle::euclidean(2), SpaceHandle::heisenberg()}) {
    auto con = SpaceHandle::con_of(base);
    Region reg;
    for (int i = 0; i < base.point_dimension(); ++i) reg.axes.push_back({-10, 10, false});
    reg.axes.push_back({std::exp(-5.0), std::exp(5.0), true});
    auto pts = sample_points({reg, 30000, 77});
    double worst = 0.0, asym = 0.0;
    for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
      double ab = con.distance(pts[i], pts[i + 1]), bc = con.distance(pts[i + 1], pts[i + 2]);
      double ac = con.distance(pts[i], pts[i + 2]);
      worst = std::max(worst, ac - ab - bc);
      asym = std::max(asym, std::abs(con.distance(pts[i + 1], pts[i]) - ab) / std::max(1e-300, ab));
      CHECK(ab >= 0.0);
    }
    MESSAGE(con.describe() << ": max triangle excess " << worst);
    CHECK(worst <= 1e-9);
    CHECK(asym <= 1e-12);
  }
}

TEST_CASE("rays") {
  auto x = pt({0.4});
  auto p0 = ray_point(RaySpec::downward(x), 0.0);
  CHECK(p0.height == 1.0);
  CHECK(p0.base == x);
  CHECK(ray_point(RaySpec::vertical(x), std::log(2.0)).height == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(ray_point(RaySpec::downward(x), -1.0), InputError);

  auto r = SpaceHandle::euclidean(1);
  for (double s = 0; s < 30; s += 1.0) {
    auto a = ray_point(RaySpec::downward(x), s), b = ray_point(RaySpec::downward(x), s + 1);
    CHECK(std::abs(con_distance(r, a, b) - 1.0) <= 1e-9);
  }
  SampleRng rng(2);
  for (int i = 0; i < 2000; ++i) {
    double s = rng.uniform(0, 40), s2 = rng.uniform(0, 40);
    for (auto ray : {RaySpec::downward(x), RaySpec::vertical(x)})
      CHECK(std::abs(con_distance(r, ray_point(ray, s), ray_point(ray, s2)) - std::abs(s - s2)) <= 0.8);
  }
}

TEST_CASE("cone homothety") {
  // (x, t) -> (a x, a t) for the dilation by a of R, of d_A and of the gauge
  SampleRng rng(4);
  auto e = SpaceHandle::euclidean(1);
  auto tw = SpaceHandle::twisted({1, 2});
  auto hs = SpaceHandle::heisenberg();
  for (int i = 0; i < 2000; ++i) {
    ConPoint p{pt({rng.uniform(-5, 5)}), std::exp(rng.uniform(-3, 3))};
    ConPoint q{pt({rng.uniform(-5, 5)}), std::exp(rng.uniform(-3, 3))};
    double d = con_distance(e, p, q);
    CHECK(std::abs(con_distance(e, {p.base * 3.0, 3.0 * p.height}, {q.base * 3.0, 3.0 * q.height}) - d) <= 1e-12 * (1 + d) * 4);

    ConPoint a{pt({rng.uniform(-5, 5), rng.uniform(-5, 5)}), std::exp(rng.uniform(-3, 3))};
    ConPoint b{pt({rng.uniform(-5, 5), rng.uniform(-5, 5)}), std::exp(rng.uniform(-3, 3))};
    double dt = con_distance(tw, a, b);
    ConPoint aa{twisted_alpha({1, 2}, a.base), 2 * a.height}, ab{twisted_alpha({1, 2}, b.base), 2 * b.height};
    CHECK(std::abs(con_distance(tw, aa, ab) - dt) <= 1e-12 * (1 + dt) * 4);

    ConPoint h{pt({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-4, 4)}), std::exp(rng.uniform(-3, 3))};
    ConPoint k{pt({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-4, 4)}), std::exp(rng.uniform(-3, 3))};
    double dh = con_distance(hs, h, k);
    auto dil = [](const ConPoint& c) {
      return ConPoint{heis_dilate(2.0, Heis::from_coords(c.base)).coords(), 2 * c.height};
    };
    CHECK(std::abs(con_distance(hs, dil(h), dil(k)) - dh) <= 1e-12 * (1 + dh) * 4);
  }
}

TEST_CASE("visual quasimetric") {
  auto r = SpaceHandle::euclidean(1);
  const double e = std::exp(1.0);
  ConPoint base{pt({0}), 1.0};
  auto same = visual_quasimetric(r, e, base, RaySpec::downward(pt({1})), RaySpec::downward(pt({1})), 40);
  CHECK(same.value <= std::pow(e, -35.0));

  auto v = visual_quasimetric(r, e, base, RaySpec::downward(pt({0})), RaySpec::downward(pt({1})), 40);
  auto w = visual_quasimetric(r, e, base, RaySpec::downward(pt({1})), RaySpec::downward(pt({0})), 40);
  CHECK(v.value == w.value);
  CHECK(v.converged);
  // brute-force limit: product evaluated directly at s = 60
  auto g1 = ray_point(RaySpec::downward(pt({0})), 60), g2 = ray_point(RaySpec::downward(pt({1})), 60);
  double prod = 0.5 * (con_distance(r, g1, base) + con_distance(r, g2, base) - con_distance(r, g1, g2));
  double D = std::pow(e, -prod);
  CHECK(v.value == doctest::Approx(D).epsilon(1e-9));
  CHECK_THROWS_AS(visual_quasimetric(r, e, base, RaySpec::vertical(pt({0})), RaySpec::downward(pt({1})), 40), InputError);
  CHECK_THROWS_AS(visual_quasimetric(r, e, base, RaySpec::downward(pt({0})), RaySpec::downward(pt({1})), 5), InputError);
}

TEST_CASE("parabolic quasimetric") {
  auto r = SpaceHandle::euclidean(1);
  const double e = std::exp(1.0);
  auto eta = RaySpec::vertical(pt({0}));
  auto same = parabolic_quasimetric(r, e, eta, RaySpec::downward(pt({2})), RaySpec::downward(pt({2})), 40);
  CHECK(same.value <= std::pow(e, -30.0));

  auto one = parabolic_quasimetric(r, e, eta, RaySpec::downward(pt({0})), RaySpec::downward(pt({1})), 40);
  CHECK(one.value >= 0.25);
  CHECK(one.value <= 4.0);
  CHECK(one.converged);
  CHECK_THROWS_AS(parabolic_quasimetric(r, e, RaySpec::downward(pt({0})), RaySpec::downward(pt({0})),
                                        RaySpec::downward(pt({1})), 40),
                  InputError);

  for (double x : {0.1, 0.3, 1.0, 2.5, 10.0, -0.1, -7.0}) {
    auto a = parabolic_quasimetric(r, e, eta, RaySpec::downward(pt({0})), RaySpec::downward(pt({x})), 40);
    auto b = parabolic_quasimetric(r, e, eta, RaySpec::downward(pt({0})), RaySpec::downward(pt({2 * x})), 40);
    CHECK(std::abs(b.value / a.value - 2.0) <= 1e-3);
    auto c = parabolic_quasimetric(r, e, eta, RaySpec::downward(pt({0})), RaySpec::downward(pt({x})), 80);
    CHECK(std::abs(c.value - a.value) <= 1e-4 * a.value);
  }

  auto h = SpaceHandle::heisenberg();
  auto eh = RaySpec::vertical(pt({0, 0, 0}));
  SampleRng rng(6);
  for (int i = 0; i < 50; ++i) {
    Point x = pt({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-3, 3)});
    Point y = pt({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-3, 3)});
    auto a = parabolic_quasimetric(h, e, eh, RaySpec::downward(x), RaySpec::downward(y), 40);
    auto b = parabolic_quasimetric(h, e, eh, RaySpec::downward(x), RaySpec::downward(y), 80);
    CHECK(std::abs(b.value - a.value) <= 1e-4 * a.value);
    double ratio = a.value / h.distance(x, y);
    CHECK(ratio > 0.25);
    CHECK(ratio < 4.0);
  }
}
