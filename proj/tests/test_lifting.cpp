#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hypertile/lifting.hpp"
#include "hypertile/models.hpp"

#include <cmath>

using namespace hypertile;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

LiftedMap lifted(BoundaryMap f, int samples = 64, bool refine = true) { return {std::move(f), {samples, refine}}; }

BoundaryMap cubic_table() {
  std::vector<double> xs, ys;
  for (int i = -20; i <= 20; ++i) {
    double x = 0.1 * i;
    xs.push_back(x);
    ys.push_back(x * x * x + 0.5 * x);
  }
  return BoundaryMap::table(xs, ys);
}

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

Point random_hplus(const BoundaryMap& f, SampleRng& rng) {
  const int n = f.dimension();
  Point p(n + 1);
  for (int i = 0; i < n; ++i) p(i) = rng.uniform(-3, 3);
  if (f.heisenberg()) p(2) = rng.uniform(-6, 6);
  p(n) = std::exp(rng.uniform(-3, 2));
  return p;
}

double rel_gap(const Point& a, const Point& b) { return (a - b).lpNorm<Eigen::Infinity>() / (1.0 + a.lpNorm<Eigen::Infinity>()); }

Region box_region(std::initializer_list<Axis> axes) { return Region{std::vector<Axis>(axes)}; }

}  // namespace

TEST_CASE("boundary map families and inverses") {
  SampleRng rng(1);
  std::vector<BoundaryMap> maps = {
      BoundaryMap::identity(2),
      BoundaryMap::affine(mat2(1, 0.3, -0.2, 2), pt({0.5, -1})),
      BoundaryMap::power1d(3.0),
      BoundaryMap::power1d(0.4),
      BoundaryMap::heis_left_translation(pt({0.3, -1.2, 2.0})),
      BoundaryMap::heis_dilation(1.7),
      cubic_table(),
      BoundaryMap::table({0, 1, 2}, {5, 3, -1}),
      BoundaryMap::power1d(3.0).pre({2.0, pt({0.25})}).post({0.5, pt({-1})}),
      BoundaryMap::heis_dilation(0.6).pre({1.5, pt({1, 0, 1})}).post({2.0, pt({0, -1, 0.5})}),
  };
  for (const auto& f : maps) {
    for (int i = 0; i < 200; ++i) {
      Point x(f.dimension());
      for (int k = 0; k < x.size(); ++k) x(k) = rng.uniform(-3, 3);
      CHECK(rel_gap(f.inverse(f(x)), x) <= 1e-10);
    }
  }
  CHECK(BoundaryMap::power1d(3.0)(pt({-2}))(0) == -8.0);
  CHECK(BoundaryMap::table({0, 1, 2}, {0, 1, 4})(pt({3}))(0) == 7.0);  // extended end segment
  CHECK(BoundaryMap::heis_dilation(2.0)(pt({1, 0, 1})) == pt({2, 0, 4}));

  CHECK_THROWS_AS(BoundaryMap::affine(mat2(1, 2, 2, 4), pt({0, 0})), InputError);
  CHECK_THROWS_AS(BoundaryMap::power1d(0.0), InputError);
  CHECK_THROWS_AS(BoundaryMap::table({0, 1, 1}, {0, 1, 2}), InputError);
  CHECK_THROWS_AS(BoundaryMap::table({0, 1, 2}, {0, 1, 0.5}), InputError);
  CHECK_THROWS_AS(BoundaryMap::heis_left_translation(pt({1, 2})), InputError);
  CHECK_THROWS_AS(BoundaryMap::power1d(3.0).pre({-1.0, Point()}), InputError);
  CHECK_THROWS_AS(BoundaryMap::power1d(3.0)(pt({1, 2})), InputError);
}

TEST_CASE("tau examples") {
  auto lin = lifted(BoundaryMap::affine(Eigen::MatrixXd::Constant(1, 1, 2.5), pt({0.3})));
  for (double t : {1e-3, 0.5, 7.0}) CHECK(tau(lin, pt({1.2}), t) == doctest::Approx(2.5 * t).epsilon(1e-14));
  CHECK(lift_eval(lifted(BoundaryMap::affine(Eigen::MatrixXd::Constant(1, 1, 2.0), pt({0}))), pt({1, 1})) == pt({2, 2}));

  auto cube = lifted(BoundaryMap::power1d(3.0));
  for (double x : {0.0, 0.2, 1.0, 3.0})
    for (double t : {0.01, 0.3, 2.0}) {
      double want = std::pow(x + t, 3) - x * x * x;
      CHECK(tau(cube, pt({x}), t) == doctest::Approx(want).epsilon(1e-12));
      CHECK(tau(cube, pt({-x}), t) == doctest::Approx(want).epsilon(1e-12));
    }

  // identity: tau = t, sampled too
  CHECK(tau(lifted(BoundaryMap::identity(1)), pt({4}), 0.7) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(tau(lifted(BoundaryMap::identity(2)), pt({4, 1}), 0.7) == doctest::Approx(0.7).epsilon(1e-13));
  CHECK(tau(lifted(BoundaryMap::identity(3)), pt({4, 1, 0}), 0.7) == doctest::Approx(0.7).epsilon(1e-13));

  // (x, 2y) -> tau = 2t; a general matrix gives the top singular value
  CHECK(tau(lifted(BoundaryMap::affine(mat2(1, 0, 0, 2), pt({0, 0}))), pt({0.3, 0.1}), 0.5) ==
        doctest::Approx(1.0).epsilon(1e-12));
  Eigen::MatrixXd A = mat2(1.0, 0.7, -0.4, 1.3);
  double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
  auto aff = lifted(BoundaryMap::affine(A, pt({0, 0})));
  CHECK(tau(aff, pt({1, 1}), 2.0) == doctest::Approx(2.0 * smax).epsilon(1e-12));
  // without refinement the grid max is below, within the grid resolution
  double coarse = tau(lifted(BoundaryMap::affine(A, pt({0, 0})), 16, false), pt({1, 1}), 2.0);
  CHECK(coarse <= 2.0 * smax * (1 + 1e-15));
  CHECK(coarse >= 2.0 * smax * std::cos(2 * kPi / 16));

  Eigen::MatrixXd A3 = Eigen::MatrixXd::Identity(3, 3);
  A3(0, 1) = 0.5;
  A3(2, 2) = 3.0;
  double s3 = Eigen::JacobiSVD<Eigen::MatrixXd>(A3).singularValues()(0);
  CHECK(tau(lifted(BoundaryMap::affine(A3, Eigen::VectorXd::Zero(3))), pt({0, 0, 0}), 1.0) ==
        doctest::Approx(s3).epsilon(1e-9));

  // Heisenberg similarities: the displacement is constant on the gauge sphere
  CHECK(tau(lifted(BoundaryMap::heis_dilation(1.7)), pt({0.3, -1, 2}), 0.4) == doctest::Approx(1.7 * 0.4).epsilon(1e-12));
  CHECK(tau(lifted(BoundaryMap::heis_left_translation(pt({1, 2, 3}))), pt({0.3, -1, 2}), 0.4) ==
        doctest::Approx(0.4).epsilon(1e-12));

  CHECK_THROWS_AS(tau(cube, pt({0}), 0.0), InputError);
  CHECK_THROWS_AS(tau(cube, pt({0}), -1.0), InputError);
  CHECK_THROWS_AS(tau(lifted(BoundaryMap::power1d(3.0), 8), pt({0}), 1.0), InputError);
  CHECK_THROWS_AS(lift_eval(cube, pt({0, -1})), InputError);
  CHECK_THROWS_AS(lift_eval(cube, pt({0, 1, 1})), InputError);
}

TEST_CASE("table maps: sampled tau equals the two-point formula") {
  SampleRng rng(3);
  for (const auto& f : {cubic_table(), BoundaryMap::table({0, 1, 2, 5}, {5, 3, -1, -2}), BoundaryMap::power1d(2.5)}) {
    auto lift = lifted(f);
    for (int i = 0; i < 1000; ++i) {
      Point x = pt({rng.uniform(-3, 3)});
      double t = std::exp(rng.uniform(-6, 1));
      double exact = tau(lift, x, t), sampled = tau_sampled(lift, x, t);
      CHECK(std::abs(exact - sampled) <= 1e-12 * (1 + exact));
    }
  }
}

TEST_CASE("tau is nondecreasing in t and decays to 0") {
  SampleRng rng(4);
  std::vector<LiftedMap> lifts = {
      lifted(BoundaryMap::power1d(3.0)),
      lifted(cubic_table()),
      lifted(BoundaryMap::affine(mat2(1, 0.7, -0.4, 1.3), pt({1, 0}))),
      lifted(BoundaryMap::heis_dilation(1.3).pre({1.0, pt({0.5, 0.5, 1})})),
      lifted(BoundaryMap::power1d(0.5).post({2.0, pt({1})})),
  };
  for (const auto& lift : lifts) {
    for (int i = 0; i < 300; ++i) {
      Point p = random_hplus(lift.boundary, rng);
      Point x = p.head(lift.boundary.dimension());
      double t = p(p.size() - 1), t2 = t * std::exp(rng.uniform(0, 2));
      CHECK(tau(lift, x, t) > 0.0);
      CHECK(tau(lift, x, t) <= tau(lift, x, t2) * (1 + 1e-12));
    }
    Point x = Point::Constant(lift.boundary.dimension(), 0.5);
    double prev = tau(lift, x, 1e-1);
    for (double t : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      double v = tau(lift, x, t);
      CHECK(v < prev);
      prev = v;
    }
    CHECK(prev <= 1e-2);
  }
}

TEST_CASE("lifting equivariance under similarities") {
  struct Case {
    BoundaryMap f;
    BaseSimilarity g;
  };
  std::vector<Case> cases = {
      {BoundaryMap::power1d(3.0), {2.5, pt({0.7})}},
      {BoundaryMap::power1d(3.0), {1.0, pt({3.0})}},  // lattice translation
      {cubic_table(), {0.5, pt({-1.0})}},
      {BoundaryMap::affine(mat2(1, 0.3, 0, 2), pt({0.5, 0})), {1.7, pt({0.2, -1})}},
      {BoundaryMap::affine(mat2(1, 0.3, 0, 2), pt({0.5, 0})), {1.0, pt({1, -2})}},
      {BoundaryMap::heis_dilation(1.4).pre({1.0, pt({0.2, 0.1, -0.3})}), {2.0, pt({0.3, -0.2, 0.5})}},
      {BoundaryMap::heis_left_translation(pt({1, -1, 2})), {1.0, pt({1, 0, 0})}},
      {BoundaryMap::heis_left_translation(pt({1, -1, 2})), {0.5, Point()}},
  };
  SampleRng rng(5);
  for (const auto& c : cases) {
    const auto& base = c.f.base();
    auto plain = lifted(c.f), left = lifted(c.f.post(c.g)), right = lifted(c.f.pre(c.g));
    double worst_left = 0.0, worst_right = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Point p = random_hplus(c.f, rng);
      // lift(g f) = G lift(f)
      worst_left = std::max(worst_left, rel_gap(lift_eval(left, p), extend_similarity(base, c.g, lift_eval(plain, p))));
      // lift(f g) = lift(f) G
      worst_right = std::max(worst_right, rel_gap(lift_eval(right, p), lift_eval(plain, extend_similarity(base, c.g, p))));
    }
    INFO(c.f.describe());
    CHECK(worst_left <= 1e-9);
    CHECK(worst_right <= 1e-9);
  }
}

TEST_CASE("local pairs") {
  Sampler s{box_region({{-1, 1, false}, {0.1, 10, true}}), 2000, 9};
  auto h2 = SpaceHandle::half_space_real(1);
  for (double scale : {0.1, 1.0, 10.0}) {
    auto pairs = local_pairs(h2, s, scale);
    double lo = 1e300, hi = 0.0;
    for (const auto& [p, q] : pairs) {
      double d = h2.distance(p, q);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    CHECK(hi <= scale * (1 + 1e-12));
    CHECK(hi >= 0.99 * scale);
    CHECK(lo <= 2e-3 * scale);
  }
  auto a = local_pairs(h2, s, 1.0), b = local_pairs(h2, s, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second == b[i].second);

  Sampler sh{box_region({{-1, 1, false}, {-1, 1, false}, {-1, 1, false}, {0.1, 10, true}}), 500, 9};
  auto hh = SpaceHandle::heisenberg_half_space();
  for (const auto& [p, q] : local_pairs(hh, sh, 0.5)) CHECK(hh.distance(p, q) <= 0.5 * (1 + 1e-12));
  CHECK_THROWS_AS(local_pairs(h2, s, 0.0), InputError);
  CHECK_THROWS_AS(local_pairs(SpaceHandle::half_space_real(2), s, 1.0), InputError);
  CHECK_THROWS_AS(local_pairs(SpaceHandle::euclidean(2), s, 1.0), InputError);
}

TEST_CASE("lift distortion examples") {
  const std::vector<double> scales{0.1, 1.0, 10.0};
  Sampler s1{box_region({{-5, 5, false}, {0.05, 20, true}}), 2000, 21};

  SUBCASE("identity") {
    auto id = lifted(BoundaryMap::identity(1));
    auto rep = lift_distortion(id, id.hplus(), s1, scales);
    for (const auto& lb : rep.local_bilip) {
      CHECK(std::abs(lb.min_ratio - 1) <= 1e-9);
      CHECK(std::abs(lb.max_ratio - 1) <= 1e-9);
    }
    CHECK(rep.qi.constants.L == 1.0);
    CHECK(rep.qi.constants.C <= 1e-9);
  }
  SUBCASE("lambda x is an isometry") {
    auto lin = lifted(BoundaryMap::affine(Eigen::MatrixXd::Constant(1, 1, 3.0), pt({-2})));
    auto rep = lift_distortion(lin, lin.hplus(), s1, scales);
    for (const auto& lb : rep.local_bilip) CHECK(std::abs(lb.constant - 1) <= 1e-6);
    CHECK(std::abs(rep.qi.constants.L - 1) <= 1e-6);
    CHECK(rep.qi.constants.C <= 1e-6);
  }
  SUBCASE("(x, 2y) is 2-bi-Lipschitz") {
    auto aff = lifted(BoundaryMap::affine(mat2(1, 0, 0, 2), pt({0, 0})));
    Sampler s2{box_region({{-5, 5, false}, {-5, 5, false}, {0.05, 20, true}}), 2000, 22};
    auto rep = lift_distortion(aff, aff.hplus(), s2, scales);
    for (const auto& lb : rep.local_bilip) {
      MESSAGE("scale " << lb.scale << ": [" << lb.min_ratio << ", " << lb.max_ratio << "]");
      CHECK(lb.constant >= 1.9);
      CHECK(lb.constant <= 2.1);
      CHECK(lb.min_ratio >= 1 / 2.1);
      CHECK(lb.max_ratio <= 2.1);
    }
  }
  SUBCASE("x^3 blows up near 0 but stays a quasi-isometry") {
    auto cube = lifted(BoundaryMap::power1d(3.0));
    Sampler near0{box_region({{-0.05, 0.05, false}, {1e-3, 1.0, true}}), 2000, 23};
    auto rep = lift_distortion(cube, cube.hplus(), near0, {0.1});
    MESSAGE("x^3 constant at 0.1: " << rep.local_bilip[0].constant << ", L " << rep.qi.constants.L << ", C "
                                    << rep.qi.constants.C);
    CHECK(rep.local_bilip[0].constant > 10.0);
    CHECK(std::isfinite(rep.qi.constants.L));
    CHECK(std::isfinite(rep.qi.constants.C));
    // witness really is compressed
    const auto& w = rep.local_bilip[0].min_witness.points;
    auto h2 = SpaceHandle::half_space_real(1);
    CHECK(h2.distance(lift_eval(cube, w[0]), lift_eval(cube, w[1])) / h2.distance(w[0], w[1]) ==
          doctest::Approx(rep.local_bilip[0].min_ratio).epsilon(1e-12));
  }
  SUBCASE("heisenberg dilation lifts to an isometry") {
    auto dil = lifted(BoundaryMap::heis_dilation(2.0).pre({1.0, pt({0.5, 0, 1})}));
    Sampler sh{box_region({{-2, 2, false}, {-2, 2, false}, {-4, 4, false}, {0.1, 10, true}}), 500, 24};
    auto rep = lift_distortion(dil, dil.hplus(), sh, {0.1, 1.0});
    for (const auto& lb : rep.local_bilip) CHECK(std::abs(lb.constant - 1) <= 1e-6);
  }
  CHECK_THROWS_AS(lift_distortion(lifted(BoundaryMap::identity(1)), SpaceHandle::half_space_real(1), s1, {-1.0}),
                  InputError);
  CHECK_THROWS_AS(lift_distortion(lifted(BoundaryMap::identity(1)), SpaceHandle::half_space_real(2), s1, {1.0}),
                  InputError);
}
