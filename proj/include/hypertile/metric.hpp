#pragma once

#include "hypertile/rng.hpp"
#include "hypertile/space.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace hypertile {

// ---------------------------------------------------------------- sampling

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;  // uniform in log, e.g. heights
};

struct Region {
  std::vector<Axis> axes;

  int dimension() const { return static_cast<int>(axes.size()); }
  // Each axis doubled about its centre (log-centre for log axes).
  Region scaled(double factor) const;
  Point sample(SampleRng& rng) const;
  void validate() const;
};

struct Sampler {
  Region region;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
};

// Point i is drawn from its own stream derive_seed(seed, i).
std::vector<Point> sample_points(const Sampler& sampler);

using PointMap = std::function<Point(const Point&)>;

struct Witness {
  std::vector<Point> points;
  double value = 0.0;
};

// ---------------------------------------------------------------- Gromov / delta

double gromov_product(const SpaceHandle& space, const Point& x, const Point& x2, const Point& y);

struct DeltaEstimate {
  double delta = 0.0;
  Witness witness;  // (x, x', x'', y)
  std::size_t quadruples = 0;
};

// Each sampled 4-set is tried in every role assignment (y and the middle
// point), which is still a max over sampled quadruples.
DeltaEstimate delta_four_point_estimate(const SpaceHandle& space, const Sampler& sampler);
DeltaEstimate delta_four_point_estimate(const SpaceHandle& space, const std::vector<Point>& points);

// ---------------------------------------------------------------- quasi-isometry

struct QiConstants {
  double L = 1.0;
  double C = 0.0;
};

struct QiFit {
  QiConstants constants;
  bool saturated = false;  // best L is the grid maximum
  Witness witness;         // pair realising C (or the extreme ratio when C = 0)
  std::size_t pairs = 0;
};

// Geometric grid 2^(k/16), k = 0..96.
std::vector<double> qi_L_grid();

QiFit fit_qi_constants(const SpaceHandle& source, const SpaceHandle& target, const PointMap& map,
                       const Sampler& sampler);

// Same fit on precomputed distance pairs (d_source[i], d_target[i]).
QiFit fit_qi_from_distances(const std::vector<double>& d_source, const std::vector<double>& d_target);

// ---------------------------------------------------------------- quasi-symmetry

struct QsModulus {
  double alpha = 1.0;
  double c = 1.0;

  double operator()(double t) const;
  void validate() const;
};

struct Triple {
  Point x, y, z;
};

// Triples with d(x, z) = 0 are redrawn inside their own stream.
std::vector<Triple> sample_triples(const SpaceHandle& space, const Sampler& sampler);

struct QsCheck {
  bool pass = true;
  bool collapsed = false;  // map sent x and z to the same point
  double worst_ratio = 0.0;  // max of lhs / eta(rhs)
  Witness witness;
  std::size_t triples = 0;
};

QsCheck check_quasi_symmetry(const SpaceHandle& space, const PointMap& map, const QsModulus& eta,
                             const Sampler& sampler);
QsCheck check_quasi_symmetry(const SpaceHandle& space, const PointMap& map, const QsModulus& eta,
                             const std::vector<Triple>& triples);

struct QsFit {
  QsModulus modulus;
  Witness witness;
  std::vector<std::pair<double, double>> per_alpha;  // (alpha, minimal c)
};

QsFit fit_qs_modulus(const SpaceHandle& space, const PointMap& map, const std::vector<double>& alpha_grid,
                     const Sampler& sampler);
QsFit fit_qs_modulus(const SpaceHandle& space, const PointMap& map, const std::vector<double>& alpha_grid,
                     const std::vector<Triple>& triples);

// ---------------------------------------------------------------- injectivity

struct InjectivityReport {
  bool pass = true;
  bool small_scale_ok = true;  // (a): d < r  =>  images distinct
  bool large_scale_ok = true;  // (b): d >= r =>  image distance >= epsilon
  Witness small_scale_witness;
  Witness large_scale_witness;  // closest image pair among d >= r
  double min_image_gap_far = 0.0;
  std::size_t pairs = 0;
};

// Checks all pairs of the sampled points (count^2 / 2 pairs).
InjectivityReport injectivity_scale_check(const SpaceHandle& space, const PointMap& map, double r,
                                          double epsilon, const Sampler& sampler);
InjectivityReport injectivity_scale_check(const SpaceHandle& source, const SpaceHandle& target,
                                          const std::vector<Point>& points, const std::vector<Point>& images,
                                          double r, double epsilon);

// ---------------------------------------------------------------- distortion

struct LocalBilip {
  double scale = 0.0;
  double constant = 1.0;  // max(max_ratio, 1 / min_ratio)
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  Witness min_witness;
  Witness max_witness;
  std::size_t pairs = 0;
};

// Ratio extremes of d(Fp, Fq) / d(p, q) over the given pairs.
LocalBilip measure_ratios(const SpaceHandle& source, const SpaceHandle& target, const PointMap& map,
                          const std::vector<std::pair<Point, Point>>& pairs, double scale);

struct DistortionReport {
  QiFit qi;
  std::optional<QsFit> eta;
  std::optional<DeltaEstimate> delta;
  std::vector<LocalBilip> local_bilip;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
};

}  // namespace hypertile
