#pragma once

#include "hypertile/core.hpp"
#include "hypertile/metric.hpp"
#include "hypertile/space.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hypertile {

// Integer coordinates of a lattice element.
using LatticeVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

bool lattice_less(const LatticeVec& a, const LatticeVec& b);

enum class LatticeKind { Translation, Heisenberg };

// Heisenberg fundamental domain {zeta in [0,1)^2, c(zeta) <= u < c(zeta) + 1}.
// With the k table set, c is the bounded solution of
//   c(z) = (c(2z - m) + 2 (m2 x' - m1 y') + k_m) / 4,  m = floor(2z),
// which makes delta_2 K an exact union of 16 lattice translates of K.
// flat = true gives c = 0, the coordinate box.
struct HeisDomain {
  std::array<std::int64_t, 4> k{0, 1, -1, 0};  // index m1 + 2 m2
  bool flat = false;
  int depth = 40;

  double height(double x, double y) const;
  // limit of the height along (x, y) + eta (dx, dy) as eta -> 0+
  double height_from(double x, double y, double dx, double dy) const;
};

// Lattice elements gamma != e whose translate closure meets the closure of K,
// by one-sided limits of the height along shared edges and corners
// (tolerance 1e-9). Symmetric.
std::vector<LatticeVec> heis_neighbor_set(const HeisDomain& dom, int samples_per_edge = 2048);

class StackedTilingSpec {
 public:
  static StackedTilingSpec dyadic(int n);
  static StackedTilingSpec twisted(std::vector<int> lambda);
  static StackedTilingSpec heisenberg();
  // coordinate box K with the naive 16 translates; fails the covering check
  static StackedTilingSpec heisenberg_box();

  const std::string& name() const { return name_; }
  const SpaceHandle& base() const { return base_; }
  LatticeKind lattice() const { return lattice_; }
  int dimension() const { return static_cast<int>(scale_.size()); }
  double alpha_factor() const { return a_; }
  // alpha acts diagonally; these are the per-coordinate factors
  const LatticeVec& alpha_scale() const { return scale_; }
  const std::vector<LatticeVec>& gamma_prime() const { return gamma_prime_; }
  // closures of K and gamma K meet, gamma != e; symmetric
  const std::vector<LatticeVec>& neighbors() const { return neighbors_; }
  const HeisDomain& heis_domain() const { return heis_; }
  bool box_domain() const { return lattice_ == LatticeKind::Translation; }

  void set_gamma_prime(std::vector<LatticeVec> g);
  // distinct products gamma' nu, nu in N or e; cross-layer adjacency steps
  const std::vector<LatticeVec>& layer_steps() const { return steps_; }

  // group
  LatticeVec identity() const { return LatticeVec::Zero(dimension()); }
  LatticeVec multiply(const LatticeVec& a, const LatticeVec& b) const;
  LatticeVec inverse(const LatticeVec& a) const { return -a; }
  LatticeVec conj(const LatticeVec& g, int times = 1) const;  // alpha^k g alpha^-k
  std::optional<LatticeVec> unconj(const LatticeVec& g, int times = 1) const;
  std::vector<LatticeVec> generators() const;

  // action on the base
  Point act(const LatticeVec& g, const Point& x) const;
  Point alpha(const Point& x, int power = 1) const;

  // fundamental domain
  bool in_domain(const Point& x, double tol = 0.0) const;  // half-open, tol widens
  LatticeVec address(const Point& x) const;                 // x in address(x) K
  Point domain_center() const;
  Point sample_domain(SampleRng& rng) const;

 private:
  void compute_neighbors();

  std::string name_;
  SpaceHandle base_ = SpaceHandle::euclidean(1);
  LatticeKind lattice_ = LatticeKind::Translation;
  double a_ = 2.0;
  LatticeVec scale_;
  std::vector<LatticeVec> gamma_prime_;
  std::vector<LatticeVec> neighbors_;
  std::vector<LatticeVec> steps_;
  HeisDomain heis_;
};

// "dyadic-euclidean(n)", "dyadic(n)", "twisted(l1,l2,...)", "heisenberg",
// "heisenberg-box"
StackedTilingSpec builtin_spec(const std::string& name);

struct ConditionCheck {
  bool pass = true;
  std::size_t samples = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  std::vector<Point> witness;
};

struct TilingReport {
  ConditionCheck containment;  // gamma' K inside alpha K
  ConditionCheck covering;     // alpha K inside the union
  ConditionCheck disjoint;     // no point in two interiors
  ConditionCheck homothety;    // d(alpha x, alpha y) = a d(x, y)
  ConditionCheck conjugation;  // alpha gamma alpha^-1 acts as a lattice element
  bool conforming() const {
    return containment.pass && covering.pass && disjoint.pass && homothety.pass && conjugation.pass;
  }
};

TilingReport verify_stacked_tiling(const StackedTilingSpec& spec, std::size_t sample_count,
                                   std::uint64_t seed);

// ---------------------------------------------------------------- tiles

// alpha^layer gamma Q0, Q0 = K x [1, a]
struct TileId {
  int layer = 0;
  LatticeVec gamma;

  bool operator==(const TileId& o) const { return layer == o.layer && gamma == o.gamma; }
  bool operator!=(const TileId& o) const { return !(*this == o); }
  bool operator<(const TileId& o) const {
    return layer != o.layer ? layer < o.layer : lattice_less(gamma, o.gamma);
  }
};

std::ostream& operator<<(std::ostream& os, const TileId& t);

// Base window box: each axis is [lo, hi), or the single value lo when hi == lo.
struct BaseWindow {
  Point lo, hi;
};

std::vector<TileId> tiles_in_window(const StackedTilingSpec& spec, int n_min, int n_max,
                                    const BaseWindow& window);

TileId tile_of(const StackedTilingSpec& spec, const Point& p);  // p = (x..., t)
bool tile_contains(const StackedTilingSpec& spec, const TileId& q, const Point& p, double tol = 0.0);
Point tile_center(const StackedTilingSpec& spec, const TileId& q);

// All tiles meeting q (closed tiles), q excluded, sorted.
std::vector<TileId> tile_neighbors(const StackedTilingSpec& spec, const TileId& q);
bool tiles_intersect(const StackedTilingSpec& spec, const TileId& a, const TileId& b);

constexpr int kUnreachable = std::numeric_limits<int>::max();

class TileGraph {
 public:
  TileGraph() = default;
  TileGraph(std::vector<TileId> tiles, std::vector<std::vector<std::size_t>> adjacency);

  const std::vector<TileId>& tiles() const { return tiles_; }
  const std::vector<std::vector<std::size_t>>& adjacency() const { return adj_; }
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;  // i < j, sorted
  std::size_t edge_count() const;
  std::size_t max_degree() const;
  std::optional<std::size_t> index_of(const TileId& t) const;

  const std::vector<int>& coloring() const { return colors_; }
  bool colored() const { return !colors_.empty(); }
  int color_count() const;
  void set_coloring(std::vector<int> colors);  // throws InternalError on a monochromatic edge
  bool coloring_proper() const;

 private:
  std::vector<TileId> tiles_;
  std::map<TileId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> colors_;
};

TileGraph adjacency_graph(const StackedTilingSpec& spec, std::vector<TileId> tiles);

int graph_distance(const TileGraph& g, const TileId& a, const TileId& b);
std::vector<int> graph_distances_from(const TileGraph& g, std::size_t source);

// BFS order from Q0 (or the least tile if Q0 is absent), smallest free color.
std::vector<std::size_t> bfs_order(const TileGraph& g);
TileGraph greedy_coloring(TileGraph g);
// (layer mod 2, gamma mod 2): proper for every builtin spec and independent
// of the window.
TileGraph periodic_coloring(const StackedTilingSpec& spec, TileGraph g);

// Gamma_alpha element alpha^layer gamma
struct GammaAlpha {
  int layer = 0;
  LatticeVec gamma;
};

std::optional<TileId> apply(const StackedTilingSpec& spec, const GammaAlpha& g, const TileId& q);
std::optional<TileId> apply_inverse(const StackedTilingSpec& spec, const GammaAlpha& g, const TileId& q);

struct Decomposition {
  GammaAlpha g;
  std::size_t gamma_prime_index = 0;
  bool combinatorial_isometry = false;  // every neighbor of q maps to a tile under g^-1
};

Decomposition decompose_tile(const StackedTilingSpec& spec, const TileId& q);

struct Normalization {
  int n = 0;
  LatticeVec gamma;
  // gamma alpha^n f, checked at x0, y0
  Point fx0, fy0;
  bool normalized = false;
};

Normalization normalize_map(const StackedTilingSpec& spec, const PointMap& f, const Point& x0,
                            const Point& y0);

// one line per edge: "n g.. -- n' g'.. c c'", '-' for missing colors
void write_edge_list(std::ostream& os, const StackedTilingSpec& spec, const TileGraph& g);

}  // namespace hypertile
