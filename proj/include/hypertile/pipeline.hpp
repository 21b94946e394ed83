#pragma once

#include "hypertile/lifting.hpp"
#include "hypertile/metric.hpp"
#include "hypertile/tiling.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hypertile {

using Vec2 = Eigen::Vector2d;

// Triangulated patch of H^2 (vertices (x, t), t > 0) with per-vertex images.
// Point location goes through rectangular blocks of uniform cells; each cell
// lists the triangles covering it.
class PLMap2D {
 public:
  struct Block {
    double x0 = 0, t0 = 0, w = 1, h = 1;
    int nx = 1, ny = 1;
    std::vector<std::vector<int>> cells;  // nx * ny, row-major in t
    bool contains(const Vec2& p, double tol = 0.0) const;
  };

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Vec2>& images() const { return images_; }
  std::vector<Vec2>& images() { return images_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  int add_vertex(const Vec2& v, const Vec2& image = Vec2::Zero());
  int add_triangle(int a, int b, int c);  // counter-clockwise in (x, t)
  std::size_t add_block(Block b);
  void index_block(std::size_t block, std::int64_t key);  // dyadic key for fast lookup

  // barycentric coordinates of p in triangle k
  Eigen::Vector3d barycentric(int k, const Vec2& p) const;
  Vec2 eval_in(int k, const Vec2& p) const;
  std::optional<int> locate(const Vec2& p) const;
  std::optional<Vec2> eval(const Vec2& p) const;

  double signed_area(int k) const;
  double image_signed_area(int k) const;

  // sort-stable text export: "v x t fx ft" lines then "f i j k" (0-based)
  void write_mesh(std::ostream& os) const;

 private:
  std::optional<int> locate_in(const Block& b, const Vec2& p) const;

  std::vector<Vec2> vertices_;
  std::vector<Vec2> images_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Block> blocks_;
  std::map<std::int64_t, std::size_t> keyed_;
};

double h2_distance(const Vec2& a, const Vec2& b);

struct PipelineConfig {
  double x_min = -2.0, x_max = 2.0;  // multiples of 2^layer_max
  int layer_min = -3, layer_max = 0;
  int grid_density = 16;  // cells per tile edge
  double epsilon = 0.05;
  double collar_width = 0.2;  // fraction of the tile's side
  double r_scale = 1.0;
  int max_refinements = 3;
  std::size_t injectivity_samples = 1500;
  std::size_t distortion_samples = 4000;
  int ball_samples = 64;
  std::uint64_t seed = 1;
  // near-critical comparison: anchors on x = critical_x and in the band
  // |x - critical_x| <= critical_band, window heights
  double critical_x = 0.0;
  double critical_band = 0.05;
  std::size_t critical_anchors = 200;

  void validate() const;
  // eps_i = eps 2^(i - N), i = 1..N
  std::vector<double> epsilon_ladder(int colors) const;
};

// Tile (n, g) of the dyadic tiling of H^2 enlarged by the collar.
struct TileRect {
  double x0, x1, t0, t1;  // core
  double cx, ct;          // collar widths
  bool in_core(const Vec2& p) const { return p.x() >= x0 && p.x() <= x1 && p.y() >= t0 && p.y() <= t1; }
  bool in_enlarged(const Vec2& p) const {
    return p.x() >= x0 - cx && p.x() <= x1 + cx && p.y() >= t0 - ct && p.y() <= t1 + ct;
  }
  bool enlarged_meets(const TileRect& o) const;
  // 1 on the core, smooth ramp to 0 at the outer collar edge
  double ramp(const Vec2& p) const;
};

TileRect tile_rect(const TileId& q, double collar_width);

struct TileApprox {
  TileId tile;
  PLMap2D map;
  int density = 0;
  double deviation = 0.0;  // sampled hyperbolic distance to the lift over the enlarged tile
  Vec2 witness = Vec2::Zero();
};

TileApprox pl_approximate_tile(const LiftedMap& lift, const TileId& tile, int density, double collar_width);

// Patchwork on the conforming window mesh. Unplaced vertices carry no value yet.
struct Patchwork {
  PLMap2D mesh;
  std::vector<TileId> tiles;
  std::vector<std::vector<int>> tile_vertices;  // vertices of each tile's core cells
  std::vector<char> placed;
  std::vector<int> vertex_bottom;  // 1 on the lowest layer's bottom edge
};

// Conforming mesh over the tiles: density x density cells per tile, the
// bottom row of each tile above the lowest layer split to meet the finer
// layer below without T-junctions.
Patchwork window_mesh(const std::vector<TileId>& tiles, int density);

struct BlendResult {
  bool ok = true;
  int degenerate_triangle = -1;  // witness
  std::size_t vertices_changed = 0;
};

// Vertices in the enlarged tile get (1 - phi) old + phi new, or new where
// nothing was placed yet; phi = rect.ramp.
BlendResult blend_collar(Patchwork& pw, const TileApprox& next, const TileRect& rect);

struct ScaleComparison {
  double scale = 0.0;
  LocalBilip pipeline;
  LocalBilip raw_lift;  // same pairs
};

struct TileReport {
  TileId tile;
  int color = 0;
  double budget = 0.0;          // eps of its color
  double approx_deviation = 0.0;  // local approximant
  double placed_deviation = 0.0;  // patchwork right after its color
  double final_deviation = 0.0;   // patchwork after all colors
};

struct ApproxReport {
  bool success = false;
  std::string stage;  // first failing stage, empty on success
  std::vector<std::string> messages;
  std::string blending_note;

  int color_count = 0;
  std::vector<double> epsilon_ladder;
  std::vector<double> ladder_deviation;  // max on placed tiles after each color
  int density_used = 0;
  int refinements = 0;
  std::vector<TileReport> tiles;
  std::size_t normalized_tiles = 0;

  std::size_t vertex_count = 0, triangle_count = 0;
  double seam_max = 0.0;
  std::size_t t_junctions = 0;
  std::size_t degenerate_triangles = 0;
  std::size_t orientation_failures = 0;
  int orientation_witness = -1;
  bool collar_overlap = false;

  double boundary_x_max = 0.0;           // |F(x, t_min).x - f(x)| over bottom vertices
  double boundary_hyperbolic_max = 0.0;  // d_H(F(v), lift(v)) over bottom vertices

  double injectivity_epsilon = 0.0;  // 1/3 min d(lift z, lift w), d(z, w) = r
  InjectivityReport injectivity;
  QiFit qi;
  std::vector<ScaleComparison> bilipschitz;
  ScaleComparison critical;  // directional extremes at r/4 near critical_x
  double runtime_seconds = 0.0;
};

struct PipelineResult {
  Patchwork patchwork;
  ApproxReport report;
};

PipelineResult run_pipeline(const BoundaryMap& f, const PipelineConfig& config);

// pairs of local_pairs whose both ends the map covers
LocalBilip measure_bilipschitz(const PLMap2D& map, double scale, const Sampler& sampler);
std::vector<LocalBilip> measure_bilipschitz(const PLMap2D& map, const std::vector<double>& scales,
                                            const Sampler& sampler);

// Ratio extremes around each anchor with the direction optimized per map:
// lengths on a log grid in [scale/1000, scale], 64 directions then
// golden-section on the best min and max. Random pairs miss a thin
// near-kernel direction; this does not. Points the map does not cover are
// skipped.
using PlaneMap = std::function<std::optional<Vec2>(const Vec2&)>;
LocalBilip directional_extremes(const PlaneMap& map, const std::vector<Point>& anchors, double scale,
                                int lengths = 7);
PlaneMap plane_map(const PLMap2D& map);
PlaneMap plane_map(const LiftedMap& lift);

// max over interior edges of the two one-sided evaluations at edge points
double seam_discontinuity(const PLMap2D& map);
// edges used by one triangle off the outer rectangle
std::size_t count_t_junctions(const PLMap2D& map, double x0, double x1, double t0, double t1);

}  // namespace hypertile
