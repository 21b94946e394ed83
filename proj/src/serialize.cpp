#include "hypertile/serialize.hpp"

#include <cmath>
#include <set>

namespace hypertile {

namespace {

const std::string& h2_tag() {
  static const std::string tag = SpaceHandle::half_space_real(1).describe();
  return tag;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
T need(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + ": missing key '" + key + "'");
  return get_or<T>(j, key, T{});
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(where + ": expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

GridWindow window_from_json(const Json& j) {
  check_keys(j, {"lo", "hi", "cells", "stencil_radius"}, "grid window");
  GridWindow w;
  w.lo = vector_from_json(need<Json>(j, "lo", "grid window"), "grid window lo");
  w.hi = vector_from_json(need<Json>(j, "hi", "grid window"), "grid window hi");
  w.cells = need<std::vector<int>>(j, "cells", "grid window");
  w.stencil_radius = get_or(j, "stencil_radius", 4);
  return w;
}

}  // namespace

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw InputError(where + ": unknown key '" + it.key() + "'");
}

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json tagged(double v, const std::string& metric) { return Json{{"value", number(v)}, {"metric", metric}}; }

Json to_json(const Point& p) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(number(p(i)));
  return a;
}

Point point_from_json(const Json& j) { return vector_from_json(j, "point"); }

Json to_json(const Witness& w, const std::string& metric) {
  Json pts = Json::array();
  for (const auto& p : w.points) pts.push_back(to_json(p));
  return {{"points", pts}, {"value", tagged(w.value, metric)}};
}

Json to_json(const DeltaEstimate& d, const std::string& metric) {
  return {{"delta", tagged(d.delta, metric)}, {"quadruples", d.quadruples}, {"witness", to_json(d.witness, metric)}};
}

Json to_json(const QiFit& q, const std::string& source, const std::string& target) {
  return {{"L", tagged(q.constants.L, "ratio")},
          {"C", tagged(q.constants.C, target)},
          {"saturated", q.saturated},
          {"pairs", q.pairs},
          {"source_metric", source},
          {"witness", to_json(q.witness, target)}};
}

Json to_json(const QsFit& q) {
  Json per = Json::array();
  for (const auto& [a, c] : q.per_alpha) per.push_back({{"alpha", a}, {"c", tagged(c, "ratio")}});
  return {{"alpha", q.modulus.alpha}, {"c", tagged(q.modulus.c, "ratio")}, {"per_alpha", per},
          {"witness", to_json(q.witness, "ratio")}};
}

Json to_json(const QsCheck& q) {
  return {{"pass", q.pass}, {"collapsed", q.collapsed}, {"worst_ratio", tagged(q.worst_ratio, "ratio")},
          {"triples", q.triples}, {"witness", to_json(q.witness, "ratio")}};
}

Json to_json(const LocalBilip& b, const std::string& metric) {
  return {{"scale", tagged(b.scale, metric)},
          {"constant", tagged(b.constant, "ratio")},
          {"min_ratio", tagged(b.min_ratio, "ratio")},
          {"max_ratio", tagged(b.max_ratio, "ratio")},
          {"pairs", b.pairs},
          {"min_witness", to_json(b.min_witness, "ratio")},
          {"max_witness", to_json(b.max_witness, "ratio")}};
}

Json to_json(const InjectivityReport& r, const std::string& metric) {
  return {{"pass", r.pass},
          {"small_scale_ok", r.small_scale_ok},
          {"large_scale_ok", r.large_scale_ok},
          {"min_image_gap_far", tagged(r.min_image_gap_far, metric)},
          {"pairs", r.pairs},
          {"small_scale_witness", to_json(r.small_scale_witness, metric)},
          {"large_scale_witness", to_json(r.large_scale_witness, metric)}};
}

Json to_json(const DistortionReport& r, const std::string& metric) {
  Json j;
  j["qi"] = to_json(r.qi, metric, metric);
  if (r.eta) j["eta"] = to_json(*r.eta);
  if (r.delta) j["delta"] = to_json(*r.delta, metric);
  j["local_bilipschitz"] = Json::array();
  for (const auto& b : r.local_bilip) j["local_bilipschitz"].push_back(to_json(b, metric));
  j["sample_count"] = r.sample_count;
  j["seed"] = r.seed;
  return j;
}

Json to_json(const ConditionCheck& c) {
  Json w = Json::array();
  for (const auto& p : c.witness) w.push_back(to_json(p));
  return {{"pass", c.pass}, {"samples", c.samples}, {"failures", c.failures}, {"worst", number(c.worst)}, {"witness", w}};
}

Json to_json(const TilingReport& r) {
  return {{"conforming", r.conforming()},
          {"containment", to_json(r.containment)},
          {"covering", to_json(r.covering)},
          {"disjoint", to_json(r.disjoint)},
          {"homothety", to_json(r.homothety)},
          {"conjugation", to_json(r.conjugation)}};
}

Json to_json(const TileId& t) {
  Json g = Json::array();
  for (Eigen::Index i = 0; i < t.gamma.size(); ++i) g.push_back(t.gamma(i));
  return {{"layer", t.layer}, {"gamma", g}};
}

Json to_json(const ApproxReport& r) {
  const std::string& h = h2_tag();
  Json j;
  j["success"] = r.success;
  j["stage"] = r.stage;
  j["messages"] = r.messages;
  j["blending_note"] = r.blending_note;
  j["color_count"] = r.color_count;
  j["epsilon_ladder"] = Json::array();
  for (double e : r.epsilon_ladder) j["epsilon_ladder"].push_back(tagged(e, h));
  j["ladder_deviation"] = Json::array();
  for (double e : r.ladder_deviation) j["ladder_deviation"].push_back(tagged(e, h));
  j["density_used"] = r.density_used;
  j["refinements"] = r.refinements;
  j["normalized_tiles"] = r.normalized_tiles;
  j["tiles"] = Json::array();
  for (const auto& t : r.tiles)
    j["tiles"].push_back({{"tile", to_json(t.tile)},
                          {"color", t.color},
                          {"budget", tagged(t.budget, h)},
                          {"approx_deviation", tagged(t.approx_deviation, h)},
                          {"placed_deviation", tagged(t.placed_deviation, h)},
                          {"final_deviation", tagged(t.final_deviation, h)}});
  j["mesh"] = {{"vertices", r.vertex_count},
               {"triangles", r.triangle_count},
               {"seam_max", tagged(r.seam_max, "base")},
               {"t_junctions", r.t_junctions},
               {"degenerate_triangles", r.degenerate_triangles},
               {"orientation_failures", r.orientation_failures},
               {"orientation_witness", r.orientation_witness},
               {"collar_overlap", r.collar_overlap}};
  j["boundary"] = {{"x_max", tagged(r.boundary_x_max, "base")}, {"hyperbolic_max", tagged(r.boundary_hyperbolic_max, h)}};
  j["injectivity_epsilon"] = tagged(r.injectivity_epsilon, h);
  j["injectivity"] = to_json(r.injectivity, h);
  j["qi"] = to_json(r.qi, h, h);
  auto cmp = [&](const ScaleComparison& s) {
    return Json{{"scale", tagged(s.scale, h)}, {"pipeline", to_json(s.pipeline, h)}, {"raw_lift", to_json(s.raw_lift, h)}};
  };
  j["bilipschitz"] = Json::array();
  for (const auto& s : r.bilipschitz) j["bilipschitz"].push_back(cmp(s));
  j["critical"] = cmp(r.critical);
  j["critical"]["pipeline_spread"] = tagged(r.critical.pipeline.max_ratio / r.critical.pipeline.min_ratio, "ratio");
  j["critical"]["raw_lift_spread"] = tagged(r.critical.raw_lift.max_ratio / r.critical.raw_lift.min_ratio, "ratio");
  return j;
}

Json to_json(const PipelineConfig& c) {
  return {{"x_min", c.x_min},
          {"x_max", c.x_max},
          {"layer_min", c.layer_min},
          {"layer_max", c.layer_max},
          {"grid_density", c.grid_density},
          {"epsilon", c.epsilon},
          {"collar_width", c.collar_width},
          {"r_scale", c.r_scale},
          {"max_refinements", c.max_refinements},
          {"injectivity_samples", c.injectivity_samples},
          {"distortion_samples", c.distortion_samples},
          {"ball_samples", c.ball_samples},
          {"seed", c.seed},
          {"critical_x", c.critical_x},
          {"critical_band", c.critical_band},
          {"critical_anchors", c.critical_anchors}};
}

PipelineConfig pipeline_config_from_json(const Json& j) {
  check_keys(j, {"x_min", "x_max", "layer_min", "layer_max", "grid_density", "epsilon", "collar_width", "r_scale",
                 "max_refinements", "injectivity_samples", "distortion_samples", "ball_samples", "seed", "critical_x",
                 "critical_band", "critical_anchors"},
             "pipeline config");
  PipelineConfig c;
  c.x_min = get_or(j, "x_min", c.x_min);
  c.x_max = get_or(j, "x_max", c.x_max);
  c.layer_min = get_or(j, "layer_min", c.layer_min);
  c.layer_max = get_or(j, "layer_max", c.layer_max);
  c.grid_density = get_or(j, "grid_density", c.grid_density);
  c.epsilon = get_or(j, "epsilon", c.epsilon);
  c.collar_width = get_or(j, "collar_width", c.collar_width);
  c.r_scale = get_or(j, "r_scale", c.r_scale);
  c.max_refinements = get_or(j, "max_refinements", c.max_refinements);
  c.injectivity_samples = get_or(j, "injectivity_samples", c.injectivity_samples);
  c.distortion_samples = get_or(j, "distortion_samples", c.distortion_samples);
  c.ball_samples = get_or(j, "ball_samples", c.ball_samples);
  c.seed = get_or(j, "seed", c.seed);
  c.critical_x = get_or(j, "critical_x", c.critical_x);
  c.critical_band = get_or(j, "critical_band", c.critical_band);
  c.critical_anchors = get_or(j, "critical_anchors", c.critical_anchors);
  c.validate();
  return c;
}

SpaceHandle space_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("space: expected an object");
  const auto model = need<std::string>(j, "model", "space");
  if (model == "euclidean" || model == "half-space-real") {
    check_keys(j, {"model", "n"}, "space");
    int n = get_or(j, "n", 1);
    if (n < 1) throw InputError("space: n must be positive");
    return model == "euclidean" ? SpaceHandle::euclidean(n) : SpaceHandle::half_space_real(n);
  }
  if (model == "twisted") {
    check_keys(j, {"model", "lambda"}, "space");
    return SpaceHandle::twisted(need<std::vector<int>>(j, "lambda", "space"));
  }
  if (model == "half-space-twisted") {
    check_keys(j, {"model", "lambda", "window"}, "space");
    return SpaceHandle::half_space_twisted(need<std::vector<int>>(j, "lambda", "space"),
                                           window_from_json(need<Json>(j, "window", "space")));
  }
  if (model == "bump-half-plane") {
    check_keys(j, {"model", "a", "amplitude", "window"}, "space");
    BumpParams b;
    b.a = get_or(j, "a", b.a);
    b.amplitude = get_or(j, "amplitude", b.amplitude);
    return SpaceHandle::bump_half_plane(b, window_from_json(need<Json>(j, "window", "space")));
  }
  if (model == "heisenberg" || model == "complex-hyperbolic" || model == "heisenberg-half-space") {
    check_keys(j, {"model"}, "space");
    if (model == "heisenberg") return SpaceHandle::heisenberg();
    if (model == "complex-hyperbolic") return SpaceHandle::complex_hyperbolic();
    return SpaceHandle::heisenberg_half_space();
  }
  if (model == "con-of") {
    check_keys(j, {"model", "base"}, "space");
    return SpaceHandle::con_of(space_from_json(need<Json>(j, "base", "space")));
  }
  throw InputError("space: unknown model '" + model + "'");
}

Region region_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("region: expected an array of axes");
  Region r;
  for (const auto& a : j) {
    check_keys(a, {"lo", "hi", "log"}, "region axis");
    r.axes.push_back({need<double>(a, "lo", "region axis"), need<double>(a, "hi", "region axis"), get_or(a, "log", false)});
  }
  r.validate();
  return r;
}

Json to_json(const Region& r) {
  Json a = Json::array();
  for (const auto& x : r.axes) a.push_back({{"lo", x.lo}, {"hi", x.hi}, {"log", x.log_scale}});
  return a;
}

BoundaryMap boundary_map_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("map: expected an object");
  const auto family = need<std::string>(j, "family", "map");
  if (family == "identity") {
    check_keys(j, {"family", "n"}, "map");
    return BoundaryMap::identity(get_or(j, "n", 1));
  }
  if (family == "affine") {
    check_keys(j, {"family", "A", "b"}, "map");
    const Json& rows = need<Json>(j, "A", "map");
    if (!rows.is_array() || rows.empty()) throw InputError("map: A must be a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd row = vector_from_json(rows[static_cast<std::size_t>(i)], "map A");
      if (row.size() != n) throw InputError("map: A must be square");
      A.row(i) = row.transpose();
    }
    Eigen::VectorXd b = j.contains("b") ? vector_from_json(j["b"], "map b") : Eigen::VectorXd::Zero(n);
    return BoundaryMap::affine(A, b);
  }
  if (family == "power1d") {
    check_keys(j, {"family", "p"}, "map");
    return BoundaryMap::power1d(need<double>(j, "p", "map"));
  }
  if (family == "heis-translation") {
    check_keys(j, {"family", "g"}, "map");
    return BoundaryMap::heis_left_translation(vector_from_json(need<Json>(j, "g", "map"), "map g"));
  }
  if (family == "heis-dilation") {
    check_keys(j, {"family", "s"}, "map");
    return BoundaryMap::heis_dilation(need<double>(j, "s", "map"));
  }
  if (family == "table") {
    check_keys(j, {"family", "xs", "ys"}, "map");
    return BoundaryMap::table(need<std::vector<double>>(j, "xs", "map"), need<std::vector<double>>(j, "ys", "map"));
  }
  throw InputError("map: unknown family '" + family + "'");
}

}  // namespace hypertile
