#include "hypertile/commands.hpp"

#include "hypertile/con_space.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace hypertile {

namespace {

// Reads keys of a config object and records every resolved value, so the
// run record shows defaults as well.
class Cfg {
 public:
  Cfg(const Json& raw, std::string where, std::initializer_list<const char*> allowed) : raw_(raw), where_(std::move(where)) {
    check_keys(raw_, allowed, where_);
    if (!raw_.contains("seed")) throw InputError(where_ + ": 'seed' is required");
  }

  template <typename T>
  T get(const char* key, T fallback) {
    T v = fallback;
    if (raw_.contains(key)) {
      try {
        v = raw_.at(key).get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw InputError(where_ + ": key '" + key + "': " + e.what());
      }
    }
    resolved[key] = v;
    return v;
  }

  Json object(const char* key, Json fallback) {
    Json v = raw_.contains(key) ? raw_.at(key) : std::move(fallback);
    resolved[key] = v;
    return v;
  }

  bool has(const char* key) const { return raw_.contains(key); }
  std::uint64_t seed() { return get<std::uint64_t>("seed", 0); }

  Json resolved = Json::object();

 private:
  const Json& raw_;
  std::string where_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool within(double v, const Json& range) {
  if (!range.is_array() || range.size() != 2) throw InputError("expect: ranges are [lo, hi]");
  return v >= range[0].get<double>() && v <= range[1].get<double>();
}

Region default_region(const SpaceHandle& s) {
  Region r;
  switch (s.model()) {
    case ModelTag::Heisenberg: r.axes = {{-2, 2, false}, {-2, 2, false}, {-4, 4, false}}; break;
    case ModelTag::ComplexHyperbolic: r.axes = {{-2, 2, false}, {-2, 2, false}, {-4, 4, false}, {0.1, 10, true}}; break;
    case ModelTag::HeisenbergHalfSpace: r.axes = {{-2, 2, false}, {-2, 2, false}, {-4, 4, false}, {0.1, 10, true}}; break;
    case ModelTag::HalfSpaceTwisted:
    case ModelTag::BumpHalfPlane: {
      // stay inside the grid window
      auto g = s.grid();
      if (!g) throw InputError("region: grid space without a window");
      const auto& win = g->window();
      for (Eigen::Index i = 0; i < win.lo.size(); ++i) {
        double lo = win.lo(i), hi = win.hi(i);
        bool last = i + 1 == win.lo.size();
        if (last) {
          double m = std::sqrt(lo * hi), q = std::pow(hi / lo, 0.25);
          r.axes.push_back({m / q, m * q, true});
        } else {
          double c = 0.5 * (lo + hi), h = 0.25 * (hi - lo);
          r.axes.push_back({c - h, c + h, false});
        }
      }
      break;
    }
    default:
      if (s.has_height()) {
        for (int i = 0; i + 1 < s.point_dimension(); ++i) r.axes.push_back({-10, 10, false});
        r.axes.push_back({0.1, 10, true});
      } else {
        for (int i = 0; i < s.point_dimension(); ++i) r.axes.push_back({-5, 5, false});
      }
  }
  return r;
}

Region region_or_default(Cfg& c, const SpaceHandle& s) {
  Region r = c.has("region") ? region_from_json(c.object("region", {})) : default_region(s);
  if (r.dimension() != s.point_dimension())
    throw InputError("region: " + std::to_string(r.dimension()) + " axes for a space of dimension " +
                     std::to_string(s.point_dimension()));
  c.resolved["region"] = to_json(r);
  return r;
}

}  // namespace

void RunRecord::check(const std::string& name, bool ok, const std::string& detail) {
  checks.push_back({{"name", name}, {"pass", ok}, {"detail", detail}});
  pass = pass && ok;
}

Json RunRecord::to_json() const {
  Json j;
  j["schema"] = kRunSchema;
  j["version"] = HYPERTILE_VERSION;
  j["experiment"] = experiment;
  j["status"] = pass ? "pass" : "fail";
  j["pass"] = pass;
  j["config"] = config;
  j["outputs"] = outputs;
  j["checks"] = checks;
  j["wall_time"] = tagged(wall_seconds, "seconds");
  return j;
}

// ---------------------------------------------------------------- experiments

DeltaSweep delta_sweep(const SpaceHandle& space, const Sampler& sampler, int doublings, double plateau_ratio,
                       double growth_ratio) {
  if (doublings < 1) throw InputError("delta sweep: need at least one doubling");
  DeltaSweep out;
  for (int k = 0; k <= doublings; ++k) {
    double f = std::ldexp(1.0, k);
    out.factors.push_back(f);
    out.estimates.push_back(delta_four_point_estimate(space, Sampler{sampler.region.scaled(f), sampler.count, sampler.seed}));
  }
  out.plateau = out.growth = true;
  for (int k = 0; k < doublings; ++k) {
    double a = out.estimates[k].delta, b = out.estimates[k + 1].delta;
    double r = a > 0.0 ? b / a : (b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    out.ratios.push_back(r);
    out.plateau = out.plateau && r <= plateau_ratio;
    out.growth = out.growth && r >= growth_ratio;
  }
  return out;
}

HoroBand horometric_band(const SpaceHandle& base, double a, const Sampler& sampler, double s_max) {
  if (base.has_height()) throw InputError("horometric band: the base must not have a height coordinate");
  auto pts = sample_points({sampler.region, 2 * sampler.count, sampler.seed});
  const auto eta = RaySpec::vertical(Point::Zero(base.point_dimension()));
  HoroBand out;
  out.s_max = s_max;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    double d = base.distance(pts[i], pts[i + 1]);
    if (!(d > 0.0)) continue;
    auto q = parabolic_quasimetric(base, a, eta, RaySpec::downward(pts[i]), RaySpec::downward(pts[i + 1]), s_max);
    double r = q.value / d;
    out.min_ratio = std::min(out.min_ratio, r);
    out.max_ratio = std::max(out.max_ratio, r);
    out.converged = out.converged && q.converged;
    ++out.pairs;
  }
  if (out.pairs == 0) throw InputError("horometric band: no pair with positive distance");
  out.band = out.max_ratio / out.min_ratio;
  return out;
}

// ---------------------------------------------------------------- commands

RunRecord cmd_delta(const Json& raw) {
  Cfg c(raw, "delta", {"seed", "space", "region", "count", "doublings", "plateau_ratio", "growth_ratio", "expect"});
  RunRecord rec;
  rec.experiment = "delta";
  const auto seed = c.seed();
  SpaceHandle space = space_from_json(c.object("space", {{"model", "half-space-real"}, {"n", 1}}));
  Region region = region_or_default(c, space);
  auto count = c.get<std::size_t>("count", 10000);
  int doublings = c.get("doublings", 1);
  double pr = c.get("plateau_ratio", 1.25), gr = c.get("growth_ratio", 2.0);
  auto expect = c.get<std::string>("expect", "none");
  if (expect != "none" && expect != "plateau" && expect != "growth" && expect != "zero")
    throw InputError("delta: expect must be none, plateau, growth or zero");

  auto sw = delta_sweep(space, {region, count, seed}, doublings, pr, gr);
  const std::string tag = space.describe();
  Json steps = Json::array();
  std::ostringstream csv;
  csv << "factor,delta,quadruples\n";
  csv.precision(17);
  for (std::size_t k = 0; k < sw.factors.size(); ++k) {
    steps.push_back({{"factor", sw.factors[k]}, {"region", to_json(region.scaled(sw.factors[k]))},
                     {"estimate", to_json(sw.estimates[k], tag)}});
    csv << sw.factors[k] << "," << sw.estimates[k].delta << "," << sw.estimates[k].quadruples << "\n";
  }
  Json ratios = Json::array();
  for (double r : sw.ratios) ratios.push_back(tagged(r, "ratio"));
  rec.outputs = {{"space", tag}, {"steps", steps}, {"ratios", ratios}, {"plateau", sw.plateau}, {"growth", sw.growth}};
  if (expect == "plateau") rec.check("plateau", sw.plateau, "every doubling ratio <= " + fmt(pr));
  if (expect == "growth") rec.check("growth", sw.growth, "every doubling ratio >= " + fmt(gr));
  if (expect == "zero") {
    bool zero = true;
    for (const auto& e : sw.estimates) zero = zero && e.delta <= 1e-12;
    rec.check("zero", zero, "delta <= 1e-12 at every step");
  }
  rec.csv = csv.str();
  rec.config = c.resolved;
  return rec;
}

RunRecord cmd_con(const Json& raw) {
  Cfg c(raw, "con", {"seed", "base", "a", "region", "pairs", "s_max", "band_limit", "stability", "rows"});
  RunRecord rec;
  rec.experiment = "con";
  const auto seed = c.seed();
  SpaceHandle base = space_from_json(c.object("base", {{"model", "euclidean"}, {"n", 1}}));
  if (base.has_height()) throw InputError("con: base must be a base space (no height coordinate)");
  double a = c.get("a", std::exp(1.0));
  Region region;
  if (c.has("region")) {
    region = region_from_json(c.object("region", {}));
  } else {
    for (int i = 0; i < base.point_dimension(); ++i) region.axes.push_back({0.1, 10, false});
  }
  if (region.dimension() != base.point_dimension()) throw InputError("con: region does not match the base");
  c.resolved["region"] = to_json(region);
  auto pairs = c.get<std::size_t>("pairs", 200);
  double s_max = c.get("s_max", 40.0);
  double limit = c.get("band_limit", 4.0);
  double stab = c.get("stability", 0.1);
  Json rows = c.object("rows", Json::array());

  auto b1 = horometric_band(base, a, {region, pairs, seed}, s_max);
  auto b2 = horometric_band(base, a, {region, pairs, seed}, 2 * s_max);
  auto band_json = [](const HoroBand& b) {
    return Json{{"s_max", b.s_max}, {"min_ratio", tagged(b.min_ratio, "ratio")}, {"max_ratio", tagged(b.max_ratio, "ratio")},
                {"band", tagged(b.band, "ratio")}, {"converged", b.converged}, {"pairs", b.pairs}};
  };
  double drift = std::abs(b2.band / b1.band - 1.0);
  rec.outputs = {{"base", base.describe()}, {"a", a}, {"band", band_json(b1)}, {"band_doubled", band_json(b2)},
                 {"band_drift", tagged(drift, "ratio")}};

  // explicit rows: con points (base..., t); quasimetrics use the rays down
  // to their base points
  auto con = SpaceHandle::con_of(base);
  const auto eta = RaySpec::vertical(Point::Zero(base.point_dimension()));
  ConPoint origin{Point::Zero(base.point_dimension()), 1.0};
  Json out_rows = Json::array();
  bool diagonal_ok = true;
  for (const auto& r : rows) {
    check_keys(r, {"p", "q"}, "con row");
    Point p = point_from_json(r.at("p")), q = point_from_json(r.at("q"));
    if (p.size() != base.point_dimension() + 1 || q.size() != p.size())
      throw InputError("con row: points are (base coordinates..., t)");
    Point bp = p.head(base.point_dimension()), bq = q.head(base.point_dimension());
    double dc = con.distance(p, q), db = base.distance(bp, bq);
    auto par = parabolic_quasimetric(base, a, eta, RaySpec::downward(bp), RaySpec::downward(bq), s_max);
    auto vis = visual_quasimetric(base, a, origin, RaySpec::downward(bp), RaySpec::downward(bq), s_max);
    out_rows.push_back({{"p", to_json(p)}, {"q", to_json(q)}, {"con", tagged(dc, con.describe())},
                        {"base", tagged(db, "base")}, {"parabolic", tagged(par.value, "base")},
                        {"visual", tagged(vis.value, "base")}});
    if (p == q) diagonal_ok = diagonal_ok && dc == 0.0 && db == 0.0 && par.value <= 1e-12 && vis.value <= 1e-12;
  }
  rec.outputs["rows"] = out_rows;
  rec.check("band", b1.band <= limit, "band " + fmt(b1.band) + " <= " + fmt(limit));
  rec.check("band_stable", drift <= stab, "band drift " + fmt(drift) + " <= " + fmt(stab) + " when s_max doubles");
  rec.check("converged", b1.converged && b2.converged, "truncated limits agree at s_max and s_max / 2");
  if (!rows.empty()) rec.check("diagonal", diagonal_ok, "rows with p = q give 0");

  std::ostringstream csv;
  csv.precision(17);
  csv << "s_max,min_ratio,max_ratio,band\n";
  for (const auto& b : {b1, b2}) csv << b.s_max << "," << b.min_ratio << "," << b.max_ratio << "," << b.band << "\n";
  rec.csv = csv.str();
  rec.config = c.resolved;
  return rec;
}

RunRecord cmd_tiling(const Json& raw) {
  Cfg c(raw, "tiling", {"seed", "spec", "layers", "window", "samples", "coloring", "decompose"});
  RunRecord rec;
  rec.experiment = "tiling";
  const auto seed = c.seed();
  auto name = c.get<std::string>("spec", "dyadic(1)");
  StackedTilingSpec spec = builtin_spec(name);
  auto layers = c.get<std::vector<int>>("layers", {-2, 0});
  if (layers.size() != 2 || layers[0] > layers[1]) throw InputError("tiling: layers is [n_min, n_max]");
  const int n = spec.dimension();
  Json wdef = {{"lo", std::vector<double>(n, 0.0)}, {"hi", std::vector<double>(n, n == 1 ? 4.0 : 2.0)}};
  Json wj = c.object("window", wdef);
  check_keys(wj, {"lo", "hi"}, "tiling window");
  BaseWindow window{point_from_json(wj.at("lo")), point_from_json(wj.at("hi"))};
  if (window.lo.size() != n || window.hi.size() != n) throw InputError("tiling: window does not match the base");
  auto samples = c.get<std::size_t>("samples", 10000);
  auto coloring = c.get<std::string>("coloring", "greedy");
  if (coloring != "greedy" && coloring != "periodic") throw InputError("tiling: coloring is greedy or periodic");
  bool decompose = c.get("decompose", true);

  TilingReport vr = verify_stacked_tiling(spec, samples, seed);
  auto tiles = tiles_in_window(spec, layers[0], layers[1], window);
  TileGraph g = adjacency_graph(spec, tiles);
  g = coloring == "greedy" ? greedy_coloring(std::move(g)) : periodic_coloring(spec, std::move(g));

  std::size_t dec_ok = 0, dec_iso = 0;
  Json dec_fail = Json::array();
  if (decompose) {
    for (const auto& q : g.tiles()) {
      try {
        auto d = decompose_tile(spec, q);
        ++dec_ok;
        if (d.combinatorial_isometry) ++dec_iso;
        else dec_fail.push_back(to_json(q));
      } catch (const std::exception& e) {
        dec_fail.push_back(to_json(q));
      }
    }
  }
  rec.outputs = {{"spec", spec.name()},
                 {"base", spec.base().describe()},
                 {"alpha_factor", spec.alpha_factor()},
                 {"gamma_prime_count", spec.gamma_prime().size()},
                 {"neighbor_count", spec.neighbors().size()},
                 {"verify", to_json(vr)},
                 {"tiles", g.tiles().size()},
                 {"edges", g.edge_count()},
                 {"max_degree", g.max_degree()},
                 {"colors", g.color_count()},
                 {"coloring_proper", g.coloring_proper()}};
  if (decompose)
    rec.outputs["decomposition"] = {{"tiles", g.tiles().size()}, {"succeeded", dec_ok}, {"isometry", dec_iso},
                                    {"failed", dec_fail}};
  rec.check("conforming", vr.conforming(), "sample-wise stacked tiling conditions");
  rec.check("coloring_proper", g.coloring_proper(), std::to_string(g.color_count()) + " colors");
  if (decompose)
    rec.check("decomposition", dec_iso == g.tiles().size(),
              std::to_string(dec_iso) + " of " + std::to_string(g.tiles().size()) + " tiles");

  std::ostringstream edges;
  write_edge_list(edges, spec, g);
  rec.artifacts.push_back({"tiling.edges", edges.str()});
  std::ostringstream csv;
  csv << "layer";
  for (int i = 0; i < n; ++i) csv << ",g" << i;
  csv << ",color,degree\n";
  for (std::size_t i = 0; i < g.tiles().size(); ++i) {
    csv << g.tiles()[i].layer;
    for (int k = 0; k < n; ++k) csv << "," << g.tiles()[i].gamma(k);
    csv << "," << g.coloring()[i] << "," << g.adjacency()[i].size() << "\n";
  }
  rec.csv = csv.str();
  rec.config = c.resolved;
  return rec;
}

namespace {

Region default_lift_region(const BoundaryMap& f) {
  Region r;
  if (f.heisenberg()) {
    r.axes = {{-1, 1, false}, {-1, 1, false}, {-1, 1, false}, {0.01, 10, true}};
  } else {
    for (int i = 0; i < f.dimension(); ++i) r.axes.push_back({-1, 1, false});
    r.axes.push_back({0.01, 10, true});
  }
  return r;
}

}  // namespace

RunRecord cmd_lift(const Json& raw) {
  Cfg c(raw, "lift", {"seed", "map", "region", "count", "scales", "ball_samples", "refine", "points", "blowup_threshold",
                      "expect"});
  RunRecord rec;
  rec.experiment = "lift";
  const auto seed = c.seed();
  BoundaryMap f = boundary_map_from_json(c.object("map", {{"family", "power1d"}, {"p", 3.0}}));
  LiftedMap lift{f, {c.get("ball_samples", 64), c.get("refine", true)}};
  lift.params.validate();
  SpaceHandle hp = lift.hplus();
  Region region = c.has("region") ? region_from_json(c.object("region", {})) : default_lift_region(f);
  if (region.dimension() != hp.point_dimension()) throw InputError("lift: region does not match the half-space");
  c.resolved["region"] = to_json(region);
  auto count = c.get<std::size_t>("count", 2000);
  auto scales = c.get<std::vector<double>>("scales", {0.1, 1.0, 10.0});
  Json points = c.object("points", Json::array());
  double blow = c.get("blowup_threshold", 10.0);
  Json expect = c.object("expect", Json::object());
  check_keys(expect, {"qi_L", "local_constant", "blowup"}, "lift expect");

  auto rep = lift_distortion(lift, hp, {region, count, seed}, scales);
  const std::string tag = hp.describe();
  double worst = 1.0, best = std::numeric_limits<double>::infinity();
  for (const auto& b : rep.local_bilip) worst = std::max(worst, b.constant), best = std::min(best, b.constant);
  bool blowup = worst > blow;
  Json evals = Json::array();
  for (const auto& p : points) {
    Point x = point_from_json(p);
    evals.push_back({{"point", to_json(x)}, {"lift", to_json(lift_eval(lift, x))}});
  }
  rec.outputs = {{"map", f.describe()},
                 {"half_space", tag},
                 {"distortion", to_json(rep, tag)},
                 {"max_local_constant", tagged(worst, "ratio")},
                 {"blowup", blowup},
                 {"evaluations", evals}};
  if (expect.contains("qi_L"))
    rec.check("qi_L", within(rep.qi.constants.L, expect["qi_L"]), "L = " + fmt(rep.qi.constants.L));
  if (expect.contains("local_constant"))
    rec.check("local_constant", within(best, expect["local_constant"]) && within(worst, expect["local_constant"]),
              "local constants in [" + fmt(best) + ", " + fmt(worst) + "]");
  if (expect.contains("blowup"))
    rec.check("blowup", blowup == expect["blowup"].get<bool>(),
              "max local constant " + fmt(worst) + " vs threshold " + fmt(blow));

  std::ostringstream csv;
  csv.precision(17);
  csv << "scale,min_ratio,max_ratio,constant,pairs\n";
  for (const auto& b : rep.local_bilip)
    csv << b.scale << "," << b.min_ratio << "," << b.max_ratio << "," << b.constant << "," << b.pairs << "\n";
  rec.csv = csv.str();
  rec.config = c.resolved;
  return rec;
}

RunRecord cmd_pipeline(const Json& raw) {
  Cfg c(raw, "pipeline", {"seed", "map", "x_min", "x_max", "layer_min", "layer_max", "grid_density", "epsilon",
                          "collar_width", "r_scale", "max_refinements", "injectivity_samples", "distortion_samples",
                          "ball_samples", "critical_x", "critical_band", "critical_anchors", "export_mesh",
                          "expect_critical_improvement"});
  RunRecord rec;
  rec.experiment = "pipeline";
  Json pc = raw;
  for (const char* k : {"map", "export_mesh", "expect_critical_improvement"}) pc.erase(k);
  PipelineConfig cfg = pipeline_config_from_json(pc);
  BoundaryMap f = boundary_map_from_json(c.object("map", {{"family", "power1d"}, {"p", 3.0}}));
  bool mesh = c.get("export_mesh", true);
  bool crit = c.get("expect_critical_improvement", false);
  const Json resolved = to_json(cfg);
  for (auto it = resolved.begin(); it != resolved.end(); ++it) c.resolved[it.key()] = it.value();

  auto res = run_pipeline(f, cfg);
  const auto& r = res.report;
  rec.outputs = {{"map", f.describe()}, {"report", to_json(r)}};
  rec.check("pipeline", r.success, r.success ? "" : "failed at stage '" + r.stage + "'");
  rec.check("injectivity", r.injectivity.pass, "epsilon " + fmt(r.injectivity_epsilon));
  rec.check("seams", r.seam_max <= 1e-12, "max jump " + fmt(r.seam_max));
  rec.check("boundary", r.boundary_x_max <= cfg.epsilon && r.boundary_hyperbolic_max <= cfg.epsilon,
            "|F - f| " + fmt(r.boundary_x_max) + ", hyperbolic " + fmt(r.boundary_hyperbolic_max));
  rec.check("orientation", r.orientation_failures == 0, std::to_string(r.orientation_failures) + " flipped triangles");
  if (crit) {
    double a = r.critical.pipeline.max_ratio / r.critical.pipeline.min_ratio;
    double b = r.critical.raw_lift.max_ratio / r.critical.raw_lift.min_ratio;
    rec.check("critical_improvement", a < b, "spread " + fmt(a) + " vs raw lift " + fmt(b));
  }
  if (mesh) {
    std::ostringstream os;
    res.patchwork.mesh.write_mesh(os);
    rec.artifacts.push_back({"pipeline.mesh", os.str()});
  }
  std::ostringstream csv;
  csv.precision(17);
  csv << "layer,gamma,color,budget,approx_deviation,placed_deviation,final_deviation\n";
  for (const auto& t : r.tiles)
    csv << t.tile.layer << "," << t.tile.gamma(0) << "," << t.color << "," << t.budget << "," << t.approx_deviation << ","
        << t.placed_deviation << "," << t.final_deviation << "\n";
  rec.csv = csv.str();
  rec.config = c.resolved;
  return rec;
}

RunRecord cmd_distortion(const Json& raw) {
  Cfg c(raw, "distortion", {"seed", "map", "region", "count", "alpha_grid", "eta", "expect"});
  RunRecord rec;
  rec.experiment = "distortion";
  const auto seed = c.seed();
  BoundaryMap f = boundary_map_from_json(c.object("map", {{"family", "power1d"}, {"p", 3.0}}));
  const SpaceHandle& base = f.base();
  Region region;
  if (c.has("region")) {
    region = region_from_json(c.object("region", {}));
  } else {
    for (int i = 0; i < base.point_dimension(); ++i) region.axes.push_back({-10, 10, false});
  }
  if (region.dimension() != base.point_dimension()) throw InputError("distortion: region does not match the base");
  c.resolved["region"] = to_json(region);
  auto count = c.get<std::size_t>("count", 2000);
  auto alphas = c.get<std::vector<double>>("alpha_grid", {1.0, 2.0, 3.0, 4.0});
  Json eta = c.object("eta", nullptr);
  Json expect = c.object("expect", Json::object());
  check_keys(expect, {"qi_L", "qs_c"}, "distortion expect");

  PointMap fm = [&f](const Point& x) { return f(x); };
  Sampler s{region, count, seed};
  auto qs = fit_qs_modulus(base, fm, alphas, s);
  auto qi = fit_qi_constants(base, base, fm, s);
  rec.outputs = {{"map", f.describe()}, {"base", base.describe()}, {"qs", to_json(qs)},
                 {"qi", to_json(qi, base.describe(), base.describe())}};
  if (!eta.is_null()) {
    check_keys(eta, {"alpha", "c"}, "distortion eta");
    QsModulus m{eta.at("alpha").get<double>(), eta.at("c").get<double>()};
    m.validate();
    auto chk = check_quasi_symmetry(base, fm, m, s);
    rec.outputs["qs_check"] = to_json(chk);
    rec.check("quasi_symmetry", chk.pass, "worst lhs / eta(rhs) " + fmt(chk.worst_ratio));
  }
  if (expect.contains("qi_L")) rec.check("qi_L", within(qi.constants.L, expect["qi_L"]), "L = " + fmt(qi.constants.L));
  if (expect.contains("qs_c")) rec.check("qs_c", within(qs.modulus.c, expect["qs_c"]), "c = " + fmt(qs.modulus.c));

  std::ostringstream csv;
  csv.precision(17);
  csv << "alpha,c\n";
  for (const auto& [a, cc] : qs.per_alpha) csv << a << "," << cc << "\n";
  rec.csv = csv.str();
  rec.config = c.resolved;
  return rec;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"delta", "con", "tiling", "lift", "pipeline", "distortion"};
  return names;
}

RunRecord run_command(const std::string& name, const Json& config) {
  static const std::map<std::string, std::function<RunRecord(const Json&)>> table = {
      {"delta", cmd_delta}, {"con", cmd_con}, {"tiling", cmd_tiling},
      {"lift", cmd_lift},   {"pipeline", cmd_pipeline}, {"distortion", cmd_distortion}};
  auto it = table.find(name);
  if (it == table.end()) throw InputError("unknown subcommand '" + name + "'");
  auto start = std::chrono::steady_clock::now();
  RunRecord rec = it->second(config);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace hypertile
