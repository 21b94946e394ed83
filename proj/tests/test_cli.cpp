#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hypertile/commands.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hypertile;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("hypertile_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args) {
  fs::path err = scratch() / "stderr.txt";
  std::string cmd = std::string(HYPERTILE_CLI_PATH) + " " + args + " 2>" + err.string();
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::string config(const std::string& name) { return std::string(HYPERTILE_CONFIG_DIR) + "/" + name; }

fs::path write_config(const std::string& name, const Json& j) {
  fs::path p = scratch() / name;
  std::ofstream(p) << j.dump();
  return p;
}

Json record(const Run& r) {
  INFO(r.err);
  REQUIRE_FALSE(r.out.empty());
  return Json::parse(r.out);
}

bool check_passed(const Json& rec, const std::string& name) {
  for (const auto& c : rec["checks"])
    if (c["name"] == name) return c["pass"].get<bool>();
  FAIL("no check named " << name);
  return false;
}

double value(const Json& tagged) { return tagged.at("value").get<double>(); }

}  // namespace

TEST_CASE("shipped configs pass") {
  for (const char* f : {"delta.json", "delta-euclidean.json", "con.json", "tiling.json", "lift.json",
                        "lift-affine.json", "distortion.json"}) {
    std::string name = f;
    std::string sub = name.substr(0, name.find_first_of("-."));
    auto r = cli(sub + " --config " + config(f));
    INFO(f << ": " << r.err);
    CHECK(r.code == 0);
    auto j = record(r);
    CHECK(j["schema"] == kRunSchema);
    CHECK(j["experiment"] == sub);
    CHECK(j["status"] == "pass");
    CHECK(j["pass"] == true);
    CHECK(j["config"].contains("seed"));
    CHECK(j["wall_time"]["metric"] == "seconds");
  }
}

TEST_CASE("delta examples") {
  // the line is 0-hyperbolic
  auto line = write_config("line.json", {{"seed", 1}, {"space", {{"model", "euclidean"}, {"n", 1}}}, {"expect", "zero"}});
  auto r = cli("delta --config " + line.string());
  CHECK(r.code == 0);
  auto j = record(r);
  CHECK(value(j["outputs"]["steps"][0]["estimate"]["delta"]) <= 1e-12);

  auto hp = record(cli("delta --config " + config("delta.json")));
  CHECK(hp["outputs"]["plateau"] == true);
  CHECK(hp["outputs"]["steps"][0]["estimate"]["delta"]["metric"] == "half-space-real(n=1)");

  auto flat = record(cli("delta --config " + config("delta-euclidean.json")));
  CHECK(flat["outputs"]["plateau"] == false);
  CHECK(flat["outputs"]["growth"] == true);

  // asking the flat plane for a plateau fails with exit code 1
  Json bad = {{"seed", 42}, {"space", {{"model", "euclidean"}, {"n", 2}}}, {"count", 2000}, {"expect", "plateau"}};
  auto f = cli("delta --config " + write_config("flat_plateau.json", bad).string());
  CHECK(f.code == 1);
  CHECK(record(f)["status"] == "fail");
}

TEST_CASE("con examples") {
  auto j = record(cli("con --config " + config("con.json")));
  CHECK(value(j["outputs"]["band"]["band"]) <= 4.0);
  const auto& diag = j["outputs"]["rows"][0];
  CHECK(value(diag["con"]) == 0.0);
  CHECK(value(diag["base"]) == 0.0);
  CHECK(diag["con"]["metric"] != diag["base"]["metric"]);

  Json heis = {{"seed", 2}, {"base", {{"model", "heisenberg"}}}, {"pairs", 50}, {"band_limit", 16}};
  auto h = cli("con --config " + write_config("heis_con.json", heis).string());
  CHECK(h.code == 0);
  auto hj = record(h);
  double band = value(hj["outputs"]["band"]["band"]);
  CHECK(std::isfinite(band));
  CHECK(band >= 1.0);
}

TEST_CASE("tiling examples") {
  auto d = record(cli("tiling --config " + config("tiling.json")));
  CHECK(d["outputs"]["verify"]["conforming"] == true);
  CHECK(d["outputs"]["coloring_proper"] == true);
  CHECK(d["outputs"]["gamma_prime_count"] == 2);

  Json tw = {{"seed", 1}, {"spec", "twisted(1,2)"}, {"layers", {-1, 0}}, {"samples", 2000}};
  auto t = record(cli("tiling --config " + write_config("twisted.json", tw).string()));
  CHECK(t["outputs"]["gamma_prime_count"] == 8);
  CHECK(t["status"] == "pass");

  Json hz = {{"seed", 1}, {"spec", "heisenberg"}, {"layers", {-1, 0}}, {"samples", 2000},
             {"window", {{"lo", {0, 0, 0}}, {"hi", {1, 1, 1}}}}};
  auto h = cli("tiling --config " + write_config("heis_tiling.json", hz).string());
  CHECK(h.code == 0);
  auto hj = record(h);
  CHECK(hj["outputs"]["gamma_prime_count"] == 16);
  CHECK(hj["outputs"]["verify"]["conforming"] == true);

  // the coordinate box fails covering: report written, exit 1
  hz["spec"] = "heisenberg-box";
  hz["decompose"] = false;
  auto b = cli("tiling --config " + write_config("heis_box.json", hz).string());
  CHECK(b.code == 1);
  CHECK(record(b)["outputs"]["verify"]["covering"]["pass"] == false);

  // edge list artifact
  fs::path out = scratch() / "tiling_out";
  auto w = cli("tiling --config " + config("tiling.json") + " --out " + out.string());
  CHECK(w.code == 0);
  std::istringstream edges(slurp(out / "tiling.edges"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(edges, line)) {
    if (line.rfind('#', 0) == 0) continue;
    ++lines;
    CHECK(line.find(" -- ") != std::string::npos);
  }
  CHECK(lines == d["outputs"]["edges"].get<std::size_t>());
  CHECK(fs::exists(out / "tiling.json"));
  CHECK(fs::exists(out / "tiling.csv"));
}

TEST_CASE("lift examples") {
  Json lam = {{"seed", 3},
              {"map", {{"family", "affine"}, {"A", {{3.0}}}, {"b", {0.0}}}},
              {"count", 500},
              {"expect", {{"qi_L", {1.0, 1.0 + 1e-6}}}}};
  auto l = cli("lift --config " + write_config("lambda.json", lam).string());
  CHECK(l.code == 0);
  auto lj = record(l);
  CHECK(value(lj["outputs"]["distortion"]["qi"]["L"]) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lj["outputs"]["blowup"] == false);

  auto a = record(cli("lift --config " + config("lift-affine.json")));
  for (const auto& b : a["outputs"]["distortion"]["local_bilipschitz"]) {
    CHECK(value(b["constant"]) >= 1.9);
    CHECK(value(b["constant"]) <= 2.1);
  }

  auto c = record(cli("lift --config " + config("lift.json")));
  CHECK(c["outputs"]["blowup"] == true);
  const auto& ev = c["outputs"]["evaluations"][0]["lift"];
  // x^3 at (0.5, 1): (0.125, 1.5^3 - 0.125)
  CHECK(ev[0].get<double>() == doctest::Approx(0.125));
  CHECK(ev[1].get<double>() == doctest::Approx(3.25));
}

TEST_CASE("pipeline command") {
  Json id = {{"seed", 1},        {"map", {{"family", "identity"}}}, {"x_min", -1}, {"x_max", 1}, {"layer_min", -1},
             {"layer_max", 0},   {"injectivity_samples", 400},        {"distortion_samples", 800},
             {"critical_anchors", 20}, {"export_mesh", false}};
  auto r = cli("pipeline --config " + write_config("id_pipe.json", id).string());
  CHECK(r.code == 0);
  auto j = record(r);
  CHECK(value(j["outputs"]["report"]["qi"]["L"]) == 1.0);
  CHECK(value(j["outputs"]["report"]["qi"]["C"]) <= 1e-9);
  CHECK(j["outputs"]["report"]["injectivity"]["pass"] == true);
  CHECK_FALSE(j["outputs"]["report"]["blending_note"].get<std::string>().empty());

  // collar_width = 0 is rejected with a message
  id["collar_width"] = 0;
  auto bad = cli("pipeline --config " + write_config("no_collar.json", id).string());
  CHECK(bad.code == 2);
  CHECK(bad.err.find("collar_width") != std::string::npos);
  CHECK(bad.out.empty());
}

TEST_CASE("pipeline command on x^3, frozen values") {
  fs::path out = scratch() / "pipe_out";
  auto r = cli("pipeline --config " + config("pipeline.json") + " --out " + out.string());
  INFO(r.err);
  CHECK(r.code == 0);
  auto j = record(r);
  const auto& rep = j["outputs"]["report"];
  CHECK(rep["success"] == true);
  CHECK(rep["density_used"] == 64);
  CHECK(rep["color_count"] == 5);
  CHECK(value(rep["qi"]["L"]) == doctest::Approx(std::pow(2.0, 26.0 / 16.0)).epsilon(1e-12));
  CHECK(value(rep["critical"]["pipeline_spread"]) < 2e5);
  CHECK(value(rep["critical"]["raw_lift_spread"]) > 1e8);
  CHECK(check_passed(j, "critical_improvement"));

  // mesh: v lines then f lines, 0-based indices in range
  std::ifstream mesh(out / "pipeline.mesh");
  std::string tag;
  std::size_t nv = 0, nf = 0;
  bool faces = false, ordered = true, in_range = true;
  std::string line;
  const auto vcount = rep["mesh"]["vertices"].get<std::size_t>();
  while (std::getline(mesh, line)) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      ordered = ordered && !faces;
      ++nv;
    } else {
      faces = true;
      long a, b, c;
      ls >> a >> b >> c;
      in_range = in_range && a >= 0 && b >= 0 && c >= 0 && std::size_t(std::max({a, b, c})) < vcount;
      ++nf;
    }
  }
  CHECK(ordered);
  CHECK(in_range);
  CHECK(nv == vcount);
  CHECK(nf == rep["mesh"]["triangles"].get<std::size_t>());
}

TEST_CASE("reproducible records") {
  auto strip = [](Json j) {
    j.erase("wall_time");
    return j.dump();
  };
  for (const char* args : {"delta --config", "lift --config", "tiling --config", "distortion --config"}) {
    std::string a = args;
    std::string file = a.substr(0, a.find(' ')) + ".json";
    auto x = record(cli(a + " " + config(file)));
    auto y = record(cli(a + " " + config(file)));
    CHECK(strip(x) == strip(y));
  }
  // --seed overrides the config and lands in the record
  auto s = record(cli("delta --config " + config("delta.json") + " --seed 7"));
  CHECK(s["config"]["seed"] == 7);
  auto base = record(cli("delta --config " + config("delta.json")));
  CHECK(s["outputs"]["steps"][0]["estimate"]["delta"] != base["outputs"]["steps"][0]["estimate"]["delta"]);
}

TEST_CASE("formats, flags and errors") {
  auto csv = cli("delta --config " + config("delta.json") + " --format csv");
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("factor,delta,quadruples\n", 0) == 0);

  auto bad_format = cli("delta --config " + config("delta.json") + " --format xml");
  CHECK(bad_format.code != 0);

  auto noseed = cli("delta --config " + write_config("noseed.json", Json::object()).string());
  CHECK(noseed.code == 2);
  CHECK(noseed.err.find("seed") != std::string::npos);

  auto unknown = cli("lift --config " + write_config("unknown.json", {{"seed", 1}, {"bogus", 1}}).string());
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("bogus") != std::string::npos);

  auto missing = cli("delta --config " + (scratch() / "nope.json").string());
  CHECK(missing.code == 2);

  auto no_sub = cli("--seed 1");
  CHECK(no_sub.code != 0);

  // a failing check still writes the record, and status mirrors the exit code
  Json strict = {{"seed", 9}, {"map", {{"family", "power1d"}, {"p", 3}}}, {"eta", {{"alpha", 3}, {"c", 1}}}};
  auto f = cli("distortion --config " + write_config("strict.json", strict).string());
  CHECK(f.code == 1);
  auto j = record(f);
  CHECK(j["status"] == "fail");
  CHECK_FALSE(check_passed(j, "quasi_symmetry"));
}

TEST_CASE("library entry points") {
  auto rec = run_command("delta", {{"seed", 1}, {"count", 500}});
  CHECK(rec.experiment == "delta");
  CHECK(rec.config["count"] == 500);
  CHECK(rec.config["space"]["model"] == "half-space-real");
  CHECK_THROWS_AS(run_command("nope", {{"seed", 1}}), InputError);
  CHECK(command_names().size() == 6);
}
