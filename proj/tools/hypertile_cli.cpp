#include "hypertile/commands.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace hypertile;

namespace {

Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file '" + path + "'");
  try {
    // comments allowed, so example configs can carry annotations
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypertile: metric constructions on hyperbolic spaces, their tilings and boundary lifts"};
  app.set_version_flag("--version", HYPERTILE_VERSION);
  std::string config_path, out_dir, format = "json";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON config file (comments allowed)");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--out", out_dir, "directory for the run record and artifacts");
  app.add_option("--format", format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
  app.require_subcommand(1);
  app.fallthrough();
  const char* help[] = {"four-point delta estimate under region doubling",
                        "parabolic quasimetric against the base metric",
                        "verify, enumerate, and color a stacked tiling",
                        "distortion of a lifted boundary map",
                        "tile-by-tile PL approximation of a lift",
                        "quasi-symmetry and quasi-isometry fits of a boundary map"};
  for (std::size_t i = 0; i < command_names().size(); ++i) app.add_subcommand(command_names()[i], help[i]);

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();

  RunRecord rec;
  try {
    Json config = config_path.empty() ? Json::object() : read_config(config_path);
    if (!config.is_object()) throw InputError("config must be a JSON object");
    if (seed) config["seed"] = *seed;
    rec = run_command(name, config);
  } catch (const InputError& e) {
    std::cerr << "hypertile " << name << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hypertile " << name << ": error: " << e.what() << "\n";
    return 3;
  }

  const std::string json = rec.to_json().dump(2) + "\n";
  if (!out_dir.empty()) {
    try {
      std::filesystem::create_directories(out_dir);
      write_file(std::filesystem::path(out_dir) / (name + ".json"), json);
      write_file(std::filesystem::path(out_dir) / (name + ".csv"), rec.csv);
      for (const auto& a : rec.artifacts) write_file(std::filesystem::path(out_dir) / a.name, a.text);
    } catch (const std::exception& e) {
      std::cerr << "hypertile " << name << ": " << e.what() << "\n";
      return 3;
    }
  }
  std::cout << (format == "csv" ? rec.csv : json);
  for (const auto& c : rec.checks)
    if (!c["pass"].get<bool>())
      std::cerr << "check failed: " << c["name"].get<std::string>() << " (" << c["detail"].get<std::string>() << ")\n";
  return rec.pass ? 0 : 1;
}
