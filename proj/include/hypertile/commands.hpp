#pragma once

#include "hypertile/serialize.hpp"

#include <string>
#include <vector>

namespace hypertile {

struct Artifact {
  std::string name;  // file name under --out
  std::string text;
};

struct RunRecord {
  std::string experiment;
  Json config;   // resolved, defaults expanded
  Json outputs;
  Json checks = Json::array();  // [{"name", "pass", "detail"}]
  bool pass = true;
  double wall_seconds = 0.0;
  std::vector<Artifact> artifacts;
  std::string csv;  // sample-level dump, header line first

  void check(const std::string& name, bool ok, const std::string& detail = "");
  Json to_json() const;  // schema, version, status mirrors pass
};

// Subcommands. Each takes the raw config object, fills in defaults, and
// rejects unknown keys or a missing seed with InputError.
RunRecord cmd_delta(const Json& config);
RunRecord cmd_con(const Json& config);
RunRecord cmd_tiling(const Json& config);
RunRecord cmd_lift(const Json& config);
RunRecord cmd_pipeline(const Json& config);
RunRecord cmd_distortion(const Json& config);

RunRecord run_command(const std::string& name, const Json& config);
const std::vector<std::string>& command_names();

// Experiments shared with the acceptance runner.

struct DeltaSweep {
  std::vector<double> factors;  // region scale per step: 1, 2, 4, ...
  std::vector<DeltaEstimate> estimates;
  std::vector<double> ratios;  // estimate[i+1] / estimate[i]
  bool plateau = false;        // every ratio <= plateau_ratio
  bool growth = false;         // every ratio >= growth_ratio
};

DeltaSweep delta_sweep(const SpaceHandle& space, const Sampler& sampler, int doublings, double plateau_ratio,
                       double growth_ratio);

// parabolic quasimetric (vertical ray at 0, parameter a) against the base
// metric on sampled pairs; band = max ratio / min ratio
struct HoroBand {
  double s_max = 0.0;
  double min_ratio = 0.0, max_ratio = 0.0;
  double band = 0.0;
  bool converged = true;
  std::size_t pairs = 0;
};

HoroBand horometric_band(const SpaceHandle& base, double a, const Sampler& sampler, double s_max);

}  // namespace hypertile
