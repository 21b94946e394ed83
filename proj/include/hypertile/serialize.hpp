#pragma once

#include "hypertile/lifting.hpp"
#include "hypertile/metric.hpp"
#include "hypertile/pipeline.hpp"
#include "hypertile/tiling.hpp"

#include "json.hpp"

#include <string>

namespace hypertile {

using Json = nlohmann::ordered_json;

inline constexpr const char* kRunSchema = "hypertile.run/1";

// Measured numbers are written as {"value": v, "metric": tag} so values in
// different metrics are never compared by accident. Tags in use: the space
// description (e.g. "half-space-real(n=1)"), "base", "ratio", "count",
// "seconds".
Json tagged(double v, const std::string& metric);
// inf and nan become strings, JSON has no literal for them
Json number(double v);

Json to_json(const Point& p);
Point point_from_json(const Json& j);

Json to_json(const Witness& w, const std::string& metric);
Json to_json(const DeltaEstimate& d, const std::string& metric);
Json to_json(const QiFit& q, const std::string& source, const std::string& target);
Json to_json(const QsFit& q);
Json to_json(const QsCheck& q);
Json to_json(const LocalBilip& b, const std::string& metric);
Json to_json(const InjectivityReport& r, const std::string& metric);
Json to_json(const DistortionReport& r, const std::string& metric);
Json to_json(const ConditionCheck& c);
Json to_json(const TilingReport& r);
Json to_json(const TileId& t);
Json to_json(const ApproxReport& r);
Json to_json(const PipelineConfig& c);

// Config pieces. Every reader rejects unknown keys.
SpaceHandle space_from_json(const Json& j);
Region region_from_json(const Json& j);
Json to_json(const Region& r);
BoundaryMap boundary_map_from_json(const Json& j);
// keys of PipelineConfig; missing keys keep their defaults
PipelineConfig pipeline_config_from_json(const Json& j);

// throws InputError naming the first key of j not in allowed
void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);

}  // namespace hypertile
