#pragma once

// nlohmann::json conversions for the domain types shared across modules.

#include <nlohmann/json.hpp>

#include "sva/geo.hpp"
#include "sva/providers.hpp"

namespace sva {

using json = nlohmann::json;

namespace geo {
void to_json(json& j, const GeoCoordinate& c);
void from_json(const json& j, GeoCoordinate& c);
void to_json(json& j, const SamplePoint& s);
void from_json(const json& j, SamplePoint& s);
}  // namespace geo

void to_json(json& j, const RouteStep& s);
void from_json(const json& j, RouteStep& s);
void to_json(json& j, const RouteResult& r);
RouteResult route_from_json(const json& j);

void to_json(json& j, const PanoramaLink& l);
void from_json(const json& j, PanoramaLink& l);
void to_json(json& j, const PanoramaMeta& p);
void from_json(const json& j, PanoramaMeta& p);

void to_json(json& j, const ViewRequest& v);
void from_json(const json& j, ViewRequest& v);

void to_json(json& j, const Place& p);
void from_json(const json& j, Place& p);

// Accepts {"lat":..,"lon":..} or [lat, lon].
GeoCoordinate coordinate_from_json(const json& j);

// Reads a whole file; throws NotFound when missing.
std::string read_file(const std::string& path);
json read_json_file(const std::string& path);
// Writes via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace sva
