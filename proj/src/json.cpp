#include "sva/json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sva/common.hpp"

namespace sva {

namespace geo {

void to_json(json& j, const GeoCoordinate& c) { j = json{{"lat", c.lat}, {"lon", c.lon}}; }

void from_json(const json& j, GeoCoordinate& c) { c = coordinate_from_json(j); }

void to_json(json& j, const SamplePoint& s) {
    j = json{{"coord", s.coord},
             {"heading", s.heading.value()},
             {"distance_from_start", s.distance_from_start},
             {"kind", std::string(to_string(s.kind))}};
}

void from_json(const json& j, SamplePoint& s) {
    s.coord = coordinate_from_json(j.at("coord"));
    s.heading = HeadingDeg(j.at("heading").get<double>());
    s.distance_from_start = j.at("distance_from_start").get<double>();
    s.kind = point_kind_from_string(j.at("kind").get<std::string>());
}

}  // namespace geo

GeoCoordinate coordinate_from_json(const json& j) {
    try {
        if (j.is_array() && j.size() == 2) return geo::make_coordinate(j[0].get<double>(), j[1].get<double>());
        if (j.is_object()) return geo::make_coordinate(j.at("lat").get<double>(), j.at("lon").get<double>());
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("bad coordinate: ") + e.what());
    }
    fail(ErrorCode::InvalidArgument, "coordinate must be {lat, lon} or [lat, lon]");
}

void to_json(json& j, const RouteStep& s) {
    j = json{{"maneuver", std::string(to_string(s.maneuver))}, {"location", s.location}, {"street_name", s.street_name}};
}

void from_json(const json& j, RouteStep& s) {
    s.maneuver = maneuver_from_string(j.at("maneuver").get<std::string>());
    s.location = coordinate_from_json(j.at("location"));
    s.street_name = j.value("street_name", "");
}

void to_json(json& j, const RouteResult& r) {
    j = json{{"polyline", r.polyline.points()}, {"steps", r.steps}, {"total_length_m", r.total_length_m}};
}

RouteResult route_from_json(const json& j) {
    std::vector<GeoCoordinate> pts;
    for (const auto& p : j.at("polyline")) pts.push_back(coordinate_from_json(p));
    geo::Polyline line(std::move(pts));
    std::vector<RouteStep> steps = j.at("steps").get<std::vector<RouteStep>>();
    const double len = j.contains("total_length_m") ? j.at("total_length_m").get<double>() : line.total_length();
    RouteResult r{std::move(line), std::move(steps), len};
    r.validate();
    return r;
}

void to_json(json& j, const PanoramaLink& l) {
    j = json{{"heading", l.heading.value()}, {"target", l.target}};
    if (!l.street_name.empty()) j["street_name"] = l.street_name;
}

void from_json(const json& j, PanoramaLink& l) {
    l.heading = HeadingDeg(j.at("heading").get<double>());
    l.target = j.at("target").get<std::string>();
    l.street_name = j.value("street_name", "");
}

void to_json(json& j, const PanoramaMeta& p) {
    j = json{{"id", p.id}, {"coord", p.coord}, {"links", p.links}};
    if (p.capture_date) j["capture_date"] = *p.capture_date;
}

void from_json(const json& j, PanoramaMeta& p) {
    p.id = j.at("id").get<std::string>();
    p.coord = coordinate_from_json(j.at("coord"));
    p.capture_date.reset();
    if (j.contains("capture_date") && j["capture_date"].is_string()) p.capture_date = j["capture_date"].get<std::string>();
    p.links = j.value("links", std::vector<PanoramaLink>{});
    p.validate();
}

void to_json(json& j, const ViewRequest& v) {
    j = json{{"pano", v.pano}, {"heading", v.heading.value()}, {"fov_deg", v.fov_deg}, {"pitch_deg", v.pitch_deg}};
}

void from_json(const json& j, ViewRequest& v) {
    v.pano = j.at("pano").get<std::string>();
    v.heading = HeadingDeg(j.at("heading").get<double>());
    v.fov_deg = j.at("fov_deg").get<double>();
    v.pitch_deg = j.value("pitch_deg", 0.0);
}

void to_json(json& j, const Place& p) {
    j = json{{"name", p.name},
             {"category", p.category},
             {"coord", p.coord},
             {"distance_m", p.distance_m},
             {"relative_direction", std::string(geo::to_string(p.relative_direction))}};
}

void from_json(const json& j, Place& p) {
    p.name = j.at("name").get<std::string>();
    p.category = j.value("category", "");
    p.coord = coordinate_from_json(j.at("coord"));
    p.distance_m = j.value("distance_m", 0.0);
    p.relative_direction = geo::cardinal_from_string(j.value("relative_direction", "North"));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::NotFound, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) {
    const auto text = read_file(path);
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::InvalidArgument, "malformed JSON in " + path);
    return j;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::Internal, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) fail(ErrorCode::Internal, "short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace sva
