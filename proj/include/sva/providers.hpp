#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sva/geo.hpp"

namespace sva {

using geo::GeoCoordinate;
using geo::HeadingDeg;

enum class ManeuverKind { Depart, TurnLeft, TurnRight, Continue, Arrive, CrossIntersection };
std::string_view to_string(ManeuverKind k);
ManeuverKind maneuver_from_string(std::string_view s);

struct RouteStep {
    ManeuverKind maneuver = ManeuverKind::Continue;
    GeoCoordinate location;
    std::string street_name;
};

struct RouteResult {
    geo::Polyline polyline;
    std::vector<RouteStep> steps;
    double total_length_m = 0.0;

    // Checks step ordering (Depart first, Arrive last).
    void validate() const;
};

struct PanoramaLink {
    HeadingDeg heading;
    std::string target;
    // Empty when the imagery service does not name the street.
    std::string street_name;
};

struct PanoramaMeta {
    std::string id;
    GeoCoordinate coord;
    std::optional<std::string> capture_date;  // "YYYY-MM"
    std::vector<PanoramaLink> links;

    void validate() const;
};

struct ViewRequest {
    std::string pano;
    HeadingDeg heading;
    double fov_deg = 90.0;
    double pitch_deg = 0.0;

    void validate() const;
    // Stable tile name "{pano}_h{heading:03}_f{fov:03}", headings rounded to whole degrees.
    std::string image_id() const;

    friend bool operator==(const ViewRequest&, const ViewRequest&) = default;
};

struct ImageRef {
    std::string id;
    std::string media_type;
    std::shared_ptr<const std::string> bytes;
    ViewRequest source_view;

    std::size_t size() const { return bytes ? bytes->size() : 0; }
};

struct Place {
    std::string name;
    std::string category;
    GeoCoordinate coord;
    double distance_m = 0.0;
    geo::Cardinal relative_direction = geo::Cardinal::North;
};

struct MllmRequest {
    std::string template_id;
    std::string text;
    std::vector<ImageRef> images;
    int max_tokens = 1024;
    double temperature = 0.2;
    // Panorama the request concerns, for text-only prompts; informational.
    std::string location;
};

class RouteProvider {
public:
    virtual ~RouteProvider() = default;
    virtual RouteResult get_route(const GeoCoordinate& origin, const GeoCoordinate& destination) = 0;
};

class PanoramaProvider {
public:
    virtual ~PanoramaProvider() = default;
    virtual PanoramaMeta nearest_panorama(const GeoCoordinate& coord) = 0;
    virtual PanoramaMeta panorama(const std::string& id) = 0;
    virtual ImageRef render_view(const ViewRequest& req) = 0;
};

class PlacesProvider {
public:
    virtual ~PlacesProvider() = default;
    virtual std::vector<Place> nearby_places(const GeoCoordinate& coord, double radius_m) = 0;
    // Resolves a free-text place query ("Westlake & Mercer Stop") to a place.
    virtual Place find_place(const std::string& query) = 0;
};

class MllmProvider {
public:
    virtual ~MllmProvider() = default;
    virtual std::string complete(const MllmRequest& req) = 0;
    virtual std::size_t max_images() const { return 10; }
};

struct ProviderSet {
    std::string mode;
    std::shared_ptr<RouteProvider> routes;
    std::shared_ptr<PanoramaProvider> panoramas;
    std::shared_ptr<PlacesProvider> places;
    std::shared_ptr<MllmProvider> mllm;
};

// Shared argument checks used by every provider implementation.
void validate_radius(double radius_m);
void validate_request(const MllmRequest& req, std::size_t max_images);
// Fills distance and cardinal direction relative to `from`, keeps those
// within `radius_m`, and sorts ascending by distance (ties by name).
std::vector<Place> rank_places(const GeoCoordinate& from, std::vector<Place> candidates, double radius_m);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace sva
