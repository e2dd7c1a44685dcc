#include "sva/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sva/common.hpp"

namespace sva {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::OutOfRange: return "out_of_range";
        case ErrorCode::DegenerateBearing: return "degenerate_bearing";
        case ErrorCode::RouteUnavailable: return "route_unavailable";
        case ErrorCode::NoCoverage: return "no_coverage";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::Provider: return "provider_error";
        case ErrorCode::ScriptedMiss: return "scripted_miss";
        case ErrorCode::Parse: return "parse_error";
        case ErrorCode::InvalidChoice: return "invalid_choice";
        case ErrorCode::Validation: return "validation_error";
        case ErrorCode::InvalidState: return "invalid_state";
        case ErrorCode::Config: return "config_error";
        case ErrorCode::Timeout: return "timeout";
        case ErrorCode::Internal: return "internal";
    }
    return "internal";
}

std::string_view to_string(ManeuverKind k) {
    switch (k) {
        case ManeuverKind::Depart: return "Depart";
        case ManeuverKind::TurnLeft: return "TurnLeft";
        case ManeuverKind::TurnRight: return "TurnRight";
        case ManeuverKind::Continue: return "Continue";
        case ManeuverKind::Arrive: return "Arrive";
        case ManeuverKind::CrossIntersection: return "CrossIntersection";
    }
    return "Continue";
}

ManeuverKind maneuver_from_string(std::string_view s) {
    for (auto k : {ManeuverKind::Depart, ManeuverKind::TurnLeft, ManeuverKind::TurnRight,
                   ManeuverKind::Continue, ManeuverKind::Arrive, ManeuverKind::CrossIntersection}) {
        if (s == to_string(k)) return k;
    }
    fail(ErrorCode::InvalidArgument, "unknown maneuver: " + std::string(s));
}

void RouteResult::validate() const {
    if (steps.size() < 2 || steps.front().maneuver != ManeuverKind::Depart ||
        steps.back().maneuver != ManeuverKind::Arrive) {
        fail(ErrorCode::InvalidArgument, "route steps must start with Depart and end with Arrive");
    }
}

void PanoramaMeta::validate() const {
    if (id.empty()) fail(ErrorCode::InvalidArgument, "panorama without id");
    if (!geo::is_valid(coord)) fail(ErrorCode::InvalidArgument, "panorama " + id + " has invalid coordinate");
    for (const auto& link : links) {
        if (link.target == id) fail(ErrorCode::InvalidArgument, "panorama " + id + " links to itself");
    }
}

void ViewRequest::validate() const {
    if (pano.empty()) fail(ErrorCode::InvalidArgument, "view request without panorama id");
    if (!(fov_deg > 0.0) || fov_deg > 120.0) {
        fail(ErrorCode::InvalidArgument, "fov must be in (0, 120], got " + std::to_string(fov_deg));
    }
    if (!(pitch_deg >= -30.0 && pitch_deg <= 30.0)) {
        fail(ErrorCode::InvalidArgument, "pitch must be in [-30, 30], got " + std::to_string(pitch_deg));
    }
}

std::string ViewRequest::image_id() const {
    const int h = static_cast<int>(std::lround(heading.value())) % 360;
    const int f = static_cast<int>(std::lround(fov_deg));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_h%03d_f%03d", h, f);
    return pano + buf;
}

void validate_radius(double radius_m) {
    if (!(radius_m > 0.0) || radius_m > 500.0) {
        fail(ErrorCode::InvalidArgument, "radius must be in (0, 500] meters");
    }
}

void validate_request(const MllmRequest& req, std::size_t max_images) {
    if (req.text.empty()) fail(ErrorCode::InvalidArgument, "model request has no text");
    if (req.images.size() > max_images) {
        fail(ErrorCode::InvalidArgument, "model request carries " + std::to_string(req.images.size()) +
                                             " images, limit is " + std::to_string(max_images));
    }
    if (!(req.temperature >= 0.0)) fail(ErrorCode::InvalidArgument, "temperature must be >= 0");
    if (req.max_tokens <= 0) fail(ErrorCode::InvalidArgument, "max_tokens must be positive");
    for (const auto& img : req.images) {
        if (img.size() == 0) fail(ErrorCode::InvalidArgument, "image " + img.id + " is empty");
    }
}

std::vector<Place> rank_places(const GeoCoordinate& from, std::vector<Place> candidates, double radius_m) {
    std::vector<Place> out;
    for (auto& p : candidates) {
        p.distance_m = geo::haversine_distance(from, p.coord);
        if (p.distance_m > radius_m) continue;
        // A place at the query point has no bearing; it is reported as north.
        p.relative_direction =
            p.coord == from ? geo::Cardinal::North : geo::cardinal_of(geo::initial_bearing(from, p.coord));
        out.push_back(std::move(p));
    }
    std::stable_sort(out.begin(), out.end(), [](const Place& a, const Place& b) {
        if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
        return a.name < b.name;
    });
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace sva
