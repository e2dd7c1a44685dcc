#include "sva/fixture_providers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "sva/common.hpp"

namespace sva {

namespace fs = std::filesystem;

PanoramaIndex::PanoramaIndex(const std::vector<PanoramaMeta>& panos, double cell_m)
    : panos_(&panos), cell_m_(cell_m) {
    constexpr double m_per_deg = geo::kEarthRadiusM * std::numbers::pi / 180.0;
    double max_abs_lat = 0.0;
    for (const auto& p : panos) max_abs_lat = std::max(max_abs_lat, std::fabs(p.coord.lat));
    // Pad so that queries slightly poleward of the last panorama keep the guarantee.
    max_abs_lat = std::min(89.0, max_abs_lat + 1.0);
    cell_lat_deg_ = cell_m / m_per_deg;
    cell_lon_deg_ = cell_m / (m_per_deg * std::cos(max_abs_lat * std::numbers::pi / 180.0));
    for (std::size_t i = 0; i < panos.size(); ++i) cells_[cell_of(panos[i].coord)].push_back(i);
}

std::pair<long, long> PanoramaIndex::cell_of(const GeoCoordinate& c) const {
    return {static_cast<long>(std::floor(c.lat / cell_lat_deg_)), static_cast<long>(std::floor(c.lon / cell_lon_deg_))};
}

long PanoramaIndex::nearest(const GeoCoordinate& q, double radius_m) const {
    const auto [r, c] = cell_of(q);
    const long reach = std::max<long>(1, static_cast<long>(std::ceil(radius_m / cell_m_)));
    long best = -1;
    double best_d = 0.0;
    for (long dr = -reach; dr <= reach; ++dr) {
        for (long dc = -reach; dc <= reach; ++dc) {
            auto it = cells_.find({r + dr, c + dc});
            if (it == cells_.end()) continue;
            for (auto idx : it->second) {
                const auto& p = (*panos_)[idx];
                const double d = geo::haversine_distance(q, p.coord);
                if (d > radius_m) continue;
                if (best < 0 || d < best_d || (d == best_d && p.id < (*panos_)[best].id)) {
                    best = static_cast<long>(idx);
                    best_d = d;
                }
            }
        }
    }
    return best;
}

namespace {

std::vector<PanoramaMeta> load_panos(const std::string& dir) {
    auto j = read_json_file(dir + "/panoramas.json");
    return j.get<std::vector<PanoramaMeta>>();
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

}  // namespace

FixtureWorld::FixtureWorld(std::string bundle_dir, double snap_radius_m)
    : dir_(std::move(bundle_dir)),
      snap_radius_m_(snap_radius_m),
      panos_(load_panos(dir_)),
      index_(panos_, snap_radius_m) {
    if (!(snap_radius_m > 0.0)) fail(ErrorCode::InvalidArgument, "snap radius must be positive");
    for (std::size_t i = 0; i < panos_.size(); ++i) {
        if (!pano_by_id_.emplace(panos_[i].id, i).second) {
            fail(ErrorCode::InvalidArgument, "duplicate panorama id " + panos_[i].id);
        }
    }
    for (const auto& e : read_json_file(dir_ + "/routes.json")) {
        FixtureRoute r;
        r.origin = coordinate_from_json(e.at("origin"));
        r.destination = coordinate_from_json(e.at("destination"));
        r.unavailable = e.value("unavailable", false);
        if (!r.unavailable) {
            r.route = e.at("route");
            route_from_json(r.route);  // validate up front
        }
        routes_.push_back(std::move(r));
    }
    places_ = read_json_file(dir_ + "/places.json").get<std::vector<Place>>();
}

RouteResult FixtureWorld::get_route(const GeoCoordinate& origin, const GeoCoordinate& destination) {
    if (!geo::is_valid(origin) || !geo::is_valid(destination)) {
        fail(ErrorCode::InvalidArgument, "route endpoints must be valid coordinates");
    }
    if (geo::haversine_distance(origin, destination) < 1e-6) {
        fail(ErrorCode::RouteUnavailable, "origin and destination coincide");
    }
    for (const auto& r : routes_) {
        if (geo::haversine_distance(r.origin, origin) <= 50.0 &&
            geo::haversine_distance(r.destination, destination) <= 50.0) {
            if (r.unavailable) fail(ErrorCode::RouteUnavailable, "no walking route to destination");
            return route_from_json(r.route);
        }
    }
    fail(ErrorCode::RouteUnavailable, "no fixture route between the requested points");
}

PanoramaMeta FixtureWorld::nearest_panorama(const GeoCoordinate& coord) {
    if (!geo::is_valid(coord)) fail(ErrorCode::InvalidArgument, "invalid coordinate");
    const long idx = index_.nearest(coord, snap_radius_m_);
    if (idx < 0) {
        fail(ErrorCode::NoCoverage, "no panorama within " + std::to_string(snap_radius_m_) + " m");
    }
    return panos_[static_cast<std::size_t>(idx)];
}

PanoramaMeta FixtureWorld::panorama(const std::string& id) {
    auto it = pano_by_id_.find(id);
    if (it == pano_by_id_.end()) fail(ErrorCode::NotFound, "unknown panorama " + id);
    return panos_[it->second];
}

ImageRef FixtureWorld::render_view(const ViewRequest& req) {
    req.validate();
    if (!pano_by_id_.contains(req.pano)) fail(ErrorCode::NotFound, "unknown panorama " + req.pano);
    const auto id = req.image_id();
    static constexpr std::pair<const char*, const char*> kTypes[] = {
        {".png", "image/png"}, {".jpg", "image/jpeg"}, {".jpeg", "image/jpeg"}, {".webp", "image/webp"}};
    for (const auto& [ext, media] : kTypes) {
        const auto path = dir_ + "/tiles/" + id + ext;
        if (!fs::exists(path)) continue;
        auto bytes = std::make_shared<const std::string>(read_file(path));
        if (bytes->empty()) fail(ErrorCode::Provider, "tile " + id + " is empty");
        return ImageRef{id, media, std::move(bytes), req};
    }
    fail(ErrorCode::NotFound, "no tile " + id + " in bundle");
}

std::vector<Place> FixtureWorld::nearby_places(const GeoCoordinate& coord, double radius_m) {
    validate_radius(radius_m);
    if (!geo::is_valid(coord)) fail(ErrorCode::InvalidArgument, "invalid coordinate");
    return rank_places(coord, places_, radius_m);
}

Place FixtureWorld::find_place(const std::string& query) {
    const auto q = lower(query);
    for (const auto& p : places_) {
        if (lower(p.name) == q) return p;
    }
    fail(ErrorCode::NotFound, "no place named '" + query + "'");
}

ScriptedMllm::ScriptedMllm(std::map<std::string, std::string> responses, std::size_t max_images)
    : responses_(std::move(responses)), max_images_(max_images) {}

ScriptedMllm ScriptedMllm::from_file(const std::string& path, std::size_t max_images) {
    auto j = read_json_file(path);
    const auto& r = j.contains("responses") ? j.at("responses") : j;
    std::map<std::string, std::string> responses;
    for (auto it = r.begin(); it != r.end(); ++it) {
        // Structured responses are stored as JSON and handed back as text.
        responses[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
    return ScriptedMllm(std::move(responses), max_images);
}

std::string ScriptedMllm::image_key(const MllmRequest& req) {
    std::string key = req.template_id + ":";
    for (std::size_t i = 0; i < req.images.size(); ++i) {
        if (i) key += ',';
        key += req.images[i].id;
    }
    return key;
}

std::string ScriptedMllm::pano_key(const MllmRequest& req) {
    std::vector<std::string> panos;
    for (const auto& img : req.images) {
        if (std::find(panos.begin(), panos.end(), img.source_view.pano) == panos.end()) {
            panos.push_back(img.source_view.pano);
        }
    }
    if (panos.empty() && !req.location.empty()) panos.push_back(req.location);
    std::string key = req.template_id + ":";
    for (std::size_t i = 0; i < panos.size(); ++i) {
        if (i) key += '+';
        key += panos[i];
    }
    return key;
}

std::string ScriptedMllm::complete(const MllmRequest& req) {
    validate_request(req, max_images_);
    for (const auto& key : {image_key(req), pano_key(req), req.template_id + ":*"}) {
        if (auto it = responses_.find(key); it != responses_.end()) return it->second;
    }
    fail(ErrorCode::ScriptedMiss, "no scripted response for " + image_key(req));
}

ProviderSet make_fixture_providers(const std::string& bundle_dir, double snap_radius_m, std::size_t max_images) {
    auto world = std::make_shared<FixtureWorld>(bundle_dir, snap_radius_m);
    auto mllm = std::make_shared<ScriptedMllm>(ScriptedMllm::from_file(bundle_dir + "/mllm_script.json", max_images));
    return ProviderSet{"fixture", world, world, world, mllm};
}

}  // namespace sva
