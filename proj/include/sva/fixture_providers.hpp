#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "sva/json.hpp"
#include "sva/providers.hpp"

namespace sva {

// Uniform lat/lon grid over panorama positions. Cells are at least
// `cell_m` on a side at every latitude present, so a query within
// `cell_m` of a panorama only needs the 3x3 neighbourhood.
class PanoramaIndex {
public:
    PanoramaIndex(const std::vector<PanoramaMeta>& panos, double cell_m);

    // Nearest panorama within radius_m (ties broken by smaller id), or -1.
    long nearest(const GeoCoordinate& q, double radius_m) const;

private:
    std::pair<long, long> cell_of(const GeoCoordinate& c) const;

    const std::vector<PanoramaMeta>* panos_;
    double cell_m_;
    double cell_lat_deg_;
    double cell_lon_deg_;
    std::map<std::pair<long, long>, std::vector<std::size_t>> cells_;
};

struct FixtureRoute {
    GeoCoordinate origin;
    GeoCoordinate destination;
    bool unavailable = false;
    json route;  // stored RouteResult document, echoed verbatim
};

// Loads a bundle directory: routes.json, panoramas.json, places.json,
// mllm_script.json and tiles/{pano}_h{heading:03}_f{fov:03}.{ext}.
class FixtureWorld final : public RouteProvider, public PanoramaProvider, public PlacesProvider {
public:
    explicit FixtureWorld(std::string bundle_dir, double snap_radius_m = 25.0);
    FixtureWorld(const FixtureWorld&) = delete;
    FixtureWorld& operator=(const FixtureWorld&) = delete;

    RouteResult get_route(const GeoCoordinate& origin, const GeoCoordinate& destination) override;
    PanoramaMeta nearest_panorama(const GeoCoordinate& coord) override;
    PanoramaMeta panorama(const std::string& id) override;
    ImageRef render_view(const ViewRequest& req) override;
    std::vector<Place> nearby_places(const GeoCoordinate& coord, double radius_m) override;
    Place find_place(const std::string& query) override;

    const std::vector<PanoramaMeta>& panoramas() const { return panos_; }
    const std::vector<Place>& places() const { return places_; }
    double snap_radius() const { return snap_radius_m_; }
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    double snap_radius_m_;
    std::vector<FixtureRoute> routes_;
    std::vector<PanoramaMeta> panos_;
    std::unordered_map<std::string, std::size_t> pano_by_id_;
    std::vector<Place> places_;
    PanoramaIndex index_;
};

// Scripted model: answers from mllm_script.json. Keys are tried in order
//   "{template}:{image_id},{image_id},..."   exact image list
//   "{template}:{pano}+{pano}..."            distinct panoramas in order
//                                            (the request location for text-only prompts)
//   "{template}:*"                           template default
// A request matching none of them is a scripted miss.
class ScriptedMllm final : public MllmProvider {
public:
    explicit ScriptedMllm(std::map<std::string, std::string> responses, std::size_t max_images = 10);
    static ScriptedMllm from_file(const std::string& path, std::size_t max_images = 10);

    std::string complete(const MllmRequest& req) override;
    std::size_t max_images() const override { return max_images_; }

    static std::string image_key(const MllmRequest& req);
    static std::string pano_key(const MllmRequest& req);

private:
    std::map<std::string, std::string> responses_;
    std::size_t max_images_;
};

ProviderSet make_fixture_providers(const std::string& bundle_dir, double snap_radius_m = 25.0,
                                   std::size_t max_images = 10);

}  // namespace sva
