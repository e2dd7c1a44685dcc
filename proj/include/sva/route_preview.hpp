#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sva/geo.hpp"
#include "sva/json.hpp"
#include "sva/prompts.hpp"
#include "sva/providers.hpp"

namespace sva::preview {

using prompts::DescriptionTriple;
using prompts::DestinationDetail;

inline constexpr std::string_view kSchema = "preview.v1";

// A coordinate, or a free-text place query resolved through the places provider.
struct Location {
    std::optional<GeoCoordinate> coord;
    std::string query;
};

struct PreviewRequest {
    Location origin;
    Location destination;
    std::string destination_name;
    // The user's question about the destination; may be empty.
    std::string question;
};

struct PreviewConfig {
    geo::SamplingConfig sampling;
    double places_radius_m = 100.0;
    double intersection_threshold_m = 15.0;
    std::size_t destination_panoramas = 3;
    double midblock_fov_deg = 60.0;
    double intersection_fov_deg = 90.0;
    double destination_fov_deg = 90.0;
    std::size_t prefetch_threads = 4;

    void validate() const;
};

enum class SegmentStatus { Ok, Failed, ImageryUnavailable };
std::string_view to_string(SegmentStatus s);

struct PreviewSegment {
    std::size_t index = 0;
    geo::SamplePoint sample;
    std::string pano;
    std::vector<ViewRequest> views;
    std::vector<Place> nearby_places;
    SegmentStatus status = SegmentStatus::Ok;
    std::optional<DescriptionTriple> triple;
    std::string template_id;
    std::string prompt;  // rendered prompt as sent, kept for auditing
    std::string error;
};

struct DestinationResult {
    bool ok = false;
    std::optional<DestinationDetail> detail;
    std::vector<std::string> panoramas;
    std::vector<ViewRequest> views;
    std::string prompt;
    std::string error;
};

struct PreviewResult {
    std::string id;
    std::string generated_at;
    PreviewRequest request;
    RouteResult route;
    std::vector<PreviewSegment> segments;
    DestinationResult destination;
};

// Intersection when within `threshold_m` of a turn or crossing step, or when
// the local panorama has at least three links; Destination for the last
// sample; MidBlock otherwise.
geo::PointKind classify_point(const RouteResult& route, const geo::SamplePoint& sample, bool is_last,
                              std::optional<std::size_t> pano_link_count, double threshold_m = 15.0);

// Intersection: four views covering 360 degrees starting at the travel
// heading. Everything else: left/front/right covering 180 degrees forward.
std::vector<ViewRequest> views_for(const geo::SamplePoint& sample, geo::PointKind kind, const std::string& pano,
                                   const PreviewConfig& cfg = {});

using Clock = std::function<std::string()>;
using ProgressFn = std::function<void(const PreviewSegment&)>;

class RoutePreviewer {
public:
    RoutePreviewer(ProviderSet providers, PreviewConfig cfg, Clock clock);

    // Throws RouteUnavailable when no route exists; per-segment failures are
    // recorded on the segment and generation continues.
    PreviewResult generate(const PreviewRequest& req, const std::string& id = "preview",
                           const ProgressFn& on_segment = {});

    // Images go in approach order, the destination-facing view last.
    DestinationResult describe_destination(const std::vector<ViewRequest>& approach_views, const std::string& context,
                                           const std::string& place_name);

    GeoCoordinate resolve(const Location& loc);

private:
    ProviderSet providers_;
    PreviewConfig cfg_;
    Clock clock_;
};

json to_json(const PreviewSegment& s);
json to_json(const PreviewResult& r);
json to_json(const PreviewRequest& r);
PreviewRequest request_from_json(const json& j);
// Table with Short/Medium/Long columns plus the destination sections.
std::string to_markdown(const PreviewResult& r);

}  // namespace sva::preview
