#include "sva/route_preview.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "sva/parallel.hpp"
#include "sva/text.hpp"

namespace sva::preview {

namespace {

struct Prefetched {
    std::optional<PanoramaMeta> pano;
    geo::PointKind kind = geo::PointKind::MidBlock;
    std::vector<ViewRequest> views;
    std::vector<ImageRef> images;
    std::vector<Place> places;
    bool imagery_unavailable = false;
    std::string error;
};

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

}  // namespace

void PreviewConfig::validate() const {
    sampling.validate();
    validate_radius(places_radius_m);
    if (!(intersection_threshold_m >= 0)) fail(ErrorCode::InvalidArgument, "intersection threshold must be >= 0");
    if (destination_panoramas == 0) fail(ErrorCode::InvalidArgument, "destination_panoramas must be >= 1");
    for (double f : {midblock_fov_deg, intersection_fov_deg, destination_fov_deg}) {
        if (!(f > 0 && f <= 120)) fail(ErrorCode::InvalidArgument, "fov must be in (0, 120]");
    }
}

std::string_view to_string(SegmentStatus s) {
    switch (s) {
        case SegmentStatus::Ok: return "ok";
        case SegmentStatus::Failed: return "failed";
        case SegmentStatus::ImageryUnavailable: return "imagery_unavailable";
    }
    return "ok";
}

geo::PointKind classify_point(const RouteResult& route, const geo::SamplePoint& sample, bool is_last,
                              std::optional<std::size_t> pano_link_count, double threshold_m) {
    if (is_last) return geo::PointKind::Destination;
    for (const auto& step : route.steps) {
        const bool junction = step.maneuver == ManeuverKind::TurnLeft || step.maneuver == ManeuverKind::TurnRight ||
                              step.maneuver == ManeuverKind::CrossIntersection;
        if (junction && geo::haversine_distance(step.location, sample.coord) <= threshold_m) {
            return geo::PointKind::Intersection;
        }
    }
    if (pano_link_count && *pano_link_count >= 3) return geo::PointKind::Intersection;
    return geo::PointKind::MidBlock;
}

std::vector<ViewRequest> views_for(const geo::SamplePoint& sample, geo::PointKind kind, const std::string& pano,
                                   const PreviewConfig& cfg) {
    std::vector<ViewRequest> out;
    if (kind == geo::PointKind::Intersection) {
        for (int k = 0; k < 4; ++k) {
            out.push_back({pano, sample.heading.rotated(90.0 * k), cfg.intersection_fov_deg, 0.0});
        }
    } else {
        for (double d : {-60.0, 0.0, 60.0}) out.push_back({pano, sample.heading.rotated(d), cfg.midblock_fov_deg, 0.0});
    }
    return out;
}

RoutePreviewer::RoutePreviewer(ProviderSet providers, PreviewConfig cfg, Clock clock)
    : providers_(std::move(providers)), cfg_(cfg), clock_(std::move(clock)) {
    cfg_.validate();
    if (!providers_.routes || !providers_.panoramas || !providers_.places || !providers_.mllm) {
        fail(ErrorCode::Config, "provider set is incomplete");
    }
}

GeoCoordinate RoutePreviewer::resolve(const Location& loc) {
    if (loc.coord) return geo::make_coordinate(loc.coord->lat, loc.coord->lon);
    if (text::trim(loc.query).empty()) fail(ErrorCode::InvalidArgument, "location needs a coordinate or a query");
    return providers_.places->find_place(loc.query).coord;
}

DestinationResult RoutePreviewer::describe_destination(const std::vector<ViewRequest>& approach_views,
                                                       const std::string& context, const std::string& place_name) {
    DestinationResult out;
    out.views = approach_views;
    for (const auto& v : approach_views) out.panoramas.push_back(v.pano);
    try {
        out.prompt = prompts::build_destination_prompt(context, place_name);
        std::vector<ImageRef> images;
        for (const auto& v : approach_views) images.push_back(providers_.panoramas->render_view(v));
        auto req = prompts::make_request(prompts::kDestination, out.prompt, std::move(images));
        out.detail = prompts::ask<DestinationDetail>(*providers_.mllm, req, prompts::parse_destination);
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

PreviewResult RoutePreviewer::generate(const PreviewRequest& req, const std::string& id, const ProgressFn& on_segment) {
    const auto origin = resolve(req.origin);
    const auto destination = resolve(req.destination);
    auto route = providers_.routes->get_route(origin, destination);
    route.validate();
    const auto samples = geo::sample_route(route.polyline, cfg_.sampling);

    // Imagery and places lookups are independent per sample; fetch them in
    // parallel and keep model calls sequential for chaining.
    std::vector<Prefetched> pre(samples.size());
    parallel_for(samples.size(), cfg_.prefetch_threads, [&](std::size_t i) {
        auto& p = pre[i];
        const bool is_last = i + 1 == samples.size();
        try {
            p.places = providers_.places->nearby_places(samples[i].coord, cfg_.places_radius_m);
        } catch (const std::exception&) {
            p.places.clear();
        }
        try {
            p.pano = providers_.panoramas->nearest_panorama(samples[i].coord);
        } catch (const Error& e) {
            p.imagery_unavailable = true;
            p.error = e.what();
            p.kind = classify_point(route, samples[i], is_last, std::nullopt, cfg_.intersection_threshold_m);
            return;
        }
        p.kind = classify_point(route, samples[i], is_last, p.pano->links.size(), cfg_.intersection_threshold_m);
        p.views = views_for(samples[i], p.kind, p.pano->id, cfg_);
        try {
            for (const auto& v : p.views) p.images.push_back(providers_.panoramas->render_view(v));
        } catch (const std::exception& e) {
            p.imagery_unavailable = true;
            p.images.clear();
            p.error = e.what();
        }
    });

    PreviewResult result{id, clock_ ? clock_() : std::string{}, req, route, {}, {}};
    std::optional<std::string> prev_long;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto& p = pre[i];
        PreviewSegment seg;
        seg.index = i;
        seg.sample = samples[i];
        seg.sample.kind = p.kind;
        seg.pano = p.pano ? p.pano->id : std::string{};
        seg.views = p.views;
        seg.nearby_places = p.places;
        if (p.imagery_unavailable) {
            seg.status = SegmentStatus::ImageryUnavailable;
            seg.error = p.error;
        } else {
            prompts::AgentContext ctx;
            ctx.prev_description = prev_long;
            ctx.nearby_places = p.places;
            const bool junction = p.kind == geo::PointKind::Intersection;
            seg.template_id = std::string(junction ? prompts::kIntersection : prompts::kSegment);
            seg.prompt = junction ? prompts::build_intersection_prompt(ctx) : prompts::build_segment_prompt(ctx);
            try {
                auto mreq = prompts::make_request(seg.template_id, seg.prompt, p.images);
                seg.triple = prompts::ask<DescriptionTriple>(*providers_.mllm, mreq, prompts::parse_triple);
                prev_long = seg.triple->long_text;
            } catch (const std::exception& e) {
                seg.status = SegmentStatus::Failed;
                seg.error = e.what();
            }
        }
        if (on_segment) on_segment(seg);
        result.segments.push_back(std::move(seg));
    }

    // Approach views: one forward view from each of the last few distinct
    // panoramas with imagery, in travel order.
    std::vector<ViewRequest> approach;
    for (auto it = result.segments.rbegin(); it != result.segments.rend(); ++it) {
        if (approach.size() >= cfg_.destination_panoramas) break;
        if (it->status == SegmentStatus::ImageryUnavailable || it->pano.empty()) continue;
        const bool seen = std::any_of(approach.begin(), approach.end(), [&](const auto& v) { return v.pano == it->pano; });
        if (seen) continue;
        approach.push_back({it->pano, it->sample.heading, cfg_.destination_fov_deg, 0.0});
    }
    std::reverse(approach.begin(), approach.end());
    if (approach.empty()) {
        result.destination.error = "no imagery near the destination";
    } else {
        std::string name = req.destination_name;
        if (text::trim(name).empty()) name = req.destination.query;
        if (text::trim(name).empty()) name = "the destination";
        result.destination = describe_destination(approach, req.question, name);
    }
    return result;
}

json to_json(const PreviewRequest& r) {
    auto loc = [](const Location& l) {
        json j = json::object();
        if (l.coord) j["coord"] = *l.coord;
        if (!l.query.empty()) j["query"] = l.query;
        return j;
    };
    return json{{"origin", loc(r.origin)},
                {"destination", loc(r.destination)},
                {"destination_name", r.destination_name},
                {"question", r.question}};
}

PreviewRequest request_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::Validation, "preview request must be an object");
    auto loc = [&](const char* key) {
        if (!j.contains(key)) fail(ErrorCode::Validation, std::string("missing field: ") + key);
        const auto& v = j.at(key);
        Location l;
        if (v.is_string()) {
            l.query = v.get<std::string>();
        } else if (v.is_array()) {
            l.coord = coordinate_from_json(v);
        } else if (v.is_object()) {
            if (v.contains("coord")) l.coord = coordinate_from_json(v.at("coord"));
            else if (v.contains("lat")) l.coord = coordinate_from_json(v);
            if (v.contains("query")) l.query = v.at("query").get<std::string>();
        } else {
            fail(ErrorCode::Validation, std::string("invalid location: ") + key);
        }
        if (!l.coord && text::trim(l.query).empty()) fail(ErrorCode::Validation, std::string("empty location: ") + key);
        return l;
    };
    try {
        PreviewRequest r;
        r.origin = loc("origin");
        r.destination = loc("destination");
        r.destination_name = j.value("destination_name", std::string{});
        r.question = j.value("question", std::string{});
        return r;
    } catch (const json::exception& e) {
        fail(ErrorCode::Validation, "invalid preview request", e.what());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidArgument) throw;
        fail(ErrorCode::Validation, std::string("invalid preview request: ") + e.what());
    }
}

json to_json(const PreviewSegment& s) {
    json views = json::array();
    for (const auto& v : s.views) {
        json jv = v;
        jv["image_id"] = v.image_id();
        views.push_back(std::move(jv));
    }
    json seg{{"index", s.index},
             {"kind", std::string(geo::to_string(s.sample.kind))},
             {"distance_from_start_m", s.sample.distance_from_start},
             {"coord", s.sample.coord},
             {"heading", s.sample.heading.value()},
             {"pano", s.pano},
             {"views", views},
             {"nearby_places", s.nearby_places},
             {"status", std::string(to_string(s.status))},
             {"template_id", s.template_id},
             {"template_version", std::string(prompts::kTemplateVersion)},
             {"prompt", s.prompt}};
    if (s.triple) {
        seg["descriptions"] = {{"short", s.triple->short_text},
                               {"medium", s.triple->medium_text},
                               {"long", s.triple->long_text}};
    } else {
        seg["descriptions"] = nullptr;
    }
    if (!s.error.empty()) seg["error"] = s.error;
    return seg;
}

json to_json(const PreviewResult& r) {
    json segs = json::array();
    for (const auto& s : r.segments) segs.push_back(to_json(s));
    const auto& d = r.destination;
    json views = json::array();
    for (const auto& v : d.views) {
        json jv = v;
        jv["image_id"] = v.image_id();
        views.push_back(std::move(jv));
    }
    json dest{{"status", d.ok ? "ok" : "failed"}, {"panoramas", d.panoramas}, {"views", views}, {"prompt", d.prompt}};
    if (d.detail) {
        dest["detail"] = {{"path_summary", d.detail->path_summary},
                          {"place_summary", d.detail->place_summary},
                          {"mobility_cues", d.detail->mobility_cues},
                          {"sidewalk", d.detail->sidewalk},
                          {"signage_text", d.detail->signage_text}};
    } else {
        dest["detail"] = nullptr;
    }
    if (!d.error.empty()) dest["error"] = d.error;
    return json{{"schema", std::string(kSchema)},
                {"id", r.id},
                {"generated_at", r.generated_at},
                {"request", to_json(r.request)},
                {"route", r.route},
                {"segments", segs},
                {"destination", dest}};
}

std::string to_markdown(const PreviewResult& r) {
    std::ostringstream out;
    out << "# Route preview " << r.id << "\n\n";
    out << "Route length: " << std::lround(r.route.total_length_m) << " m, " << r.segments.size() << " points\n\n";
    out << "| # | Location | Short | Medium | Long |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& s : r.segments) {
        std::string where = s.index == 0 ? "Start" : std::to_string(std::lround(s.sample.distance_from_start)) + " m";
        where += ", " + std::string(geo::to_string(s.sample.kind)) + ", heading " +
                 std::string(geo::to_string(geo::cardinal_of(s.sample.heading)));
        out << "| " << s.index << " | " << md_cell(where) << " | ";
        if (s.triple) {
            out << md_cell(s.triple->short_text) << " | " << md_cell(s.triple->medium_text) << " | "
                << md_cell(s.triple->long_text) << " |\n";
        } else {
            const std::string note = "(" + std::string(to_string(s.status)) + ")";
            out << note << " | " << note << " | " << note << " |\n";
        }
    }
    out << "\n## Destination\n\n";
    const auto& d = r.destination;
    if (!d.detail) {
        out << "Destination description unavailable";
        if (!d.error.empty()) out << ": " << d.error;
        out << "\n";
        return out.str();
    }
    out << "### Path\n\n" << d.detail->path_summary << "\n\n";
    out << "### Place\n\n" << d.detail->place_summary << "\n\n";
    out << "### Mobility cues\n\n" << d.detail->mobility_cues << "\n\n";
    out << "### Sidewalk\n\n" << d.detail->sidewalk << "\n\n";
    out << "### Signage\n\n" << (d.detail->signage_text.empty() ? "(none)" : d.detail->signage_text) << "\n";
    return out.str();
}

}  // namespace sva::preview
