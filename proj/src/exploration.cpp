#include "sva/exploration.hpp"

#include <algorithm>

#include "sva/parallel.hpp"
#include "sva/text.hpp"

namespace sva::explore {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(const Session& s, std::initializer_list<Status> allowed, std::string_view op) {
    if (std::find(allowed.begin(), allowed.end(), s.status) != allowed.end()) return;
    fail(ErrorCode::InvalidState, std::string(op) + " is not valid while " + std::string(to_string(s.status)));
}

// Failures that belong to the block or option itself rather than the
// provider's availability.
bool content_failure(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ScriptedMiss:
        case ErrorCode::Parse:
        case ErrorCode::NotFound:
        case ErrorCode::NoCoverage:
        case ErrorCode::InvalidChoice:
            return true;
        default:
            return false;
    }
}

std::string place_label(const Place& p) { return p.name + " (" + p.category + ")"; }

json opt_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
std::optional<int> opt_int(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<int>();
}
json opt_str(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
std::optional<std::string> opt_str(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

DirectionOption option_from_json(const json& j) {
    DirectionOption o;
    o.idx = j.at("idx").get<int>();
    o.street_name = j.at("street_name").get<std::string>();
    o.heading = HeadingDeg(j.at("heading").get<double>());
    o.cardinal = geo::cardinal_from_string(j.at("cardinal").get<std::string>());
    o.target = j.at("target").get<std::string>();
    o.image_id = j.value("image_id", std::string{});
    o.description = j.value("description", std::string{});
    o.description_ok = j.value("description_ok", false);
    o.previously_traveled = j.value("previously_traveled", false);
    o.suggested = j.value("suggested", false);
    return o;
}

json triple_json(const DescriptionTriple& t) {
    return {{"short", t.short_text}, {"medium", t.medium_text}, {"long", t.long_text}};
}

}  // namespace

std::string_view to_string(Status s) {
    switch (s) {
        case Status::AwaitingKeywords: return "awaiting_keywords";
        case Status::Walking: return "walking";
        case Status::AtIntersection: return "at_intersection";
        case Status::Ended: return "ended";
    }
    return "ended";
}

Status status_from_string(std::string_view s) {
    for (auto st : {Status::AwaitingKeywords, Status::Walking, Status::AtIntersection, Status::Ended}) {
        if (s == to_string(st)) return st;
    }
    fail(ErrorCode::InvalidArgument, "unknown status: " + std::string(s));
}

bool transition_allowed(Status from, Status to) {
    if (from == to) return true;
    switch (from) {
        case Status::AwaitingKeywords: return to == Status::Walking || to == Status::Ended;
        case Status::Walking: return to == Status::AtIntersection || to == Status::Ended;
        case Status::AtIntersection: return to == Status::Walking || to == Status::Ended;
        case Status::Ended: return false;
    }
    return false;
}

std::string_view event_type(const Event& e) {
    return std::visit(Overloaded{
                          [](const SessionStarted&) { return std::string_view("session_started"); },
                          [](const KeywordsAdded&) { return std::string_view("keywords_added"); },
                          [](const BlockDescribed&) { return std::string_view("block_described"); },
                          [](const BlockFailed&) { return std::string_view("block_failed"); },
                          [](const Moved&) { return std::string_view("moved"); },
                          [](const DeadEnd&) { return std::string_view("dead_end"); },
                          [](const DirectionsOffered&) { return std::string_view("directions_offered"); },
                          [](const DirectionChosen&) { return std::string_view("direction_chosen"); },
                          [](const Ended&) { return std::string_view("ended"); },
                      },
                      e);
}

void apply(Session& s, const Event& e) {
    std::visit(Overloaded{
                   [&](const SessionStarted& ev) {
                       s.id = ev.id;
                       s.intent = ev.intent;
                       s.place_type = ev.place_type;
                       s.keywords.clear();
                       prompts::merge_keywords(s.keywords, ev.keywords);
                       s.start = ev.start;
                       s.pano = ev.pano;
                       s.heading = ev.heading;
                       s.step_budget = ev.step_budget;
                       s.created_at = ev.created_at;
                       s.status = Status::AwaitingKeywords;
                   },
                   [&](const KeywordsAdded& ev) {
                       prompts::merge_keywords(s.keywords, ev.additions);
                       if (s.status == Status::AwaitingKeywords) s.status = Status::Walking;
                   },
                   [&](const BlockDescribed& ev) { s.prev_description = ev.triple.long_text; },
                   [&](const BlockFailed&) {},
                   [&](const Moved& ev) {
                       s.visited_edges.emplace(ev.from, ev.to);
                       s.arrived_from = ev.from;
                       s.pano = ev.to;
                       s.heading = ev.heading;
                       s.steps += 1;
                       s.status = ev.status_after;
                       s.offered.clear();
                       s.suggested.reset();
                   },
                   [&](const DeadEnd&) { s.status = Status::AtIntersection; },
                   [&](const DirectionsOffered& ev) {
                       s.offered = ev.options;
                       s.suggested = ev.suggested;
                   },
                   [&](const DirectionChosen& ev) { s.heading = ev.heading; },
                   [&](const Ended&) { s.status = Status::Ended; },
               },
               e);
    s.history.push_back(e);
}

Session replay(const std::vector<Event>& events) {
    if (events.empty() || !std::holds_alternative<SessionStarted>(events.front())) {
        fail(ErrorCode::Validation, "event log must begin with session_started");
    }
    Session s;
    for (const auto& e : events) explore::apply(s, e);
    return s;
}

json to_json(const DirectionOption& o) {
    return json{{"idx", o.idx},
                {"street_name", o.street_name},
                {"heading", o.heading.value()},
                {"cardinal", std::string(geo::to_string(o.cardinal))},
                {"target", o.target},
                {"image_id", o.image_id},
                {"description", o.description},
                {"description_ok", o.description_ok},
                {"previously_traveled", o.previously_traveled},
                {"suggested", o.suggested}};
}

json to_json(const Event& e) {
    json j = std::visit(
        Overloaded{
            [](const SessionStarted& ev) {
                return json{{"id", ev.id},         {"intent", ev.intent},   {"place_type", ev.place_type},
                            {"keywords", ev.keywords}, {"start", ev.start}, {"pano", ev.pano},
                            {"heading", ev.heading.value()}, {"step_budget", ev.step_budget},
                            {"created_at", ev.created_at}};
            },
            [](const KeywordsAdded& ev) { return json{{"additions", ev.additions}}; },
            [](const BlockDescribed& ev) {
                return json{{"pano", ev.pano},
                            {"heading", ev.heading.value()},
                            {"view_ids", ev.view_ids},
                            {"places", ev.places},
                            {"prev_description", opt_str(ev.prev_description)},
                            {"prompt", ev.prompt},
                            {"template_id", std::string(prompts::kExplorationBlock)},
                            {"template_version", std::string(prompts::kTemplateVersion)},
                            {"descriptions", triple_json(ev.triple)}};
            },
            [](const BlockFailed& ev) { return json{{"pano", ev.pano}, {"error", ev.error}}; },
            [](const Moved& ev) {
                return json{{"from", ev.from},
                            {"to", ev.to},
                            {"heading", ev.heading.value()},
                            {"status_after", std::string(to_string(ev.status_after))}};
            },
            [](const DeadEnd& ev) { return json{{"pano", ev.pano}}; },
            [](const DirectionsOffered& ev) {
                json opts = json::array();
                for (const auto& o : ev.options) opts.push_back(to_json(o));
                return json{{"pano", ev.pano},
                            {"options", opts},
                            {"suggested", opt_int(ev.suggested)},
                            {"suggestion_reason", ev.suggestion_reason}};
            },
            [](const DirectionChosen& ev) {
                return json{{"pano", ev.pano},
                            {"idx", ev.idx},
                            {"suggested", opt_int(ev.suggested)},
                            {"heading", ev.heading.value()},
                            {"target", ev.target}};
            },
            [](const Ended& ev) { return json{{"reason", ev.reason}}; },
        },
        e);
    j["type"] = std::string(event_type(e));
    return j;
}

Event event_from_json(const json& j) {
    try {
        const auto type = j.at("type").get<std::string>();
        if (type == "session_started") {
            SessionStarted ev;
            ev.id = j.at("id").get<std::string>();
            ev.intent = j.at("intent").get<std::string>();
            ev.place_type = j.at("place_type").get<std::string>();
            ev.keywords = j.at("keywords").get<std::vector<std::string>>();
            ev.start = coordinate_from_json(j.at("start"));
            ev.pano = j.at("pano").get<std::string>();
            ev.heading = HeadingDeg(j.at("heading").get<double>());
            ev.step_budget = j.at("step_budget").get<std::size_t>();
            ev.created_at = j.value("created_at", std::string{});
            return ev;
        }
        if (type == "keywords_added") return KeywordsAdded{j.at("additions").get<std::vector<std::string>>()};
        if (type == "block_described") {
            BlockDescribed ev;
            ev.pano = j.at("pano").get<std::string>();
            ev.heading = HeadingDeg(j.at("heading").get<double>());
            ev.view_ids = j.at("view_ids").get<std::vector<std::string>>();
            ev.places = j.at("places").get<std::vector<std::string>>();
            ev.prev_description = opt_str(j, "prev_description");
            ev.prompt = j.at("prompt").get<std::string>();
            const auto& d = j.at("descriptions");
            ev.triple = {d.at("short").get<std::string>(), d.at("medium").get<std::string>(),
                         d.at("long").get<std::string>()};
            return ev;
        }
        if (type == "block_failed") return BlockFailed{j.at("pano").get<std::string>(), j.at("error").get<std::string>()};
        if (type == "moved") {
            return Moved{j.at("from").get<std::string>(), j.at("to").get<std::string>(),
                         HeadingDeg(j.at("heading").get<double>()),
                         status_from_string(j.at("status_after").get<std::string>())};
        }
        if (type == "dead_end") return DeadEnd{j.at("pano").get<std::string>()};
        if (type == "directions_offered") {
            DirectionsOffered ev;
            ev.pano = j.at("pano").get<std::string>();
            for (const auto& o : j.at("options")) ev.options.push_back(option_from_json(o));
            ev.suggested = opt_int(j, "suggested");
            ev.suggestion_reason = j.value("suggestion_reason", std::string{});
            return ev;
        }
        if (type == "direction_chosen") {
            DirectionChosen ev;
            ev.pano = j.at("pano").get<std::string>();
            ev.idx = j.at("idx").get<int>();
            ev.suggested = opt_int(j, "suggested");
            ev.heading = HeadingDeg(j.at("heading").get<double>());
            ev.target = j.at("target").get<std::string>();
            return ev;
        }
        if (type == "ended") return Ended{j.at("reason").get<std::string>()};
        fail(ErrorCode::Validation, "unknown event type: " + type);
    } catch (const json::exception& e) {
        fail(ErrorCode::Validation, "malformed event", e.what());
    }
}

json to_json(const Session& s) {
    json edges = json::array();
    for (const auto& [a, b] : s.visited_edges) edges.push_back(json::array({a, b}));
    json offered = json::array();
    for (const auto& o : s.offered) offered.push_back(to_json(o));
    json events = json::array();
    for (const auto& e : s.history) events.push_back(to_json(e));
    return json{{"schema", std::string(kSchema)},
                {"id", s.id},
                {"intent", s.intent},
                {"place_type", s.place_type},
                {"keywords", s.keywords},
                {"start", s.start},
                {"position", s.pano},
                {"heading", s.heading.value()},
                {"cardinal", std::string(geo::to_string(geo::cardinal_of(s.heading)))},
                {"status", std::string(to_string(s.status))},
                {"steps", s.steps},
                {"step_budget", s.step_budget},
                {"arrived_from", opt_str(s.arrived_from)},
                {"prev_description", opt_str(s.prev_description)},
                {"visited_edges", edges},
                {"offered", offered},
                {"suggested", opt_int(s.suggested)},
                {"created_at", s.created_at},
                {"events", events}};
}

Session session_from_log(const json& log) {
    if (!log.is_object() || log.value("schema", std::string{}) != kSchema) {
        fail(ErrorCode::Validation, "not an exploration.v1 log");
    }
    std::vector<Event> events;
    for (const auto& e : log.at("events")) events.push_back(event_from_json(e));
    return replay(events);
}

void ExploreConfig::validate() const {
    for (double f : {block_fov_deg, direction_fov_deg}) {
        if (!(f > 0 && f <= 120)) fail(ErrorCode::InvalidArgument, "fov must be in (0, 120]");
    }
    if (!(max_step_deviation_deg > 0 && max_step_deviation_deg <= 180)) {
        fail(ErrorCode::InvalidArgument, "max step deviation must be in (0, 180]");
    }
    validate_radius(places_radius_m);
    if (step_budget == 0) fail(ErrorCode::InvalidArgument, "step budget must be >= 1");
}

Explorer::Explorer(ProviderSet providers, ExploreConfig cfg, Clock clock)
    : providers_(std::move(providers)), cfg_(cfg), clock_(std::move(clock)) {
    cfg_.validate();
    if (!providers_.panoramas || !providers_.places || !providers_.mllm) {
        fail(ErrorCode::Config, "provider set is incomplete");
    }
}

void Explorer::commit(Session& s, Event e) {
    const bool moved = std::holds_alternative<Moved>(e);
    explore::apply(s, e);
    if (moved && s.steps >= s.step_budget && s.status != Status::Ended) explore::apply(s, Ended{"step_budget"});
}

Session Explorer::start_session(const std::string& id, const std::string& intent, const GeoCoordinate& start) {
    if (text::trim(intent).empty()) fail(ErrorCode::InvalidArgument, "intent must not be empty");
    if (!geo::is_valid(start)) fail(ErrorCode::InvalidArgument, "invalid start coordinate");
    const auto pano = providers_.panoramas->nearest_panorama(start);

    std::vector<std::string> keywords;
    std::string place_type;
    try {
        auto req = prompts::make_request(prompts::kKeywords, prompts::build_keywords_prompt(intent), {});
        keywords = prompts::ask<std::vector<std::string>>(*providers_.mllm, req, prompts::parse_keywords);
    } catch (const Error& e) {
        if (!content_failure(e)) throw;
    }
    try {
        auto req = prompts::make_request(prompts::kPlaceType, prompts::build_place_type_prompt(intent), {});
        place_type = prompts::ask<std::string>(*providers_.mllm, req, prompts::parse_place_type);
    } catch (const Error& e) {
        if (!content_failure(e)) throw;
    }

    SessionStarted ev;
    ev.id = id;
    ev.intent = intent;
    ev.place_type = place_type;
    ev.keywords = keywords;
    ev.start = start;
    ev.pano = pano.id;
    ev.heading = pano.links.empty() ? HeadingDeg(0.0) : pano.links.front().heading;
    ev.step_budget = cfg_.step_budget;
    ev.created_at = clock_ ? clock_() : std::string{};
    Session s;
    commit(s, ev);
    return s;
}

void Explorer::add_keywords(Session& s, const std::vector<std::string>& additions) {
    require(s, {Status::AwaitingKeywords, Status::Walking}, "add_keywords");
    std::vector<std::string> cleaned;
    for (const auto& a : additions) {
        auto t = text::trim(a);
        if (!t.empty()) cleaned.push_back(std::move(t));
    }
    commit(s, KeywordsAdded{cleaned});
}

std::optional<DescriptionTriple> Explorer::describe_block(Session& s) {
    require(s, {Status::Walking}, "describe_block");
    BlockDescribed ev;
    ev.pano = s.pano;
    ev.heading = s.heading;
    ev.prev_description = s.prev_description;
    try {
        const auto meta = providers_.panoramas->panorama(s.pano);
        std::vector<ImageRef> images;
        for (double d : {-60.0, 0.0, 60.0}) {
            ViewRequest v{s.pano, s.heading.rotated(d), cfg_.block_fov_deg, 0.0};
            ev.view_ids.push_back(v.image_id());
            images.push_back(providers_.panoramas->render_view(v));
        }
        prompts::AgentContext ctx;
        ctx.prev_description = s.prev_description;
        ctx.nearby_places = providers_.places->nearby_places(meta.coord, cfg_.places_radius_m);
        for (const auto& p : ctx.nearby_places) ev.places.push_back(place_label(p));
        ctx.intent = s.intent;
        ctx.keywords = s.keywords;
        ctx.current_heading = geo::cardinal_of(s.heading);
        ev.prompt = prompts::build_exploration_block_prompt(ctx, s.place_type);
        auto req = prompts::make_request(prompts::kExplorationBlock, ev.prompt, std::move(images));
        ev.triple = prompts::ask<DescriptionTriple>(*providers_.mllm, req, prompts::parse_triple);
    } catch (const Error& e) {
        if (!content_failure(e)) throw;
        commit(s, BlockFailed{s.pano, e.what()});
        return std::nullopt;
    }
    auto triple = ev.triple;
    commit(s, std::move(ev));
    return triple;
}

void Explorer::step_forward(Session& s) {
    require(s, {Status::Walking}, "step_forward");
    const auto meta = providers_.panoramas->panorama(s.pano);
    const PanoramaLink* best = nullptr;
    double best_diff = 0.0;
    for (const auto& link : meta.links) {
        const double d = geo::angular_difference(link.heading, s.heading);
        if (!best || d < best_diff) {
            best = &link;
            best_diff = d;
        }
    }
    if (!best || best_diff > cfg_.max_step_deviation_deg) {
        commit(s, DeadEnd{s.pano});
        return;
    }
    const auto next = providers_.panoramas->panorama(best->target);
    const auto after = next.links.size() >= 3 ? Status::AtIntersection : Status::Walking;
    commit(s, Moved{s.pano, best->target, best->heading, after});
}

std::vector<DirectionOption> Explorer::direction_skeleton(const Session& s) const {
    const auto meta = providers_.panoramas->panorama(s.pano);
    std::vector<DirectionOption> forward;
    std::vector<DirectionOption> reverse;
    for (const auto& link : meta.links) {
        DirectionOption o;
        o.street_name = link.street_name.empty() ? std::string(kUnnamedStreet) : link.street_name;
        o.heading = link.heading;
        o.cardinal = geo::cardinal_of(link.heading);
        o.target = link.target;
        o.image_id = ViewRequest{s.pano, link.heading, cfg_.direction_fov_deg, 0.0}.image_id();
        o.previously_traveled = s.arrived_from && *s.arrived_from == link.target;
        (o.previously_traveled ? reverse : forward).push_back(std::move(o));
    }
    forward.insert(forward.end(), reverse.begin(), reverse.end());
    for (std::size_t i = 0; i < forward.size(); ++i) forward[i].idx = static_cast<int>(i + 1);
    return forward;
}

std::vector<DirectionOption> Explorer::enumerate_directions(const Session& s) const {
    require(s, {Status::AtIntersection}, "enumerate_directions");
    auto options = direction_skeleton(s);
    const auto curr = geo::cardinal_of(s.heading);
    parallel_for(options.size(), cfg_.fanout_threads, [&](std::size_t i) {
        auto& o = options[i];
        try {
            const auto prompt = prompts::build_direction_prompt(s.intent, o.street_name, o.cardinal, curr, s.place_type);
            auto image = providers_.panoramas->render_view({s.pano, o.heading, cfg_.direction_fov_deg, 0.0});
            auto req = prompts::make_request(prompts::kDirection, prompt, {std::move(image)});
            o.description = prompts::ask<std::string>(*providers_.mllm, req, prompts::parse_direction);
            o.description_ok = true;
        } catch (const std::exception&) {
            o.description = std::string(kPlaceholderDescription);
            o.description_ok = false;
        }
    });
    return options;
}

std::vector<DirectionOption> Explorer::suggest_direction(const Session& s, std::vector<DirectionOption> options,
                                                         std::string* reason) const {
    for (auto& o : options) o.suggested = false;
    if (options.size() < 2) return options;
    std::vector<std::string> roads;
    std::optional<int> from_idx;
    std::size_t forward = 0;
    for (const auto& o : options) {
        roads.push_back("Heading " + std::string(geo::to_string(o.cardinal)) + " on " + o.street_name + ". " +
                        o.description);
        if (o.previously_traveled) from_idx = o.idx;
        else ++forward;
    }
    try {
        auto req = prompts::make_request(prompts::kSelector, prompts::build_selector_prompt(s.intent, roads, from_idx), {});
        req.location = s.pano;
        const int n = static_cast<int>(options.size());
        auto choice = prompts::ask<prompts::DirectionChoice>(
            *providers_.mllm, req, [n](std::string_view raw) { return prompts::parse_choice(raw, n); });
        auto& picked = options[static_cast<std::size_t>(choice.idx - 1)];
        // The arriving road is never suggested while two forward options exist.
        if (picked.previously_traveled && forward >= 2) return options;
        picked.suggested = true;
        if (reason) *reason = choice.reason;
    } catch (const std::exception&) {
        // No suggestion; the user still chooses freely.
    }
    return options;
}

const std::vector<DirectionOption>& Explorer::offer_directions(Session& s) {
    require(s, {Status::AtIntersection}, "offer_directions");
    DirectionsOffered ev;
    ev.pano = s.pano;
    ev.options = suggest_direction(s, enumerate_directions(s), &ev.suggestion_reason);
    for (const auto& o : ev.options) {
        if (o.suggested) ev.suggested = o.idx;
    }
    commit(s, std::move(ev));
    return s.offered;
}

void Explorer::choose_direction(Session& s, int idx) {
    require(s, {Status::AtIntersection}, "choose_direction");
    const auto options = s.offered.empty() ? direction_skeleton(s) : s.offered;
    if (idx < 1 || idx > static_cast<int>(options.size())) {
        fail(ErrorCode::InvalidArgument, "direction index out of range",
             "idx must be between 1 and " + std::to_string(options.size()));
    }
    const auto& o = options[static_cast<std::size_t>(idx - 1)];
    const auto from = s.pano;
    const auto next = providers_.panoramas->panorama(o.target);
    const auto after = next.links.size() >= 3 ? Status::AtIntersection : Status::Walking;
    commit(s, DirectionChosen{from, idx, s.suggested, o.heading, o.target});
    commit(s, Moved{from, o.target, o.heading, after});
}

void Explorer::end_session(Session& s, const std::string& reason) {
    require(s, {Status::AwaitingKeywords, Status::Walking, Status::AtIntersection}, "end_session");
    commit(s, Ended{reason});
}

}  // namespace sva::explore
