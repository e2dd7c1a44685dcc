#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sva/geo.hpp"
#include "sva/json.hpp"
#include "sva/prompts.hpp"
#include "sva/providers.hpp"

namespace sva::explore {

using prompts::DescriptionTriple;

inline constexpr std::string_view kSchema = "exploration.v1";
inline constexpr std::string_view kUnnamedStreet = "unnamed street";
inline constexpr std::string_view kPlaceholderDescription = "No description is available for this direction.";

enum class Status { AwaitingKeywords, Walking, AtIntersection, Ended };
std::string_view to_string(Status s);
Status status_from_string(std::string_view s);
// The edges of the session state machine, self-loops included.
bool transition_allowed(Status from, Status to);

struct DirectionOption {
    int idx = 0;  // 1-based
    std::string street_name;
    HeadingDeg heading;
    geo::Cardinal cardinal = geo::Cardinal::North;
    std::string target;
    std::string image_id;
    std::string description;
    bool description_ok = false;
    bool previously_traveled = false;
    bool suggested = false;

    friend bool operator==(const DirectionOption&, const DirectionOption&) = default;
};

// Events. Session state is the left fold of `apply` over these.
struct SessionStarted {
    std::string id;
    std::string intent;
    std::string place_type;
    std::vector<std::string> keywords;
    GeoCoordinate start;
    std::string pano;
    HeadingDeg heading;
    std::size_t step_budget = 200;
    std::string created_at;
    friend bool operator==(const SessionStarted&, const SessionStarted&) = default;
};
struct KeywordsAdded {
    std::vector<std::string> additions;
    friend bool operator==(const KeywordsAdded&, const KeywordsAdded&) = default;
};
struct BlockDescribed {
    std::string pano;
    HeadingDeg heading;
    std::vector<std::string> view_ids;
    std::vector<std::string> places;  // "Name (category)"
    std::optional<std::string> prev_description;
    std::string prompt;
    DescriptionTriple triple;
    friend bool operator==(const BlockDescribed&, const BlockDescribed&) = default;
};
struct BlockFailed {
    std::string pano;
    std::string error;
    friend bool operator==(const BlockFailed&, const BlockFailed&) = default;
};
struct Moved {
    std::string from;
    std::string to;
    HeadingDeg heading;
    Status status_after = Status::Walking;
    friend bool operator==(const Moved&, const Moved&) = default;
};
struct DeadEnd {
    std::string pano;
    friend bool operator==(const DeadEnd&, const DeadEnd&) = default;
};
struct DirectionsOffered {
    std::string pano;
    std::vector<DirectionOption> options;
    std::optional<int> suggested;
    std::string suggestion_reason;
    friend bool operator==(const DirectionsOffered&, const DirectionsOffered&) = default;
};
struct DirectionChosen {
    std::string pano;
    int idx = 0;
    std::optional<int> suggested;
    HeadingDeg heading;
    std::string target;
    friend bool operator==(const DirectionChosen&, const DirectionChosen&) = default;
};
struct Ended {
    std::string reason;
    friend bool operator==(const Ended&, const Ended&) = default;
};

using Event = std::variant<SessionStarted, KeywordsAdded, BlockDescribed, BlockFailed, Moved, DeadEnd,
                           DirectionsOffered, DirectionChosen, Ended>;
std::string_view event_type(const Event& e);

struct Session {
    std::string id;
    std::string intent;
    std::string place_type;
    std::vector<std::string> keywords;
    GeoCoordinate start;
    std::string pano;
    HeadingDeg heading;
    std::set<std::pair<std::string, std::string>> visited_edges;
    Status status = Status::AwaitingKeywords;
    std::size_t steps = 0;
    std::size_t step_budget = 200;
    std::optional<std::string> arrived_from;
    std::optional<std::string> prev_description;
    // Options offered at the current node, cleared on movement.
    std::vector<DirectionOption> offered;
    std::optional<int> suggested;
    std::string created_at;
    std::vector<Event> history;

    friend bool operator==(const Session&, const Session&) = default;
};

// Pure transition; appends `e` to history.
void apply(Session& s, const Event& e);
Session replay(const std::vector<Event>& events);

json to_json(const Event& e);
Event event_from_json(const json& j);
json to_json(const DirectionOption& o);
// Snapshot: current state plus the full event history.
json to_json(const Session& s);
Session session_from_log(const json& log);

struct ExploreConfig {
    double block_fov_deg = 60.0;
    double direction_fov_deg = 90.0;
    double max_step_deviation_deg = 45.0;
    double places_radius_m = 100.0;
    std::size_t step_budget = 200;
    std::size_t fanout_threads = 4;

    void validate() const;
};

using Clock = std::function<std::string()>;

// Session operations. Each checks its precondition status (InvalidState
// otherwise), computes events, and commits them through `apply`. Provider
// failures leave the session unchanged.
class Explorer {
public:
    Explorer(ProviderSet providers, ExploreConfig cfg, Clock clock);

    Session start_session(const std::string& id, const std::string& intent, const GeoCoordinate& start);
    void add_keywords(Session& s, const std::vector<std::string>& additions);
    // nullopt when the block could not be described (BlockFailed recorded).
    std::optional<DescriptionTriple> describe_block(Session& s);
    void step_forward(Session& s);
    // Described options; does not modify the session.
    std::vector<DirectionOption> enumerate_directions(const Session& s) const;
    // Marks at most one option as suggested.
    std::vector<DirectionOption> suggest_direction(const Session& s, std::vector<DirectionOption> options,
                                                   std::string* reason = nullptr) const;
    // enumerate + suggest, recorded as a DirectionsOffered event.
    const std::vector<DirectionOption>& offer_directions(Session& s);
    void choose_direction(Session& s, int idx);
    void end_session(Session& s, const std::string& reason = "user");

    const ExploreConfig& config() const { return cfg_; }

private:
    void commit(Session& s, Event e);
    // Option skeletons (no descriptions) in display order: every link except
    // the arriving edge, then the arriving edge marked previously traveled.
    std::vector<DirectionOption> direction_skeleton(const Session& s) const;

    ProviderSet providers_;
    ExploreConfig cfg_;
    Clock clock_;
};

}  // namespace sva::explore
