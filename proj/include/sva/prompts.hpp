#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sva/common.hpp"
#include "sva/json.hpp"
#include "sva/providers.hpp"

namespace sva::prompts {

inline constexpr std::string_view kTemplateVersion = "v1";

// Template ids. The first six are the description/decision prompts; the last
// two bootstrap an exploration session from the user's intent.
inline constexpr std::string_view kSegment = "segment";
inline constexpr std::string_view kIntersection = "intersection";
inline constexpr std::string_view kDestination = "destination";
inline constexpr std::string_view kDirection = "direction";
inline constexpr std::string_view kSelector = "selector";
inline constexpr std::string_view kExplorationBlock = "exploration_block";
inline constexpr std::string_view kKeywords = "keywords";
inline constexpr std::string_view kPlaceType = "place_type";

// Raw template text with {name} placeholders and {{ / }} literal braces.
std::string_view template_text(std::string_view id);
std::vector<std::string_view> template_ids();

// Substitutes placeholders; throws InvalidArgument for a placeholder with no value.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);
// Names of `{identifier}` tokens left in rendered text.
std::vector<std::string> unsubstituted_placeholders(std::string_view text);

struct DescriptionTriple {
    std::string short_text;
    std::string medium_text;
    std::string long_text;

    friend bool operator==(const DescriptionTriple&, const DescriptionTriple&) = default;
};

struct DestinationDetail {
    std::string path_summary;
    std::string place_summary;
    std::string mobility_cues;
    std::string sidewalk;
    std::string signage_text;

    friend bool operator==(const DestinationDetail&, const DestinationDetail&) = default;
};

struct DirectionDescription {
    std::string street_name;
    geo::Cardinal travel_heading = geo::Cardinal::North;
    std::string body;
};

struct DirectionChoice {
    int idx = 0;  // 1-based
    std::string reason;
};

struct AgentContext {
    std::optional<std::string> prev_description;
    std::vector<Place> nearby_places;
    std::optional<std::string> intent;
    std::vector<std::string> keywords;
    geo::Cardinal current_heading = geo::Cardinal::North;
};

// "Name (category), 68 meters north" one per line, or "None".
std::string render_places(const std::vector<Place>& places);
// Appends keywords not already present (case-insensitive), preserving order.
void merge_keywords(std::vector<std::string>& keywords, const std::vector<std::string>& additions);

std::string build_segment_prompt(const AgentContext& ctx);
std::string build_intersection_prompt(const AgentContext& ctx);
std::string build_destination_prompt(const std::string& context_question, const std::string& place_name);
std::string build_direction_prompt(const std::string& intent, const std::string& street_name, geo::Cardinal new_heading,
                                   geo::Cardinal curr_heading, const std::string& place_type);
std::string build_selector_prompt(const std::string& intent, const std::vector<std::string>& road_descriptions,
                                  std::optional<int> from_road_idx);
std::string build_exploration_block_prompt(const AgentContext& ctx, const std::string& place_type);
std::string build_keywords_prompt(const std::string& intent);
std::string build_place_type_prompt(const std::string& intent);

enum class ParseErrorKind { NoJsonObject, InvalidJson, MissingKey, WrongType, EmptyValue, InvalidChoice };
std::string_view to_string(ParseErrorKind k);

struct ParseError {
    ParseErrorKind kind = ParseErrorKind::InvalidJson;
    std::string key;  // offending key, when there is one
    std::string message;
    std::string raw;
};

template <class T>
using ParseResult = Expected<T, ParseError>;

// Finds the JSON object in conversational model output: strips code fences,
// takes the first balanced {...} that parses, and on failure makes one repair pass
// (smart quotes, trailing commas, missing commas between lines).
ParseResult<json> extract_json_object(std::string_view raw);

ParseResult<DescriptionTriple> parse_triple(std::string_view raw);
ParseResult<DestinationDetail> parse_destination(std::string_view raw);
ParseResult<DirectionChoice> parse_choice(std::string_view raw, int candidate_count);
// Returns the description body, trimmed to at most three sentences.
ParseResult<std::string> parse_direction(std::string_view raw);
ParseResult<std::vector<std::string>> parse_keywords(std::string_view raw);
ParseResult<std::string> parse_place_type(std::string_view raw);

// Serializes a triple in the response format the templates ask for.
std::string triple_to_response_json(const DescriptionTriple& t);

double default_temperature(std::string_view template_id);
MllmRequest make_request(std::string_view template_id, std::string text, std::vector<ImageRef> images);

// Issues the request, parses with `parser`; on a parse error re-asks once
// with the error appended, then throws ErrorCode::Parse. Provider errors
// propagate unchanged.
template <class T, class Parser>
T ask(MllmProvider& mllm, const MllmRequest& req, Parser&& parser) {
    auto first = parser(mllm.complete(req));
    if (first) return std::move(first).value();
    MllmRequest again = req;
    again.text += "\n\nYour previous response could not be used (" + first.error().message +
                  "). Respond again using only the required JSON format.";
    auto second = parser(mllm.complete(again));
    if (second) return std::move(second).value();
    throw Error(ErrorCode::Parse, second.error().message, second.error().raw);
}

}  // namespace sva::prompts
