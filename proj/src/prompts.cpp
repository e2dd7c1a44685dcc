#include "sva/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "sva/text.hpp"

namespace sva::prompts {

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of an `{identifier}` token starting at s[i] ('{'), or 0.
std::size_t placeholder_len(std::string_view s, std::size_t i) {
    std::size_t j = i + 1;
    while (j < s.size() && is_ident_char(s[j])) ++j;
    if (j == i + 1 || j >= s.size() || s[j] != '}') return 0;
    return j - i + 1;
}

std::string or_none(const std::optional<std::string>& v) {
    if (!v || text::trim(*v).empty()) return "None";
    return *v;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    for (std::size_t i = 0; i < tmpl.size();) {
        const char c = tmpl[i];
        if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
            out += c;
            i += 2;
            continue;
        }
        if (c == '{') {
            if (auto n = placeholder_len(tmpl, i)) {
                const std::string name(tmpl.substr(i + 1, n - 2));
                auto it = values.find(name);
                if (it == values.end()) fail(ErrorCode::InvalidArgument, "no value for placeholder {" + name + "}");
                out += it->second;
                i += n;
                continue;
            }
        }
        out += c;
        ++i;
    }
    return out;
}

std::vector<std::string> unsubstituted_placeholders(std::string_view text) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        if (auto n = placeholder_len(text, i)) out.emplace_back(text.substr(i + 1, n - 2));
    }
    return out;
}

std::string render_places(const std::vector<Place>& places) {
    if (places.empty()) return "None";
    std::string out;
    for (std::size_t i = 0; i < places.size(); ++i) {
        const auto& p = places[i];
        if (i) out += '\n';
        out += p.name;
        if (!p.category.empty()) out += " (" + p.category + ")";
        out += ", " + std::to_string(std::lround(p.distance_m)) + " meters " +
               std::string(geo::to_lower_string(p.relative_direction));
    }
    return out;
}

void merge_keywords(std::vector<std::string>& keywords, const std::vector<std::string>& additions) {
    for (const auto& raw : additions) {
        auto k = text::trim(raw);
        if (k.empty()) continue;
        const auto lk = text::to_lower(k);
        bool seen = false;
        for (const auto& existing : keywords) seen = seen || text::to_lower(existing) == lk;
        if (!seen) keywords.push_back(std::move(k));
    }
}

std::string build_segment_prompt(const AgentContext& ctx) {
    return render(template_text(kSegment),
                  {{"prev_description", or_none(ctx.prev_description)}, {"nearby_places", render_places(ctx.nearby_places)}});
}

std::string build_intersection_prompt(const AgentContext& ctx) {
    std::string tmpl(template_text(kIntersection));
    std::map<std::string, std::string> values{{"nearby_places", render_places(ctx.nearby_places)}};
    // Mid-route intersections carry the previous description forward so the
    // chain is unbroken; the template's own input block has no slot for it.
    if (ctx.prev_description && !text::trim(*ctx.prev_description).empty()) {
        const std::string anchor = "\nNearby Places: {nearby_places}";
        const auto pos = tmpl.rfind(anchor);
        tmpl.insert(pos + 1, "Previous Description: {prev_description}\n");
        values["prev_description"] = *ctx.prev_description;
    }
    return render(tmpl, values);
}

std::string build_destination_prompt(const std::string& context_question, const std::string& place_name) {
    if (text::trim(place_name).empty()) fail(ErrorCode::InvalidArgument, "destination prompt needs a place name");
    return render(template_text(kDestination), {{"context", context_question}, {"place_name", place_name}});
}

std::string build_direction_prompt(const std::string& intent, const std::string& street_name, geo::Cardinal new_heading,
                                   geo::Cardinal curr_heading, const std::string& place_type) {
    const auto pt = text::trim(place_type);
    return render(template_text(kDirection), {{"intention", intent},
                                              {"street_name", street_name},
                                              {"new_heading", std::string(geo::to_string(new_heading))},
                                              {"curr_heading", std::string(geo::to_string(curr_heading))},
                                              {"place_type", pt.empty() ? "unspecified" : pt}});
}

std::string build_selector_prompt(const std::string& intent, const std::vector<std::string>& road_descriptions,
                                  std::optional<int> from_road_idx) {
    if (road_descriptions.size() < 2) {
        fail(ErrorCode::InvalidArgument, "selector needs at least two candidate roads");
    }
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < road_descriptions.size(); ++i) {
        lines.push_back(std::to_string(i + 1) + ": " + road_descriptions[i]);
    }
    return render(template_text(kSelector),
                  {{"intention", intent},
                   {"road_descriptions", join(lines, "\n")},
                   {"from_road_idx", from_road_idx ? std::to_string(*from_road_idx) : "None"}});
}

std::string build_exploration_block_prompt(const AgentContext& ctx, const std::string& place_type) {
    if (!ctx.intent || text::trim(*ctx.intent).empty()) {
        fail(ErrorCode::InvalidArgument, "exploration prompt needs an intent");
    }
    const auto pt = text::trim(place_type);
    return render(template_text(kExplorationBlock),
                  {{"intention", text::trim(*ctx.intent)},
                   {"place_type", pt.empty() ? "unspecified" : pt},
                   {"cared_secondary_categories", ctx.keywords.empty() ? "None" : join(ctx.keywords, ", ")},
                   {"nearby_places", render_places(ctx.nearby_places)},
                   {"prev_description", or_none(ctx.prev_description)}});
}

std::string build_keywords_prompt(const std::string& intent) {
    return render(template_text(kKeywords), {{"intention", intent}});
}

std::string build_place_type_prompt(const std::string& intent) {
    return render(template_text(kPlaceType), {{"intention", intent}});
}

std::string_view to_string(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::NoJsonObject: return "no_json_object";
        case ParseErrorKind::InvalidJson: return "invalid_json";
        case ParseErrorKind::MissingKey: return "missing_key";
        case ParseErrorKind::WrongType: return "wrong_type";
        case ParseErrorKind::EmptyValue: return "empty_value";
        case ParseErrorKind::InvalidChoice: return "invalid_choice";
    }
    return "invalid_json";
}

namespace {

std::string strip_fences(std::string_view raw) {
    const auto open = raw.find("```");
    if (open == std::string_view::npos) return std::string(raw);
    auto body_start = raw.find('\n', open);
    if (body_start == std::string_view::npos) return std::string(raw);
    ++body_start;
    const auto close = raw.find("```", body_start);
    auto inner = raw.substr(body_start, close == std::string_view::npos ? std::string_view::npos : close - body_start);
    if (inner.find('{') == std::string_view::npos) return std::string(raw);
    return std::string(inner);
}

// Balanced {...} starting at `open`, string-aware; nullopt when unclosed.
std::optional<std::string> balanced_object(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return std::string(s.substr(open, i - open + 1));
    }
    return std::nullopt;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
        s.replace(pos, from.size(), to);
    }
}

std::string repair(std::string s) {
    for (auto q : {"\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x9E", "\xE2\x80\x9F", "\xE2\x80\xB3"}) replace_all(s, q, "\"");
    for (auto q : {"\xE2\x80\x98", "\xE2\x80\x99"}) replace_all(s, q, "'");

    std::string out;
    out.reserve(s.size() + 8);
    bool in_string = false;
    bool escaped = false;
    auto next_non_space = [&](std::size_t from, bool& saw_newline) {
        saw_newline = false;
        while (from < s.size() && std::isspace(static_cast<unsigned char>(s[from]))) {
            saw_newline = saw_newline || s[from] == '\n';
            ++from;
        }
        return from;
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            out += c;
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') {
                in_string = false;
                bool nl = false;
                const auto j = next_non_space(i + 1, nl);
                if (nl && j < s.size() && s[j] == '"') out += ',';
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            continue;
        }
        if (c == ',') {
            bool nl = false;
            const auto j = next_non_space(i + 1, nl);
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out += c;
        if (c == '}' || c == ']') {
            bool nl = false;
            const auto j = next_non_space(i + 1, nl);
            if (nl && j < s.size() && s[j] == '"') out += ',';
        }
    }
    return out;
}

// Tries each top-level {...} in turn, so braces in surrounding prose do not
// hide the real object. Falls back to first '{' .. last '}'.
std::optional<json> try_parse_object(std::string_view raw) {
    const auto s = strip_fences(raw);
    auto parse = [](const std::string& candidate) -> std::optional<json> {
        auto j = json::parse(candidate, nullptr, false);
        if (j.is_discarded() || !j.is_object()) return std::nullopt;
        return j;
    };
    std::size_t pos = s.find('{');
    for (int attempts = 0; pos != std::string::npos && attempts < 64; ++attempts) {
        auto candidate = balanced_object(s, pos);
        if (!candidate) break;
        if (auto j = parse(*candidate)) return j;
        pos = s.find('{', pos + 1);
    }
    const auto open = s.find('{');
    const auto close = s.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
    return parse(s.substr(open, close - open + 1));
}

ParseError make_error(ParseErrorKind kind, std::string key, std::string message, std::string_view raw) {
    return ParseError{kind, std::move(key), std::move(message), std::string(raw)};
}

ParseResult<std::string> get_string(const json& obj, const std::string& key, bool allow_empty, std::string_view raw) {
    auto it = obj.find(key);
    if (it == obj.end()) return make_error(ParseErrorKind::MissingKey, key, "missing key \"" + key + "\"", raw);
    if (!it->is_string()) {
        return make_error(ParseErrorKind::WrongType, key, "key \"" + key + "\" is not a string", raw);
    }
    auto v = it->get<std::string>();
    if (text::trim(v).empty() && !allow_empty) {
        return make_error(ParseErrorKind::EmptyValue, key, "key \"" + key + "\" is empty", raw);
    }
    return v;
}

}  // namespace

ParseResult<json> extract_json_object(std::string_view raw) {
    try {
        if (auto j = try_parse_object(raw)) return *j;
        if (auto j = try_parse_object(repair(std::string(raw)))) return *j;
        if (raw.find('{') == std::string_view::npos) {
            return make_error(ParseErrorKind::NoJsonObject, "", "response contains no JSON object", raw);
        }
        return make_error(ParseErrorKind::InvalidJson, "", "response JSON could not be parsed", raw);
    } catch (const std::exception& e) {
        return make_error(ParseErrorKind::InvalidJson, "", std::string("response JSON could not be parsed: ") + e.what(), raw);
    }
}

ParseResult<DescriptionTriple> parse_triple(std::string_view raw) {
    auto obj = extract_json_object(raw);
    if (!obj) return obj.error();
    DescriptionTriple t;
    for (auto [key, field] : {std::pair{"long_description", &t.long_text}, std::pair{"medium_description", &t.medium_text},
                              std::pair{"short_description", &t.short_text}}) {
        auto v = get_string(*obj, key, false, raw);
        if (!v) return v.error();
        *field = std::move(v).value();
    }
    return t;
}

ParseResult<DestinationDetail> parse_destination(std::string_view raw) {
    auto obj = extract_json_object(raw);
    if (!obj) return obj.error();
    DestinationDetail d;
    struct Field {
        const char* key;
        std::string* dst;
        bool allow_empty;
    };
    for (const auto& f : {Field{"path_summary", &d.path_summary, false}, Field{"place_summary", &d.place_summary, false},
                          Field{"mobility_cues", &d.mobility_cues, false}, Field{"sidewalk", &d.sidewalk, false},
                          Field{"text", &d.signage_text, true}}) {
        auto v = get_string(*obj, f.key, f.allow_empty, raw);
        if (!v) return v.error();
        *f.dst = std::move(v).value();
    }
    return d;
}

ParseResult<DirectionChoice> parse_choice(std::string_view raw, int candidate_count) {
    auto obj = extract_json_object(raw);
    if (!obj) return obj.error();
    auto it = obj->find("idx");
    if (it == obj->end()) return make_error(ParseErrorKind::MissingKey, "idx", "missing key \"idx\"", raw);
    long idx = 0;
    if (it->is_number_integer()) {
        idx = it->get<long>();
    } else if (it->is_number_float() && std::floor(it->get<double>()) == it->get<double>() &&
               std::fabs(it->get<double>()) < 1e9) {
        idx = static_cast<long>(it->get<double>());
    } else if (it->is_string()) {
        const auto s = text::trim(it->get<std::string>());
        if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
            return make_error(ParseErrorKind::WrongType, "idx", "idx \"" + s + "\" is not an integer", raw);
        }
        idx = std::stol(s);
    } else {
        return make_error(ParseErrorKind::WrongType, "idx", "idx is not an integer", raw);
    }
    if (idx < 1 || idx > candidate_count) {
        return make_error(ParseErrorKind::InvalidChoice, "idx",
                          "idx " + std::to_string(idx) + " outside 1.." + std::to_string(candidate_count), raw);
    }
    auto reason = get_string(*obj, "reason", true, raw);
    if (!reason) return reason.error();
    return DirectionChoice{static_cast<int>(idx), std::move(reason).value()};
}

ParseResult<std::string> parse_direction(std::string_view raw) {
    auto obj = extract_json_object(raw);
    if (!obj) return obj.error();
    auto body = get_string(*obj, "description", false, raw);
    if (!body) return body;
    auto sentences = text::split_sentences(*body);
    if (sentences.size() <= 3) return body;
    sentences.resize(3);
    return join(sentences, " ");
}

ParseResult<std::vector<std::string>> parse_keywords(std::string_view raw) {
    auto obj = extract_json_object(raw);
    if (!obj) return obj.error();
    auto it = obj->find("keywords");
    if (it == obj->end()) return make_error(ParseErrorKind::MissingKey, "keywords", "missing key \"keywords\"", raw);
    std::vector<std::string> out;
    if (it->is_string()) {
        merge_keywords(out, text::split(it->get<std::string>(), ','));
    } else if (it->is_array()) {
        std::vector<std::string> items;
        for (const auto& v : *it) {
            if (!v.is_string()) return make_error(ParseErrorKind::WrongType, "keywords", "keyword is not a string", raw);
            items.push_back(v.get<std::string>());
        }
        merge_keywords(out, items);
    } else {
        return make_error(ParseErrorKind::WrongType, "keywords", "keywords must be a list", raw);
    }
    if (out.empty()) return make_error(ParseErrorKind::EmptyValue, "keywords", "no keywords returned", raw);
    return out;
}

ParseResult<std::string> parse_place_type(std::string_view raw) {
    auto obj = extract_json_object(raw);
    if (!obj) return obj.error();
    return get_string(*obj, "place_type", false, raw);
}

std::string triple_to_response_json(const DescriptionTriple& t) {
    json j = {{"long_description", t.long_text}, {"medium_description", t.medium_text}, {"short_description", t.short_text}};
    return j.dump(2);
}

double default_temperature(std::string_view template_id) { return template_id == kSelector ? 0.0 : 0.2; }

MllmRequest make_request(std::string_view template_id, std::string text, std::vector<ImageRef> images) {
    MllmRequest r;
    r.template_id = std::string(template_id);
    r.text = std::move(text);
    r.images = std::move(images);
    r.temperature = default_temperature(template_id);
    return r;
}

}  // namespace sva::prompts
