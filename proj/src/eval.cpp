#include "sva/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "sva/common.hpp"
#include "sva/geo.hpp"
#include "sva/text.hpp"

namespace sva::eval {

namespace {

template <class E>
struct EnumTable;

#define SVA_ENUM_TABLE(E, ...)                                                         \
    template <>                                                                        \
    struct EnumTable<E> {                                                              \
        static const std::vector<std::pair<E, std::string_view>>& entries() {          \
            static const std::vector<std::pair<E, std::string_view>> kEntries = {__VA_ARGS__}; \
            return kEntries;                                                           \
        }                                                                              \
    };

SVA_ENUM_TABLE(Mode, {Mode::RoutePreview, "RoutePreview"}, {Mode::VirtualExploration, "VirtualExploration"})
SVA_ENUM_TABLE(Verbosity, {Verbosity::Short, "Short"}, {Verbosity::Medium, "Medium"}, {Verbosity::Long, "Long"})
SVA_ENUM_TABLE(InfoType, {InfoType::Subjective, "Subjective"}, {InfoType::Objective, "Objective"},
               {InfoType::Mixed, "Mixed"})
SVA_ENUM_TABLE(ObjectiveSubtype, {ObjectiveSubtype::POI, "POI"}, {ObjectiveSubtype::FactualObject, "FactualObject"},
               {ObjectiveSubtype::Accessibility, "Accessibility"}, {ObjectiveSubtype::Other, "Other"})
SVA_ENUM_TABLE(Correctness, {Correctness::CannotTell, "CannotTell"}, {Correctness::Incorrect, "Incorrect"},
               {Correctness::PartiallyCorrect, "PartiallyCorrect"}, {Correctness::Correct, "Correct"})
SVA_ENUM_TABLE(ErrorType, {ErrorType::PlausibleDetail, "PlausibleDetail"},
               {ErrorType::PlausibleAdjective, "PlausibleAdjective"}, {ErrorType::FactualError, "FactualError"},
               {ErrorType::SpatialError, "SpatialError"}, {ErrorType::Hallucination, "Hallucination"},
               {ErrorType::Other, "Other"}, {ErrorType::None, "None"})
SVA_ENUM_TABLE(Consistency, {Consistency::NotLikely, "NotLikely"}, {Consistency::Possibly, "Possibly"},
               {Consistency::Likely, "Likely"})
SVA_ENUM_TABLE(Redundancy, {Redundancy::NoPrev, "NoPrev"}, {Redundancy::Repeats, "Repeats"},
               {Redundancy::AddsNew, "AddsNew"}, {Redundancy::Updates, "Updates"})
SVA_ENUM_TABLE(Relevance, {Relevance::Fully, "Fully"}, {Relevance::Partially, "Partially"}, {Relevance::Not, "Not"},
               {Relevance::NotApplicable, "NotApplicable"})

#undef SVA_ENUM_TABLE

std::string lower_verbosity(Verbosity v) { return text::to_lower(name_of(v)); }

bool has_error(Correctness c) { return c == Correctness::Incorrect || c == Correctness::PartiallyCorrect; }

[[noreturn]] void invalid(const std::string& rule, const std::string& message) {
    fail(ErrorCode::Validation, message, rule);
}

std::string join_subtypes(const std::vector<ObjectiveSubtype>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += name_of(v[i]);
    }
    return out;
}

std::string place_label(const json& p) {
    return p.value("name", std::string{}) + " (" + p.value("category", std::string{}) + ")";
}

std::string heading_label(double deg) { return std::string(geo::to_string(geo::cardinal_of(HeadingDeg(deg)))); }

const std::vector<std::pair<Verbosity, const char*>> kVerbosityKeys = {
    {Verbosity::Short, "short"}, {Verbosity::Medium, "medium"}, {Verbosity::Long, "long"}};

void collect_preview(const json& doc, std::vector<DescriptionItem>& out) {
    const auto source = doc.at("id").get<std::string>();
    std::optional<std::string> prev_long;
    for (const auto& seg : doc.at("segments")) {
        const auto& d = seg.at("descriptions");
        if (d.is_null()) continue;
        TaskContext ctx;
        ctx.prev_description = prev_long;
        ctx.heading = heading_label(seg.at("heading").get<double>());
        for (const auto& p : seg.at("nearby_places")) ctx.places.push_back(place_label(p));
        for (const auto& v : seg.at("views")) ctx.image_ids.push_back(v.at("image_id").get<std::string>());
        for (const auto& [verb, key] : kVerbosityKeys) {
            out.push_back({source, Mode::RoutePreview, verb, seg.at("index").get<std::size_t>(),
                           d.at(key).get<std::string>(), ctx});
        }
        prev_long = d.at("long").get<std::string>();
    }
}

void collect_exploration(const json& doc, std::vector<DescriptionItem>& out) {
    const auto source = doc.at("id").get<std::string>();
    std::size_t block = 0;
    for (const auto& ev : doc.at("events")) {
        if (ev.value("type", std::string{}) != "block_described") continue;
        TaskContext ctx;
        if (ev.contains("prev_description") && !ev.at("prev_description").is_null()) {
            ctx.prev_description = ev.at("prev_description").get<std::string>();
        }
        ctx.heading = heading_label(ev.at("heading").get<double>());
        ctx.places = ev.at("places").get<std::vector<std::string>>();
        ctx.image_ids = ev.at("view_ids").get<std::vector<std::string>>();
        const auto& d = ev.at("descriptions");
        for (const auto& [verb, key] : kVerbosityKeys) {
            out.push_back({source, Mode::VirtualExploration, verb, block, d.at(key).get<std::string>(), ctx});
        }
        ++block;
    }
}

json context_json(const TaskContext& c) {
    return json{{"prev_description", c.prev_description ? json(*c.prev_description) : json(nullptr)},
                {"heading", c.heading},
                {"places", c.places},
                {"image_ids", c.image_ids}};
}

Panel make_panel(const std::string& name, const std::vector<std::string>& categories,
                 const std::vector<std::size_t>& counts) {
    Panel p;
    p.name = name;
    for (auto c : counts) p.denominator += c;
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const double pct = p.denominator ? 100.0 * static_cast<double>(counts[i]) / static_cast<double>(p.denominator) : 0.0;
        p.rows.push_back({categories[i], counts[i], pct});
    }
    return p;
}

template <class E>
Panel tally(const std::string& name, const std::vector<E>& order, const std::vector<E>& values) {
    std::vector<std::string> cats;
    std::vector<std::size_t> counts(order.size(), 0);
    for (auto e : order) cats.emplace_back(name_of(e));
    for (auto v : values) {
        const auto it = std::find(order.begin(), order.end(), v);
        if (it != order.end()) ++counts[static_cast<std::size_t>(it - order.begin())];
    }
    return make_panel(name, cats, counts);
}

ReportGroup build_group(std::string label, std::optional<Mode> mode, std::optional<Verbosity> verb,
                        const std::vector<const SentenceRecord*>& ss, const std::vector<const DescriptionRecord*>& ds) {
    ReportGroup g;
    g.label = std::move(label);
    g.mode = mode;
    g.verbosity = verb;
    g.sentences = ss.size();
    g.descriptions = ds.size();
    std::vector<InfoType> info;
    std::vector<Correctness> corr;
    std::vector<ErrorType> err;
    std::vector<Consistency> cons;
    std::vector<Redundancy> red;
    std::vector<Relevance> rel;
    for (const auto* s : ss) {
        info.push_back(s->ann.info_type);
        corr.push_back(s->ann.correctness);
        if (s->ann.error_type != ErrorType::None) err.push_back(s->ann.error_type);
        cons.push_back(s->ann.consistency);
        red.push_back(s->ann.redundancy);
    }
    for (const auto* d : ds) {
        if (d->ann.relevance != Relevance::NotApplicable) rel.push_back(d->ann.relevance);
    }
    g.panels.push_back(tally("information_type", {InfoType::Objective, InfoType::Subjective, InfoType::Mixed}, info));
    g.panels.push_back(tally("correctness",
                             {Correctness::Correct, Correctness::PartiallyCorrect, Correctness::Incorrect,
                              Correctness::CannotTell},
                             corr));
    g.panels.push_back(tally("error_type",
                             {ErrorType::PlausibleDetail, ErrorType::PlausibleAdjective, ErrorType::FactualError,
                              ErrorType::SpatialError, ErrorType::Hallucination, ErrorType::Other},
                             err));
    g.panels.push_back(
        tally("consistency", {Consistency::Likely, Consistency::Possibly, Consistency::NotLikely}, cons));
    g.panels.push_back(tally("redundancy",
                             {Redundancy::NoPrev, Redundancy::Repeats, Redundancy::AddsNew, Redundancy::Updates}, red));
    g.panels.push_back(tally("relevance", {Relevance::Fully, Relevance::Partially, Relevance::Not}, rel));
    return g;
}

struct Quit {};

// Reads one choice among `options`; accepts a 1-based number or a name.
template <class E>
E ask_choice(std::istream& in, std::ostream& out, const std::string& question, const std::vector<E>& options) {
    for (;;) {
        out << question << "\n";
        for (std::size_t i = 0; i < options.size(); ++i) out << "  " << (i + 1) << ") " << name_of(options[i]) << "\n";
        out << "> " << std::flush;
        std::string line;
        if (!std::getline(in, line)) throw Quit{};
        line = text::trim(line);
        if (line == "q" || line == "Q") throw Quit{};
        char* end = nullptr;
        const long n = std::strtol(line.c_str(), &end, 10);
        if (!line.empty() && end && *end == '\0' && n >= 1 && n <= static_cast<long>(options.size())) {
            return options[static_cast<std::size_t>(n - 1)];
        }
        for (auto o : options) {
            if (text::to_lower(name_of(o)) == text::to_lower(line)) return o;
        }
        out << "Not a valid choice.\n";
    }
}

std::vector<ObjectiveSubtype> ask_subtypes(std::istream& in, std::ostream& out) {
    const auto& opts = all_values<ObjectiveSubtype>();
    for (;;) {
        out << "Objective subtypes (comma-separated numbers or names):\n";
        for (std::size_t i = 0; i < opts.size(); ++i) out << "  " << (i + 1) << ") " << name_of(opts[i]) << "\n";
        out << "> " << std::flush;
        std::string line;
        if (!std::getline(in, line)) throw Quit{};
        line = text::trim(line);
        if (line == "q" || line == "Q") throw Quit{};
        std::vector<ObjectiveSubtype> picked;
        bool ok = !line.empty();
        for (const auto& part : text::split(line, ',')) {
            const auto tok = text::trim(part);
            std::optional<ObjectiveSubtype> v;
            for (std::size_t i = 0; i < opts.size(); ++i) {
                if (tok == std::to_string(i + 1) || text::to_lower(tok) == text::to_lower(name_of(opts[i]))) v = opts[i];
            }
            if (!v) {
                ok = false;
                break;
            }
            if (std::find(picked.begin(), picked.end(), *v) == picked.end()) picked.push_back(*v);
        }
        if (ok && !picked.empty()) return picked;
        out << "Not a valid choice.\n";
    }
}

}  // namespace

template <class E>
std::string_view name_of(E v) {
    for (const auto& [e, n] : EnumTable<E>::entries()) {
        if (e == v) return n;
    }
    return "?";
}

template <class E>
E parse_enum(std::string_view s) {
    for (const auto& [e, n] : EnumTable<E>::entries()) {
        if (n == s) return e;
    }
    fail(ErrorCode::Validation, "unknown value: " + std::string(s));
}

template <class E>
const std::vector<E>& all_values() {
    static const std::vector<E> kValues = [] {
        std::vector<E> v;
        for (const auto& [e, n] : EnumTable<E>::entries()) v.push_back(e);
        return v;
    }();
    return kValues;
}

#define SVA_INSTANTIATE(E)                            \
    template std::string_view name_of<E>(E);          \
    template E parse_enum<E>(std::string_view);       \
    template const std::vector<E>& all_values<E>();
SVA_INSTANTIATE(Mode)
SVA_INSTANTIATE(Verbosity)
SVA_INSTANTIATE(InfoType)
SVA_INSTANTIATE(ObjectiveSubtype)
SVA_INSTANTIATE(Correctness)
SVA_INSTANTIATE(ErrorType)
SVA_INSTANTIATE(Consistency)
SVA_INSTANTIATE(Redundancy)
SVA_INSTANTIATE(Relevance)
#undef SVA_INSTANTIATE

void SentenceAnnotation::validate() const {
    const bool objective = info_type == InfoType::Objective || info_type == InfoType::Mixed;
    if (objective && objective_subtypes.empty()) {
        invalid("objective_subtypes_iff_objective", "objective or mixed sentences need at least one objective subtype");
    }
    if (!objective && !objective_subtypes.empty()) {
        invalid("objective_subtypes_iff_objective", "subjective sentences take no objective subtypes");
    }
    for (std::size_t i = 0; i < objective_subtypes.size(); ++i) {
        for (std::size_t k = i + 1; k < objective_subtypes.size(); ++k) {
            if (objective_subtypes[i] == objective_subtypes[k]) {
                invalid("objective_subtypes_unique", "objective subtypes repeat");
            }
        }
    }
    if (has_error(correctness) && error_type == ErrorType::None) {
        invalid("error_type_iff_incorrect", "incorrect or partially correct sentences need an error type");
    }
    if (!has_error(correctness) && error_type != ErrorType::None) {
        invalid("error_type_iff_incorrect", "error type must be None unless the sentence is incorrect or partially correct");
    }
}

void DescriptionAnnotation::validate(Mode mode) const {
    const bool na = relevance == Relevance::NotApplicable;
    if (mode == Mode::RoutePreview && !na) {
        invalid("relevance_na_iff_route_preview", "relevance is not rated for route previews");
    }
    if (mode == Mode::VirtualExploration && na) {
        invalid("relevance_na_iff_route_preview", "exploration descriptions need a relevance rating");
    }
}

json to_json(const AnnotationTask& t) {
    return json{{"id", t.id},
                {"source_id", t.source_id},
                {"mode", std::string(name_of(t.mode))},
                {"verbosity", std::string(name_of(t.verbosity))},
                {"item", t.item},
                {"context", context_json(t.context)},
                {"sentences", t.sentences}};
}

AnnotationTask task_from_json(const json& j) {
    try {
        AnnotationTask t;
        t.id = j.at("id").get<std::string>();
        t.source_id = j.at("source_id").get<std::string>();
        t.mode = parse_enum<Mode>(j.at("mode").get<std::string>());
        t.verbosity = parse_enum<Verbosity>(j.at("verbosity").get<std::string>());
        t.item = j.at("item").get<std::size_t>();
        const auto& c = j.at("context");
        if (!c.at("prev_description").is_null()) t.context.prev_description = c.at("prev_description").get<std::string>();
        t.context.heading = c.at("heading").get<std::string>();
        t.context.places = c.at("places").get<std::vector<std::string>>();
        t.context.image_ids = c.at("image_ids").get<std::vector<std::string>>();
        t.sentences = j.at("sentences").get<std::vector<std::string>>();
        if (t.sentences.empty()) invalid("sentences_non_empty", "task has no sentences");
        return t;
    } catch (const json::exception& e) {
        fail(ErrorCode::Validation, "malformed task", e.what());
    }
}

json to_json(const SentenceAnnotation& a) {
    json subs = json::array();
    for (auto s : a.objective_subtypes) subs.push_back(std::string(name_of(s)));
    return json{{"info_type", std::string(name_of(a.info_type))},
                {"objective_subtypes", subs},
                {"correctness", std::string(name_of(a.correctness))},
                {"error_type", std::string(name_of(a.error_type))},
                {"consistency", std::string(name_of(a.consistency))},
                {"redundancy", std::string(name_of(a.redundancy))}};
}

SentenceAnnotation sentence_annotation_from_json(const json& j) {
    try {
        SentenceAnnotation a;
        a.info_type = parse_enum<InfoType>(j.at("info_type").get<std::string>());
        for (const auto& s : j.at("objective_subtypes")) {
            a.objective_subtypes.push_back(parse_enum<ObjectiveSubtype>(s.get<std::string>()));
        }
        a.correctness = parse_enum<Correctness>(j.at("correctness").get<std::string>());
        a.error_type = parse_enum<ErrorType>(j.at("error_type").get<std::string>());
        a.consistency = parse_enum<Consistency>(j.at("consistency").get<std::string>());
        a.redundancy = parse_enum<Redundancy>(j.at("redundancy").get<std::string>());
        return a;
    } catch (const json::exception& e) {
        fail(ErrorCode::Validation, "malformed sentence annotation", e.what());
    }
}

std::vector<DescriptionItem> collect_descriptions(const std::vector<json>& logs) {
    std::vector<DescriptionItem> out;
    for (const auto& doc : logs) {
        const auto schema = doc.value("schema", std::string{});
        try {
            if (schema == "preview.v1") collect_preview(doc, out);
            else if (schema == "exploration.v1") collect_exploration(doc, out);
            else fail(ErrorCode::Validation, "unsupported log schema: " + schema);
        } catch (const json::exception& e) {
            fail(ErrorCode::Validation, "malformed " + schema + " log", e.what());
        }
    }
    return out;
}

std::uint64_t SeededRng::below(std::uint64_t n) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "below(0)");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % n);
    for (;;) {
        const std::uint64_t x = engine_();
        if (x < limit) return x % n;
    }
}

std::vector<AnnotationTask> sample_tasks(const std::vector<DescriptionItem>& items, double fraction,
                                         std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) fail(ErrorCode::InvalidArgument, "fraction must be in (0, 1]");
    SeededRng rng(seed);
    std::vector<std::size_t> chosen;
    for (auto mode : all_values<Mode>()) {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (items[i].mode == mode && !text::split_sentences(items[i].text).empty()) pool.push_back(i);
        }
        const auto k = std::min<std::size_t>(pool.size(),
                                             static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size()))));
        // Partial Fisher-Yates: the first k slots become the sample.
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<AnnotationTask> out;
    for (auto i : chosen) {
        const auto& it = items[i];
        AnnotationTask t;
        t.id = it.source_id + "/" + std::to_string(it.item) + "/" + lower_verbosity(it.verbosity);
        t.source_id = it.source_id;
        t.mode = it.mode;
        t.verbosity = it.verbosity;
        t.item = it.item;
        t.context = it.context;
        t.sentences = text::split_sentences(it.text);
        out.push_back(std::move(t));
    }
    return out;
}

AnnotationStore::AnnotationStore(std::string path) : path_(std::move(path)) {
    if (path_.empty() || !std::filesystem::exists(path_)) return;
    std::ifstream in(path_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            fail(ErrorCode::Validation, path_ + ":" + std::to_string(lineno) + ": invalid JSON line");
        }
        fold(j);
    }
}

AnnotationStore AnnotationStore::load(const std::string& path) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::NotFound, "no such annotation file: " + path);
    return AnnotationStore(path);
}

void AnnotationStore::fold(const json& line) {
    try {
        if (line.value("schema", std::string(kSchema)) != kSchema) {
            fail(ErrorCode::Validation, "unsupported annotation schema");
        }
        const auto kind = line.at("kind").get<std::string>();
        if (kind == "task") {
            auto t = task_from_json(line.at("task"));
            if (auto it = task_index_.find(t.id); it != task_index_.end()) {
                tasks_[it->second] = std::move(t);
            } else {
                task_index_[t.id] = tasks_.size();
                tasks_.push_back(std::move(t));
            }
        } else if (kind == "sentence") {
            const auto id = line.at("task_id").get<std::string>();
            const auto idx = line.at("sentence_idx").get<std::size_t>();
            auto ann = sentence_annotation_from_json(line.at("annotation"));
            ann.validate();
            const auto& t = task(id);
            if (idx >= t.sentences.size()) invalid("sentence_index_valid", "sentence index out of range for " + id);
            sentences_[{id, idx}] = std::move(ann);
        } else if (kind == "description") {
            const auto id = line.at("task_id").get<std::string>();
            DescriptionAnnotation ann{parse_enum<Relevance>(line.at("annotation").at("relevance").get<std::string>())};
            ann.validate(task(id).mode);
            descriptions_[id] = ann;
        } else {
            fail(ErrorCode::Validation, "unknown record kind: " + kind);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Validation, "malformed annotation record", e.what());
    }
}

void AnnotationStore::append(const json& line) {
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) fail(ErrorCode::Internal, "cannot write " + path_);
    out << line.dump() << "\n";
    out.flush();
    if (!out) fail(ErrorCode::Internal, "cannot write " + path_);
}

void AnnotationStore::add_task(const AnnotationTask& t) {
    if (t.sentences.empty()) invalid("sentences_non_empty", "task has no sentences");
    json line{{"schema", std::string(kSchema)}, {"kind", "task"}, {"task", to_json(t)}};
    fold(line);
    append(line);
}

void AnnotationStore::record(const std::string& task_id, std::size_t sentence_idx, const SentenceAnnotation& ann) {
    json line{{"schema", std::string(kSchema)},
              {"kind", "sentence"},
              {"task_id", task_id},
              {"sentence_idx", sentence_idx},
              {"annotation", to_json(ann)}};
    fold(line);
    append(line);
}

void AnnotationStore::record_description(const std::string& task_id, const DescriptionAnnotation& ann) {
    json line{{"schema", std::string(kSchema)},
              {"kind", "description"},
              {"task_id", task_id},
              {"annotation", {{"relevance", std::string(name_of(ann.relevance))}}}};
    fold(line);
    append(line);
}

const AnnotationTask& AnnotationStore::task(const std::string& id) const {
    const auto it = task_index_.find(id);
    if (it == task_index_.end()) fail(ErrorCode::NotFound, "unknown task: " + id);
    return tasks_[it->second];
}

std::optional<SentenceAnnotation> AnnotationStore::sentence(const std::string& task_id, std::size_t idx) const {
    const auto it = sentences_.find({task_id, idx});
    if (it == sentences_.end()) return std::nullopt;
    return it->second;
}

std::optional<DescriptionAnnotation> AnnotationStore::description(const std::string& task_id) const {
    const auto it = descriptions_.find(task_id);
    if (it == descriptions_.end()) return std::nullopt;
    return it->second;
}

EvalReport aggregate(const std::vector<SentenceRecord>& sentences, const std::vector<DescriptionRecord>& descriptions) {
    EvalReport r;
    std::vector<const SentenceRecord*> all_s;
    std::vector<const DescriptionRecord*> all_d;
    for (const auto& s : sentences) all_s.push_back(&s);
    for (const auto& d : descriptions) all_d.push_back(&d);
    r.groups.push_back(build_group("overall", std::nullopt, std::nullopt, all_s, all_d));
    for (auto mode : all_values<Mode>()) {
        for (auto verb : all_values<Verbosity>()) {
            std::vector<const SentenceRecord*> ss;
            std::vector<const DescriptionRecord*> ds;
            for (const auto* s : all_s) {
                if (s->mode == mode && s->verbosity == verb) ss.push_back(s);
            }
            for (const auto* d : all_d) {
                if (d->mode == mode && d->verbosity == verb) ds.push_back(d);
            }
            if (ss.empty() && ds.empty()) continue;
            r.groups.push_back(
                build_group(std::string(name_of(mode)) + "/" + std::string(name_of(verb)), mode, verb, ss, ds));
        }
    }
    return r;
}

EvalReport aggregate(const AnnotationStore& store) {
    std::vector<SentenceRecord> ss;
    std::vector<DescriptionRecord> ds;
    for (const auto& [key, ann] : store.sentences()) {
        const auto& t = store.task(key.first);
        ss.push_back({t.mode, t.verbosity, ann});
    }
    for (const auto& [id, ann] : store.descriptions()) {
        const auto& t = store.task(id);
        ds.push_back({t.mode, t.verbosity, ann});
    }
    return aggregate(ss, ds);
}

json to_json(const EvalReport& r) {
    json groups = json::array();
    for (const auto& g : r.groups) {
        json panels = json::object();
        for (const auto& p : g.panels) {
            json rows = json::array();
            for (const auto& row : p.rows) {
                rows.push_back({{"category", row.category}, {"count", row.count}, {"percent", row.percent}});
            }
            panels[p.name] = {{"denominator", p.denominator}, {"rows", rows}};
        }
        groups.push_back({{"label", g.label},
                          {"mode", g.mode ? json(std::string(name_of(*g.mode))) : json(nullptr)},
                          {"verbosity", g.verbosity ? json(std::string(name_of(*g.verbosity))) : json(nullptr)},
                          {"sentences", g.sentences},
                          {"descriptions", g.descriptions},
                          {"panels", panels}});
    }
    return json{{"schema", "eval-report.v1"}, {"groups", groups}};
}

std::string to_markdown(const EvalReport& r) {
    std::ostringstream out;
    out << "# Evaluation report\n\n";
    out << "Sentence-level panels are normalized by sentence count. error_type is normalized by sentences rated "
           "Incorrect or PartiallyCorrect; every error option on the form is listed separately. relevance is "
           "normalized by exploration descriptions.\n";
    for (const auto& g : r.groups) {
        out << "\n## " << g.label << "\n\n";
        out << g.sentences << " sentences, " << g.descriptions << " descriptions\n";
        for (const auto& p : g.panels) {
            out << "\n### " << p.name << " (n = " << p.denominator << ")\n\n";
            out << "| Category | Count | Percent |\n|---|---|---|\n";
            for (const auto& row : p.rows) {
                char pct[32];
                std::snprintf(pct, sizeof pct, "%.1f", row.percent);
                out << "| " << row.category << " | " << row.count << " | " << pct << "% |\n";
            }
        }
    }
    return out.str();
}

std::vector<Disagreement> diff(const AnnotationStore& a, const AnnotationStore& b) {
    std::vector<Disagreement> out;
    const std::string missing = "<missing>";
    std::set<std::pair<std::string, std::size_t>> keys;
    for (const auto& [k, v] : a.sentences()) keys.insert(k);
    for (const auto& [k, v] : b.sentences()) keys.insert(k);
    for (const auto& k : keys) {
        const auto sa = a.sentence(k.first, k.second);
        const auto sb = b.sentence(k.first, k.second);
        if (!sa || !sb) {
            out.push_back({k.first, k.second, "*", sa ? "annotated" : missing, sb ? "annotated" : missing});
            continue;
        }
        auto cmp = [&](const char* field, std::string x, std::string y) {
            if (x != y) out.push_back({k.first, k.second, field, std::move(x), std::move(y)});
        };
        cmp("info_type", std::string(name_of(sa->info_type)), std::string(name_of(sb->info_type)));
        cmp("objective_subtypes", join_subtypes(sa->objective_subtypes), join_subtypes(sb->objective_subtypes));
        cmp("correctness", std::string(name_of(sa->correctness)), std::string(name_of(sb->correctness)));
        cmp("error_type", std::string(name_of(sa->error_type)), std::string(name_of(sb->error_type)));
        cmp("consistency", std::string(name_of(sa->consistency)), std::string(name_of(sb->consistency)));
        cmp("redundancy", std::string(name_of(sa->redundancy)), std::string(name_of(sb->redundancy)));
    }
    std::set<std::string> dkeys;
    for (const auto& [k, v] : a.descriptions()) dkeys.insert(k);
    for (const auto& [k, v] : b.descriptions()) dkeys.insert(k);
    for (const auto& k : dkeys) {
        const auto da = a.description(k);
        const auto db = b.description(k);
        const auto x = da ? std::string(name_of(da->relevance)) : missing;
        const auto y = db ? std::string(name_of(db->relevance)) : missing;
        if (x != y) out.push_back({k, std::nullopt, "relevance", x, y});
    }
    return out;
}

json to_json(const std::vector<Disagreement>& d) {
    json arr = json::array();
    for (const auto& x : d) {
        arr.push_back({{"task_id", x.task_id},
                       {"sentence_idx", x.sentence_idx ? json(*x.sentence_idx) : json(nullptr)},
                       {"field", x.field},
                       {"a", x.a},
                       {"b", x.b}});
    }
    return json{{"disagreements", arr}, {"count", d.size()}};
}

std::size_t annotate(AnnotationStore& store, std::istream& in, std::ostream& out) {
    std::size_t written = 0;
    try {
        for (const auto& t : store.tasks()) {
            bool header = false;
            auto print_header = [&] {
                if (header) return;
                header = true;
                out << "\n=== " << t.id << " (" << name_of(t.mode) << ", " << name_of(t.verbosity) << ") ===\n";
                out << "Heading: " << t.context.heading << "\n";
                out << "Previous description: " << (t.context.prev_description ? *t.context.prev_description : "None")
                    << "\n";
                out << "Places: " << (t.context.places.empty() ? std::string("None") : [&] {
                    std::string s;
                    for (std::size_t i = 0; i < t.context.places.size(); ++i) s += (i ? "; " : "") + t.context.places[i];
                    return s;
                }()) << "\n";
                out << "Images:";
                for (const auto& id : t.context.image_ids) out << " " << id;
                out << "\n";
            };
            for (std::size_t i = 0; i < t.sentences.size(); ++i) {
                if (store.sentence(t.id, i)) continue;
                print_header();
                out << "\nSentence " << (i + 1) << "/" << t.sentences.size() << ": " << t.sentences[i] << "\n";
                SentenceAnnotation a;
                a.info_type = ask_choice(in, out, "Information type?", all_values<InfoType>());
                if (a.info_type != InfoType::Subjective) a.objective_subtypes = ask_subtypes(in, out);
                a.correctness = ask_choice(in, out, "Correctness?", all_values<Correctness>());
                if (has_error(a.correctness)) {
                    std::vector<ErrorType> errs;
                    for (auto e : all_values<ErrorType>()) {
                        if (e != ErrorType::None) errs.push_back(e);
                    }
                    a.error_type = ask_choice(in, out, "Error type?", errs);
                } else {
                    a.error_type = ErrorType::None;
                }
                a.consistency = ask_choice(in, out, "Consistency with the previous description?",
                                           all_values<Consistency>());
                a.redundancy = ask_choice(in, out, "Redundancy?", all_values<Redundancy>());
                store.record(t.id, i, a);
                ++written;
            }
            if (t.mode == Mode::VirtualExploration && !store.description(t.id)) {
                print_header();
                const std::vector<Relevance> opts = {Relevance::Fully, Relevance::Partially, Relevance::Not};
                DescriptionAnnotation d{ask_choice(in, out, "Relevance of the whole description to the intent?", opts)};
                store.record_description(t.id, d);
                ++written;
            }
        }
        out << "\nAll tasks annotated.\n";
    } catch (const Quit&) {
        out << "\nStopped; progress saved.\n";
    }
    return written;
}

}  // namespace sva::eval
