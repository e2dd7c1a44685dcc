#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sva/geo.hpp"
#include "sva/json.hpp"

namespace sva::eval {

inline constexpr std::string_view kSchema = "eval.v1";

enum class Mode { RoutePreview, VirtualExploration };
enum class Verbosity { Short, Medium, Long };
enum class InfoType { Subjective, Objective, Mixed };
enum class ObjectiveSubtype { POI, FactualObject, Accessibility, Other };
enum class Correctness { CannotTell, Incorrect, PartiallyCorrect, Correct };
enum class ErrorType { PlausibleDetail, PlausibleAdjective, FactualError, SpatialError, Hallucination, Other, None };
enum class Consistency { NotLikely, Possibly, Likely };
enum class Redundancy { NoPrev, Repeats, AddsNew, Updates };
enum class Relevance { Fully, Partially, Not, NotApplicable };

// Names are the enumerator spellings ("RoutePreview", "PartiallyCorrect").
template <class E>
std::string_view name_of(E v);
template <class E>
E parse_enum(std::string_view s);  // throws Validation for unknown names
template <class E>
const std::vector<E>& all_values();

struct TaskContext {
    std::optional<std::string> prev_description;
    std::string heading;
    std::vector<std::string> places;
    std::vector<std::string> image_ids;

    friend bool operator==(const TaskContext&, const TaskContext&) = default;
};

struct AnnotationTask {
    std::string id;  // "{source}/{item}/{verbosity}"
    std::string source_id;
    Mode mode = Mode::RoutePreview;
    Verbosity verbosity = Verbosity::Short;
    std::size_t item = 0;  // segment or block index within the source
    TaskContext context;
    std::vector<std::string> sentences;

    friend bool operator==(const AnnotationTask&, const AnnotationTask&) = default;
};

struct SentenceAnnotation {
    InfoType info_type = InfoType::Objective;
    std::vector<ObjectiveSubtype> objective_subtypes;
    Correctness correctness = Correctness::Correct;
    ErrorType error_type = ErrorType::None;
    Consistency consistency = Consistency::Likely;
    Redundancy redundancy = Redundancy::NoPrev;

    // Throws Validation naming the violated rule.
    void validate() const;
    friend bool operator==(const SentenceAnnotation&, const SentenceAnnotation&) = default;
};

struct DescriptionAnnotation {
    Relevance relevance = Relevance::NotApplicable;

    // NotApplicable exactly for route previews.
    void validate(Mode mode) const;
    friend bool operator==(const DescriptionAnnotation&, const DescriptionAnnotation&) = default;
};

json to_json(const AnnotationTask& t);
AnnotationTask task_from_json(const json& j);
json to_json(const SentenceAnnotation& a);
SentenceAnnotation sentence_annotation_from_json(const json& j);

// One description text (one verbosity of one segment or block) drawn from a
// preview.v1 or exploration.v1 document.
struct DescriptionItem {
    std::string source_id;
    Mode mode = Mode::RoutePreview;
    Verbosity verbosity = Verbosity::Short;
    std::size_t item = 0;
    std::string text;
    TaskContext context;
};

std::vector<DescriptionItem> collect_descriptions(const std::vector<json>& logs);

// Uniform sample without replacement, stratified by mode: round(fraction * n)
// items per mode. Deterministic for a given seed on every platform.
std::vector<AnnotationTask> sample_tasks(const std::vector<DescriptionItem>& items, double fraction,
                                         std::uint64_t seed);

// mt19937_64 with a rejection-sampled bounded draw, so sequences do not
// depend on the standard library's distribution implementation.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
    // Uniform in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

// eval.v1 JSON-lines file holding tasks and annotations. Lines are folded in
// order, so a later record for the same sentence or description wins.
class AnnotationStore {
public:
    AnnotationStore() = default;
    // Binds to `path`; loads it when it exists.
    explicit AnnotationStore(std::string path);

    static AnnotationStore load(const std::string& path);

    void add_task(const AnnotationTask& t);
    void record(const std::string& task_id, std::size_t sentence_idx, const SentenceAnnotation& ann);
    void record_description(const std::string& task_id, const DescriptionAnnotation& ann);

    const std::vector<AnnotationTask>& tasks() const { return tasks_; }
    const AnnotationTask& task(const std::string& id) const;
    std::optional<SentenceAnnotation> sentence(const std::string& task_id, std::size_t idx) const;
    std::optional<DescriptionAnnotation> description(const std::string& task_id) const;
    const std::map<std::pair<std::string, std::size_t>, SentenceAnnotation>& sentences() const { return sentences_; }
    const std::map<std::string, DescriptionAnnotation>& descriptions() const { return descriptions_; }

private:
    void fold(const json& line);
    void append(const json& line);

    std::string path_;
    std::vector<AnnotationTask> tasks_;
    std::map<std::string, std::size_t> task_index_;
    std::map<std::pair<std::string, std::size_t>, SentenceAnnotation> sentences_;
    std::map<std::string, DescriptionAnnotation> descriptions_;
};

struct SentenceRecord {
    Mode mode = Mode::RoutePreview;
    Verbosity verbosity = Verbosity::Short;
    SentenceAnnotation ann;
};
struct DescriptionRecord {
    Mode mode = Mode::RoutePreview;
    Verbosity verbosity = Verbosity::Short;
    DescriptionAnnotation ann;
};

struct PanelRow {
    std::string category;
    std::size_t count = 0;
    double percent = 0.0;
};
struct Panel {
    std::string name;
    std::size_t denominator = 0;
    std::vector<PanelRow> rows;
};
struct ReportGroup {
    std::string label;  // "overall" or "RoutePreview/Short"
    std::optional<Mode> mode;
    std::optional<Verbosity> verbosity;
    std::size_t sentences = 0;
    std::size_t descriptions = 0;
    std::vector<Panel> panels;  // information_type, correctness, error_type, consistency, redundancy, relevance
};
struct EvalReport {
    std::vector<ReportGroup> groups;
};

// Sentence panels divide by sentence count, except error_type which divides
// by sentences carrying an error. Relevance divides by descriptions rated
// something other than NotApplicable.
EvalReport aggregate(const std::vector<SentenceRecord>& sentences, const std::vector<DescriptionRecord>& descriptions);
EvalReport aggregate(const AnnotationStore& store);

json to_json(const EvalReport& r);
std::string to_markdown(const EvalReport& r);

struct Disagreement {
    std::string task_id;
    std::optional<std::size_t> sentence_idx;  // nullopt for description-level fields
    std::string field;
    std::string a;
    std::string b;
};
// Field-by-field differences for items annotated in both stores, plus items
// annotated in only one ("<missing>" on the other side).
std::vector<Disagreement> diff(const AnnotationStore& a, const AnnotationStore& b);
json to_json(const std::vector<Disagreement>& d);

// Prompt-per-sentence annotation loop. Skips items already annotated; "q"
// stops early with everything entered so far saved. Returns records written.
std::size_t annotate(AnnotationStore& store, std::istream& in, std::ostream& out);

}  // namespace sva::eval
