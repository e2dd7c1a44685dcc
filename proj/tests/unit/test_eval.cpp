#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "test_util.hpp"
#include "sva/eval.hpp"
#include "sva/exploration.hpp"
#include "sva/fixture_providers.hpp"
#include "sva/route_preview.hpp"

using namespace sva;
using namespace sva::eval;

namespace {

const std::string kFixedTime = "2024-01-01T00:00:00Z";

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "sva_test_eval";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::filesystem::remove(p);
    return p.string();
}

SentenceAnnotation plain() {
    SentenceAnnotation a;
    a.info_type = InfoType::Objective;
    a.objective_subtypes = {ObjectiveSubtype::POI};
    return a;
}

AnnotationTask make_task(const std::string& id, Mode mode, std::size_t n_sentences) {
    AnnotationTask t;
    t.id = id;
    t.source_id = "src";
    t.mode = mode;
    t.verbosity = Verbosity::Medium;
    t.context.heading = "North";
    for (std::size_t i = 0; i < n_sentences; ++i) t.sentences.push_back("Sentence " + std::to_string(i) + ".");
    return t;
}

std::vector<DescriptionItem> synthetic_items(std::size_t per_mode) {
    std::vector<DescriptionItem> out;
    for (auto mode : {Mode::RoutePreview, Mode::VirtualExploration}) {
        for (std::size_t i = 0; i < per_mode; ++i) {
            DescriptionItem d;
            d.source_id = mode == Mode::RoutePreview ? "p" : "e";
            d.mode = mode;
            d.verbosity = static_cast<Verbosity>(i % 3);
            d.item = i;
            d.text = "Item " + std::to_string(i) + " has a bench. There is a tree.";
            out.push_back(d);
        }
    }
    return out;
}

json preview_doc() {
    auto bundle = read_json_file(std::string(SVA_FIXTURE_DIR) + "/bundle.json");
    preview::RoutePreviewer p(make_fixture_providers(SVA_FIXTURE_DIR), preview::PreviewConfig{},
                              [] { return kFixedTime; });
    return preview::to_json(p.generate(preview::request_from_json(bundle.at("preview")), "demo-preview"));
}

json exploration_doc() {
    auto bundle = read_json_file(std::string(SVA_FIXTURE_DIR) + "/bundle.json");
    explore::Explorer ex(make_fixture_providers(SVA_FIXTURE_DIR), explore::ExploreConfig{},
                         [] { return kFixedTime; });
    auto s = ex.start_session("demo-explore", bundle.at("explore").at("intent").get<std::string>(), {40.7244, -73.9453});
    ex.add_keywords(s, {});
    for (int i = 0; i < 3; ++i) {
        ex.describe_block(s);
        ex.step_forward(s);
    }
    return explore::to_json(s);
}

template <class E>
E pick(std::mt19937_64& rng, const std::vector<E>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

SentenceAnnotation random_annotation(std::mt19937_64& rng) {
    SentenceAnnotation a;
    a.info_type = pick(rng, all_values<InfoType>());
    if (a.info_type != InfoType::Subjective) a.objective_subtypes = {pick(rng, all_values<ObjectiveSubtype>())};
    a.correctness = pick(rng, all_values<Correctness>());
    if (a.correctness == Correctness::Incorrect || a.correctness == Correctness::PartiallyCorrect) {
        std::vector<ErrorType> errs(all_values<ErrorType>().begin(), all_values<ErrorType>().end() - 1);
        a.error_type = pick(rng, errs);
    } else {
        a.error_type = ErrorType::None;
    }
    a.consistency = pick(rng, all_values<Consistency>());
    a.redundancy = pick(rng, all_values<Redundancy>());
    return a;
}

const Panel& panel(const ReportGroup& g, const std::string& name) {
    for (const auto& p : g.panels) {
        if (p.name == name) return p;
    }
    FAIL("no panel " << name);
    throw 0;
}

double pct_of(const Panel& p, const std::string& cat) {
    for (const auto& r : p.rows) {
        if (r.category == cat) return r.percent;
    }
    return -1;
}

}  // namespace

TEST_CASE("enum names round trip", "[eval]") {
    for (auto v : all_values<Correctness>()) CHECK(parse_enum<Correctness>(name_of(v)) == v);
    for (auto v : all_values<ErrorType>()) CHECK(parse_enum<ErrorType>(name_of(v)) == v);
    for (auto v : all_values<Relevance>()) CHECK(parse_enum<Relevance>(name_of(v)) == v);
    CHECK(code_of([] { parse_enum<Mode>("Preview"); }) == ErrorCode::Validation);
}

TEST_CASE("annotation validation rules", "[eval]") {
    auto a = plain();
    CHECK_NOTHROW(a.validate());

    auto b = plain();
    b.error_type = ErrorType::FactualError;
    CHECK(code_of([&] { b.validate(); }) == ErrorCode::Validation);

    auto c = plain();
    c.correctness = Correctness::Incorrect;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::Validation);
    c.error_type = ErrorType::Hallucination;
    CHECK_NOTHROW(c.validate());
    c.correctness = Correctness::PartiallyCorrect;
    CHECK_NOTHROW(c.validate());

    auto d = plain();
    d.objective_subtypes.clear();
    CHECK(code_of([&] { d.validate(); }) == ErrorCode::Validation);
    d.info_type = InfoType::Subjective;
    CHECK_NOTHROW(d.validate());
    d.objective_subtypes = {ObjectiveSubtype::Other};
    CHECK(code_of([&] { d.validate(); }) == ErrorCode::Validation);

    auto e = plain();
    e.info_type = InfoType::Mixed;
    e.objective_subtypes = {ObjectiveSubtype::POI, ObjectiveSubtype::POI};
    CHECK(code_of([&] { e.validate(); }) == ErrorCode::Validation);

    CHECK_NOTHROW(DescriptionAnnotation{Relevance::NotApplicable}.validate(Mode::RoutePreview));
    CHECK(code_of([] { DescriptionAnnotation{Relevance::Fully}.validate(Mode::RoutePreview); }) == ErrorCode::Validation);
    CHECK(code_of([] { DescriptionAnnotation{Relevance::NotApplicable}.validate(Mode::VirtualExploration); }) ==
          ErrorCode::Validation);
    CHECK_NOTHROW(DescriptionAnnotation{Relevance::Partially}.validate(Mode::VirtualExploration));
}

TEST_CASE("store persists and later records win", "[eval]") {
    const auto path = temp_path("store.jsonl");
    {
        AnnotationStore s(path);
        s.add_task(make_task("a/0/short", Mode::VirtualExploration, 2));
        s.record("a/0/short", 0, plain());
        auto second = plain();
        second.correctness = Correctness::CannotTell;
        s.record("a/0/short", 0, second);
        s.record_description("a/0/short", {Relevance::Partially});
        CHECK(code_of([&] { s.record("a/0/short", 2, plain()); }) == ErrorCode::Validation);
        CHECK(code_of([&] { s.record("nope", 0, plain()); }) == ErrorCode::NotFound);
        auto bad = plain();
        bad.error_type = ErrorType::FactualError;
        CHECK(code_of([&] { s.record("a/0/short", 1, bad); }) == ErrorCode::Validation);
        CHECK(code_of([&] { s.record_description("a/0/short", {Relevance::NotApplicable}); }) == ErrorCode::Validation);
    }
    const auto back = AnnotationStore::load(path);
    REQUIRE(back.tasks().size() == 1);
    CHECK(back.tasks()[0] == make_task("a/0/short", Mode::VirtualExploration, 2));
    REQUIRE(back.sentence("a/0/short", 0));
    CHECK(back.sentence("a/0/short", 0)->correctness == Correctness::CannotTell);
    CHECK_FALSE(back.sentence("a/0/short", 1));
    CHECK(back.description("a/0/short")->relevance == Relevance::Partially);
    CHECK(back.sentences().size() == 1);

    CHECK(code_of([] { AnnotationStore::load(temp_path("absent.jsonl")); }) == ErrorCode::NotFound);
    const auto broken = temp_path("broken.jsonl");
    std::ofstream(broken) << "{not json\n";
    CHECK(code_of([&] { AnnotationStore s(broken); }) == ErrorCode::Validation);

    const auto t = make_task("x/1/long", Mode::RoutePreview, 3);
    CHECK(task_from_json(to_json(t)) == t);
    auto ann = plain();
    ann.info_type = InfoType::Mixed;
    ann.objective_subtypes = {ObjectiveSubtype::Accessibility, ObjectiveSubtype::FactualObject};
    CHECK(sentence_annotation_from_json(to_json(ann)) == ann);
}

TEST_CASE("descriptions are collected from preview and exploration logs", "[eval]") {
    const auto pv = preview_doc();
    const auto ex = exploration_doc();
    const auto items = collect_descriptions({pv, ex});

    std::size_t preview_n = 0;
    std::size_t explore_n = 0;
    for (const auto& it : items) {
        CHECK_FALSE(it.text.empty());
        (it.mode == Mode::RoutePreview ? preview_n : explore_n)++;
    }
    CHECK(preview_n == 3 * pv.at("segments").size());
    CHECK(explore_n == 9);

    // Context chains the previous long description.
    CHECK_FALSE(items[0].context.prev_description);
    CHECK(items[3].context.prev_description == pv.at("segments")[0].at("descriptions").at("long").get<std::string>());
    CHECK(items[0].verbosity == Verbosity::Short);
    CHECK(items[2].verbosity == Verbosity::Long);
    CHECK_FALSE(items[0].context.image_ids.empty());

    const auto& first_block = items[preview_n];
    CHECK(first_block.source_id == "demo-explore");
    CHECK_FALSE(first_block.context.prev_description);
    CHECK(first_block.context.image_ids.size() == 3);
    CHECK(first_block.context.heading == "North");

    CHECK(code_of([] { collect_descriptions({json{{"schema", "other.v1"}}}); }) == ErrorCode::Validation);
    CHECK(code_of([] { collect_descriptions({json{{"schema", "preview.v1"}}}); }) == ErrorCode::Validation);
}

TEST_CASE("sampling is reproducible and stratified", "[eval]") {
    const auto items = synthetic_items(50);
    const auto a = sample_tasks(items, 0.2, 7);
    const auto b = sample_tasks(items, 0.2, 7);
    CHECK(a.size() == 20);
    CHECK(a == b);
    std::size_t rp = 0;
    std::set<std::string> ids;
    for (const auto& t : a) {
        if (t.mode == Mode::RoutePreview) ++rp;
        ids.insert(t.id);
        CHECK(t.sentences.size() == 2);
    }
    CHECK(rp == 10);
    CHECK(ids.size() == a.size());
    CHECK(a[0].id.find('/') != std::string::npos);

    CHECK(sample_tasks(items, 0.2, 8) != a);
    CHECK(sample_tasks(items, 1.0, 3).size() == 100);
    CHECK(sample_tasks(synthetic_items(20), 0.2, 1).size() == 8);
    for (double f : {0.0, -0.1, 1.5}) CHECK(code_of([&] { sample_tasks(items, f, 7); }) == ErrorCode::InvalidArgument);

    // Items with no sentences are not sampled.
    auto with_empty = items;
    for (auto& it : with_empty) it.text = "   ";
    CHECK(sample_tasks(with_empty, 1.0, 7).empty());

    SeededRng r1(42), r2(42);
    for (int i = 0; i < 100; ++i) {
        const auto x = r1.below(10);
        CHECK(x < 10);
        CHECK(x == r2.below(10));
    }
    CHECK(code_of([&] { r1.below(0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("task ids follow source/item/verbosity", "[eval]") {
    const auto items = collect_descriptions({preview_doc()});
    const auto tasks = sample_tasks(items, 1.0, 7);
    REQUIRE(tasks.size() == items.size());
    CHECK(tasks[0].id == "demo-preview/0/short");
    CHECK(tasks[2].id == "demo-preview/0/long");
}

TEST_CASE("aggregation matches a brute-force count", "[eval]") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 1000; ++round) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
        std::vector<SentenceRecord> ss;
        std::vector<DescriptionRecord> ds;
        for (std::size_t i = 0; i < n; ++i) {
            ss.push_back({pick(rng, all_values<Mode>()), pick(rng, all_values<Verbosity>()), random_annotation(rng)});
        }
        const auto nd = std::uniform_int_distribution<std::size_t>(0, 10)(rng);
        for (std::size_t i = 0; i < nd; ++i) {
            const auto mode = pick(rng, all_values<Mode>());
            const auto rel = mode == Mode::RoutePreview
                                 ? Relevance::NotApplicable
                                 : pick(rng, std::vector<Relevance>{Relevance::Fully, Relevance::Partially, Relevance::Not});
            ds.push_back({mode, pick(rng, all_values<Verbosity>()), {rel}});
        }
        const auto report = aggregate(ss, ds);
        REQUIRE_FALSE(report.groups.empty());
        CHECK(report.groups[0].label == "overall");
        for (const auto& g : report.groups) {
            auto in_group = [&](Mode m, Verbosity v) {
                return (!g.mode || *g.mode == m) && (!g.verbosity || *g.verbosity == v);
            };
            std::size_t total = 0, errors = 0, rated = 0;
            std::map<std::string, std::map<std::string, std::size_t>> counts;
            for (const auto& s : ss) {
                if (!in_group(s.mode, s.verbosity)) continue;
                ++total;
                counts["information_type"][std::string(name_of(s.ann.info_type))]++;
                counts["correctness"][std::string(name_of(s.ann.correctness))]++;
                counts["consistency"][std::string(name_of(s.ann.consistency))]++;
                counts["redundancy"][std::string(name_of(s.ann.redundancy))]++;
                if (s.ann.error_type != ErrorType::None) {
                    ++errors;
                    counts["error_type"][std::string(name_of(s.ann.error_type))]++;
                }
            }
            for (const auto& d : ds) {
                if (!in_group(d.mode, d.verbosity) || d.ann.relevance == Relevance::NotApplicable) continue;
                ++rated;
                counts["relevance"][std::string(name_of(d.ann.relevance))]++;
            }
            CHECK(g.sentences == total);
            for (const auto& p : g.panels) {
                const auto denom = p.name == "error_type" ? errors : p.name == "relevance" ? rated : total;
                CHECK(p.denominator == denom);
                double sum = 0;
                for (const auto& row : p.rows) {
                    const auto expect = counts[p.name][row.category];
                    CHECK(row.count == expect);
                    const double pct = denom ? 100.0 * double(expect) / double(denom) : 0.0;
                    CHECK(row.percent == Catch::Approx(pct).margin(1e-9));
                    sum += row.percent;
                }
                if (denom) CHECK(std::abs(sum - 100.0) <= 0.1);
            }
        }
    }
}

TEST_CASE("aggregation reproduces known distributions", "[eval]") {
    std::vector<SentenceRecord> ss;
    auto add = [&](std::size_t n, Correctness c, Consistency k) {
        for (std::size_t i = 0; i < n; ++i) {
            auto a = plain();
            a.correctness = c;
            a.error_type = (c == Correctness::Incorrect || c == Correctness::PartiallyCorrect) ? ErrorType::SpatialError
                                                                                                : ErrorType::None;
            a.consistency = k;
            ss.push_back({Mode::RoutePreview, Verbosity::Long, a});
        }
    };
    add(72, Correctness::Correct, Consistency::Likely);
    add(7, Correctness::PartiallyCorrect, Consistency::Likely);
    add(7, Correctness::PartiallyCorrect, Consistency::Possibly);
    add(8, Correctness::Incorrect, Consistency::Possibly);
    add(1, Correctness::CannotTell, Consistency::Possibly);
    add(5, Correctness::CannotTell, Consistency::NotLikely);
    const auto r = aggregate(ss, {});
    REQUIRE(r.groups.size() == 2);
    CHECK(r.groups[1].label == "RoutePreview/Long");
    const auto& corr = panel(r.groups[0], "correctness");
    CHECK(pct_of(corr, "Correct") == Catch::Approx(72));
    CHECK(pct_of(corr, "PartiallyCorrect") == Catch::Approx(14));
    CHECK(pct_of(corr, "Incorrect") == Catch::Approx(8));
    CHECK(pct_of(corr, "CannotTell") == Catch::Approx(6));
    const auto& cons = panel(r.groups[0], "consistency");
    CHECK(pct_of(cons, "Likely") == Catch::Approx(79));
    CHECK(pct_of(cons, "Possibly") == Catch::Approx(16));
    CHECK(pct_of(cons, "NotLikely") == Catch::Approx(5));
    const auto& err = panel(r.groups[0], "error_type");
    CHECK(err.denominator == 22);
    CHECK(err.rows.size() == 6);
    CHECK(pct_of(err, "SpatialError") == Catch::Approx(100));
    CHECK(panel(r.groups[0], "relevance").denominator == 0);

    const auto one = aggregate({{Mode::VirtualExploration, Verbosity::Short, plain()}},
                               {{Mode::VirtualExploration, Verbosity::Short, {Relevance::Fully}}});
    CHECK(pct_of(panel(one.groups[0], "correctness"), "Correct") == 100.0);
    CHECK(pct_of(panel(one.groups[0], "relevance"), "Fully") == 100.0);

    const auto j = to_json(r);
    CHECK(j.at("schema") == "eval-report.v1");
    CHECK(j.at("groups")[0].at("panels").at("correctness").at("denominator") == 100);
    const auto md = to_markdown(r);
    CHECK(md.find("| Correct | 72 | 72.0% |") != std::string::npos);
    CHECK(md.find("## RoutePreview/Long") != std::string::npos);
}

TEST_CASE("store-level aggregation and diff", "[eval]") {
    AnnotationStore a, b;
    for (auto* s : {&a, &b}) {
        s->add_task(make_task("t/0/short", Mode::VirtualExploration, 2));
        s->add_task(make_task("t/1/short", Mode::RoutePreview, 1));
    }
    a.record("t/0/short", 0, plain());
    auto other = plain();
    other.correctness = Correctness::Incorrect;
    other.error_type = ErrorType::PlausibleDetail;
    b.record("t/0/short", 0, other);
    a.record("t/0/short", 1, plain());
    b.record("t/0/short", 1, plain());
    a.record("t/1/short", 0, plain());
    a.record_description("t/0/short", {Relevance::Fully});
    b.record_description("t/0/short", {Relevance::Not});

    const auto d = diff(a, b);
    REQUIRE(d.size() == 4);
    CHECK(d[0].field == "correctness");
    CHECK(d[0].a == "Correct");
    CHECK(d[0].b == "Incorrect");
    CHECK(d[1].field == "error_type");
    CHECK(d[2].task_id == "t/1/short");
    CHECK(d[2].b == "<missing>");
    CHECK(d[3].field == "relevance");
    CHECK_FALSE(d[3].sentence_idx);
    CHECK(to_json(d).at("count") == 4);
    CHECK(diff(a, a).empty());

    const auto r = aggregate(a);
    CHECK(r.groups[0].sentences == 3);
    CHECK(r.groups[0].descriptions == 1);
}

TEST_CASE("interactive annotation", "[eval]") {
    const auto path = temp_path("annotate.jsonl");
    {
        AnnotationStore s(path);
        auto t = make_task("e/0/short", Mode::VirtualExploration, 2);
        t.context.places = {"Cafe (cafe)"};
        s.add_task(t);
        s.add_task(make_task("p/0/short", Mode::RoutePreview, 1));

        // Sentence 1: Objective POI, incorrect with a spatial error. Then q.
        std::istringstream in("Objective\n1\nbogus\nIncorrect\nSpatialError\nLikely\nNoPrev\nq\n");
        std::ostringstream out;
        CHECK(annotate(s, in, out) == 1);
        CHECK(out.str().find("Not a valid choice.") != std::string::npos);
        CHECK(out.str().find("Places: Cafe (cafe)") != std::string::npos);
        CHECK(out.str().find("Stopped; progress saved.") != std::string::npos);
    }
    AnnotationStore s(path);
    const auto first = s.sentence("e/0/short", 0);
    REQUIRE(first);
    CHECK(first->objective_subtypes == std::vector<ObjectiveSubtype>{ObjectiveSubtype::POI});
    CHECK(first->error_type == ErrorType::SpatialError);

    // Resumes at sentence 2, then relevance, then the preview task.
    std::istringstream in("Subjective\nCorrect\nPossibly\nAddsNew\n2\nMixed\n3,1\n4\n3\n2\n");
    std::ostringstream out;
    CHECK(annotate(s, in, out) == 3);
    CHECK(out.str().find("All tasks annotated.") != std::string::npos);
    const auto second = s.sentence("e/0/short", 1);
    REQUIRE(second);
    CHECK(second->info_type == InfoType::Subjective);
    CHECK(second->redundancy == Redundancy::AddsNew);
    CHECK(s.description("e/0/short")->relevance == Relevance::Partially);
    const auto third = s.sentence("p/0/short", 0);
    REQUIRE(third);
    CHECK(third->objective_subtypes ==
          std::vector<ObjectiveSubtype>{ObjectiveSubtype::Accessibility, ObjectiveSubtype::POI});
    CHECK(third->correctness == Correctness::Correct);
    CHECK(third->consistency == Consistency::Likely);
    CHECK(third->redundancy == Redundancy::Repeats);
    CHECK_FALSE(s.description("p/0/short"));

    std::istringstream none("");
    std::ostringstream out2;
    CHECK(annotate(s, none, out2) == 0);
}

TEST_CASE("sampling inclusion frequency tracks the fraction", "[eval]") {
    const auto items = synthetic_items(25);
    std::map<std::string, std::size_t> hits;
    const std::size_t trials = 10000;
    for (std::size_t seed = 0; seed < trials; ++seed) {
        for (const auto& t : sample_tasks(items, 0.2, seed * 7919 + 1)) hits[t.id]++;
    }
    REQUIRE(hits.size() == items.size());
    for (const auto& [id, n] : hits) {
        const double f = static_cast<double>(n) / trials;
        CHECK(std::abs(f - 0.2) <= 0.03);
    }
}
