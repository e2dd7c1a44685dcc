#include <catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "test_util.hpp"
#include "sva/cli.hpp"
#include "sva/eval.hpp"
#include "sva/fixture_providers.hpp"
#include "sva/service.hpp"

using namespace sva;
using namespace sva::service;
namespace fs = std::filesystem;

namespace {

const GeoCoordinate kStart{40.7244, -73.9453};

std::string fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / "sva_test_service" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

ServiceConfig fixture_config(const std::string& data_dir) {
    ServiceConfig c;
    c.fixture_dir = SVA_FIXTURE_DIR;
    c.data_dir = data_dir;
    return c;
}

json bundle() { return read_json_file(std::string(SVA_FIXTURE_DIR) + "/bundle.json"); }

struct Client {
    Service& svc;
    HttpReply last;

    json call(const std::string& method, const std::string& path, const json& body = nullptr,
              const std::string& idem_key = {}) {
        HttpRequest r;
        r.method = method;
        r.path = path;
        if (!body.is_null()) {
            r.body = body.dump();
            r.headers["content-type"] = "application/json";
        }
        if (!idem_key.empty()) r.headers["idempotency-key"] = idem_key;
        last = svc.handle(r);
        if (last.content_type != "application/json") return nullptr;
        return json::parse(last.body);
    }
    json get(const std::string& path) { return call("GET", path); }
    json post(const std::string& path, const json& body = json::object(), const std::string& key = {}) {
        return call("POST", path, body, key);
    }
};

json explore_body() { return {{"intent", bundle().at("explore").at("intent")}, {"start", {{"lat", kStart.lat}, {"lon", kStart.lon}}}}; }

// Fails block descriptions with a transport-style error.
class OfflineBlocks : public MllmProvider {
public:
    explicit OfflineBlocks(std::shared_ptr<MllmProvider> inner) : inner_(std::move(inner)) {}
    std::string complete(const MllmRequest& req) override {
        if (req.template_id == "exploration_block" && offline) {
            throw Error(ErrorCode::Provider, "connection refused").with_retry(true);
        }
        return inner_->complete(req);
    }
    std::atomic<bool> offline{false};

private:
    std::shared_ptr<MllmProvider> inner_;
};

class SlowBlocks : public MllmProvider {
public:
    explicit SlowBlocks(std::shared_ptr<MllmProvider> inner) : inner_(std::move(inner)) {}
    std::string complete(const MllmRequest& req) override {
        if (req.template_id == "exploration_block") std::this_thread::sleep_for(std::chrono::milliseconds(400));
        return inner_->complete(req);
    }

private:
    std::shared_ptr<MllmProvider> inner_;
};

Service make_service(const std::string& dir, std::shared_ptr<MllmProvider> (*wrap)(std::shared_ptr<MllmProvider>) = nullptr,
                     long timeout_ms = 60000) {
    auto cfg = fixture_config(dir);
    cfg.call_timeout_ms = timeout_ms;
    auto set = make_fixture_providers(cfg.fixture_dir);
    if (wrap) set.mllm = wrap(set.mllm);
    return Service(cfg, set, make_clock(cfg));
}

std::map<std::string, std::string> env_map;
std::optional<std::string> fake_env(const std::string& k) {
    const auto it = env_map.find(k);
    if (it == env_map.end()) return std::nullopt;
    return it->second;
}

int run_cli(const std::vector<std::string>& args, const std::string& input, std::string* out, std::string* err) {
    std::istringstream in(input);
    std::ostringstream o, e;
    const int code = cli::run(args, in, o, e, fake_env);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
}

}  // namespace

TEST_CASE("config defaults, file, and environment", "[service]") {
    ServiceConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.sampling_min_m == 30.0);
    CHECK(c.sampling_max_m == 40.0);
    CHECK(c.preview_config().sampling.max_interval_m == 40.0);
    CHECK(config_from_json(to_json(c)).listen_port == c.listen_port);

    CHECK(code_of([] { config_from_json({{"no_such_key", 1}}); }) == ErrorCode::Config);
    CHECK(code_of([] { config_from_json({{"listen_port", "80"}}); }) == ErrorCode::Config);
    CHECK(code_of([] { config_from_json({{"step_budget", -3}}); }) == ErrorCode::Config);
    CHECK(code_of([] { config_from_json(json::array()); }) == ErrorCode::Config);

    const auto dir = fresh_dir("config");
    const auto path = dir + "/svc.json";
    std::ofstream(path) << R"({"listen_port": 9001, "model": "m1", "sampling_min_m": 32})";
    env_map = {{"SCENESCOUT_LISTEN_PORT", "9002"}, {"SCENESCOUT_DATA_DIR", "/tmp/x"}};
    auto loaded = load_config(path, fake_env);
    CHECK(loaded.listen_port == 9002);
    CHECK(loaded.model == "m1");
    CHECK(loaded.sampling_min_m == 32.0);
    CHECK(loaded.data_dir == "/tmp/x");

    env_map = {{"SCENESCOUT_SNAP_RADIUS_M", "abc"}};
    CHECK(code_of([&] { load_config(std::nullopt, fake_env); }) == ErrorCode::Config);
    env_map = {{"SCENESCOUT_SAMPLING_MIN_M", "50"}};
    CHECK(code_of([&] { load_config(std::nullopt, fake_env); }) == ErrorCode::Config);
    env_map = {{"SCENESCOUT_PROVIDER_MODE", "live"}};
    CHECK(code_of([&] { load_config(std::nullopt, fake_env); }) == ErrorCode::Config);
    env_map = {{"SCENESCOUT_PROVIDER_MODE", "live"},    {"SCENESCOUT_MAPS_BASE_URL", "http://127.0.0.1:1"},
               {"SCENESCOUT_MAPS_API_KEY", "k"},         {"SCENESCOUT_MLLM_BASE_URL", "http://127.0.0.1:1"},
               {"SCENESCOUT_MLLM_API_KEY", "k"},         {"SCENESCOUT_MODEL", "m"}};
    const auto live = load_config(std::nullopt, fake_env);
    CHECK(live.provider_mode == "live");
    CHECK(make_providers(live).mode == "live");
    CHECK(code_of([&] { load_config(dir + "/missing.json", fake_env); }) == ErrorCode::Config);
    env_map.clear();

    CHECK(make_clock(c)() == "2024-01-01T00:00:00Z");
    CHECK(utc_now_iso8601().size() == 20);
}

TEST_CASE("HTTP error mapping", "[service]") {
    CHECK(http_status_for(Error(ErrorCode::Validation, "x")) == 400);
    CHECK(http_status_for(Error(ErrorCode::InvalidArgument, "x")) == 400);
    CHECK(http_status_for(Error(ErrorCode::NotFound, "x")) == 404);
    CHECK(http_status_for(Error(ErrorCode::InvalidState, "x")) == 409);
    CHECK(http_status_for(Error(ErrorCode::Provider, "x")) == 502);
    CHECK(http_status_for(Error(ErrorCode::Internal, "x")) == 500);
    const auto b = error_body(Error(ErrorCode::Provider, "down", "503").with_retry(true, 1500));
    CHECK(b.at("retryable") == true);
    CHECK(b.at("retry_after_ms") == 1500);
    CHECK(b.at("detail") == "503");
    CHECK(b.contains("code"));
    CHECK(b.contains("message"));
}

TEST_CASE("exploration scenario over the API", "[service]") {
    const auto dir = fresh_dir("scenario");
    auto svc = make_service(dir);
    Client c{svc, {}};

    const auto health = c.get("/v1/health");
    CHECK(c.last.status == 200);
    CHECK(health.at("provider_mode") == "fixture");

    const auto created = c.post("/v1/explore", explore_body());
    REQUIRE(c.last.status == 200);
    CHECK(created.at("default_keywords") ==
          json::array({"Parks", "Grocery stores", "Community centers", "Residential area"}));
    CHECK(created.at("status") == "awaiting_keywords");
    const auto id = created.at("session_id").get<std::string>();

    // Stepping before keywords are confirmed is a state error.
    c.post("/v1/explore/" + id + "/step");
    CHECK(c.last.status == 409);
    CHECK(c.get("/v1/explore/" + id + "/directions").at("code") == "invalid_state");
    CHECK(c.last.status == 409);

    const auto kw = c.post("/v1/explore/" + id + "/keywords", {{"additions", {"schools"}}});
    CHECK(c.last.status == 200);
    CHECK(kw.at("keywords").size() == 5);
    CHECK(kw.at("status") == "walking");

    json last_step;
    for (int i = 0; i < 4; ++i) {
        last_step = c.post("/v1/explore/" + id + "/step");
        REQUIRE(c.last.status == 200);
        CHECK_FALSE(last_step.at("block").is_null());
        CHECK(last_step.at("block").at("descriptions").at("long").get<std::string>().size() > 10);
    }
    CHECK(last_step.at("intersection") == true);
    CHECK(last_step.at("position") == "gp4");

    c.post("/v1/explore/" + id + "/step");
    CHECK(c.last.status == 409);

    const auto dirs = c.get("/v1/explore/" + id + "/directions");
    REQUIRE(c.last.status == 200);
    REQUIRE(dirs.at("options").size() == 4);
    CHECK(dirs.at("options")[0].at("street_name") == "Russell Street");
    CHECK(dirs.at("options")[3].at("previously_traveled") == true);
    CHECK(dirs.at("suggested") == 1);
    CHECK(dirs.at("suggestion_reason").get<std::string>().find("Head north on Russell Street") != std::string::npos);
    // Asking again returns the recorded offer.
    const auto history = c.get("/v1/explore/" + id + "/state").at("events").size();
    CHECK(c.get("/v1/explore/" + id + "/directions") == dirs);
    CHECK(c.get("/v1/explore/" + id + "/state").at("events").size() == history);

    c.post("/v1/explore/" + id + "/choose", {{"idx", 0}});
    CHECK(c.last.status == 400);
    c.post("/v1/explore/" + id + "/choose", {{"idx", 5}});
    CHECK(c.last.status == 400);
    c.post("/v1/explore/" + id + "/choose", {{"idx", "1"}});
    CHECK(c.last.status == 400);
    c.post("/v1/explore/" + id + "/choose", json::object());
    CHECK(c.last.status == 400);

    const auto chosen = c.post("/v1/explore/" + id + "/choose", {{"idx", 1}});
    REQUIRE(c.last.status == 200);
    CHECK(chosen.at("position") == "gp5");
    CHECK(chosen.at("status") == "walking");
    CHECK_FALSE(chosen.contains("events"));

    const auto next = c.post("/v1/explore/" + id + "/step");
    CHECK(c.last.status == 200);
    CHECK_FALSE(next.at("block").is_null());

    const auto ended = c.post("/v1/explore/" + id + "/end");
    CHECK(ended.at("status") == "ended");
    c.post("/v1/explore/" + id + "/step");
    CHECK(c.last.status == 409);
    c.post("/v1/explore/" + id + "/keywords", {{"additions", json::array()}});
    CHECK(c.last.status == 409);

    const auto state = c.get("/v1/explore/" + id + "/state");
    CHECK(state.at("schema") == "exploration.v1");
    CHECK(explore::session_from_log(state).status == explore::Status::Ended);

    // The usage log is eval input.
    const auto log = read_json_file(dir + "/logs/" + id + ".json");
    CHECK(log == state);
    const auto items = eval::collect_descriptions({log});
    CHECK(items.size() == 15);
}

TEST_CASE("request validation and unknown ids", "[service]") {
    const auto dir = fresh_dir("validation");
    auto svc = make_service(dir);
    Client c{svc, {}};

    c.post("/v1/explore", {{"start", {40.7244, -73.9453}}});
    CHECK(c.last.status == 400);
    c.post("/v1/explore", {{"intent", 3}, {"start", {40.7244, -73.9453}}});
    CHECK(c.last.status == 400);
    c.post("/v1/explore", {{"intent", "walk"}, {"start", {{"lat", 95}, {"lon", 0}}}});
    CHECK(c.last.status == 400);
    c.post("/v1/explore", {{"intent", "   "}, {"start", {40.7244, -73.9453}}});
    CHECK(c.last.status == 400);
    c.post("/v1/explore", {{"intent", "walk"}, {"start", {0.0, 0.0}}});
    CHECK(c.last.status == 400);

    HttpRequest r{"POST", "/v1/explore", {{"content-type", "text/plain"}}, explore_body().dump()};
    CHECK(svc.handle(r).status == 400);
    r.headers["content-type"] = "application/json";
    r.body = "{not json";
    const auto bad = svc.handle(r);
    CHECK(bad.status == 400);
    CHECK(json::parse(bad.body).at("code") == "validation_error");

    CHECK(c.get("/v1/explore/s-nope/state").at("code") == "not_found");
    CHECK(c.last.status == 404);
    c.post("/v1/explore/s-nope/step");
    CHECK(c.last.status == 404);
    c.get("/v1/explore/..%2F..%2Fetc/state");
    CHECK(c.last.status == 404);
    c.get("/v1/preview/p-nope");
    CHECK(c.last.status == 404);
    c.get("/v2/health");
    CHECK(c.last.status == 404);
    c.call("DELETE", "/v1/health");
    CHECK(c.last.status == 404);

    const auto created = c.post("/v1/explore", explore_body());
    const auto id = created.at("session_id").get<std::string>();
    c.post("/v1/explore/" + id + "/keywords", {{"additions", "Parks"}});
    CHECK(c.last.status == 400);
    c.post("/v1/explore/" + id + "/keywords", {{"additions", {1, 2}}});
    CHECK(c.last.status == 400);
}

TEST_CASE("idempotency keys replay the first result", "[service]") {
    const auto dir = fresh_dir("idempotency");
    {
        auto svc = make_service(dir);
        Client c{svc, {}};
        const auto a = c.post("/v1/explore", explore_body(), "create-1");
        const auto b = c.post("/v1/explore", explore_body(), "create-1");
        CHECK(a == b);
        CHECK(c.get("/v1/health").at("sessions") == 1);
        const auto other = c.post("/v1/explore", explore_body(), "create-2");
        CHECK(other.at("session_id") != a.at("session_id"));

        const auto id = a.at("session_id").get<std::string>();
        const auto k1 = c.post("/v1/explore/" + id + "/keywords", {{"additions", {"x"}}}, "kw-1");
        const auto events = c.get("/v1/explore/" + id + "/state").at("events").size();
        CHECK(c.post("/v1/explore/" + id + "/keywords", {{"additions", {"x"}}}, "kw-1") == k1);
        CHECK(c.get("/v1/explore/" + id + "/state").at("events").size() == events);

        const auto s1 = c.post("/v1/explore/" + id + "/step", json::object(), "step-1");
        const auto s2 = c.post("/v1/explore/" + id + "/step", json::object(), "step-1");
        CHECK(s1 == s2);
        CHECK(c.get("/v1/explore/" + id + "/state").at("position") == "gp1");

        // Errors other than 5xx are replayed too.
        c.post("/v1/explore/" + id + "/choose", {{"idx", 1}}, "choose-1");
        CHECK(c.last.status == 409);
        c.post("/v1/explore/" + id + "/choose", {{"idx", 1}}, "choose-1");
        CHECK(c.last.status == 409);
    }
    // Keys survive a restart.
    auto svc = make_service(dir);
    Client c{svc, {}};
    const auto again = c.post("/v1/explore", explore_body(), "create-1");
    CHECK(c.get("/v1/health").at("sessions") == 2);
    CHECK(again.at("default_keywords").size() == 4);
}

TEST_CASE("provider failures return 502 and leave the session unchanged", "[service]") {
    const auto dir = fresh_dir("provider");
    auto offline = std::shared_ptr<OfflineBlocks>();
    auto cfg = fixture_config(dir);
    auto set = make_fixture_providers(cfg.fixture_dir);
    offline = std::make_shared<OfflineBlocks>(set.mllm);
    set.mllm = offline;
    Service svc(cfg, set, make_clock(cfg));
    Client c{svc, {}};
    const auto id = c.post("/v1/explore", explore_body()).at("session_id").get<std::string>();
    c.post("/v1/explore/" + id + "/keywords", {{"additions", json::array()}});
    const auto before = c.get("/v1/explore/" + id + "/state");

    offline->offline = true;
    const auto err = c.post("/v1/explore/" + id + "/step", json::object(), "retry-me");
    CHECK(c.last.status == 502);
    CHECK(err.at("retryable") == true);
    CHECK(err.at("code") == "provider_error");
    CHECK(c.get("/v1/explore/" + id + "/state") == before);

    // Not cached under the key: the retry runs once the provider is back.
    offline->offline = false;
    const auto ok = c.post("/v1/explore/" + id + "/step", json::object(), "retry-me");
    CHECK(c.last.status == 200);
    CHECK(ok.at("position") == "gp1");
}

TEST_CASE("slow model calls time out as retryable 502", "[service]") {
    const auto dir = fresh_dir("timeout");
    auto svc = make_service(
        dir, [](std::shared_ptr<MllmProvider> m) -> std::shared_ptr<MllmProvider> { return std::make_shared<SlowBlocks>(m); },
        100);
    Client c{svc, {}};
    const auto id = c.post("/v1/explore", explore_body()).at("session_id").get<std::string>();
    c.post("/v1/explore/" + id + "/keywords", {{"additions", json::array()}});
    const auto before = c.get("/v1/explore/" + id + "/state");
    const auto err = c.post("/v1/explore/" + id + "/step");
    CHECK(c.last.status == 502);
    CHECK(err.at("code") == "timeout");
    CHECK(err.at("retryable") == true);
    svc.wait_for_jobs();
    CHECK(c.get("/v1/explore/" + id + "/state") == before);
}

TEST_CASE("preview jobs", "[service]") {
    const auto dir = fresh_dir("preview");
    json done;
    {
        auto svc = make_service(dir);
        Client c{svc, {}};
        const auto accepted = c.post("/v1/preview", bundle().at("preview"));
        REQUIRE(c.last.status == 202);
        const auto id = accepted.at("preview_id").get<std::string>();
        const auto polled = c.get("/v1/preview/" + id);
        CHECK(c.last.status == 200);
        const auto st = polled.at("status").get<std::string>();
        CHECK((st == "pending" || st == "partial" || st == "complete"));
        svc.wait_for_jobs();
        done = c.get("/v1/preview/" + id);
        CHECK(done.at("status") == "complete");
        CHECK(done.at("segments").size() == 9);
        CHECK(done.at("destination").at("detail").at("signage_text").get<std::string>().find("RapidRide") !=
              std::string::npos);
        c.get("/v1/preview/" + id + "/markdown");
        CHECK(c.last.status == 200);
        CHECK(c.last.body.find("| # | Location | Short | Medium | Long |") != std::string::npos);
        auto log = read_json_file(dir + "/logs/" + id + ".json");
        log["status"] = "complete";
        CHECK(log == done);

        c.post("/v1/preview", {{"origin", {{"lat", 47.6209}}}});
        CHECK(c.last.status == 400);
        const auto far = c.post("/v1/preview", {{"origin", {{"lat", 10.0}, {"lon", 10.0}}},
                                                {"destination", {{"lat", 10.001}, {"lon", 10.0}}},
                                                {"destination_name", "Nowhere"}});
        svc.wait_for_jobs();
        const auto failed = c.get("/v1/preview/" + far.at("preview_id").get<std::string>());
        CHECK(failed.at("status") == "failed");
        CHECK(failed.at("error").at("code") == "route_unavailable");
    }
    // A pending job left behind by a crash is generated again.
    auto pending = read_json_file(dir + "/previews/" + done.at("id").get<std::string>() + ".json");
    pending["status"] = "pending";
    pending["result"] = nullptr;
    pending["id"] = "p-interrupted";
    write_file_atomic(dir + "/previews/p-interrupted.json", pending.dump());

    auto svc = make_service(dir);
    Client c{svc, {}};
    svc.wait_for_jobs();
    auto recovered = c.get("/v1/preview/" + done.at("id").get<std::string>());
    CHECK(recovered == done);
    auto rerun = c.get("/v1/preview/p-interrupted");
    CHECK(rerun.at("status") == "complete");
    CHECK(rerun.at("segments") == done.at("segments"));
}

TEST_CASE("sessions survive a restart", "[service]") {
    const auto dir = fresh_dir("restart");
    std::map<std::string, json> before;
    std::string walker;
    {
        auto svc = make_service(dir);
        Client c{svc, {}};
        for (int n = 0; n < 3; ++n) {
            const auto id = c.post("/v1/explore", explore_body()).at("session_id").get<std::string>();
            if (n >= 1) c.post("/v1/explore/" + id + "/keywords", {{"additions", {"bakeries"}}});
            for (int i = 0; n == 2 && i < 4; ++i) c.post("/v1/explore/" + id + "/step");
            if (n == 2) {
                walker = id;
                c.get("/v1/explore/" + id + "/directions");
                c.post("/v1/explore/" + id + "/choose", {{"idx", 2}});
            }
            before[id] = c.get("/v1/explore/" + id + "/state");
        }
    }
    // A torn final line from an interrupted append is ignored.
    const auto torn_id = before.begin()->first;
    std::ofstream(dir + "/sessions/" + torn_id + ".jsonl", std::ios::app) << "{\"type\":\"keywo";

    auto svc = make_service(dir);
    CHECK(svc.recovered_sessions() == 3);
    Client c{svc, {}};
    for (const auto& [id, snap] : before) {
        CHECK(c.get("/v1/explore/" + id + "/state") == snap);
    }
    // Recovered sessions keep working.
    c.post("/v1/explore/" + walker + "/step");
    CHECK(c.last.status == 200);

    // An illegal transition in a log is rejected on load.
    const auto bad_dir = fresh_dir("restart_bad");
    fs::create_directories(bad_dir + "/sessions");
    auto lines = read_file(dir + "/sessions/" + walker + ".jsonl");
    const auto first_line = lines.substr(0, lines.find('\n') + 1);
    std::ofstream(bad_dir + "/sessions/" + walker + ".jsonl")
        << first_line << json{{"type", "directions_offered"}, {"pano", "gp0"}, {"options", json::array()}, {"suggested", nullptr}, {"suggestion_reason", ""}}.dump() << "\n"
        << json{{"type", "moved"}, {"from", "gp0"}, {"to", "gp4"}, {"heading", 0.0}, {"status_after", "at_intersection"}}.dump() << "\n";
    CHECK(code_of([&] { make_service(bad_dir); }) == ErrorCode::Validation);
}

TEST_CASE("API token", "[service]") {
    auto cfg = fixture_config(fresh_dir("token"));
    cfg.api_token = "s3cret";
    Service svc(cfg, make_fixture_providers(cfg.fixture_dir), make_clock(cfg));
    HttpRequest r{"POST", "/v1/explore", {{"content-type", "application/json"}}, explore_body().dump()};
    CHECK(svc.handle(r).status == 401);
    r.headers["authorization"] = "Bearer s3cret";
    CHECK(svc.handle(r).status == 200);
    CHECK(svc.handle({"GET", "/v1/health", {}, ""}).status == 200);
}

TEST_CASE("HTTP server binding", "[service]") {
    const auto dir = fresh_dir("http");
    auto cfg = fixture_config(dir);
    cfg.listen_port = 0;
    fs::create_directories(dir + "/www");
    std::ofstream(dir + "/www/index.html") << "<h1>ok</h1>";
    cfg.static_dir = dir + "/www";
    Service svc(cfg, make_fixture_providers(cfg.fixture_dir), make_clock(cfg));
    std::atomic<bool> stop{false};
    std::atomic<int> port{0};
    std::thread t([&] { serve(svc, stop, [&](int p) { port = p; }); });
    for (int i = 0; i < 400 && port == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    REQUIRE(port != 0);
    httplib::Client http("127.0.0.1", port);
    auto h = http.Get("/v1/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    httplib::Headers headers{{"Idempotency-Key", "k1"}};
    auto a = http.Post("/v1/explore", headers, explore_body().dump(), "application/json");
    auto b = http.Post("/v1/explore", headers, explore_body().dump(), "application/json");
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->status == 200);
    CHECK(a->body == b->body);
    auto bad = http.Post("/v1/explore", explore_body().dump(), "text/plain");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    auto page = http.Get("/index.html");
    REQUIRE(page);
    CHECK(page->body == "<h1>ok</h1>");
    stop = true;
    t.join();
}

TEST_CASE("command line", "[cli]") {
    env_map = {{"SCENESCOUT_FIXTURE_DIR", SVA_FIXTURE_DIR}};
    const auto dir = fresh_dir("cli");
    std::string out, err;

    CHECK(run_cli({"preview", "--from", "47.6209,-122.3383", "--to", "Westlake & Mercer Stop", "--log", dir + "/pv.json"},
                  "", &out, &err) == cli::kOk);
    CHECK(out.find("| # | Location | Short | Medium | Long |") != std::string::npos);
    CHECK(out.find("RapidRide") != std::string::npos);
    CHECK(run_cli({"preview", "--from", "47.6209,-122.3383", "--to", "Westlake & Mercer Stop", "--format", "json"}, "",
                  &out, &err) == cli::kOk);
    CHECK(json::parse(out).at("segments").size() == 9);

    CHECK(run_cli({"explore", "--intent", bundle().at("explore").at("intent").get<std::string>(), "--at",
                   "40.7244,-73.9453", "--log", dir + "/ex.json"},
                  "\n9\n1\nq\n", &out, &err) == cli::kOk);
    const auto moved = out.find("Moving to gp5.");
    REQUIRE(moved != std::string::npos);
    CHECK(out.find("Not a valid choice.") < moved);
    CHECK(out.find("[gp5, heading North]", moved) != std::string::npos);
    CHECK(out.find("[suggested]") != std::string::npos);
    CHECK(explore::session_from_log(read_json_file(dir + "/ex.json")).status == explore::Status::Ended);

    env_map["SCENESCOUT_PROVIDER_MODE"] = "live";
    CHECK(run_cli({"preview", "--from", "1,2", "--to", "3,4"}, "", &out, &err) == cli::kUsage);
    CHECK(json::parse(err).at("error").at("code") == "config_error");
    env_map.erase("SCENESCOUT_PROVIDER_MODE");

    CHECK(run_cli({"explore", "--intent", "x", "--at", "nowhere"}, "", &out, &err) == cli::kFailure);
    CHECK(json::parse(err).at("error").at("code") == "invalid_argument");
    CHECK(run_cli({"frobnicate"}, "", &out, &err) == cli::kUsage);
    CHECK(run_cli({"preview", "--from", "1,2"}, "", &out, &err) == cli::kUsage);
    CHECK(run_cli({"--help"}, "", &out, &err) == cli::kOk);
    CHECK(run_cli({"-c", dir + "/missing.json", "preview", "--from", "1,2", "--to", "3,4"}, "", &out, &err) ==
          cli::kUsage);

    // eval pipeline
    const auto ann = dir + "/ann.jsonl";
    CHECK(run_cli({"eval", "sample", dir + "/pv.json", dir + "/ex.json", "--fraction", "0.2", "--seed", "7", "-o", ann},
                  "", &out, &err) == cli::kOk);
    const auto first = json::parse(out);
    CHECK(first.at("count").get<std::size_t>() > 0);
    CHECK(run_cli({"eval", "sample", dir + "/pv.json", dir + "/ex.json", "--fraction", "0.2", "--seed", "7", "-o", ann},
                  "", &out, &err) == cli::kFailure);
    CHECK(run_cli({"eval", "sample", dir + "/pv.json", dir + "/ex.json", "--fraction", "0.2", "--seed", "7", "-o", ann, "--force"}, "", &out, &err) ==
          cli::kOk);
    CHECK(json::parse(out) == first);
    CHECK(run_cli({"eval", "sample", dir + "/pv.json", "--fraction", "0", "--seed", "7"}, "", &out, &err) == cli::kFailure);

    std::string script;
    for (int i = 0; i < 400; ++i) script += "Subjective\nCorrect\nLikely\nAddsNew\nFully\n";
    CHECK(run_cli({"eval", "annotate", ann}, script, &out, &err) == cli::kOk);
    CHECK(out.find("All tasks annotated.") != std::string::npos);
    CHECK(run_cli({"eval", "report", ann, "--format", "json"}, "", &out, &err) == cli::kOk);
    const auto report = json::parse(out);
    CHECK(report.at("groups")[0].at("panels").at("information_type").at("rows")[1].at("percent") == 100.0);
    CHECK(run_cli({"eval", "report", ann}, "", &out, &err) == cli::kOk);
    CHECK(out.find("# Evaluation report") != std::string::npos);
    CHECK(run_cli({"eval", "diff", ann, ann}, "", &out, &err) == cli::kOk);
    CHECK(json::parse(out).at("count") == 0);
    CHECK(run_cli({"eval", "report", dir + "/nope.jsonl"}, "", &out, &err) == cli::kFailure);
    env_map.clear();
}
