#include "sva/service.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include <httplib.h>

#include "sva/common.hpp"
#include "sva/text.hpp"

namespace sva::service {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_request(const std::string& message, const std::string& detail = {}) {
    fail(ErrorCode::Validation, message, detail);
}

HttpReply json_reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

// Session view without the event history.
json summary(const explore::Session& s) {
    auto j = explore::to_json(s);
    j.erase("events");
    j["session_id"] = s.id;
    return j;
}

bool safe_id(const std::string& id) {
    return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    for (auto& part : text::split(path, '/')) {
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

std::string sessions_dir(const ServiceConfig& c) {
    c.validate();
    return (fs::path(c.data_dir) / "sessions").string();
}

std::uint64_t splitmix(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

// ---------------------------------------------------------------- store

SessionStore::SessionStore(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::string SessionStore::path_for(const std::string& id) const { return (fs::path(dir_) / (id + ".jsonl")).string(); }

explore::Session SessionStore::read_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::NotFound, "cannot open session log " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!text::trim(line).empty()) lines.push_back(line);
    }
    explore::Session s;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const json j = json::parse(lines[i], nullptr, false);
        if (j.is_discarded()) {
            // A torn final write from a crash; everything before it stands.
            if (i + 1 == lines.size() && i > 0) break;
            fail(ErrorCode::Validation, path + ":" + std::to_string(i + 1) + ": invalid JSON");
        }
        const auto ev = explore::event_from_json(j);
        if (i == 0) {
            if (!std::holds_alternative<explore::SessionStarted>(ev)) {
                fail(ErrorCode::Validation, path + ": log must begin with session_started");
            }
            explore::apply(s, ev);
            continue;
        }
        const auto before = s.status;
        explore::apply(s, ev);
        if (!explore::transition_allowed(before, s.status)) {
            fail(ErrorCode::Validation, path + ":" + std::to_string(i + 1) + ": illegal transition " +
                                            std::string(explore::to_string(before)) + " -> " +
                                            std::string(explore::to_string(s.status)));
        }
    }
    if (s.history.empty()) fail(ErrorCode::Validation, path + ": empty session log");
    return s;
}

std::size_t SessionStore::load() {
    std::map<std::string, explore::Session> loaded;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto s = read_log(f.string());
        if (s.id != f.stem().string()) fail(ErrorCode::Validation, f.string() + ": session id does not match file name");
        loaded[s.id] = std::move(s);
    }
    std::lock_guard lk(mu_);
    sessions_ = std::move(loaded);
    return sessions_.size();
}

void SessionStore::persist(const explore::Session& s, std::size_t persisted_events) {
    if (persisted_events < s.history.size()) {
        std::ofstream out(path_for(s.id), std::ios::app);
        for (std::size_t i = persisted_events; i < s.history.size(); ++i) {
            out << explore::to_json(s.history[i]).dump() << "\n";
        }
        out.flush();
        if (!out) fail(ErrorCode::Internal, "cannot append to session log " + path_for(s.id));
    }
    put(s);
}

std::optional<explore::Session> SessionStore::get(const std::string& id) const {
    std::lock_guard lk(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

void SessionStore::put(const explore::Session& s) {
    std::lock_guard lk(mu_);
    sessions_[s.id] = s;
}

std::vector<std::string> SessionStore::ids() const {
    std::lock_guard lk(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

// ---------------------------------------------------------------- errors

int http_status_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::OutOfRange:
        case ErrorCode::DegenerateBearing:
        case ErrorCode::Validation:
        case ErrorCode::InvalidChoice:
        case ErrorCode::NoCoverage:
        case ErrorCode::RouteUnavailable: return 400;
        case ErrorCode::NotFound: return 404;
        case ErrorCode::InvalidState: return 409;
        case ErrorCode::Provider:
        case ErrorCode::ScriptedMiss:
        case ErrorCode::Parse:
        case ErrorCode::Timeout: return 502;
        case ErrorCode::Config:
        case ErrorCode::Internal: return 500;
    }
    return 500;
}

json error_body(const Error& e) {
    json j{{"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}};
    if (http_status_for(e) == 502) {
        j["retryable"] = e.retryable();
        if (e.retry_after_ms() > 0) j["retry_after_ms"] = e.retry_after_ms();
    }
    return j;
}

// ---------------------------------------------------------------- service

struct Service::PreviewJob {
    std::string id;
    json request_json;
    preview::PreviewRequest request;
    std::mutex mu;
    std::string status = "pending";
    std::vector<preview::PreviewSegment> segments;
    json document;  // preview.v1 once complete
    std::string markdown;
    json error;
};

Service::Service(ServiceConfig cfg) : Service(cfg, make_providers(cfg), make_clock(cfg)) {}

Service::Service(ServiceConfig cfg, ProviderSet providers, std::function<std::string()> clock)
    : cfg_(std::move(cfg)),
      providers_(std::move(providers)),
      clock_(std::move(clock)),
      explorer_(providers_, cfg_.explore_config(), clock_),
      store_(sessions_dir(cfg_)) {
    for (const char* sub : {"previews", "logs", "cache"}) fs::create_directories(fs::path(cfg_.data_dir) / sub);
    std::random_device rd;
    id_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
                static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
    recovered_ = store_.load();
    load_idempotency();
    load_jobs();
}

Service::~Service() { wait_for_jobs(); }

void Service::wait_for_jobs() {
    for (;;) {
        std::vector<std::thread> pending;
        {
            std::lock_guard lk(jobs_mu_);
            pending.swap(workers_);
        }
        if (pending.empty()) return;
        for (auto& t : pending) t.join();
    }
}

std::string Service::new_id(const char* prefix) {
    std::lock_guard lk(rng_mu_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%012llx", prefix,
                  static_cast<unsigned long long>(splitmix(id_state_) & 0xffffffffffffULL));
    return buf;
}

HttpReply Service::handle(const HttpRequest& req) {
    if (!cfg_.api_token.empty() && req.path != "/v1/health") {
        const auto it = req.headers.find("authorization");
        if (it == req.headers.end() || it->second != "Bearer " + cfg_.api_token) {
            return json_reply(401, {{"code", "Unauthorized"}, {"message", "missing or wrong API token"}, {"detail", ""}});
        }
    }
    const auto key_it = req.headers.find("idempotency-key");
    if (req.method != "POST" || key_it == req.headers.end() || key_it->second.empty()) return dispatch(req);

    const auto key = req.path + "\n" + key_it->second;
    std::shared_ptr<std::mutex> key_lock;
    {
        std::lock_guard lk(locks_mu_);
        auto& slot = key_locks_[key];
        if (!slot) slot = std::make_shared<std::mutex>();
        key_lock = slot;
    }
    std::lock_guard lk(*key_lock);
    if (auto cached = idempotent_lookup(key)) return *cached;
    auto reply = dispatch(req);
    // Server-side failures stay retryable under the same key.
    if (reply.status < 500) idempotent_store(key, reply);
    return reply;
}

HttpReply Service::dispatch(const HttpRequest& req) {
    try {
        const auto parts = split_path(req.path);
        const bool get = req.method == "GET";
        const bool post = req.method == "POST";
        json body = json::object();
        if (post && !text::trim(req.body).empty()) {
            const auto ct = req.headers.count("content-type") ? req.headers.at("content-type") : std::string{};
            if (ct.find("application/json") == std::string::npos) {
                bad_request("request body must be application/json", "content-type: " + ct);
            }
            body = json::parse(req.body, nullptr, false);
            if (body.is_discarded()) bad_request("request body is not valid JSON");
            if (!body.is_object()) bad_request("request body must be a JSON object");
        }
        if (parts.size() < 2 || parts[0] != "v1") fail(ErrorCode::NotFound, "no such endpoint: " + req.path);
        const auto& res = parts[1];
        if (res == "health" && parts.size() == 2 && get) return health();
        if (res == "preview") {
            if (parts.size() == 2 && post) return create_preview(body);
            if (parts.size() == 3 && get) return get_preview(parts[2], false);
            if (parts.size() == 4 && get && parts[3] == "markdown") return get_preview(parts[2], true);
        }
        if (res == "explore") {
            if (parts.size() == 2 && post) return create_session(body);
            if (parts.size() == 4) {
                const auto& id = parts[2];
                const auto& op = parts[3];
                if (post && op == "keywords") return add_keywords(id, body);
                if (post && op == "step") return step(id);
                if (get && op == "directions") return directions(id);
                if (post && op == "choose") return choose(id, body);
                if (post && op == "end") return end(id);
                if (get && op == "state") return state(id);
            }
        }
        fail(ErrorCode::NotFound, "no such endpoint: " + req.method + " " + req.path);
    } catch (const Error& e) {
        return json_reply(http_status_for(e), error_body(e));
    } catch (const json::exception& e) {
        return json_reply(400, error_body(Error(ErrorCode::Validation, "malformed request", e.what())));
    } catch (const std::exception& e) {
        return json_reply(500, error_body(Error(ErrorCode::Internal, "internal error", e.what())));
    }
}

HttpReply Service::health() {
    return json_reply(200, {{"status", "ok"},
                            {"version", std::string(kVersion)},
                            {"provider_mode", cfg_.provider_mode},
                            {"sessions", store_.ids().size()}});
}

// ---------------------------------------------------------------- previews

HttpReply Service::create_preview(const json& body) {
    auto job = std::make_shared<PreviewJob>();
    job->request = preview::request_from_json(body);
    job->request_json = preview::to_json(job->request);
    job->id = new_id("p-");
    {
        std::lock_guard lk(jobs_mu_);
        jobs_[job->id] = job;
    }
    save_job(*job);
    start_job(job);
    return json_reply(202, {{"preview_id", job->id}, {"status", "pending"}});
}

void Service::start_job(const std::shared_ptr<PreviewJob>& job) {
    std::thread t([this, job] {
        try {
            preview::RoutePreviewer p(providers_, cfg_.preview_config(), clock_);
            auto result = p.generate(job->request, job->id, [&](const preview::PreviewSegment& seg) {
                std::lock_guard lk(job->mu);
                job->segments.push_back(seg);
                job->status = "partial";
            });
            auto doc = preview::to_json(result);
            write_usage_log(job->id, doc);
            std::lock_guard lk(job->mu);
            job->document = std::move(doc);
            job->markdown = preview::to_markdown(result);
            job->status = "complete";
        } catch (const Error& e) {
            std::lock_guard lk(job->mu);
            job->status = "failed";
            job->error = error_body(e);
        } catch (const std::exception& e) {
            std::lock_guard lk(job->mu);
            job->status = "failed";
            job->error = error_body(Error(ErrorCode::Internal, "preview generation failed", e.what()));
        }
        try {
            save_job(*job);
        } catch (const std::exception&) {
            // The job stays queryable in memory.
        }
    });
    std::lock_guard lk(jobs_mu_);
    workers_.push_back(std::move(t));
}

void Service::save_job(const PreviewJob& job) {
    json j;
    {
        auto& mu = const_cast<std::mutex&>(job.mu);
        std::lock_guard lk(mu);
        const bool done = job.status == "complete" || job.status == "failed";
        j = {{"id", job.id},
             {"status", done ? job.status : std::string("pending")},
             {"request", job.request_json},
             {"error", job.error},
             {"result", job.document},
             {"markdown", job.markdown}};
    }
    write_file_atomic((fs::path(cfg_.data_dir) / "previews" / (job.id + ".json")).string(), j.dump());
}

void Service::load_jobs() {
    const auto dir = fs::path(cfg_.data_dir) / "previews";
    std::vector<std::shared_ptr<PreviewJob>> rerun;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        const auto j = read_json_file(entry.path().string());
        auto job = std::make_shared<PreviewJob>();
        job->id = j.at("id").get<std::string>();
        job->request_json = j.at("request");
        job->request = preview::request_from_json(job->request_json);
        job->status = j.at("status").get<std::string>();
        job->error = j.value("error", json(nullptr));
        job->document = j.value("result", json(nullptr));
        job->markdown = j.value("markdown", std::string{});
        jobs_[job->id] = job;
        if (job->status == "pending") rerun.push_back(job);
    }
    // Jobs interrupted by a restart are generated again from their request.
    for (const auto& job : rerun) start_job(job);
}

HttpReply Service::get_preview(const std::string& id, bool markdown) {
    std::shared_ptr<PreviewJob> job;
    {
        std::lock_guard lk(jobs_mu_);
        const auto it = jobs_.find(id);
        if (it == jobs_.end()) fail(ErrorCode::NotFound, "unknown preview: " + id);
        job = it->second;
    }
    std::lock_guard lk(job->mu);
    if (job->status == "complete") {
        if (markdown) return {200, job->markdown, "text/markdown; charset=utf-8"};
        auto doc = job->document;
        doc["status"] = "complete";
        return json_reply(200, doc);
    }
    if (markdown) fail(ErrorCode::InvalidState, "preview is " + job->status);
    if (job->status == "failed") {
        return json_reply(200, {{"schema", std::string(preview::kSchema)},
                                {"id", id},
                                {"status", "failed"},
                                {"request", job->request_json},
                                {"error", job->error}});
    }
    json segs = json::array();
    for (const auto& seg : job->segments) segs.push_back(preview::to_json(seg));
    json doc{{"schema", std::string(preview::kSchema)}, {"id", id}, {"request", job->request_json}, {"segments", segs}};
    doc["status"] = job->status;
    return json_reply(200, doc);
}

void Service::write_usage_log(const std::string& id, const json& doc) {
    write_file_atomic((fs::path(cfg_.data_dir) / "logs" / (id + ".json")).string(), doc.dump(2) + "\n");
}

// ---------------------------------------------------------------- sessions

std::shared_ptr<std::mutex> Service::session_lock(const std::string& id) {
    std::lock_guard lk(locks_mu_);
    auto& slot = session_locks_[id];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
}

namespace {

// Runs `fn` on its own thread and waits at most `timeout`. A late call keeps
// running detached from the caller and its result is dropped.
json run_bounded(std::function<json()> fn, std::chrono::milliseconds timeout, std::vector<std::thread>& stragglers,
                 std::mutex& stragglers_mu) {
    auto task = std::make_shared<std::packaged_task<json()>>(std::move(fn));
    auto fut = task->get_future();
    std::thread t([task] { (*task)(); });
    if (fut.wait_for(timeout) == std::future_status::ready) {
        t.join();
        return fut.get();
    }
    {
        std::lock_guard lk(stragglers_mu);
        stragglers.push_back(std::move(t));
    }
    throw Error(ErrorCode::Timeout, "model call exceeded the per-call timeout",
                std::to_string(timeout.count()) + " ms")
        .with_retry(true);
}

}  // namespace

json Service::mutate(const std::string& id, const std::function<json(explore::Session&)>& op) {
    if (!safe_id(id)) fail(ErrorCode::NotFound, "unknown session: " + id);
    auto lock = session_lock(id);
    std::lock_guard lk(*lock);
    const auto current = store_.get(id);
    if (!current) fail(ErrorCode::NotFound, "unknown session: " + id);
    const auto before = current->history.size();
    auto work = std::make_shared<explore::Session>(*current);
    auto reply = run_bounded([work, op] { return op(*work); }, std::chrono::milliseconds(cfg_.call_timeout_ms),
                             workers_, jobs_mu_);
    if (work->history.size() != before) {
        store_.persist(*work, before);
        write_usage_log(id, explore::to_json(*work));
    }
    return reply;
}

HttpReply Service::create_session(const json& body) {
    if (!body.contains("intent") || !body.at("intent").is_string()) bad_request("intent must be a string");
    if (!body.contains("start")) bad_request("start is required");
    GeoCoordinate start;
    try {
        start = coordinate_from_json(body.at("start"));
    } catch (const Error& e) {
        bad_request("invalid start coordinate", e.what());
    } catch (const json::exception& e) {
        bad_request("invalid start coordinate", e.what());
    }
    const auto intent = body.at("intent").get<std::string>();
    const auto id = new_id("s-");
    auto lock = session_lock(id);
    std::lock_guard lk(*lock);
    auto created = std::make_shared<explore::Session>();
    run_bounded(
        [this, created, id, intent, start] {
            *created = explorer_.start_session(id, intent, start);
            return json();
        },
        std::chrono::milliseconds(cfg_.call_timeout_ms), workers_, jobs_mu_);
    store_.persist(*created, 0);
    write_usage_log(id, explore::to_json(*created));
    return json_reply(200, {{"session_id", id},
                            {"default_keywords", created->keywords},
                            {"place_type", created->place_type},
                            {"status", std::string(explore::to_string(created->status))},
                            {"position", created->pano},
                            {"heading", created->heading.value()}});
}

HttpReply Service::add_keywords(const std::string& id, const json& body) {
    if (!body.contains("additions") || !body.at("additions").is_array()) bad_request("additions must be an array");
    std::vector<std::string> additions;
    for (const auto& a : body.at("additions")) {
        if (!a.is_string()) bad_request("additions must be strings");
        additions.push_back(a.get<std::string>());
    }
    return json_reply(200, mutate(id, [this, additions](explore::Session& s) {
                          explorer_.add_keywords(s, additions);
                          return json{{"keywords", s.keywords}, {"status", std::string(explore::to_string(s.status))}};
                      }));
}

HttpReply Service::step(const std::string& id) {
    return json_reply(200, mutate(id, [this](explore::Session& s) {
        const auto before = s.history.size();
        explorer_.describe_block(s);
        explorer_.step_forward(s);
        json block = nullptr;
        json block_error = nullptr;
        json moved = nullptr;
        bool dead_end = false;
        std::string ended;
        for (std::size_t i = before; i < s.history.size(); ++i) {
            const auto& ev = s.history[i];
            if (const auto* b = std::get_if<explore::BlockDescribed>(&ev)) {
                block = {{"pano", b->pano},
                         {"heading", b->heading.value()},
                         {"view_ids", b->view_ids},
                         {"places", b->places},
                         {"descriptions",
                          {{"short", b->triple.short_text}, {"medium", b->triple.medium_text}, {"long", b->triple.long_text}}}};
            } else if (const auto* f = std::get_if<explore::BlockFailed>(&ev)) {
                block_error = f->error;
            } else if (const auto* m = std::get_if<explore::Moved>(&ev)) {
                moved = {{"from", m->from}, {"to", m->to}, {"heading", m->heading.value()}};
            } else if (std::holds_alternative<explore::DeadEnd>(ev)) {
                dead_end = true;
            } else if (const auto* e = std::get_if<explore::Ended>(&ev)) {
                ended = e->reason;
            }
        }
        json out{{"block", block},
                 {"block_error", block_error},
                 {"moved", moved},
                 {"dead_end", dead_end},
                 {"intersection", s.status == explore::Status::AtIntersection},
                 {"status", std::string(explore::to_string(s.status))},
                 {"position", s.pano},
                 {"heading", s.heading.value()},
                 {"cardinal", std::string(geo::to_string(geo::cardinal_of(s.heading)))}};
        if (!ended.empty()) out["ended_reason"] = ended;
        return out;
    }));
}

HttpReply Service::directions(const std::string& id) {
    return json_reply(200, mutate(id, [this](explore::Session& s) {
        if (s.status != explore::Status::AtIntersection) {
            fail(ErrorCode::InvalidState,
                 "directions are only offered at an intersection (status " + std::string(explore::to_string(s.status)) + ")");
        }
        if (s.offered.empty()) explorer_.offer_directions(s);
        std::string reason;
        for (auto it = s.history.rbegin(); it != s.history.rend(); ++it) {
            if (const auto* d = std::get_if<explore::DirectionsOffered>(&*it)) {
                reason = d->suggestion_reason;
                break;
            }
        }
        json options = json::array();
        for (const auto& o : s.offered) options.push_back(explore::to_json(o));
        return json{{"position", s.pano},
                    {"options", options},
                    {"suggested", s.suggested ? json(*s.suggested) : json(nullptr)},
                    {"suggestion_reason", reason}};
    }));
}

HttpReply Service::choose(const std::string& id, const json& body) {
    if (!body.contains("idx") || !body.at("idx").is_number_integer()) bad_request("idx must be an integer");
    const auto idx = body.at("idx").get<long long>();
    if (idx < std::numeric_limits<int>::min() || idx > std::numeric_limits<int>::max()) fail(ErrorCode::InvalidArgument, "direction index out of range");
    return json_reply(200, mutate(id, [this, idx](explore::Session& s) {
                          explorer_.choose_direction(s, static_cast<int>(idx));
                          return summary(s);
                      }));
}

HttpReply Service::end(const std::string& id) {
    return json_reply(200, mutate(id, [this](explore::Session& s) {
                          explorer_.end_session(s, "user");
                          return summary(s);
                      }));
}

HttpReply Service::state(const std::string& id) {
    const auto s = safe_id(id) ? store_.get(id) : std::nullopt;
    if (!s) fail(ErrorCode::NotFound, "unknown session: " + id);
    return json_reply(200, explore::to_json(*s));
}

// ---------------------------------------------------------------- idempotency

std::optional<HttpReply> Service::idempotent_lookup(const std::string& key) {
    std::lock_guard lk(idem_mu_);
    const auto it = idempotency_.find(key);
    if (it == idempotency_.end()) return std::nullopt;
    return it->second;
}

void Service::idempotent_store(const std::string& key, const HttpReply& r) {
    std::lock_guard lk(idem_mu_);
    idempotency_[key] = r;
    std::ofstream out(fs::path(cfg_.data_dir) / "idempotency.jsonl", std::ios::app);
    out << json{{"key", key}, {"status", r.status}, {"body", r.body}, {"content_type", r.content_type}}.dump() << "\n";
}

void Service::load_idempotency() {
    std::ifstream in(fs::path(cfg_.data_dir) / "idempotency.jsonl");
    for (std::string line; std::getline(in, line);) {
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) continue;  // torn last line
        idempotency_[j.at("key").get<std::string>()] = {j.at("status").get<int>(), j.at("body").get<std::string>(),
                                                         j.at("content_type").get<std::string>()};
    }
}

// ---------------------------------------------------------------- http

bool serve(Service& svc, const std::atomic<bool>& stop, const std::function<void(int)>& on_listening) {
    httplib::Server server;
    const auto& cfg = svc.config();
    if (!cfg.static_dir.empty() && !server.set_mount_point("/", cfg.static_dir)) {
        fail(ErrorCode::Config, "static_dir does not exist: " + cfg.static_dir);
    }
    auto handler = [&svc](const httplib::Request& req, httplib::Response& res) {
        HttpRequest r;
        r.method = req.method;
        r.path = req.path;
        r.body = req.body;
        for (const auto& [k, v] : req.headers) r.headers[text::to_lower(k)] = v;
        const auto reply = svc.handle(r);
        res.status = reply.status;
        res.set_content(reply.body, reply.content_type.c_str());
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);

    int port = cfg.listen_port;
    if (port == 0) {
        port = server.bind_to_any_port(cfg.listen_host.c_str());
        if (port < 0) return false;
    } else if (!server.bind_to_port(cfg.listen_host.c_str(), port)) {
        return false;
    }
    std::thread loop([&server] { server.listen_after_bind(); });
    for (int i = 0; i < 1000 && !server.is_running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    if (on_listening) on_listening(port);
    while (!stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    loop.join();
    return true;
}

}  // namespace sva::service
