#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sva/exploration.hpp"
#include "sva/json.hpp"
#include "sva/providers.hpp"
#include "sva/route_preview.hpp"

namespace sva::service {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kFixtureTime = "2024-01-01T00:00:00Z";

struct ServiceConfig {
    std::string provider_mode = "fixture";  // fixture | live
    std::string fixture_dir = "fixtures/demo";
    std::string maps_base_url;
    std::string maps_api_key;
    std::string mllm_base_url;
    std::string mllm_api_key;
    std::string model;
    std::size_t max_images = 10;

    double sampling_min_m = 30.0;
    double sampling_max_m = 40.0;
    double snap_radius_m = 25.0;
    double midblock_fov_deg = 60.0;
    double intersection_fov_deg = 90.0;
    double destination_fov_deg = 90.0;
    double block_fov_deg = 60.0;
    double direction_fov_deg = 90.0;
    std::size_t step_budget = 200;
    std::size_t cache_budget_bytes = 64u << 20;

    double rate_limit_capacity = 5.0;
    double rate_limit_per_second = 2.0;
    long call_timeout_ms = 60000;

    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::string data_dir = "data";
    std::string api_token;
    std::string static_dir;

    // Throws Config naming the offending key.
    void validate() const;
    preview::PreviewConfig preview_config() const;
    explore::ExploreConfig explore_config() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

json to_json(const ServiceConfig& c);
// Unknown keys and wrong types raise Config.
ServiceConfig config_from_json(const json& j, ServiceConfig base = {});
// SCENESCOUT_<KEY> overrides, e.g. SCENESCOUT_PROVIDER_MODE=live.
void apply_env_overrides(ServiceConfig& c, const EnvLookup& env);
// Defaults, then the file (when given), then the environment; validated.
ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env = process_env);

// Builds the provider stack: fixture or live clients, an image cache and a
// shared token bucket in front of the model.
ProviderSet make_providers(const ServiceConfig& c);
// Fixed timestamp in fixture mode, wall-clock UTC otherwise.
std::function<std::string()> make_clock(const ServiceConfig& c);
std::string utc_now_iso8601();

// Event-sourced exploration sessions under <data_dir>/sessions, one JSON
// event per line. Loading replays each log and checks every transition.
class SessionStore {
public:
    explicit SessionStore(std::string dir);

    // Loads every *.jsonl file; returns the number of sessions recovered.
    std::size_t load();
    // Appends the events in `s.history` beyond `persisted_events`.
    void persist(const explore::Session& s, std::size_t persisted_events);
    static explore::Session read_log(const std::string& path);

    std::optional<explore::Session> get(const std::string& id) const;
    void put(const explore::Session& s);
    std::vector<std::string> ids() const;
    std::string path_for(const std::string& id) const;

private:
    std::string dir_;
    mutable std::mutex mu_;
    std::map<std::string, explore::Session> sessions_;
};

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> headers;  // lower-case names
    std::string body;
};

struct HttpReply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

// Maps a library error to its HTTP status.
int http_status_for(const Error& e);
json error_body(const Error& e);

class Service {
public:
    Service(ServiceConfig cfg, ProviderSet providers, std::function<std::string()> clock);
    explicit Service(ServiceConfig cfg);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    HttpReply handle(const HttpRequest& req);

    // Blocks until every background preview job has finished.
    void wait_for_jobs();
    const ServiceConfig& config() const { return cfg_; }
    std::size_t recovered_sessions() const { return recovered_; }

private:
    struct PreviewJob;

    HttpReply dispatch(const HttpRequest& req);
    HttpReply create_preview(const json& body);
    HttpReply get_preview(const std::string& id, bool markdown);
    HttpReply create_session(const json& body);
    HttpReply add_keywords(const std::string& id, const json& body);
    HttpReply step(const std::string& id);
    HttpReply directions(const std::string& id);
    HttpReply choose(const std::string& id, const json& body);
    HttpReply end(const std::string& id);
    HttpReply state(const std::string& id);
    HttpReply health();

    // Runs `op` on a copy of the session under its lock, bounded by the call
    // timeout, then persists and publishes the new events.
    json mutate(const std::string& id, const std::function<json(explore::Session&)>& op);
    std::shared_ptr<std::mutex> session_lock(const std::string& id);

    void start_job(const std::shared_ptr<PreviewJob>& job);
    void save_job(const PreviewJob& job);
    void load_jobs();
    void write_usage_log(const std::string& id, const json& doc);

    std::optional<HttpReply> idempotent_lookup(const std::string& key);
    void idempotent_store(const std::string& key, const HttpReply& r);
    void load_idempotency();

    std::string new_id(const char* prefix);

    ServiceConfig cfg_;
    ProviderSet providers_;
    std::function<std::string()> clock_;
    explore::Explorer explorer_;
    SessionStore store_;
    std::size_t recovered_ = 0;

    std::mutex locks_mu_;
    std::map<std::string, std::shared_ptr<std::mutex>> session_locks_;
    std::map<std::string, std::shared_ptr<std::mutex>> key_locks_;

    std::mutex jobs_mu_;
    std::map<std::string, std::shared_ptr<PreviewJob>> jobs_;
    std::vector<std::thread> workers_;

    std::mutex idem_mu_;
    std::map<std::string, HttpReply> idempotency_;

    std::mutex rng_mu_;
    std::uint64_t id_state_;
};

// Serves `svc` over HTTP until `stop` becomes true (polled) or the server
// fails to bind. Returns false when binding fails.
bool serve(Service& svc, const std::atomic<bool>& stop, const std::function<void(int port)>& on_listening = {});

}  // namespace sva::service
