#include <cctype>
#include <cstdlib>
#include <ctime>

#include "sva/common.hpp"
#include "sva/fixture_providers.hpp"
#include "sva/live_providers.hpp"
#include "sva/provider_support.hpp"
#include "sva/service.hpp"

namespace sva::service {

namespace {

// Every documented key, in the order they are written back out.
template <class F>
void for_each_field(ServiceConfig& c, F&& f) {
    f("provider_mode", c.provider_mode);
    f("fixture_dir", c.fixture_dir);
    f("maps_base_url", c.maps_base_url);
    f("maps_api_key", c.maps_api_key);
    f("mllm_base_url", c.mllm_base_url);
    f("mllm_api_key", c.mllm_api_key);
    f("model", c.model);
    f("max_images", c.max_images);
    f("sampling_min_m", c.sampling_min_m);
    f("sampling_max_m", c.sampling_max_m);
    f("snap_radius_m", c.snap_radius_m);
    f("midblock_fov_deg", c.midblock_fov_deg);
    f("intersection_fov_deg", c.intersection_fov_deg);
    f("destination_fov_deg", c.destination_fov_deg);
    f("block_fov_deg", c.block_fov_deg);
    f("direction_fov_deg", c.direction_fov_deg);
    f("step_budget", c.step_budget);
    f("cache_budget_bytes", c.cache_budget_bytes);
    f("rate_limit_capacity", c.rate_limit_capacity);
    f("rate_limit_per_second", c.rate_limit_per_second);
    f("call_timeout_ms", c.call_timeout_ms);
    f("listen_host", c.listen_host);
    f("listen_port", c.listen_port);
    f("data_dir", c.data_dir);
    f("api_token", c.api_token);
    f("static_dir", c.static_dir);
}

[[noreturn]] void config_error(const std::string& key, const std::string& message) {
    fail(ErrorCode::Config, message, key);
}

std::string env_name(const std::string& key) {
    std::string out = "SCENESCOUT_";
    for (char ch : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
}

void ServiceConfig::validate() const {
    if (provider_mode != "fixture" && provider_mode != "live") {
        config_error("provider_mode", "provider_mode must be fixture or live");
    }
    if (provider_mode == "fixture" && fixture_dir.empty()) config_error("fixture_dir", "fixture mode needs fixture_dir");
    if (provider_mode == "live") {
        const std::pair<const char*, const std::string*> required[] = {{"maps_base_url", &maps_base_url},
                                                                      {"maps_api_key", &maps_api_key},
                                                                      {"mllm_base_url", &mllm_base_url},
                                                                      {"mllm_api_key", &mllm_api_key},
                                                                      {"model", &model}};
        for (const auto& [key, value] : required) {
            if (value->empty()) {
                config_error(key, std::string("live mode requires ") + key + " (or " + env_name(key) + ")");
            }
        }
    }
    if (max_images == 0) config_error("max_images", "max_images must be >= 1");
    if (!(snap_radius_m > 0 && snap_radius_m <= 500)) config_error("snap_radius_m", "snap_radius_m must be in (0, 500]");
    if (cache_budget_bytes == 0) config_error("cache_budget_bytes", "cache_budget_bytes must be > 0");
    if (!(rate_limit_capacity >= 1)) config_error("rate_limit_capacity", "rate_limit_capacity must be >= 1");
    if (!(rate_limit_per_second > 0)) config_error("rate_limit_per_second", "rate_limit_per_second must be > 0");
    if (call_timeout_ms <= 0) config_error("call_timeout_ms", "call_timeout_ms must be > 0");
    if (listen_port < 0 || listen_port > 65535) config_error("listen_port", "listen_port must be in [0, 65535]");
    if (data_dir.empty()) config_error("data_dir", "data_dir must not be empty");
    try {
        preview_config().validate();
        explore_config().validate();
    } catch (const Error& e) {
        fail(ErrorCode::Config, std::string("invalid setting: ") + e.what());
    }
}

preview::PreviewConfig ServiceConfig::preview_config() const {
    preview::PreviewConfig p;
    p.sampling.min_interval_m = sampling_min_m;
    p.sampling.max_interval_m = sampling_max_m;
    p.midblock_fov_deg = midblock_fov_deg;
    p.intersection_fov_deg = intersection_fov_deg;
    p.destination_fov_deg = destination_fov_deg;
    return p;
}

explore::ExploreConfig ServiceConfig::explore_config() const {
    explore::ExploreConfig e;
    e.block_fov_deg = block_fov_deg;
    e.direction_fov_deg = direction_fov_deg;
    e.step_budget = step_budget;
    return e;
}

json to_json(const ServiceConfig& c) {
    json j = json::object();
    auto copy = c;
    for_each_field(copy, [&](const char* key, auto& v) { j[key] = v; });
    return j;
}

ServiceConfig config_from_json(const json& j, ServiceConfig base) {
    if (!j.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
    std::set<std::string> known;
    for_each_field(base, [&](const char* key, auto& v) {
        known.insert(key);
        const auto it = j.find(key);
        if (it == j.end()) return;
        using T = std::decay_t<decltype(v)>;
        const bool ok = std::is_same_v<T, std::string> ? it->is_string()
                        : std::is_floating_point_v<T>  ? it->is_number()
                                                       : it->is_number_integer() && (!std::is_unsigned_v<T> || it->get<long long>() >= 0);
        if (!ok) config_error(key, std::string("wrong type for config key ") + key);
        v = it->get<T>();
    });
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) config_error(key, "unknown config key: " + key);
    }
    return base;
}

void apply_env_overrides(ServiceConfig& c, const EnvLookup& env) {
    json j = to_json(c);
    bool changed = false;
    for (auto& [key, value] : j.items()) {
        const auto raw = env(env_name(key));
        if (!raw) continue;
        changed = true;
        if (value.is_string()) {
            value = *raw;
            continue;
        }
        try {
            std::size_t used = 0;
            if (value.is_number_float()) {
                value = std::stod(*raw, &used);
            } else {
                value = std::stoll(*raw, &used);
            }
            if (used != raw->size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            config_error(key, env_name(key) + " is not a number: " + *raw);
        }
    }
    if (changed) c = config_from_json(j, c);
}

ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env) {
    ServiceConfig c;
    if (path) {
        json j;
        try {
            j = json::parse(read_file(*path));
        } catch (const json::exception& e) {
            fail(ErrorCode::Config, "config file is not valid JSON: " + *path, e.what());
        } catch (const Error& e) {
            fail(ErrorCode::Config, "cannot read config file: " + *path, e.what());
        }
        c = config_from_json(j, c);
    }
    if (env) apply_env_overrides(c, env);
    c.validate();
    return c;
}

ProviderSet make_providers(const ServiceConfig& c) {
    c.validate();
    ProviderSet set;
    if (c.provider_mode == "fixture") {
        set = make_fixture_providers(c.fixture_dir, c.snap_radius_m, c.max_images);
    } else {
        auto maps = std::make_shared<LiveMapsClient>(c.maps_base_url, c.maps_api_key, c.snap_radius_m, RetryPolicy{});
        auto mllm = std::make_shared<LiveMllmClient>(c.mllm_base_url, c.mllm_api_key, c.model, RetryPolicy{},
                                                     c.max_images, std::chrono::milliseconds(c.call_timeout_ms));
        auto bucket = std::make_shared<TokenBucket>(c.rate_limit_capacity, c.rate_limit_per_second);
        set.mode = "live";
        set.routes = maps;
        set.panoramas = maps;
        set.places = maps;
        set.mllm = std::make_shared<RateLimitedMllm>(mllm, bucket);
    }
    set.panoramas = std::make_shared<CachingPanoramaProvider>(set.panoramas, c.cache_budget_bytes);
    return set;
}

std::string utc_now_iso8601() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::function<std::string()> make_clock(const ServiceConfig& c) {
    if (c.provider_mode == "fixture") return [] { return std::string(kFixtureTime); };
    return utc_now_iso8601;
}

}  // namespace sva::service
