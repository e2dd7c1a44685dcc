#include "sva/live_providers.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "sva/common.hpp"
#include "sva/json.hpp"

namespace sva {

std::chrono::milliseconds RetryPolicy::backoff(int attempt, std::chrono::milliseconds hint,
                                               std::mt19937_64& rng) const {
    const double base = static_cast<double>(base_backoff.count()) * std::pow(2.0, attempt);
    double delay = std::min(base, static_cast<double>(max_backoff.count()));
    std::uniform_real_distribution<double> u(1.0 - jitter, 1.0 + jitter);
    delay *= u(rng);
    delay = std::max(delay, static_cast<double>(hint.count()));
    // Jitter may push past the cap; the cap itself is scaled by the same bound.
    delay = std::min(delay, static_cast<double>(max_backoff.count()) * (1.0 + jitter));
    return std::chrono::milliseconds(static_cast<long>(delay));
}

namespace {

bool retryable_status(int status) { return status == 0 || status == 429 || status >= 500; }

std::chrono::milliseconds parse_retry_after(const std::string& v) {
    if (v.empty()) return std::chrono::milliseconds(0);
    try {
        return std::chrono::milliseconds(static_cast<long>(std::stod(v) * 1000.0));
    } catch (...) {
        return std::chrono::milliseconds(0);
    }
}

[[noreturn]] void throw_for(const HttpResponse& r, const std::string& what) {
    Error e(ErrorCode::Provider,
            what + (r.status == 0 ? " failed: transport error" : " failed with HTTP " + std::to_string(r.status)),
            r.body.substr(0, 512));
    e.with_retry(retryable_status(r.status), parse_retry_after(r.retry_after).count());
    throw e;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.7f", v);
    return buf;
}

std::string coord_param(const GeoCoordinate& c) { return fmt_double(c.lat) + "," + fmt_double(c.lon); }

json parse_body(const HttpResponse& r, const std::string& what) {
    auto j = json::parse(r.body, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::Provider, what + " returned malformed JSON", r.body.substr(0, 512));
    return j;
}

Sleeper default_sleeper(Sleeper s) {
    if (s) return s;
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

}  // namespace

struct HttpTransport::Impl {
    std::unique_ptr<httplib::Client> client;
    std::string prefix;
    httplib::Headers headers;
};

HttpTransport::HttpTransport(std::string base_url, std::string api_key, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
    // Split "scheme://host[:port]/prefix".
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::Config, "base URL needs a scheme: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? base_url : base_url.substr(0, path_start);
    impl_->prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
    while (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
    impl_->client = std::make_unique<httplib::Client>(origin);
    const auto secs = static_cast<time_t>(timeout.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
    impl_->client->set_connection_timeout(secs, usecs);
    impl_->client->set_read_timeout(secs, usecs);
    impl_->client->set_write_timeout(secs, usecs);
    if (!api_key.empty()) impl_->headers.emplace("Authorization", "Bearer " + api_key);
}

HttpTransport::~HttpTransport() = default;

namespace {
HttpResponse to_response(const httplib::Result& res) {
    HttpResponse out;
    if (!res) return out;
    out.status = res->status;
    out.body = res->body;
    out.content_type = res->get_header_value("Content-Type");
    out.retry_after = res->get_header_value("Retry-After");
    return out;
}
}  // namespace

HttpResponse HttpTransport::get(const std::string& path, const std::multimap<std::string, std::string>& params) {
    httplib::Params p(params.begin(), params.end());
    return to_response(impl_->client->Get(impl_->prefix + path, p, impl_->headers));
}

HttpResponse HttpTransport::post_json(const std::string& path, const std::string& body) {
    return to_response(impl_->client->Post(impl_->prefix + path, impl_->headers, body, "application/json"));
}

HttpResponse call_with_retries(const std::function<HttpResponse()>& call, const RetryPolicy& policy, bool idempotent,
                               std::mt19937_64& rng, const Sleeper& sleep, int* attempts_out) {
    const int cap = idempotent ? policy.max_retries : policy.max_retries_non_idempotent;
    HttpResponse r;
    int attempt = 0;
    for (;; ++attempt) {
        r = call();
        if (!retryable_status(r.status) || attempt >= cap) break;
        sleep(policy.backoff(attempt, parse_retry_after(r.retry_after), rng));
    }
    if (attempts_out) *attempts_out = attempt + 1;
    return r;
}

LiveMapsClient::LiveMapsClient(std::string base_url, std::string api_key, double snap_radius_m, RetryPolicy policy,
                               std::chrono::milliseconds timeout, Sleeper sleep)
    : http_(std::move(base_url), std::move(api_key), timeout),
      snap_radius_m_(snap_radius_m),
      policy_(policy),
      sleep_(default_sleeper(std::move(sleep))),
      rng_(policy.seed) {}

HttpResponse LiveMapsClient::get(const std::string& path, const std::multimap<std::string, std::string>& params) {
    // Only the jitter draw is serialized; the network call runs unlocked.
    auto jittered_sleep = [this](std::chrono::milliseconds d) { sleep_(d); };
    std::mt19937_64 local;
    {
        std::lock_guard lock(rng_mu_);
        local.seed(rng_());
    }
    return call_with_retries([&] { return http_.get(path, params); }, policy_, true, local, jittered_sleep);
}

RouteResult LiveMapsClient::get_route(const GeoCoordinate& origin, const GeoCoordinate& destination) {
    auto r = get("/route", {{"origin", coord_param(origin)}, {"destination", coord_param(destination)}});
    if (r.status == 404 || r.status == 422) fail(ErrorCode::RouteUnavailable, "no walking route", r.body);
    if (r.status != 200) throw_for(r, "route request");
    auto route = route_from_json(parse_body(r, "route request"));
    if (geo::haversine_distance(route.polyline.points().front(), origin) > 50.0 ||
        geo::haversine_distance(route.polyline.points().back(), destination) > 50.0) {
        fail(ErrorCode::RouteUnavailable, "route endpoints are more than 50 m from the requested points");
    }
    return route;
}

PanoramaMeta LiveMapsClient::nearest_panorama(const GeoCoordinate& coord) {
    auto r = get("/panoramas/nearest",
                 {{"lat", fmt_double(coord.lat)}, {"lon", fmt_double(coord.lon)}, {"radius", fmt_double(snap_radius_m_)}});
    if (r.status == 404) fail(ErrorCode::NoCoverage, "no panorama near the requested point");
    if (r.status != 200) throw_for(r, "panorama lookup");
    auto meta = parse_body(r, "panorama lookup").get<PanoramaMeta>();
    if (geo::haversine_distance(meta.coord, coord) > snap_radius_m_) {
        fail(ErrorCode::NoCoverage, "nearest panorama is outside the snap radius");
    }
    return meta;
}

PanoramaMeta LiveMapsClient::panorama(const std::string& id) {
    auto r = get("/panoramas/" + id, {});
    if (r.status == 404) fail(ErrorCode::NotFound, "unknown panorama " + id);
    if (r.status != 200) throw_for(r, "panorama metadata");
    return parse_body(r, "panorama metadata").get<PanoramaMeta>();
}

ImageRef LiveMapsClient::render_view(const ViewRequest& req) {
    req.validate();
    auto r = get("/panoramas/" + req.pano + "/view", {{"heading", fmt_double(req.heading.value())},
                                                     {"fov", fmt_double(req.fov_deg)},
                                                     {"pitch", fmt_double(req.pitch_deg)}});
    if (r.status == 404) fail(ErrorCode::NotFound, "unknown panorama " + req.pano);
    if (r.status != 200) throw_for(r, "view rendering");
    if (r.body.empty()) fail(ErrorCode::Provider, "view rendering returned no bytes");
    return ImageRef{req.image_id(), r.content_type.empty() ? "image/jpeg" : r.content_type,
                    std::make_shared<const std::string>(std::move(r.body)), req};
}

std::vector<Place> LiveMapsClient::nearby_places(const GeoCoordinate& coord, double radius_m) {
    validate_radius(radius_m);
    auto r = get("/places/nearby",
                 {{"lat", fmt_double(coord.lat)}, {"lon", fmt_double(coord.lon)}, {"radius", fmt_double(radius_m)}});
    if (r.status != 200) throw_for(r, "places search");
    return rank_places(coord, parse_body(r, "places search").get<std::vector<Place>>(), radius_m);
}

Place LiveMapsClient::find_place(const std::string& query) {
    auto r = get("/places/search", {{"q", query}});
    if (r.status == 404) fail(ErrorCode::NotFound, "no place matches '" + query + "'");
    if (r.status != 200) throw_for(r, "place search");
    return parse_body(r, "place search").get<Place>();
}

LiveMllmClient::LiveMllmClient(std::string base_url, std::string api_key, std::string model, RetryPolicy policy,
                               std::size_t max_images, std::chrono::milliseconds timeout, Sleeper sleep)
    : http_(std::move(base_url), std::move(api_key), timeout),
      model_(std::move(model)),
      policy_(policy),
      max_images_(max_images),
      sleep_(default_sleeper(std::move(sleep))),
      rng_(policy.seed) {}

std::string LiveMllmClient::request_body(const MllmRequest& req, const std::string& model) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", req.text}});
    for (const auto& img : req.images) {
        content.push_back({{"type", "image_url"},
                           {"image_url", {{"url", "data:" + img.media_type + ";base64," + base64_encode(*img.bytes)}}}});
    }
    json body = {{"model", model},
                 {"max_tokens", req.max_tokens},
                 {"temperature", req.temperature},
                 {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
    return body.dump();
}

std::string LiveMllmClient::complete(const MllmRequest& req) {
    validate_request(req, max_images_);
    const auto body = request_body(req, model_);
    std::mt19937_64 local;
    {
        std::lock_guard lock(rng_mu_);
        local.seed(rng_());
    }
    auto r = call_with_retries([&] { return http_.post_json("/chat/completions", body); }, policy_, false, local, sleep_);
    if (r.status != 200) throw_for(r, "model request");
    auto j = parse_body(r, "model request");
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        fail(ErrorCode::Provider, "model response has no message content", r.body.substr(0, 512));
    }
}

std::string base64_encode(std::string_view data) {
    static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < data.size(); i += 3) {
        const auto n = (static_cast<unsigned char>(data[i]) << 16) | (static_cast<unsigned char>(data[i + 1]) << 8) |
                       static_cast<unsigned char>(data[i + 2]);
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += kAlphabet[(n >> 6) & 63];
        out += kAlphabet[n & 63];
    }
    if (const auto rest = data.size() - i; rest > 0) {
        unsigned n = static_cast<unsigned char>(data[i]) << 16;
        if (rest == 2) n |= static_cast<unsigned char>(data[i + 1]) << 8;
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += rest == 2 ? kAlphabet[(n >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

}  // namespace sva
