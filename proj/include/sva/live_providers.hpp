#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "sva/provider_support.hpp"
#include "sva/providers.hpp"

namespace sva {

struct RetryPolicy {
    int max_retries = 3;                 // for idempotent GETs
    int max_retries_non_idempotent = 1;  // for model POSTs
    std::chrono::milliseconds base_backoff{200};
    std::chrono::milliseconds max_backoff{5000};
    double jitter = 0.2;  // each delay is scaled by a factor in [1 - jitter, 1 + jitter]
    std::uint64_t seed = 0x5eed;

    // Delay before retry number `attempt` (0-based), honoring a server hint.
    std::chrono::milliseconds backoff(int attempt, std::chrono::milliseconds hint, std::mt19937_64& rng) const;
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string content_type;
    std::string retry_after;
};

// Thin wrapper over an HTTP client bound to a base URL such as
// "https://maps.example.com/api". Transport failures return status 0.
class HttpTransport {
public:
    HttpTransport(std::string base_url, std::string api_key, std::chrono::milliseconds timeout);
    ~HttpTransport();

    HttpResponse get(const std::string& path, const std::multimap<std::string, std::string>& params);
    HttpResponse post_json(const std::string& path, const std::string& body);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Runs `call` until it returns a non-retryable outcome or the retry cap is
// reached. Retryable: transport failure, 429 and 5xx.
HttpResponse call_with_retries(const std::function<HttpResponse()>& call, const RetryPolicy& policy,
                               bool idempotent, std::mt19937_64& rng, const Sleeper& sleep,
                               int* attempts_out = nullptr);

// Maps/imagery/places adapter for a provider-neutral REST service:
//   GET /route?origin=lat,lon&destination=lat,lon
//   GET /panoramas/nearest?lat=&lon=&radius=
//   GET /panoramas/{id}
//   GET /panoramas/{id}/view?heading=&fov=&pitch=
//   GET /places/nearby?lat=&lon=&radius=
//   GET /places/search?q=
class LiveMapsClient final : public RouteProvider, public PanoramaProvider, public PlacesProvider {
public:
    LiveMapsClient(std::string base_url, std::string api_key, double snap_radius_m, RetryPolicy policy,
                   std::chrono::milliseconds timeout = std::chrono::milliseconds(30000), Sleeper sleep = {});

    RouteResult get_route(const GeoCoordinate& origin, const GeoCoordinate& destination) override;
    PanoramaMeta nearest_panorama(const GeoCoordinate& coord) override;
    PanoramaMeta panorama(const std::string& id) override;
    ImageRef render_view(const ViewRequest& req) override;
    std::vector<Place> nearby_places(const GeoCoordinate& coord, double radius_m) override;
    Place find_place(const std::string& query) override;

private:
    HttpResponse get(const std::string& path, const std::multimap<std::string, std::string>& params);

    HttpTransport http_;
    double snap_radius_m_;
    RetryPolicy policy_;
    Sleeper sleep_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
};

// Chat-completions style multimodal endpoint: POST {base}/chat/completions
// with text and base64 data-URI image parts; reads choices[0].message.content.
class LiveMllmClient final : public MllmProvider {
public:
    LiveMllmClient(std::string base_url, std::string api_key, std::string model, RetryPolicy policy,
                   std::size_t max_images = 10, std::chrono::milliseconds timeout = std::chrono::milliseconds(60000),
                   Sleeper sleep = {});

    std::string complete(const MllmRequest& req) override;
    std::size_t max_images() const override { return max_images_; }

    static std::string request_body(const MllmRequest& req, const std::string& model);

private:
    HttpTransport http_;
    std::string model_;
    RetryPolicy policy_;
    std::size_t max_images_;
    Sleeper sleep_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
};

std::string base64_encode(std::string_view data);

}  // namespace sva
