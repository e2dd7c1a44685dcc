#pragma once

// Decorators layered over any provider implementation: an LRU image cache
// and a token-bucket rate limiter for model calls.

#include <chrono>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "sva/providers.hpp"

namespace sva {

// Content hash of a view request; equal requests hash equal.
std::uint64_t view_hash(const ViewRequest& req);

class ImageCache {
public:
    explicit ImageCache(std::size_t byte_budget) : budget_(byte_budget) {}

    std::optional<ImageRef> get(std::uint64_t key);
    void put(std::uint64_t key, const ImageRef& img);

    std::size_t bytes() const;
    std::size_t entries() const;
    std::size_t hits() const;
    std::size_t misses() const;

private:
    using Entry = std::pair<std::uint64_t, ImageRef>;

    mutable std::mutex mu_;
    std::size_t budget_;
    std::size_t bytes_ = 0;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
    std::list<Entry> lru_;  // front = most recent
    std::unordered_map<std::uint64_t, std::list<Entry>::iterator> map_;
};

class CachingPanoramaProvider final : public PanoramaProvider {
public:
    CachingPanoramaProvider(std::shared_ptr<PanoramaProvider> inner, std::size_t byte_budget)
        : inner_(std::move(inner)), cache_(byte_budget) {}

    PanoramaMeta nearest_panorama(const GeoCoordinate& coord) override { return inner_->nearest_panorama(coord); }
    PanoramaMeta panorama(const std::string& id) override { return inner_->panorama(id); }
    ImageRef render_view(const ViewRequest& req) override;

    const ImageCache& cache() const { return cache_; }

private:
    std::shared_ptr<PanoramaProvider> inner_;
    ImageCache cache_;
};

using SteadyClock = std::function<std::chrono::steady_clock::time_point()>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

class TokenBucket {
public:
    TokenBucket(double capacity, double refill_per_second, SteadyClock clock = {});

    // Takes a token if one is available.
    bool try_acquire();
    // Time until a token will be available (zero if one is available now).
    std::chrono::milliseconds wait_time();

private:
    void refill();

    std::mutex mu_;
    double capacity_;
    double rate_;
    double tokens_;
    SteadyClock clock_;
    std::chrono::steady_clock::time_point last_;
};

// Blocks each call until the shared bucket yields a token.
class RateLimitedMllm final : public MllmProvider {
public:
    RateLimitedMllm(std::shared_ptr<MllmProvider> inner, std::shared_ptr<TokenBucket> bucket, Sleeper sleep = {});

    std::string complete(const MllmRequest& req) override;
    std::size_t max_images() const override { return inner_->max_images(); }

private:
    std::shared_ptr<MllmProvider> inner_;
    std::shared_ptr<TokenBucket> bucket_;
    Sleeper sleep_;
};

}  // namespace sva
