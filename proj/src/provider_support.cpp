#include "sva/provider_support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <thread>

#include "sva/common.hpp"

namespace sva {

std::uint64_t view_hash(const ViewRequest& req) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "|%.6f|%.6f|%.6f", req.heading.value(), req.fov_deg, req.pitch_deg);
    return fnv1a64(req.pano + buf);
}

std::optional<ImageRef> ImageCache::get(std::uint64_t key) {
    std::lock_guard lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second;
}

void ImageCache::put(std::uint64_t key, const ImageRef& img) {
    std::lock_guard lock(mu_);
    if (img.size() > budget_) return;
    if (auto it = map_.find(key); it != map_.end()) {
        bytes_ -= it->second->second.size();
        lru_.erase(it->second);
        map_.erase(it);
    }
    lru_.emplace_front(key, img);
    map_[key] = lru_.begin();
    bytes_ += img.size();
    while (bytes_ > budget_) {
        auto& victim = lru_.back();
        bytes_ -= victim.second.size();
        map_.erase(victim.first);
        lru_.pop_back();
    }
}

std::size_t ImageCache::bytes() const {
    std::lock_guard lock(mu_);
    return bytes_;
}

std::size_t ImageCache::entries() const {
    std::lock_guard lock(mu_);
    return map_.size();
}

std::size_t ImageCache::hits() const {
    std::lock_guard lock(mu_);
    return hits_;
}

std::size_t ImageCache::misses() const {
    std::lock_guard lock(mu_);
    return misses_;
}

ImageRef CachingPanoramaProvider::render_view(const ViewRequest& req) {
    req.validate();
    const auto key = view_hash(req);
    if (auto hit = cache_.get(key)) return *hit;
    // Rendering happens outside the cache lock; concurrent misses may both fetch.
    auto img = inner_->render_view(req);
    cache_.put(key, img);
    return img;
}

TokenBucket::TokenBucket(double capacity, double refill_per_second, SteadyClock clock)
    : capacity_(capacity), rate_(refill_per_second), tokens_(capacity), clock_(std::move(clock)) {
    if (!(capacity >= 1.0) || !(refill_per_second > 0.0)) {
        fail(ErrorCode::InvalidArgument, "token bucket needs capacity >= 1 and a positive refill rate");
    }
    if (!clock_) clock_ = [] { return std::chrono::steady_clock::now(); };
    last_ = clock_();
}

void TokenBucket::refill() {
    const auto now = clock_();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    if (elapsed > 0) {
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        last_ = now;
    }
}

bool TokenBucket::try_acquire() {
    std::lock_guard lock(mu_);
    refill();
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return true;
    }
    return false;
}

std::chrono::milliseconds TokenBucket::wait_time() {
    std::lock_guard lock(mu_);
    refill();
    if (tokens_ >= 1.0) return std::chrono::milliseconds(0);
    return std::chrono::milliseconds(static_cast<long>(std::ceil((1.0 - tokens_) / rate_ * 1000.0)));
}

RateLimitedMllm::RateLimitedMllm(std::shared_ptr<MllmProvider> inner, std::shared_ptr<TokenBucket> bucket, Sleeper sleep)
    : inner_(std::move(inner)), bucket_(std::move(bucket)), sleep_(std::move(sleep)) {
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string RateLimitedMllm::complete(const MllmRequest& req) {
    while (!bucket_->try_acquire()) sleep_(std::max(bucket_->wait_time(), std::chrono::milliseconds(1)));
    return inner_->complete(req);
}

}  // namespace sva
