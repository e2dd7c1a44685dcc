#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace sva {

enum class ErrorCode {
    InvalidArgument,
    OutOfRange,
    DegenerateBearing,
    RouteUnavailable,
    NoCoverage,
    NotFound,
    Provider,
    ScriptedMiss,
    Parse,
    InvalidChoice,
    Validation,
    InvalidState,
    Config,
    Timeout,
    Internal,
};

const char* to_string(ErrorCode code);

// Base of every error raised by this library. `retryable` is only meaningful
// for provider-side failures; `retry_after_ms` carries a backoff hint when the
// remote side sent one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::string detail = {})
        : std::runtime_error(std::move(message)), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

    bool retryable() const noexcept { return retryable_; }
    long retry_after_ms() const noexcept { return retry_after_ms_; }

    Error& with_retry(bool retryable, long retry_after_ms = 0) {
        retryable_ = retryable;
        retry_after_ms_ = retry_after_ms;
        return *this;
    }

private:
    ErrorCode code_;
    std::string detail_;
    bool retryable_ = false;
    long retry_after_ms_ = 0;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message, std::string detail = {}) {
    throw Error(code, std::move(message), std::move(detail));
}

// Minimal value-or-error carrier for code paths that must not throw.
template <class T, class E>
class Expected {
public:
    Expected(T value) : v_(std::in_place_index<0>, std::move(value)) {}
    Expected(E error) : v_(std::in_place_index<1>, std::move(error)) {}

    bool has_value() const noexcept { return v_.index() == 0; }
    explicit operator bool() const noexcept { return has_value(); }

    const T& value() const& { return std::get<0>(v_); }
    T&& value() && { return std::get<0>(std::move(v_)); }
    const E& error() const& { return std::get<1>(v_); }

    const T& operator*() const& { return value(); }
    const T* operator->() const { return &std::get<0>(v_); }

private:
    std::variant<T, E> v_;
};

}  // namespace sva
