#pragma once

#include <catch_amalgamated.hpp>

#include <functional>

#include "sva/common.hpp"

// Code of the sva::Error thrown by fn; fails the test when none is thrown.
inline sva::ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const sva::Error& e) {
        return e.code();
    }
    FAIL("expected an sva::Error");
    return sva::ErrorCode::Internal;
}
