#pragma once

// Golden-file comparison. A missing golden is written when
// SVA_UPDATE_SNAPSHOTS is set (review it by hand), otherwise it fails.

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

inline void check_snapshot(const std::string& name, const std::string& actual) {
    const std::string path = std::string(SVA_TEST_DATA_DIR) + "/snapshots/" + name;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (std::getenv("SVA_UPDATE_SNAPSHOTS")) {
            std::ofstream(path, std::ios::binary) << actual;
            WARN("wrote snapshot " << path);
            return;
        }
        FAIL("missing snapshot " << path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    INFO("snapshot " << name);
    CHECK(ss.str() == actual);
}
