#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sva/service.hpp"

namespace sva::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;  // bad arguments or configuration

// `args` excludes the program name. Errors go to `err` as one JSON object.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
        const service::EnvLookup& env = service::process_env);

}  // namespace sva::cli
