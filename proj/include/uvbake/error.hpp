// error.hpp — exception types shared across the library.
//
// Two tiers, matching the CLI exit-code contract:
//   ValidationError — bad user input (flags, config values, malformed
//                     requests); the CLI maps these to exit code 1.
//   Error           — runtime failures (missing files, empty sets,
//                     failed subprocesses); exit code 2.
#pragma once

#include <stdexcept>
#include <string>

namespace uvbake {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

}  // namespace uvbake
