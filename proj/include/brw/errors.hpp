#pragma once

#include <stdexcept>
#include <string>

namespace brw {

// Bad arguments or configuration; the CLI maps this to exit code 2.
class usage_error : public std::runtime_error {
public:
    explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

// A resource guard tripped (size cap, overflow horizon, disconnected input);
// the CLI maps this to exit code 3.
class guard_error : public std::runtime_error {
public:
    explicit guard_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace brw
