// Error types shared across the library.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace enslab {

// A trajectory or ensemble member left the model's valid domain.
struct DivergenceError : std::runtime_error {
    std::size_t member;
    std::size_t lead;
    DivergenceError(std::size_t member_, std::size_t lead_, const std::string& what_)
        : std::runtime_error(what_), member(member_), lead(lead_) {}
};

struct QuadratureError : std::runtime_error {
    double achieved_error;
    QuadratureError(double err, const std::string& what_)
        : std::runtime_error(what_), achieved_error(err) {}
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WriteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace enslab
