#pragma once

#include <stdexcept>
#include <string>

namespace mclearn {

// Bad inputs: malformed files, invalid flag combinations, contract violations
// detectable before any numeric work.  CLI maps this to exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric/iterative failure: power iteration or value iteration hit the step
// cap, a sampler was exhausted, and so on.  CLI maps this to exit code 2.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mclearn
