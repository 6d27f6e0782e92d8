#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace writeleak {

// Bad scenario/CLI configuration (exit code 2 territory).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A snapshot pair shows changes in both operand regions: two victim updates
// landed between the snapshots, so the per-update order is lost.
struct AmbiguousUpdate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Update sequence cannot be chunked into valid (R0,R1)/(R1,R0) pairs.
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Histogram does not split into two clusters.
struct ThresholdError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Address-space identification did not converge on a single page.
struct IdentifyError : std::runtime_error {
    std::vector<std::uint64_t> survivors;
    IdentifyError(const std::string& msg, std::vector<std::uint64_t> s)
        : std::runtime_error(msg), survivors(std::move(s)) {}
};

// Gauss-Jordan hit a zero pivot that a row swap would fix; the leakage model
// only covers swap-free eliminations.
struct SwapRequired : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace writeleak
