#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tracebench {

inline constexpr const char* kToolVersion = "0.1.0";

// Lag slots with no realized price yet carry this sentinel; observation
// encoding maps it outside the normalized action axis.
inline constexpr double kPadToken = -1.0;

enum class Side { a, b };

inline Side other(Side s) { return s == Side::a ? Side::b : Side::a; }

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct TraceError : std::runtime_error {
    explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

struct TrainError : std::runtime_error {
    explicit TrainError(const std::string& what) : std::runtime_error(what) {}
};

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v);

} // namespace tracebench
