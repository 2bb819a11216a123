#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace coldspray {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Deterministic random source. mt19937_64 is fully specified by the
/// standard; the float mappings below avoid std::*_distribution, whose
/// output is implementation-defined, so streams are reproducible across
/// compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of randomness.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (cosine branch, one value per pair).
    double normal() {
        double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    /// Index in [0, n).
    std::size_t index(std::size_t n) {
        // Rejection sampling keeps the draw unbiased for any n.
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Strict full-string parse; nullopt if any character is left over.
std::optional<double> parse_double(std::string_view text);

/// FNV-1a 64-bit content digest, returned as a 16-char lowercase hex string.
std::string fnv1a64_hex(const void* data, std::size_t size);
std::string file_digest(const std::string& path);

} // namespace coldspray
