#pragma once

#include <cstdint>
#include <string_view>

namespace fleetmeter {

// SplitMix64: tiny, seedable, and fully specified, so generated scenarios
// reproduce byte-for-byte across platforms and standard libraries (the
// standard's distribution objects are not portable).
//
// Streams are split by hashing a stream label and per-record ordinals into
// the seed, which makes draws independent of iteration order.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stateless draw: one uniform [0,1) value keyed by (seed, stream, ordinals).
inline double keyed_unit(std::uint64_t seed, std::string_view stream, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0) {
    SplitMix64 mix(seed ^ fnv1a(stream));
    std::uint64_t h = mix.next();
    h ^= a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= c + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return SplitMix64(h).next_unit();
}

} // namespace fleetmeter
