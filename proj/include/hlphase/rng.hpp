#pragma once

// Counter-based random streams. A stream is identified by (master seed, cell,
// trial); draw k of a stream is a pure function of those four numbers, so
// results do not depend on execution order or worker count.

#include <cstdint>
#include <limits>

namespace hlphase {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t cell, std::uint64_t trial) {
    return splitmix64(splitmix64(splitmix64(seed) ^ cell) ^ (trial * 0xD1B54A32D192ED03ULL));
}

/// Uniform in [0, 1) with 53 random bits.
inline constexpr double to_unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Satisfies UniformRandomBitGenerator so it can drive <random> distributions.
class CounterStream {
public:
    using result_type = std::uint64_t;

    constexpr CounterStream(std::uint64_t seed, std::uint64_t cell, std::uint64_t trial = 0)
        : key_(stream_key(seed, cell, trial)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() { return splitmix64(key_ + 0x632BE59BD9B4E019ULL * ++counter_); }
    constexpr double uniform() { return to_unit_interval((*this)()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace hlphase
