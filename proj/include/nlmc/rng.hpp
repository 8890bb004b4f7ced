#pragma once

#include <cstdint>

namespace nlmc {

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Folds a value into a running key.
constexpr std::uint64_t mix_key(std::uint64_t key, std::uint64_t value) noexcept {
    return splitmix64(key ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

// Counter-based stream: draw(counter) is a pure function of (key, counter),
// so draws can be produced in any order or on any thread.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(splitmix64(seed)) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
        return splitmix64(key_ ^ splitmix64(counter));
    }

    // Uniform on [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
};

}  // namespace nlmc
