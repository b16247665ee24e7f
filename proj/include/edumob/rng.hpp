#pragma once

// Deterministic stream derivation. Every stochastic component draws from an
// engine keyed by (seed, purpose, block identifiers), so results do not
// depend on evaluation order or worker count.

#include <cstdint>
#include <random>
#include <string_view>

#include "edumob/mathutil.hpp"

namespace edumob {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class StreamKey {
  public:
    explicit StreamKey(std::uint64_t seed) : state_(seed) { (void)splitmix64(state_); }

    StreamKey& mix(std::uint64_t v) {
        state_ ^= splitmix64(state_) ^ v;
        (void)splitmix64(state_);
        return *this;
    }
    StreamKey& mix(std::int64_t v) { return mix(static_cast<std::uint64_t>(v)); }
    StreamKey& mix(int v) { return mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    StreamKey& mix(std::string_view s) { return mix(fnv1a64(s)); }

    std::uint64_t value() const {
        std::uint64_t s = state_;
        return splitmix64(s);
    }

    std::mt19937_64 engine() const { return std::mt19937_64(value()); }

  private:
    std::uint64_t state_;
};

template <typename... Parts>
std::mt19937_64 derive_engine(std::uint64_t seed, Parts&&... parts) {
    StreamKey key(seed);
    (key.mix(parts), ...);
    return key.engine();
}

}  // namespace edumob
