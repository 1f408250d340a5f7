#pragma once

#include <cstdint>
#include <initializer_list>

namespace nextpm {

/// Mixes a list of keys into one 64-bit seed.
std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys);

/// Counter-based uniform stream (SplitMix64). Output i depends only on (key, i),
/// so any (seed, component, replication) tuple addresses an independent
/// substream without sequential state.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : key_(key) {}

    static RandomStream substream(std::initializer_list<std::uint64_t> keys) {
        return RandomStream(mix_keys(keys));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t position() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace nextpm
