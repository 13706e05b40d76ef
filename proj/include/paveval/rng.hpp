#pragma once

#include <cstdint>
#include <string_view>

namespace paveval {

// Seedable, splittable generator (SplitMix64 core). Substreams derived from
// (seed, image_id, copy_index) keys make per-image randomness independent of
// dataset order and of how work is scheduled across threads. Not
// cryptographic.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : state_(seed) {}

    // Child stream keyed by a string (e.g. an image id).
    SplitRng derive(std::string_view key) const {
        return SplitRng(mix(state_ ^ fnv1a(key)));
    }

    // Child stream keyed by an integer (e.g. a copy index).
    SplitRng derive(std::uint64_t key) const {
        return SplitRng(mix(state_ ^ mix(key + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix_final(state_);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

private:
    std::uint64_t state_;

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    static std::uint64_t mix_final(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t z) {
        return mix_final(z + 0x9e3779b97f4a7c15ULL);
    }
};

}  // namespace paveval
