#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace qread {

/// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a
    for (unsigned char ch : tag) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Derive an independent named sub-stream key from a base seed, so that e.g.
/// the `mi` and `sme` subcommands draw from unrelated streams.
inline std::uint64_t substream_key(std::uint64_t base_seed, std::string_view tag) {
    return mix64(mix64(base_seed) ^ hash_tag(tag));
}

/// Counter-based random stream: the pair (key, counter) fully determines the
/// sequence, so trajectory index i can be handed stream (key, i) and results
/// are reproducible independent of worker count or evaluation order.
class RandomStream {
  public:
    RandomStream(std::uint64_t key, std::uint64_t counter)
        : state_(mix64(mix64(key ^ 0x8BADF00D5EEDull) + counter)) {}

    std::uint64_t next_u64() { return mix64(state_ += 0x9E3779B97F4A7C15ull); }

    /// Uniform double in [0, 1).
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; one spare cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Sample an index from an unnormalized weight vector.
    int next_outcome(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_uniform() * total;
        for (int i = 0; i + 1 < static_cast<int>(weights.size()); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return static_cast<int>(weights.size()) - 1;
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qread
