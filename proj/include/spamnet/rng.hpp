#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace spamnet {

// Deterministic PRNG used for every stochastic choice in the pipeline
// (weight init, dataset shuffles, dropout masks, synthetic corpus).
// xoshiro256** seeded through splitmix64; all derived draws (floats,
// bounded ints, shuffles) are pinned here so that a seed reproduces the
// same stream on any platform.
// Derives an independent stream seed from a base seed and a salt; used to
// give per-file / per-purpose generators their own reproducible streams.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    // Restart the stream from a fresh seed.
    void seed(std::uint64_t s);

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 24-bit resolution, exactly representable in f32.
    float next_float();

    float uniform(float lo, float hi);

    // Uniform on {0, ..., n-1}. Plain modulo; the bias of ~n/2^64 is
    // irrelevant at the sizes used here and keeps the mapping trivial.
    std::uint64_t below(std::uint64_t n);

    // Fisher-Yates, descending index, j = below(i + 1).
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> state_;
    std::uint64_t seed_;
};

}  // namespace spamnet
