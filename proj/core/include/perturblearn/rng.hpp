#pragma once

#include <cstdint>
#include <random>

namespace perturblearn {

// Deterministic random source. The standard distributions are
// implementation-defined, so uniform/normal are generated from raw engine
// output directly; outputs are bit-identical across platforms and runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent deterministic substream, e.g. one per latent index or
    // per evaluation cell. Safe to construct concurrently.
    static Rng forStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t nextU64();

    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    double normal();                        // standard normal, Box-Muller

    // Uniform integer in [0, bound); bound >= 1.
    std::size_t index(std::size_t bound);

private:
    std::mt19937_64 engine_;
};

// SplitMix64 step; used for seed derivation.
std::uint64_t splitMix64(std::uint64_t& state);

} // namespace perturblearn
