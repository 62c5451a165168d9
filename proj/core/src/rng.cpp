#include "perturblearn/rng.hpp"

#include <cmath>
#include <numbers>

namespace perturblearn {

std::uint64_t splitMix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::forStream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (0xa0761d6478bd642fULL * (stream + 1));
    return Rng(splitMix64(state));
}

std::uint64_t Rng::nextU64() {
    return engine_();
}

double Rng::uniform() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    // Box-Muller; u1 in (0, 1] to keep the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t bound) {
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(bound));
    return i < bound ? i : bound - 1;
}

} // namespace perturblearn
