#include "codeshift/rng.hpp"

namespace codeshift {

std::uint64_t Rng::bounded(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
        std::uint64_t r = next();
        if (r >= threshold) return r % bound;
    }
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // One extra splitmix round so seed and label both diffuse through all bits.
    std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace codeshift
