#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace codeshift {

// splitmix64. Small, fast, and identical on every platform, which is what
// the reproducibility contract needs; quality is plenty for shuffling.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw in [0, bound) via rejection on the top of the range.
    std::uint64_t bounded(std::uint64_t bound);

  private:
    std::uint64_t state_;
};

// FNV-1a over the label, mixed with the seed. Stream labels are
// domain-prefixed by callers ("task:<id>", "tasks", ...) so distinct
// purposes never share a stream.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view label);

// In-place Fisher-Yates. Stable across platforms because both the generator
// and the algorithm are ours.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

} // namespace codeshift
