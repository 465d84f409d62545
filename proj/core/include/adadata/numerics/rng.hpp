#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace adadata::num {

/// Counter-based SplitMix64 generator.
///
/// The i-th output (i = 1, 2, ...) of stream `k` under seed `s` is
/// `mix64((s ^ mix64(k)) + i * 0x9E3779B97F4A7C15)`, where `mix64` is the
/// SplitMix64 finalizer. Uniform reals, bounded integers and shuffles are
/// derived here, not through `<random>` distributions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    // 53-bit uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);

    // Independent generator for a named sub-stream.
    Rng fork(std::uint64_t stream) const;

    std::uint64_t counter() const { return counter_; }

    template <class T>
    void shuffle(std::vector<T> &items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

} // namespace adadata::num
