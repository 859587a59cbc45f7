#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace kalikow {

/// Splittable, reproducible random stream.
///
/// The state is derived from (seed, path) by SplitMix64 mixing; draws come
/// from xoshiro256**. `child(k)` derives an independent stream whose path is
/// the parent's path extended by k. Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path = {});

    RandomStream child(std::uint64_t index) const;

    result_type operator()();
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    /// Uniform draw in the open interval (0, 1).
    double uniform();

    std::uint64_t seed() const { return seed_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

    /// 64-bit key summarizing (seed, path); reported in run summaries.
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
    std::uint64_t key_;
    std::uint64_t s_[4];
};

}  // namespace kalikow
