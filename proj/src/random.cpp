#include "kalikow/random.hpp"

namespace kalikow {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path)
    : seed_(seed), path_(std::move(path)) {
    std::uint64_t state = seed_;
    std::uint64_t key = splitmix64(state);
    for (std::uint64_t step : path_) {
        // Chain the path through the mixer so that (a,b) and (b,a) differ.
        std::uint64_t mix = key ^ (step + 0x632BE59BD9B4E019ULL);
        key = splitmix64(mix);
    }
    key_ = key;
    std::uint64_t sm = key_;
    for (auto& word : s_) word = splitmix64(sm);
}

RandomStream RandomStream::child(std::uint64_t index) const {
    auto path = path_;
    path.push_back(index);
    return RandomStream(seed_, std::move(path));
}

RandomStream::result_type RandomStream::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomStream::uniform() {
    // 53 random bits, shifted off zero.
    return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace kalikow
