#include "kalikow/series.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kalikow {

double power_tail(double s, std::int64_t n) {
    if (!(s > 1.0)) throw std::domain_error("power_tail diverges for exponent <= 1");
    if (n < 0) n = 0;
    constexpr std::int64_t kDirect = 32;
    const std::int64_t start = std::max<std::int64_t>(n + 1, kDirect);
    double sum = 0.0;
    for (std::int64_t k = start - 1; k > n; --k) sum += std::pow(double(k), -s);

    // Euler-Maclaurin for sum_{k >= N} k^{-s}.
    const double N = double(start);
    const double fN = std::pow(N, -s);
    double em = N * fN / (s - 1.0) + 0.5 * fN;
    double rising = s;  // s (s+1) ... (s+2j-2)
    double power = fN / N;
    static constexpr double kCoeff[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0};
    for (int j = 0; j < 4; ++j) {
        em += kCoeff[j] * rising * power;
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
        power /= N * N;
    }
    return sum + em;
}

SeriesLaw::SeriesLaw(std::string name, Term mass, Term tail)
    : name_(std::move(name)), mass_(std::move(mass)), tail_(std::move(tail)) {
    total_ = tail_(0);
    if (!(total_ > 0.0) || !std::isfinite(total_)) {
        throw std::invalid_argument("law '" + name_ + "' has non-finite or zero total mass");
    }
}

SeriesLaw SeriesLaw::geometric(double r) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("geometric ratio must lie in [0, 1)");
    return SeriesLaw(
        "geometric",
        [r](std::int64_t k) { return k < 1 ? 0.0 : (1.0 - r) * std::pow(r, double(k - 1)); },
        [r](std::int64_t n) { return n <= 0 ? 1.0 : std::pow(r, double(n)); });
}

SeriesLaw SeriesLaw::power(double p) {
    if (!(p > 1.0)) throw std::invalid_argument("power-law exponent must exceed 1");
    return SeriesLaw(
        "power", [p](std::int64_t k) { return k < 1 ? 0.0 : std::pow(double(k), -p); },
        [p](std::int64_t n) { return power_tail(p, n); });
}

SeriesLaw SeriesLaw::finite(std::vector<double> weights) {
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("finite law weights must be >= 0");
    }
    std::vector<double> suffix(weights.size() + 1, 0.0);
    for (std::size_t k = weights.size(); k > 0; --k) suffix[k - 1] = suffix[k] + weights[k - 1];
    return SeriesLaw(
        "finite",
        [weights](std::int64_t k) {
            return (k < 1 || k > std::int64_t(weights.size())) ? 0.0 : weights[std::size_t(k - 1)];
        },
        [suffix](std::int64_t n) {
            if (n <= 0) return suffix[0];
            return n >= std::int64_t(suffix.size()) ? 0.0 : suffix[std::size_t(n)];
        });
}

double SeriesLaw::pmf(std::int64_t k) const { return k < 1 ? 0.0 : mass_(k) / total_; }

double SeriesLaw::tail(std::int64_t n) const { return n <= 0 ? 1.0 : tail_(n) / total_; }

std::int64_t SeriesLaw::sample(RandomStream& rng) const {
    const double target = rng.uniform() * total_;
    // Smallest k with tail(k) < target.
    std::int64_t lo = 0;
    std::int64_t hi = 1;
    while (tail_(hi) >= target) {
        lo = hi;
        if (hi > (std::int64_t(1) << 61)) throw std::runtime_error("law '" + name_ + "' sampler ran away");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (tail_(mid) >= target) lo = mid; else hi = mid;
    }
    return hi;
}

}  // namespace kalikow
