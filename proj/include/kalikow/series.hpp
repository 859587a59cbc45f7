#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kalikow/random.hpp"

namespace kalikow {

/// sum_{k > n} k^{-s} for s > 1, n >= 0. Explicit summation for small k and
/// an Euler-Maclaurin tail beyond; relative error below 1e-13.
double power_tail(double s, std::int64_t n);

/// Riemann zeta(s) for s > 1.
inline double zeta(double s) { return power_tail(s, 0); }

/// Law on k = 1, 2, ... given by nonnegative masses with a closed-form tail.
///
/// `mass(k)` and `tail(n) = sum_{k>n} mass(k)` may be unnormalized; the law
/// is mass / total with total = tail(0). Sampling is exact inversion on the
/// tail function (exponential search then bisection).
class SeriesLaw {
public:
    using Term = std::function<double(std::int64_t)>;

    SeriesLaw(std::string name, Term mass, Term tail);

    /// (1 - r) r^{k-1}.
    static SeriesLaw geometric(double r);
    /// k^{-p} / zeta(p), p > 1.
    static SeriesLaw power(double p);
    /// Finite law with explicit masses for k = 1..weights.size().
    static SeriesLaw finite(std::vector<double> weights);

    const std::string& name() const { return name_; }
    double total() const { return total_; }

    /// Normalized pmf at k (0 for k < 1).
    double pmf(std::int64_t k) const;
    /// Normalized mass beyond n.
    double tail(std::int64_t n) const;

    std::int64_t sample(RandomStream& rng) const;

private:
    std::string name_;
    Term mass_;
    Term tail_;
    double total_;
};

}  // namespace kalikow
