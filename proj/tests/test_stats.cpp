#include <doctest.h>

#include <cmath>

#include "kalikow/random.hpp"
#include "kalikow/sampling.hpp"
#include "kalikow/stats.hpp"

using namespace kalikow;

TEST_CASE("kolmogorov distribution tail") {
    CHECK(stats::kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(stats::kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
    CHECK(stats::kolmogorov_survival(0.0) == 1.0);
}

TEST_CASE("ks test on exponential samples") {
    RandomStream rng(1);
    std::vector<double> xs;
    for (int k = 0; k < 5000; ++k) xs.push_back(sample_exponential(rng, 2.0));
    CHECK(stats::ks_exponential(xs, 2.0).p_value > 0.01);
    CHECK(stats::ks_exponential(xs, 2.3).p_value < 0.01);
}

TEST_CASE("chi-square") {
    CHECK(stats::chi_square_survival(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(stats::chi_square_survival(18.307038053275146, 10.0) == doctest::Approx(0.05).epsilon(1e-9));
    const auto pmf = stats::poisson_pmf(3.0, 50);
    double total = 0.0;
    for (const auto& [k, p] : pmf) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pmf.at(2) == doctest::Approx(4.5 * std::exp(-3.0)));
}

TEST_CASE("total variation and moments") {
    CHECK(stats::total_variation({1, 2, 3}, {3, 2, 1}) == 0.0);
    CHECK(stats::total_variation({0, 0}, {1, 1}) == 1.0);
    CHECK(stats::total_variation({0, 1}, {0, 0}) == doctest::Approx(0.5));
    CHECK(stats::mean({1.0, 2.0, 3.0}) == 2.0);
    CHECK(stats::variance({1.0, 2.0, 3.0}) == 1.0);
    CHECK(stats::standard_error({1.0, 2.0, 3.0}) == doctest::Approx(1.0 / std::sqrt(3.0)));
}
