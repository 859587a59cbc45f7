#include <doctest.h>

#include <cmath>
#include <set>

#include "kalikow/random.hpp"
#include "kalikow/sampling.hpp"
#include "kalikow/series.hpp"
#include "kalikow/stats.hpp"

using namespace kalikow;

TEST_CASE("exponential moments") {
    RandomStream rng(42);
    std::vector<double> xs;
    for (int k = 0; k < 100000; ++k) xs.push_back(sample_exponential(rng, 2.0));
    const double sigma_mean = 0.5 / std::sqrt(1e5);
    CHECK(std::abs(stats::mean(xs) - 0.5) < 3.0 * sigma_mean);
    // (mu4 - sigma^4) / n with mu4 = 9 / rate^4
    const double sigma_var = std::sqrt((9.0 / 16.0 - 1.0 / 16.0) / 1e5);
    CHECK(std::abs(stats::variance(xs) - 0.25) < 3.0 * sigma_var);
    CHECK_THROWS_AS(sample_exponential(rng, 0.0), std::invalid_argument);
}

TEST_CASE("streams are reproducible and split") {
    RandomStream a(7, {1, 2}), b(7, {1, 2});
    for (int k = 0; k < 5; ++k) CHECK(a() == b());
    RandomStream c = RandomStream(7).child(1).child(2);
    RandomStream d(7, {1, 2});
    CHECK(c() == d());
    CHECK(RandomStream(7).child(0)() != RandomStream(7).child(1)());
    RandomStream u(3);
    for (int k = 0; k < 1000; ++k) {
        const double x = u.uniform();
        CHECK((x > 0.0 && x < 1.0));
    }
}

TEST_CASE("poisson on a region") {
    RandomStream rng(5);
    CHECK(sample_poisson_region(rng, 3.0, std::vector<Interval>{}).empty());
    std::vector<double> counts;
    const std::vector<Interval> one{{0.0, 2.0}};
    for (int k = 0; k < 10000; ++k) counts.push_back(double(sample_poisson_region(rng, 3.0, one).size()));
    CHECK(std::abs(stats::mean(counts) - 6.0) < 3.0 * std::sqrt(6.0 / 1e4));
    // Var of the sample variance of Poisson(6) is about (mu + 2 mu^2) / n
    CHECK(std::abs(stats::variance(counts) - 6.0) < 3.0 * std::sqrt((6.0 + 72.0) / 1e4));
}

TEST_CASE("poisson on a union is independent per piece") {
    RandomStream rng(6);
    const std::vector<Interval> two{{0.0, 1.0}, {5.0, 6.0}};
    std::vector<long> first, second, joint;
    for (int k = 0; k < 10000; ++k) {
        const auto pts = sample_poisson_region(rng, 3.0, two);
        long a = 0, b = 0;
        for (double t : pts) {
            CHECK(((t >= 0.0 && t < 1.0) || (t >= 5.0 && t < 6.0)));
            (t < 1.0 ? a : b) += 1;
        }
        CHECK(std::is_sorted(pts.begin(), pts.end()));
        first.push_back(a);
        second.push_back(b);
        joint.push_back(std::min(a, 5L) * 6 + std::min(b, 5L));
    }
    CHECK(stats::chi_square_gof(first, stats::poisson_pmf(3.0, 40)).p_value > 0.01);
    CHECK(stats::chi_square_gof(second, stats::poisson_pmf(3.0, 40)).p_value > 0.01);
    // Independence: the joint law of the capped counts is the product.
    const auto pmf = stats::poisson_pmf(3.0, 40);
    auto capped = [&](long c) {
        if (c < 5) return pmf.at(c);
        double tail = 0.0;
        for (const auto& [k, p] : pmf) tail += k >= 5 ? p : 0.0;
        return tail;
    };
    std::map<long, double> product;
    for (long a = 0; a <= 5; ++a) {
        for (long b = 0; b <= 5; ++b) product[a * 6 + b] = capped(a) * capped(b);
    }
    CHECK(stats::chi_square_gof(joint, product).p_value > 0.01);
}

TEST_CASE("region ledger realizes each region once") {
    RegionLedger ledger(RandomStream(11));
    const auto first = ledger.realize_new(0, Interval{-1.0, 0.0}, 5.0);
    for (const auto& p : first) CHECK(p.fresh);
    REQUIRE(ledger.coverage(0).size() == 1);
    CHECK(ledger.coverage(0)[0].lo == -1.0);
    CHECK(ledger.coverage(0)[0].hi == 0.0);

    const auto again = ledger.realize_new(0, Interval{-1.0, 0.0}, 5.0);
    REQUIRE(again.size() == first.size());
    for (std::size_t k = 0; k < again.size(); ++k) {
        CHECK_FALSE(again[k].fresh);
        CHECK(again[k].id == first[k].id);
        CHECK(again[k].time == first[k].time);
    }

    const auto wider = ledger.realize_new(0, Interval{-2.0, 0.0}, 5.0);
    std::size_t old = 0;
    for (const auto& p : wider) {
        if (p.fresh) {
            CHECK(p.time < -1.0);
            CHECK(p.time >= -2.0);
        } else {
            ++old;
        }
    }
    CHECK(old == first.size());
    REQUIRE(ledger.coverage(0).size() == 1);
    CHECK(ledger.coverage(0)[0].lo == -2.0);
    CHECK(ledger.covered(0, {-1.5, -0.5}));
    CHECK_FALSE(ledger.covered(0, {-3.0, -1.0}));
}

TEST_CASE("ledger next_point agrees with region realization") {
    RegionLedger ledger(RandomStream(12));
    const auto p = ledger.next_point(0, 0.0, 2.0);
    CHECK(p.time >= 0.0);
    CHECK(ledger.covered(0, {0.0, p.time}));
    const auto same = ledger.realize_new(0, Interval{0.0, p.time + 1e-12}, 2.0);
    REQUIRE(same.size() == 1);
    CHECK(same[0].id == p.id);
    const auto q = ledger.next_point(0, 0.0, 2.0);
    CHECK(q.id == p.id);
}

TEST_CASE("series laws") {
    CHECK(power_tail(2.0, 0) == doctest::Approx(std::riemann_zeta(2.0)).epsilon(1e-13));
    CHECK(power_tail(3.5, 0) == doctest::Approx(std::riemann_zeta(3.5)).epsilon(1e-13));
    CHECK(power_tail(2.0, 1) == doctest::Approx(std::riemann_zeta(2.0) - 1.0).epsilon(1e-13));
    CHECK(power_tail(4.0, 1000) == doctest::Approx(1.0 / (3.0 * std::pow(1000.5, 3.0))).epsilon(1e-5));

    const auto law = SeriesLaw::power(4.0);
    RandomStream rng(13);
    const int n = 100000;
    int ones = 0;
    for (int k = 0; k < n; ++k) ones += law.sample(rng) == 1 ? 1 : 0;
    const double p1 = 1.0 / std::riemann_zeta(4.0);
    CHECK(std::abs(double(ones) / n - p1) < 3.0 * std::sqrt(p1 * (1.0 - p1) / n));

    const auto two = SeriesLaw::finite({0.25, 0.75});
    int first = 0;
    for (int k = 0; k < 10000; ++k) first += two.sample(rng) == 1 ? 1 : 0;
    CHECK(std::abs(first / 1e4 - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / 1e4));

    const auto g = SeriesLaw::geometric(0.5);
    CHECK(g.pmf(3) == doctest::Approx(0.125));
    CHECK(g.tail(2) == doctest::Approx(0.25));
}
