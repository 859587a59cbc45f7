#include <doctest.h>

#include <cmath>

#include "kalikow/core.hpp"
#include "kalikow/model.hpp"
#include "kalikow/models.hpp"

using namespace kalikow;

TEST_CASE("neighborhood measure") {
    CHECK(neighborhood_measure(Neighborhood(), {{0, 5.0}}) == 0.0);
    const Neighborhood one(std::vector<NeighborhoodPiece>{{3, {-1.0, -0.5}}});
    CHECK(neighborhood_measure(one, {{3, 2.0}}) == doctest::Approx(1.0));
    const Neighborhood two(std::vector<NeighborhoodPiece>{{1, {-2.0, -1.0}}, {2, {-1.0, 0.0}}});
    CHECK(neighborhood_measure(two, {{1, 1.0}, {2, 3.0}}) == doctest::Approx(4.0));
}

TEST_CASE("neighborhoods normalize overlapping pieces") {
    const Neighborhood v(std::vector<NeighborhoodPiece>{{0, {-1.0, -0.5}}, {0, {-0.7, 0.0}}, {1, {-2.0, -1.0}}});
    REQUIRE(v.pieces().size() == 2);
    CHECK(v.length_on(0) == doctest::Approx(1.0));
    CHECK(v.earliest() == -2.0);
    CHECK_THROWS(Neighborhood(std::vector<NeighborhoodPiece>{{0, {-1.0, 0.5}}}));
}

TEST_CASE("agrees_on") {
    const Neighborhood v(std::vector<NeighborhoodPiece>{{1, {-0.5, 0.0}}});
    Configuration x, y;
    x.add(1, -0.3);
    CHECK(agrees_on(x, x, v));
    CHECK_FALSE(agrees_on(x, y, v));
    Configuration z;
    z.add(1, -0.7);
    CHECK(agrees_on(z, y, v));
}

TEST_CASE("shift_to_origin") {
    CHECK(shift_to_origin(Configuration(), 3.0).empty());
    Configuration x;
    x.add(1, 2.0);
    x.add(1, 5.0);
    const auto s = shift_to_origin(x, 5.0);
    REQUIRE(s.size() == 1);
    CHECK(s.points(1)[0] == -3.0);
    Configuration y;
    y.add(2, -1.0);
    const auto t = shift_to_origin(y, 0.0);
    REQUIRE(t.size() == 1);
    CHECK(t.points(2)[0] == -1.0);
}

TEST_CASE("configuration invariants") {
    Configuration x;
    x.add(0, 1.0);
    CHECK_THROWS_AS(x.add(0, 1.0), ConfigurationError);
    x.add(1, 0.5);
    x.add(0, 0.2);
    const auto events = x.sorted_events();
    REQUIRE(events.size() == 3);
    CHECK(events[0].first == 0.2);
    CHECK(events[1] == std::pair<double, NodeId>{0.5, 1});
    Configuration w(Interval{0.0, 1.0});
    CHECK_THROWS(w.add(0, 1.5));
}

TEST_CASE("past view lags and ages") {
    Configuration x;
    x.add(0, 1.0);
    x.add(0, 2.5);
    x.add(1, 2.0);
    const PastView past(x, 3.0);
    std::vector<double> lags;
    past.for_each_lag(0, {-10.0, 0.0}, [&](double l) { lags.push_back(l); });
    REQUIRE(lags.size() == 2);
    CHECK(lags[0] == doctest::Approx(0.5));
    CHECK(lags[1] == doctest::Approx(2.0));
    CHECK(past.age(0) == doctest::Approx(0.5));
    CHECK(std::isinf(past.age(7)));
    CHECK(past.count_in(1, {-1.0, 0.0}) == 1);
    CHECK(past.count_in(1, {-1.0 + 1e-9, 0.0}) == 0);
}

TEST_CASE("subspace guards") {
    Configuration x;
    x.add(0, 0.0);
    x.add(0, 0.05);
    CHECK_FALSE(SubspaceGuard::refractory(0.1).contains(PastView(x, 1.0)));
    CHECK(SubspaceGuard::refractory(0.01).contains(PastView(x, 1.0)));
    CHECK(SubspaceGuard::activity(1.0, 2).contains(PastView(x, 1.0)));
    CHECK_FALSE(SubspaceGuard::activity(1.0, 1).contains(PastView(x, 1.0)));
    CHECK(SubspaceGuard::none().contains(PastView(x, 1.0)));
}

TEST_CASE("evaluate_decomposition") {
    KernelMatrix zero(1);
    const LinearHawkesModel model({0.5}, zero, 0.5);
    const Configuration empty;
    CHECK(evaluate_decomposition(model, 0, empty, 0) == 0.0);
    for (std::size_t n : {1, 2, 10}) CHECK(evaluate_decomposition(model, 0, empty, n) == doctest::Approx(0.5));
}

TEST_CASE("evaluate_decomposition converges to psi(0) on the lattice") {
    const auto model = make_lattice_model(4.0, 4.0, 1.0);
    const Configuration empty;
    for (std::size_t n : {1, 5, 20}) {
        const double partial = evaluate_decomposition(model, 0, empty, n);
        double tail = 0.0;
        for (std::int64_t k = std::int64_t(n) + 1; k < 5000; ++k) tail += model.gamma_bar(0, k);
        CHECK(std::abs(partial - 1.0) <= tail + 1e-12);
    }
}
