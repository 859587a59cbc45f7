#include <doctest.h>

#include <cmath>

#include "kalikow/analysis.hpp"
#include "kalikow/models.hpp"
#include "kalikow/perfect_sim.hpp"
#include "kalikow/stats.hpp"
#include "kalikow/validation.hpp"

using namespace kalikow;

namespace {

AncestorGraph clan(const KalikowModel& model, NodeId i, double T, RandomStream rng, RegionLedger& ledger,
                   const BackwardBudget& budget = {}) {
    auto draws = rng.child(1);
    return backward_clan(model, i, T, ledger, draws, budget);
}

TableModel single_neighborhood(double length, double bound, double base) {
    std::map<NodeId, TableModel::NodeTable> t;
    t[0] = {bound, {{Neighborhood(std::vector<NeighborhoodPiece>{{0, {-length, 0.0}}}), 1.0, base, 0.0}}};
    return TableModel(t);
}

}  // namespace

TEST_CASE("empty neighborhoods give a root-only clan") {
    const auto model = TableModel::constant(1, 1.0, 2.0);
    RegionLedger ledger(RandomStream(1).child(0));
    const auto g = clan(model, 0, 0.0, RandomStream(1), ledger);
    CHECK(g.size() == 1);
    CHECK(g.stopping_index == 1);
    CHECK(g.complete);
    CHECK(g.lookback == 0.0);
}

TEST_CASE("first generation mean is the neighborhood measure") {
    const auto model = single_neighborhood(0.25, 1.0, 0.5);
    const RandomStream root(2);
    std::vector<double> first;
    for (std::size_t k = 0; k < 10000; ++k) {
        RegionLedger ledger(root.child(k).child(0));
        BackwardBudget one;
        one.max_generations = 10000;
        const auto g = clan(model, 0, 0.0, root.child(k), ledger, one);
        first.push_back(g.generations.size() > 1 ? double(g.generations[1].size()) : 0.0);
    }
    CHECK(std::abs(stats::mean(first) - 0.25) < 3.0 * std::sqrt(0.25 / 1e4));
}

TEST_CASE("lattice clans are dominated by the branching bound") {
    const auto model = validation::stationarity_test_model();
    const auto summary = summarize_branching_invariant(model, 0);
    REQUIRE(summary.subcritical);
    REQUIRE(summary.expected_W);
    const double predicted = (*summary.expected_W)(0);
    CHECK(predicted == doctest::Approx(2.0).epsilon(1e-9));
    const RandomStream root(3);
    const std::size_t runs = 10000;
    std::vector<double> sizes, first;
    for (std::size_t k = 0; k < runs; ++k) {
        RegionLedger ledger(root.child(k).child(0));
        const auto g = clan(model, 0, 0.0, root.child(k), ledger);
        CHECK(g.complete);
        sizes.push_back(double(g.size()));
        first.push_back(g.generations.size() > 1 ? double(g.generations[1].size()) : 0.0);
    }
    // Overlapping regions are realized once, so the clan is no larger than the tree.
    const double first_mean = summary.M(0, 0);
    CHECK(std::abs(stats::mean(first) - first_mean) < 3.0 * stats::standard_error(first));
    CHECK(stats::mean(sizes) < predicted + 3.0 * stats::standard_error(sizes));
    CHECK(stats::mean(sizes) > 1.0 + first_mean - 3.0 * stats::standard_error(sizes));
}

TEST_CASE("root-only clan is accepted with probability c / Gamma") {
    const auto model = TableModel::constant(1, 1.0, 2.0);
    const RandomStream root(4);
    int accepted = 0;
    for (std::size_t k = 0; k < 10000; ++k) {
        RegionLedger ledger(root.child(k).child(0));
        auto g = clan(model, 0, 0.0, root.child(k), ledger);
        auto u = root.child(k).child(2);
        forward_accept(g, model, ledger, u);
        accepted += g.root().decision == Decision::Accepted ? 1 : 0;
    }
    CHECK(std::abs(accepted / 1e4 - 0.5) < 3.0 * std::sqrt(0.25 / 1e4));
}

TEST_CASE("age model rejects a root with an accepted point within delta") {
    const auto model = make_lattice_model(4.0, 4.0, 0.1);
    RegionLedger ledger(RandomStream(5));
    const auto pts = ledger.realize_new(0, Interval{-0.1, 0.0}, 1000.0);
    REQUIRE(!pts.empty());
    for (const auto& p : pts) ledger.state(p.id).decision = Decision::Accepted;
    AncestorGraph g;
    g.root_node = 0;
    g.points.push_back({0, 0.0, NeighborhoodDescriptor::nested(1), 0});
    g.generations = {{0}};
    g.stopping_index = 1;
    g.complete = true;
    RandomStream u(6);
    forward_accept(g, model, ledger, u);
    CHECK(g.root().decision == Decision::Rejected);
}

TEST_CASE("saturated components accept every clan point") {
    std::map<NodeId, TableModel::NodeTable> t;
    t[0] = {1.0,
            {{Neighborhood(), 0.5, 1.0, 0.0},
             {Neighborhood(std::vector<NeighborhoodPiece>{{0, {-0.5, 0.0}}}), 0.5, 1.0, 0.0}}};
    const TableModel model(t);
    const RandomStream root(7);
    for (std::size_t k = 0; k < 200; ++k) {
        RegionLedger ledger(root.child(k).child(0));
        auto g = clan(model, 0, 0.0, root.child(k), ledger);
        auto u = root.child(k).child(2);
        forward_accept(g, model, ledger, u);
        for (const auto& p : g.points) CHECK(p.decision == Decision::Accepted);
    }
}

TEST_CASE("constant model perfect sample has the right rate") {
    const auto model = TableModel::constant(1, 1.0, 2.0);
    const auto run = perfect_sample(model, 0, 1e4, RandomStream(8));
    CHECK(std::abs(double(run.points.size()) / 1e4 - 1.0) < 0.02);
    CHECK(perfect_sample(model, 0, 1e-12, RandomStream(8)).points.empty());
}

TEST_CASE("window reduction and multi-node windows") {
    const auto model = validation::clan_test_model();
    const auto a = perfect_sample(model, 0, 50.0, RandomStream(9));
    const auto b = perfect_sample_window(model, {{0, {0.0, 50.0}}}, RandomStream(9));
    CHECK(a.points == b.points);
    CHECK(perfect_sample_window(model, {}, RandomStream(9)).points.empty());

    const auto constant = TableModel::constant(2, 1.0, 1.5);
    std::vector<double> r0, r1;
    const RandomStream root(10);
    for (std::size_t k = 0; k < 400; ++k) {
        const auto run = perfect_sample_window(constant, {{0, {0.0, 10.0}}, {1, {0.0, 10.0}}}, root.child(k));
        r0.push_back(double(run.points.count(0)) / 10.0);
        r1.push_back(double(run.points.count(1)) / 10.0);
    }
    const double se = std::sqrt(1.0 / 10.0 / 400.0);
    CHECK(std::abs(stats::mean(r0) - 1.0) < 3.0 * se);
    CHECK(std::abs(stats::mean(r1) - 1.0) < 3.0 * se);
}

TEST_CASE("perfect samples are deterministic and refractory") {
    const auto model = validation::stationarity_test_model();
    const auto a = perfect_sample(model, 0, 20.0, RandomStream(11));
    const auto b = perfect_sample(model, 0, 20.0, RandomStream(11));
    CHECK(a.points == b.points);
    CHECK(a.points.size() > 5);
    const auto pts = a.points.points(0);
    for (std::size_t m = 1; m < pts.size(); ++m) CHECK(pts[m] - pts[m - 1] > model.delta());
}

TEST_CASE("supercritical clans exhaust the budget loudly") {
    const auto model = validation::gate_model(5.0);
    BackwardBudget tight;
    tight.max_points = 200;
    bool hit = false;
    for (std::size_t k = 0; k < 200 && !hit; ++k) {
        RegionLedger ledger(RandomStream(12).child(k).child(0));
        try {
            clan(model, 0, 0.0, RandomStream(12).child(k), ledger, tight);
        } catch (const BackwardBudgetExceeded& e) {
            hit = true;
            CHECK(e.partial().size() >= 200);
            CHECK_FALSE(e.partial().complete);
        }
    }
    CHECK(hit);
}
