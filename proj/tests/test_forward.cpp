#include <doctest.h>

#include <cmath>
#include <limits>

#include "kalikow/forward_sim.hpp"
#include "kalikow/models.hpp"
#include "kalikow/oracles.hpp"
#include "kalikow/stats.hpp"

using namespace kalikow;

namespace {
constexpr std::size_t kNoCap = std::size_t(-1);
}

TEST_CASE("zero intensity accepts nothing") {
    const LinearHawkesModel model({0.0}, KernelMatrix(1), 0.5);
    const auto run = forward_simulate(model, {0}, 10.0, kNoCap, SubspaceGuard::none(), RandomStream(1));
    CHECK(run.accepted.empty());
    CHECK(run.stop_reason == StopReason::TimeReached);
}

TEST_CASE("zero step budget") {
    const auto model = TableModel::constant(1, 1.0, 1.0);
    const auto run = forward_simulate(model, {0}, 10.0, 0, SubspaceGuard::none(), RandomStream(1));
    CHECK(run.accepted.empty());
    CHECK(run.stop_reason == StopReason::StepBudget);
}

TEST_CASE("step budget stops at n points") {
    const auto model = TableModel::constant(2, 1.0, 1.0);
    const auto run = forward_simulate(model, {0, 1}, 1e6, 7, SubspaceGuard::none(), RandomStream(2));
    CHECK(run.accepted.size() == 7);
    CHECK(run.stop_reason == StopReason::StepBudget);
}

TEST_CASE("constant rate gives Poisson counts") {
    const auto model = TableModel::constant(1, 1.0, 2.0);
    std::vector<long> counts;
    const RandomStream root(3);
    for (std::size_t k = 0; k < 10000; ++k) {
        counts.push_back(long(forward_simulate(model, {0}, 10.0, kNoCap, SubspaceGuard::none(), root.child(k)).accepted.size()));
    }
    CHECK(stats::chi_square_gof(counts, stats::poisson_pmf(10.0, 60)).p_value > 0.01);
}

TEST_CASE("linear Hawkes matches the Ogata oracle") {
    KernelMatrix k(1);
    const auto h = Kernel::exponential(0.5, 1.0);
    k.set(0, 0, h);
    const LinearHawkesModel model({1.0}, k, 0.5);
    std::vector<long> a, b;
    const RandomStream root(4);
    for (std::size_t n = 0; n < 10000; ++n) {
        a.push_back(long(forward_simulate(model, {0}, 2.0, kNoCap, SubspaceGuard::none(), root.child(0).child(n)).accepted.size()));
        auto rng = root.child(1).child(n);
        b.push_back(long(oracle::ogata_linear_hawkes(1.0, h, 2.0, rng).size()));
    }
    CHECK(stats::total_variation(a, b) < 0.05);
    CHECK(stats::chi_square_two_sample(a, b).p_value > 0.001);
}

TEST_CASE("forward runs are deterministic") {
    KernelMatrix k(2);
    k.set(0, 1, Kernel::exponential(0.5, 1.0));
    k.set(1, 0, Kernel::step({0.0, 1.0}, {0.4}));
    const LinearHawkesModel model({0.5, 0.5}, k, 0.5);
    const auto a = forward_simulate(model, {0, 1}, 20.0, kNoCap, SubspaceGuard::none(), RandomStream(5));
    const auto b = forward_simulate(model, {0, 1}, 20.0, kNoCap, SubspaceGuard::none(), RandomStream(5));
    CHECK(a.accepted == b.accepted);
    CHECK(a.proposals == b.proposals);
    const auto c = forward_simulate(model, {0, 1}, 20.0, kNoCap, SubspaceGuard::none(), RandomStream(6));
    CHECK_FALSE(a.accepted == c.accepted);
}

TEST_CASE("activity guard stops the run and drops the exiting point") {
    const auto model = TableModel::constant(1, 5.0, 5.0);
    const auto run = forward_simulate(model, {0}, 100.0, kNoCap, SubspaceGuard::activity(100.0, 3), RandomStream(7));
    CHECK(run.stop_reason == StopReason::GuardExit);
    CHECK(run.accepted.size() == 3);
    CHECK(run.stop_time > run.accepted.points(0).back());
}

TEST_CASE("analytic model exits its convergence domain") {
    KernelMatrix k(1);
    k.set(0, 0, Kernel::exponential(0.4, 0.5));
    const AnalyticHawkesModel model({RateFunction::exp(1.0, 1.0)}, k, 0.5, 1.0);
    const auto run = forward_simulate(model, {0}, 200.0, kNoCap, SubspaceGuard::none(), RandomStream(8));
    CHECK(run.stop_reason == StopReason::GuardExit);
    for (double t : run.accepted.points(0)) {
        CHECK(model.drive(0, PastView(run.accepted, std::nextafter(t, 1e300))) < 1.0);
    }
}

TEST_CASE("age model output respects the refractory gap") {
    KernelMatrix k(2);
    k.set(0, 1, Kernel::exponential(1.0, 2.0));
    k.set(1, 0, Kernel::exponential(1.0, 2.0));
    const double delta = 0.2;
    const AgeHawkesModel model(RateFunction::clipped(1.0, 2.0, 6.0), std::make_shared<FiniteAgeNetwork>(k), delta,
                               AgeHawkesModel::GammaBarBounds{});
    const auto run = forward_simulate(model, {0, 1}, 200.0, kNoCap, SubspaceGuard::none(), RandomStream(9));
    CHECK(run.stop_reason == StopReason::TimeReached);
    CHECK(run.accepted.size() > 50);
    for (const auto& [node, pts] : run.accepted.all()) {
        for (std::size_t m = 1; m < pts.size(); ++m) CHECK(pts[m] - pts[m - 1] > delta);
    }
}
