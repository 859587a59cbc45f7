#include <doctest.h>

#include <cmath>
#include <limits>

#include "kalikow/models.hpp"
#include "kalikow/random.hpp"
#include "kalikow/sampling.hpp"

using namespace kalikow;

namespace {

// Random configuration on [-span, 0) with same-node gaps > gap.
Configuration random_past(RandomStream& rng, int nodes, double rate, double span, double gap) {
    Configuration x;
    for (int j = 0; j < nodes; ++j) {
        const std::vector<Interval> region{{-span, 0.0}};
        double last = -std::numeric_limits<double>::infinity();
        for (double t : sample_poisson_region(rng, rate, region)) {
            if (t - last > gap) {
                x.add(j, t);
                last = t;
            }
        }
    }
    return x;
}

LinearHawkesModel two_node_linear() {
    KernelMatrix k(2);
    k.set(0, 1, Kernel::exponential(1.0, 1.0));
    k.set(0, 0, Kernel::exponential(0.4, 2.0));
    k.set(1, 0, Kernel::step({0.0, 0.5, 1.5}, {0.6, 0.2}));
    return LinearHawkesModel({0.5, 0.3}, k, 0.5);
}

}  // namespace

TEST_CASE("intensity examples") {
    const auto linear = two_node_linear();
    CHECK(linear.intensity(0, Configuration()) == doctest::Approx(0.5));

    KernelMatrix k(1);
    k.set(0, 0, Kernel::exponential(0.5, 5.0));
    const AgeHawkesModel age(RateFunction::affine(2.0, 1.0), std::make_shared<FiniteAgeNetwork>(k), 0.1,
                             AgeHawkesModel::GammaBarBounds{});
    Configuration x;
    x.add(0, -0.05);
    CHECK(age.raw_intensity(0, PastView(x, 0.0)) == 0.0);

    const GLModel gl({RateFunction::affine(0.0, 1.0), RateFunction::affine(0.0, 1.0)}, {{0.0, 1.0}, {0.0, 0.0}},
                     {{0.0, 2.0}, {0.0, 0.0}}, 0.1);
    Configuration y;
    y.add(1, -0.9);
    y.add(1, -0.5);
    y.add(1, -0.2);
    CHECK(gl.intensity(0, y) == doctest::Approx(2.0));
}

TEST_CASE("delta examples") {
    KernelMatrix k(2);
    k.set(0, 1, Kernel::exponential(1.0, 1.0));
    const LinearHawkesModel linear({0.0, 0.0}, k, 0.5);
    Configuration x;
    x.add(1, -0.3);
    CHECK(linear.delta(0, NeighborhoodDescriptor::atomic(1, 1), x) == doctest::Approx(std::exp(-0.3)));
    CHECK(linear.delta(0, NeighborhoodDescriptor::atomic(1, 2), x) == 0.0);

    const AnalyticHawkesModel analytic({RateFunction::exp(1.0, 1.0), RateFunction::exp(1.0, 1.0)}, k, 0.5,
                                       std::numeric_limits<double>::infinity());
    CHECK(analytic.delta(0, NeighborhoodDescriptor::taylor({{1, 1}, {1, 1}}), x) ==
          doctest::Approx(std::exp(-0.6) / 2.0));
    CHECK(analytic.delta(0, NeighborhoodDescriptor::empty_set(), x) == doctest::Approx(1.0));

    const auto lattice = make_lattice_model(4.0, 4.0, 1.0);
    CHECK(lattice.delta(0, NeighborhoodDescriptor::nested(1), Configuration()) == doctest::Approx(1.0));
}

TEST_CASE("gamma bar on the lattice") {
    const auto lattice = make_lattice_model(4.0, 4.0, 1.0);
    CHECK(lattice.gamma_bar(0, 1) == doctest::Approx(1.0));
    CHECK(lattice.gamma_bar(0, 2) == doctest::Approx(2.0 + std::exp(-1.0)));
    CHECK(lattice.gamma_bar(0, 3) == doctest::Approx(0.125 + 2.0 * std::exp(-2.0)));
    for (std::int64_t k = 4; k < 12; ++k) {
        double sum = 1.0;
        for (std::int64_t m = 1; m <= k - 2; ++m) sum += std::pow(double(m), -4.0);
        const double closed = 2.0 / std::pow(double(k - 1), 4.0) + std::exp(-double(k - 1)) * sum;
        CHECK(lattice.gamma_bar(7, k) == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("lattice preset couplings") {
    const LatticeAgeNetwork net(4.0, 1.0);
    CHECK(net.coupling(1) == doctest::Approx(0.5));
    CHECK(net.coupling(-3) == doctest::Approx(1.0 / (2.0 * 81.0)));
    CHECK(net.kernel(2, 4).alpha() == doctest::Approx(1.0 / 32.0));
    CHECK(net.level_of(0, 3) == 4);
    CHECK(net.ring_size(0, 3) == 5);
}

TEST_CASE("gamma bar sum bound on the lattice") {
    const double delta = 0.5;
    const auto lattice = make_lattice_model(4.0, 4.0, delta);
    double sum = 0.0;
    for (std::int64_t k = 1; k < 20000; ++k) sum += lattice.gamma_bar(0, k);
    // psi(0) + 2L[sum_j h(0) + sum_j ||h||_1 / delta] with L = 1
    const double couplings = 1.0 + 2.0 * 0.5 * std::riemann_zeta(4.0);
    CHECK(sum <= 1.0 + 2.0 * (couplings + couplings * delta / delta));
}

TEST_CASE("neighborhood sampling") {
    const auto constant = TableModel::constant(1, 1.0, 2.0);
    RandomStream rng(1);
    for (int k = 0; k < 100; ++k) {
        const auto v = constant.sample_neighborhood(0, rng);
        CHECK(v.kind == NeighborhoodDescriptor::Kind::Table);
        CHECK(constant.expand(0, v).empty());
    }

    const double C = lattice_bound_constant(4.0);
    const AgeHawkesModel lattice(RateFunction::affine(1.0, 1.0), std::make_shared<LatticeAgeNetwork>(4.0, 0.01), 0.01,
                                 AgeHawkesModel::PowerLawBounds{C, 4.0});
    const int n = 100000;
    int ones = 0;
    for (int k = 0; k < n; ++k) ones += lattice.sample_neighborhood(0, rng).params.at(0) == 1 ? 1 : 0;
    const double p1 = 1.0 / std::riemann_zeta(4.0);
    CHECK(std::abs(double(ones) / n - p1) < 3.0 * std::sqrt(p1 * (1.0 - p1) / n));
}

TEST_CASE("local bounds") {
    const auto linear = two_node_linear();
    CHECK(linear.local_bound(0, PastView(Configuration(), 0.0)).value >= 0.5 / 0.5);
    const auto constant = TableModel::constant(1, 1.5, 3.0);
    CHECK(constant.local_bound(0, PastView(Configuration(), 0.0)).value == doctest::Approx(3.0));
    const auto lattice = make_lattice_model(4.0, 4.0, 0.1);
    RandomStream rng(2);
    Configuration x;
    for (int j = -2; j <= 2; ++j) x.add(j, -0.5 - 0.1 * j);
    CHECK(lattice.local_bound(0, PastView(x, 0.0)).value == *lattice.global_bound(0));
    CHECK(lattice.local_bound(0, PastView(Configuration(), 0.0)).value == *lattice.global_bound(0));
}

TEST_CASE("linear local bound dominates components until the next point") {
    const auto model = two_node_linear();
    RandomStream rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto x = random_past(rng, 2, 2.0, 4.0, 0.0);
        if (trial % 2 == 0) x.add(0, 0.0);
        const PastView closed(x, std::nextafter(0.0, 1.0));
        for (NodeId i : {0, 1}) {
            const double bound = model.local_bound(i, closed).value;
            for (double s : {1e-9, 0.01, 0.3, 0.49, 0.5, 0.51, 1.7, 3.0}) {
                for (const auto& v : model.enumerate(i, 40)) {
                    CHECK(model.raw_component(i, v, PastView(x, s)) <= bound * (1.0 + 1e-12));
                }
            }
        }
    }
}

TEST_CASE("age model deltas are nonnegative and below gamma bar") {
    KernelMatrix k(3);
    k.set(0, 1, Kernel::exponential(0.7, 2.0));
    k.set(0, 2, Kernel::step({0.0, 0.3, 1.0}, {0.5, 0.2}));
    k.set(1, 0, Kernel::exponential(0.4, 1.0));
    k.set(2, 2, Kernel::exponential(0.3, 3.0));
    k.set(0, 0, Kernel::exponential(0.2, 4.0));
    const double delta = 0.1;
    const AgeHawkesModel model(RateFunction::sigmoid(3.0, 2.0, 0.5),
                               std::make_shared<FiniteAgeNetwork>(k, std::vector<std::vector<std::vector<NodeId>>>{
                                                                         {{0}, {1}, {2}}, {{1}, {0, 2}}, {{2}, {0, 1}}}),
                               delta, AgeHawkesModel::GammaBarBounds{});
    RandomStream rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        const auto x = random_past(rng, 3, 3.0, 3.0, delta);
        const PastView past(x, 0.0);
        for (NodeId i = 0; i < 3; ++i) {
            double running = 0.0;
            for (std::int64_t n = 1; n <= 40; ++n) {
                const double d = model.delta(i, NeighborhoodDescriptor::nested(n), past);
                CHECK(d >= 0.0);
                CHECK(d <= model.gamma_bar(i, n) * (1.0 + 1e-12) + 1e-15);
                running += d;
                CHECK(running == doctest::Approx(model.partial_rate(i, n, past)).epsilon(1e-12));
            }
            CHECK(evaluate_decomposition(model, i, past, 400) == doctest::Approx(model.intensity(i, past)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gl telescoping and identity") {
    const GLModel model({RateFunction::clipped(0.5, 1.0, 3.0), RateFunction::affine(0.2, 0.5),
                         RateFunction::sigmoid(2.0, 1.5, 1.0)},
                        {{0.0, 0.5, 0.2}, {0.4, 0.0, 0.3}, {0.1, 0.6, 0.0}}, {{0.0, 1.0, 0.5}, {1.0, 0.0, 1.0}, {2.0, 1.0, 0.0}},
                        0.2);
    RandomStream rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const auto x = random_past(rng, 3, 2.0, 3.0, 0.0);
        const PastView past(x, 0.0);
        for (NodeId i = 0; i < 3; ++i) {
            double running = model.delta(i, NeighborhoodDescriptor::empty_set(), past);
            for (std::int64_t n = 1; n <= 30; ++n) {
                const double d = model.delta(i, NeighborhoodDescriptor::nested(n), past);
                CHECK(d >= 0.0);
                running += d;
                const double closed = model.psi(i)(model.saturated_drive(i, n, past));
                CHECK(running == doctest::Approx(closed).epsilon(1e-12));
            }
            CHECK(evaluate_decomposition(model, i, past, 200) == doctest::Approx(model.intensity(i, past)).epsilon(1e-12));
        }
    }
}

TEST_CASE("analytic partial sums match the Taylor polynomial") {
    KernelMatrix k(1);
    k.set(0, 0, Kernel::step({0.0, 2.0}, {0.3}));
    const double eps = 0.5;
    const AnalyticHawkesModel model({RateFunction::exp(1.0, 1.0)}, k, eps, std::numeric_limits<double>::infinity());
    Configuration x;
    x.add(0, -1.7);
    x.add(0, -1.1);
    x.add(0, -0.45);
    x.add(0, -0.2);
    const PastView past(x, 0.0);
    const double drive = model.drive(0, past);
    CHECK(drive == doctest::Approx(1.2));
    // Atoms (0, n) with n = 1..4 carry every point.
    double partial = 0.0, taylor = 0.0, factorial = 1.0;
    for (std::size_t order = 0; order <= 4; ++order) {
        if (order > 0) factorial *= double(order);
        taylor += std::pow(drive, double(order)) / factorial;
        std::vector<std::int64_t> idx(order, 1);
        for (;;) {
            std::vector<std::pair<NodeId, std::int64_t>> atoms;
            for (auto n : idx) atoms.push_back({0, n});
            partial += model.delta(0, NeighborhoodDescriptor::taylor(atoms), past);
            std::size_t m = 0;
            while (m < order && ++idx[m] > 4) idx[m++] = 1;
            if (m == order) break;
        }
        CHECK(partial == doctest::Approx(taylor).epsilon(1e-12));
    }
}

TEST_CASE("pmf normalization") {
    const auto linear = two_node_linear();
    const auto lattice = make_lattice_model(4.0, 4.0, 0.1);
    KernelMatrix k(2);
    k.set(0, 1, Kernel::exponential(0.3, 2.0));
    k.set(0, 0, Kernel::exponential(0.3, 1.0));
    const AnalyticHawkesModel analytic({RateFunction::cosh(1.0, 1.0), RateFunction::exp(1.0, 0.5)}, k, 0.5, 10.0);
    const GLModel gl({RateFunction::affine(0.0, 1.0), RateFunction::affine(0.0, 1.0)}, {{0.0, 1.0}, {1.0, 0.0}},
                     {{0.0, 2.0}, {2.0, 0.0}}, 0.1);
    const std::vector<const KalikowModel*> models{&linear, &lattice, &analytic, &gl};
    for (const auto* m : models) {
        for (std::size_t n : {1, 7, 300}) {
            double s = 0.0;
            for (const auto& v : m->enumerate(0, n)) s += m->pmf(0, v);
            CHECK(s + m->tail_mass(0, n) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("zero weight components follow 0/0 = 0") {
    std::map<NodeId, TableModel::NodeTable> tables;
    tables[0] = {2.0,
                 {{Neighborhood(), 1.0, 1.0, 0.0},
                  {Neighborhood(std::vector<NeighborhoodPiece>{{0, {-1.0, 0.0}}}), 0.0, 2.0, 0.0}}};
    const TableModel model(tables);
    CHECK(model.component_value(0, NeighborhoodDescriptor::table(1), Configuration()) == 0.0);
    CHECK(model.component_value(0, NeighborhoodDescriptor::table(0), Configuration()) == 1.0);
}

TEST_CASE("linear identity: decomposition sums to the intensity") {
    const auto model = two_node_linear();
    RandomStream rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_past(rng, 2, 2.0, 2.9, 0.0);
        for (NodeId i : {0, 1}) {
            CHECK(evaluate_decomposition(model, i, x, 40) == doctest::Approx(model.intensity(i, x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("model validation") {
    KernelMatrix k(1);
    CHECK_THROWS_AS(LinearHawkesModel({1.0}, k, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_lattice_model(4.0, 5.0, 0.1), std::invalid_argument);
    CHECK_THROWS(AgeHawkesModel(RateFunction::exp(1.0, 1.0), std::make_shared<FiniteAgeNetwork>(k), 0.1,
                                AgeHawkesModel::GammaBarBounds{}));
    std::map<NodeId, TableModel::NodeTable> bad;
    bad[0] = {1.0, {{Neighborhood(), 0.5, 1.0, 0.0}, {Neighborhood(), 0.4, 1.0, 0.0}}};
    CHECK_THROWS_AS(TableModel{bad}, std::invalid_argument);
}
