#include <doctest.h>

#include <cmath>

#include "kalikow/analysis.hpp"
#include "kalikow/models.hpp"
#include "kalikow/series.hpp"
#include "kalikow/validation.hpp"

using namespace kalikow;

namespace {

LinearHawkesModel geometric_linear(double rate) {
    KernelMatrix k(1);
    k.set(0, 0, Kernel::exponential(0.1, 1.0));
    LinearHawkesModel m({1.0}, k, 0.5, LinearWeights{0.5, 0.5});
    m.declare_rates({{0, rate}});
    return m;
}

// Root of x = theta + m (e^x - 1) on the small branch, by bisection.
double poisson_root(double theta, double m) {
    double lo = 0.0, hi = std::log(1.0 / m);
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (mid - theta - m * (std::exp(mid) - 1.0) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("branching matrices") {
    const auto constant = TableModel::constant(1, 1.0, 2.0);
    CHECK(branching_matrix(constant, {0})(0, 0) == 0.0);

    std::map<NodeId, TableModel::NodeTable> t;
    t[0] = {1.0, {{Neighborhood(std::vector<NeighborhoodPiece>{{0, {-0.5, 0.0}}}), 1.0, 0.5, 0.0}}};
    CHECK(branching_matrix(TableModel(t), {0})(0, 0) == doctest::Approx(0.5));

    const auto linear = geometric_linear(1.0);
    CHECK(branching_matrix(linear, {0})(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("subcriticality") {
    const auto low = subcriticality_gamma(geometric_linear(1.0), {0});
    CHECK(low.gamma == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(low.subcritical);
    const auto high = subcriticality_gamma(geometric_linear(5.0), {0});
    CHECK(high.gamma == doctest::Approx(1.25).epsilon(1e-9));
    CHECK_FALSE(high.subcritical);
    CHECK(subcriticality_gamma(TableModel::constant(1, 1.0, 2.0), {0}).gamma == 0.0);

    const auto gate = summarize_branching(validation::gate_model(1.0), {0});
    CHECK(gate.gamma == doctest::Approx(0.25));
    CHECK(gate.gamma_enumerated == doctest::Approx(0.25));
}

TEST_CASE("enumerated gamma agrees with the closed form on an age network") {
    KernelMatrix k(2);
    k.set(0, 1, Kernel::exponential(0.3, 2.0));
    k.set(1, 0, Kernel::exponential(0.3, 2.0));
    k.set(0, 0, Kernel::exponential(0.2, 3.0));
    const AgeHawkesModel model(RateFunction::affine(0.5, 1.0), std::make_shared<FiniteAgeNetwork>(k), 0.05,
                               AgeHawkesModel::GammaBarBounds{});
    const auto s = summarize_branching(model, {0, 1});
    CHECK(s.gamma == doctest::Approx(s.gamma_enumerated).epsilon(1e-6));
    CHECK(s.gamma == doctest::Approx(s.M.rowwise().sum().maxCoeff()));
}

TEST_CASE("invariant reduction on the lattice") {
    const double delta = validation::stationarity_test_delta();
    const auto model = validation::stationarity_test_model();
    const auto s = summarize_branching_invariant(model, 0);
    CHECK(s.gamma == doctest::Approx(lattice_bound_constant(4.0) * delta * lattice_cost_series(4.0)));
    CHECK(s.gamma == doctest::Approx(0.5));
}

TEST_CASE("expected clan sizes") {
    CHECK(expected_clan_size(Eigen::MatrixXd::Zero(1, 1), 0) == 1.0);
    CHECK(expected_clan_size(Eigen::MatrixXd::Constant(1, 1, 0.5), 0) == doctest::Approx(2.0));
    Eigen::MatrixXd M(2, 2);
    M << 0.2, 0.3, 0.1, 0.4;
    CHECK(expected_clan_size(M, 0) == doctest::Approx(2.0));
    CHECK(expected_clan_size(M, 1) == doctest::Approx(2.0));
    Eigen::Matrix2f Mf = M.cast<float>();
    CHECK(expected_clan_sizes(Mf)(0) == doctest::Approx(2.0).epsilon(1e-5));
    CHECK_THROWS_AS(expected_clan_size(Eigen::MatrixXd::Constant(1, 1, 1.2), 0), NonSummable);
}

TEST_CASE("log-Laplace fixed point") {
    const std::vector<OffspringLaw> laws{OffspringLaw::poisson(Eigen::VectorXd::Constant(1, 0.5))};
    const auto zero = log_laplace_fixed_point(laws, Eigen::VectorXd::Zero(1));
    CHECK(zero.Phi(0) == 0.0);
    const auto st = log_laplace_fixed_point(laws, Eigen::VectorXd::Constant(1, 0.1));
    CHECK(st.residual < 1e-12);
    CHECK(st.Phi(0) == doctest::Approx(poisson_root(0.1, 0.5)).epsilon(1e-12));
    const auto J = log_laplace_jacobian_at_zero(laws);
    CHECK(std::abs(J(0, 0) - 2.0) / 2.0 < 1e-5);

    const std::vector<OffspringLaw> hot{OffspringLaw::poisson(Eigen::VectorXd::Constant(1, 0.9))};
    CHECK_THROWS_AS(log_laplace_fixed_point(hot, Eigen::VectorXd::Constant(1, 0.5)), LaplaceDivergence);
}

TEST_CASE("log-Laplace Jacobian matches the mean matrix") {
    Eigen::MatrixXd M(3, 3);
    M << 0.1, 0.3, 0.2, 0.05, 0.2, 0.1, 0.3, 0.1, 0.3;
    std::vector<OffspringLaw> laws;
    for (int a = 0; a < 3; ++a) laws.push_back(OffspringLaw::poisson(M.row(a).transpose()));
    const Eigen::MatrixXd J = log_laplace_jacobian_at_zero(laws);
    const Eigen::MatrixXd expected = (Eigen::MatrixXd::Identity(3, 3) - M).inverse();
    CHECK(((J - expected).array().abs() / expected.array().abs()).maxCoeff() < 1e-5);
    Eigen::VectorXd theta(3);
    theta << 0.01, -0.02, 0.015;
    const auto mix = log_laplace_fixed_point(laws, theta, 1e-13, LaplaceForm::Mixture);
    const auto prod = log_laplace_fixed_point(laws, theta, 1e-13, LaplaceForm::ProductOfMarginals);
    CHECK((mix.Phi - prod.Phi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mixture offspring laws of a table model") {
    const auto model = validation::clan_test_model();
    const auto laws = offspring_laws(model, {0, 1}, 1024);
    REQUIRE(laws.size() == 2);
    const Eigen::MatrixXd J = log_laplace_jacobian_at_zero(laws);
    const Eigen::MatrixXd expected = (Eigen::MatrixXd::Identity(2, 2) - branching_matrix(model, {0, 1})).inverse();
    CHECK(((J - expected).array().abs() / expected.array().abs()).maxCoeff() < 1e-5);
}

TEST_CASE("weight cost series") {
    CHECK(lattice_cost_series(4.0) == doctest::Approx(2.0 * std::riemann_zeta(2.0) - std::riemann_zeta(3.0)).epsilon(1e-12));
    CHECK(lattice_cost_series(4.0) == doctest::Approx(2.0878).epsilon(1e-4));
    CHECK_THROWS_AS(lattice_cost_series(3.0), NonSummable);
    CHECK_THROWS_AS(weight_cost_curve(4.0, 0.01, {4.5}), std::invalid_argument);

    const double delta = validation::stationarity_test_delta();
    const auto curve = weight_cost_curve(4.0, delta, {3.2, 3.4, 3.6, 3.8, 4.0});
    REQUIRE(curve.argmin);
    CHECK(*curve.argmin == 4.0);
    CHECK(curve.points.back().mean_offspring == doctest::Approx(0.5));
    for (std::size_t k = 1; k < curve.points.size(); ++k) CHECK(curve.points[k].f < curve.points[k - 1].f);
    const auto supercritical = weight_cost_curve(4.0, 4.0 * delta, {3.2, 4.0});
    CHECK(supercritical.points[0].supercritical);
    CHECK(supercritical.points[1].supercritical);
    CHECK_FALSE(supercritical.argmin);
}

TEST_CASE("power tail against the standard library zeta") {
    for (double s : {1.5, 2.0, 3.0, 4.2, 7.0}) {
        CHECK(zeta(s) == doctest::Approx(std::riemann_zeta(s)).epsilon(1e-12));
    }
}
