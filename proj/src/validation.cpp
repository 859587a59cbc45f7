#include "kalikow/validation.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "kalikow/analysis.hpp"
#include "kalikow/forward_sim.hpp"
#include "kalikow/oracles.hpp"
#include "kalikow/perfect_sim.hpp"
#include "kalikow/series.hpp"
#include "kalikow/stats.hpp"

namespace kalikow::validation {

namespace {

// Every acceptance threshold in one place.
struct Thresholds {
    // 1
    static constexpr double kRateLo = 0.98, kRateHi = 1.02, kKsP = 0.01, kPoissonSeconds = 10.0;
    static constexpr double kPoissonTmax = 1e4;
    // 2
    static constexpr double kThinningTv = 0.05, kThinningSeconds = 120.0, kWindow = 2.0;
    static constexpr std::size_t kThinningRuns = 10000;
    // 3
    static constexpr std::size_t kRefractoryRuns = 10000;
    static constexpr double kRefractoryTmax = 1.0;
    // 4
    static constexpr std::size_t kClanRuns = 10000;
    static constexpr double kClanRelative = 0.05, kClanSeconds = 60.0;
    // 5
    static constexpr std::size_t kGateRuns = 10000, kGateSupercriticalRuns = 2000;
    static constexpr std::size_t kGateBudgetPoints = 5000;
    // 6
    static constexpr std::size_t kForwardRuns = 10000;
    static constexpr double kForwardTv = 0.05, kForwardSeconds = 60.0;
    // 7
    static constexpr double kResidual = 1e-12, kJacobianRelative = 1e-5;
    static constexpr int kRandomMatrices = 40;
    // 8
    static constexpr double kSeriesAgreement = 1e-6;
    // 9
    static constexpr std::size_t kTailRuns = 100000;
    static constexpr double kTailSeconds = 300.0, kTailSigma = 3.0;
    // 10
    static constexpr std::size_t kShiftRuns = 1000;
    static constexpr double kShiftHalf = 50.0, kShiftSigma = 3.0;
};

std::size_t scaled(std::size_t n, double scale) { return std::max<std::size_t>(2, std::size_t(double(n) * scale)); }

std::string fmt(double x, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << x;
    return os.str();
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Measurement check(std::string label, double observed, std::string threshold, bool ok) {
    return {std::move(label), observed, std::move(threshold), ok};
}

// Golden-ratio spread of lags in [0, span): distinct entries never overlap.
double spread_lag(std::size_t k, double span) {
    const double g = 0.6180339887498949;
    const double f = std::fmod(double(k + 1) * g, 1.0);
    return 1.0 + f * span;
}

std::vector<long> counts_in(const std::vector<double>& pts, double lo, double hi) {
    long c = 0;
    for (double t : pts) c += (t >= lo && t < hi) ? 1 : 0;
    return {c};
}

// ---------------------------------------------------------------------------

SuiteReport poisson_sanity(const SuiteOptions& o) {
    SuiteReport r{1, "poisson-sanity", "constant-rate perfect simulation"};
    const auto start = std::chrono::steady_clock::now();
    const auto model = TableModel::constant(1, 1.0, 2.0);
    const double t_max = Thresholds::kPoissonTmax * std::min(1.0, o.scale);
    const auto run = perfect_sample(model, 0, t_max, RandomStream(o.seed));
    const auto pts = run.points.points(0);
    const double rate = double(pts.size()) / t_max;
    std::vector<double> gaps;
    double prev = 0.0;
    for (double t : pts) {
        gaps.push_back(t - prev);
        prev = t;
    }
    const auto ks = stats::ks_exponential(gaps, 1.0);
    r.seconds = elapsed(start);
    r.measurements.push_back(check("empirical rate", rate, "[0.98, 1.02]",
                                   rate >= Thresholds::kRateLo && rate <= Thresholds::kRateHi));
    r.measurements.push_back(check("KS statistic", ks.statistic, "reported", true));
    r.measurements.push_back(check("KS p-value", ks.p_value, "> 0.01", ks.p_value > Thresholds::kKsP));
    r.measurements.push_back(check("seconds", r.seconds, "< 10", r.seconds < Thresholds::kPoissonSeconds));
    return r;
}

SuiteReport thinning_equivalence(const SuiteOptions& o) {
    SuiteReport r{2, "thinning-equivalence", "perfect sample vs Ogata oracle (age model)"};
    const auto start = std::chrono::steady_clock::now();
    const auto model = thinning_test_model();
    const double gamma = *model.global_bound(0);
    const double burn = 50.0 / gamma;
    const auto n = scaled(Thresholds::kThinningRuns, o.scale);
    const RandomStream root(o.seed);
    std::vector<long> perfect, oracle;
    for (std::size_t k = 0; k < n; ++k) {
        const auto run = perfect_sample(model, 0, Thresholds::kWindow, root.child(0).child(k));
        perfect.push_back(long(run.points.count(0)));
        auto rng = root.child(1).child(k);
        const auto pts = oracle::ogata_age_model(model.psi(), model.network().kernel(0, 0), model.delta(),
                                                 burn + Thresholds::kWindow, rng);
        oracle.push_back(counts_in(pts, burn, burn + Thresholds::kWindow)[0]);
    }
    const double tv = stats::total_variation(perfect, oracle);
    r.seconds = elapsed(start);
    r.measurements.push_back(check("total variation", tv, "< 0.05", tv < Thresholds::kThinningTv));
    r.measurements.push_back(check("seconds", r.seconds, "< 120", r.seconds < Thresholds::kThinningSeconds));
    return r;
}

SuiteReport refractory(const SuiteOptions& o) {
    SuiteReport r{3, "refractory", "refractory invariant on the lattice preset"};
    const auto start = std::chrono::steady_clock::now();
    const auto model = stationarity_test_model();
    const double delta = model.delta();
    const auto n = scaled(Thresholds::kRefractoryRuns, o.scale);
    const RandomStream root(o.seed);
    std::size_t violations = 0, points = 0, ledger_accepted = 0;
    for (std::size_t k = 0; k < n; ++k) {
        RegionLedger ledger(root);
        perfect_sample(model, 0, Thresholds::kRefractoryTmax, root.child(k), {}, &ledger);
        // Every accepted dominating point of every node, output or ancestor.
        std::map<NodeId, std::vector<double>> accepted;
        for (std::size_t id = 0; id < ledger.point_count(); ++id) {
            const auto& s = ledger.state(id);
            if (s.decision == Decision::Accepted) accepted[s.node].push_back(s.time);
        }
        for (auto& [node, ts] : accepted) {
            std::sort(ts.begin(), ts.end());
            for (std::size_t m = 1; m < ts.size(); ++m) violations += (ts[m] - ts[m - 1] <= delta) ? 1 : 0;
            ledger_accepted += ts.size();
            if (node == 0) points += ts.size();
        }
    }
    r.seconds = elapsed(start);
    r.measurements.push_back(check("gaps <= delta", double(violations), "== 0", violations == 0));
    r.measurements.push_back(check("accepted points checked", double(ledger_accepted), "> 0", ledger_accepted > 0));
    return r;
}

std::vector<double> clan_sizes(const KalikowModel& model, std::size_t runs, RandomStream root,
                               const BackwardBudget& budget, std::size_t* exceeded) {
    std::vector<double> sizes;
    for (std::size_t k = 0; k < runs; ++k) {
        const auto rng = root.child(k);
        RegionLedger ledger(rng.child(0));
        auto draws = rng.child(1);
        try {
            sizes.push_back(double(backward_clan(model, 0, 0.0, ledger, draws, budget).size()));
        } catch (const BackwardBudgetExceeded&) {
            if (!exceeded) throw;
            ++*exceeded;
        }
    }
    return sizes;
}

SuiteReport clan_size(const SuiteOptions& o) {
    SuiteReport r{4, "clan-size", "Monte Carlo clan size vs (Id - M)^{-1} 1"};
    const auto start = std::chrono::steady_clock::now();
    const auto model = clan_test_model();
    const auto M = branching_matrix(model, {0, 1});
    const double predicted = expected_clan_size(M, 0);
    const auto sizes = clan_sizes(model, scaled(Thresholds::kClanRuns, o.scale), RandomStream(o.seed), {}, nullptr);
    const double mc = stats::mean(sizes);
    const double rel = std::abs(mc - 2.0) / 2.0;
    r.seconds = elapsed(start);
    r.measurements.push_back(check("predicted E(W)", predicted, "2.0 +- 1e-12", std::abs(predicted - 2.0) < 1e-12));
    r.measurements.push_back(check("Monte Carlo mean W", mc, "within 5% of 2.0", rel < Thresholds::kClanRelative));
    r.measurements.push_back(check("seconds", r.seconds, "< 60", r.seconds < Thresholds::kClanSeconds));
    return r;
}

SuiteReport subcriticality(const SuiteOptions& o) {
    SuiteReport r{5, "subcriticality", "termination gate at gamma = 0.25 and 1.25"};
    const auto start = std::chrono::steady_clock::now();
    const auto low = gate_model(1.0);
    const auto high = gate_model(5.0);
    const auto low_summary = summarize_branching(low, {0});
    const auto high_summary = summarize_branching(high, {0});

    std::size_t low_exceeded = 0;
    const auto n_low = scaled(Thresholds::kGateRuns, o.scale);
    clan_sizes(low, n_low, RandomStream(o.seed).child(0), {}, &low_exceeded);

    std::size_t high_exceeded = 0;
    const auto n_high = scaled(Thresholds::kGateSupercriticalRuns, o.scale);
    BackwardBudget tight;
    tight.max_points = Thresholds::kGateBudgetPoints;
    clan_sizes(high, n_high, RandomStream(o.seed).child(1), tight, &high_exceeded);
    const double fraction = double(high_exceeded) / double(n_high);
    // Detectable: more than 3 binomial standard deviations above zero at
    // the observed fraction.
    const double detect = 3.0 * std::sqrt(std::max(fraction * (1.0 - fraction), 1e-12) / double(n_high));

    r.seconds = elapsed(start);
    r.measurements.push_back(check("gamma (low)", low_summary.gamma, "0.25, subcritical",
                                   std::abs(low_summary.gamma - 0.25) < 1e-12 && low_summary.subcritical));
    r.measurements.push_back(check("gamma (high)", high_summary.gamma, "1.25, supercritical",
                                   std::abs(high_summary.gamma - 1.25) < 1e-12 && !high_summary.subcritical));
    r.measurements.push_back(check("terminated fraction (low)", 1.0 - double(low_exceeded) / double(n_low), "== 1",
                                   low_exceeded == 0));
    r.measurements.push_back(check("budget-hit fraction (high)", fraction, "> 3 sigma above 0", fraction > detect));
    return r;
}

SuiteReport forward_oracle(const SuiteOptions& o) {
    SuiteReport r{6, "forward-oracle", "forward simulation vs Ogata oracle (linear Hawkes)"};
    const auto start = std::chrono::steady_clock::now();
    KernelMatrix kernels(1);
    const auto h = Kernel::exponential(0.5, 1.0);
    kernels.set(0, 0, h);
    const LinearHawkesModel model({1.0}, kernels, 0.5);
    const auto n = scaled(Thresholds::kForwardRuns, o.scale);
    const RandomStream root(o.seed);
    std::vector<long> forward, oracle;
    for (std::size_t k = 0; k < n; ++k) {
        const auto run = forward_simulate(model, {0}, 2.0, std::size_t(-1), SubspaceGuard::none(), root.child(0).child(k));
        forward.push_back(long(run.accepted.count(0)));
        auto rng = root.child(1).child(k);
        oracle.push_back(long(oracle::ogata_linear_hawkes(1.0, h, 2.0, rng).size()));
    }
    const double tv = stats::total_variation(forward, oracle);
    r.seconds = elapsed(start);
    r.measurements.push_back(check("total variation", tv, "< 0.05", tv < Thresholds::kForwardTv));
    r.measurements.push_back(check("seconds", r.seconds, "< 60", r.seconds < Thresholds::kForwardSeconds));
    return r;
}

SuiteReport fixed_point(const SuiteOptions& o) {
    SuiteReport r{7, "fixed-point", "log-Laplace fixed point and Jacobian at 0"};
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 gen(o.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_residual = 0.0, worst_jacobian = 0.0;
    for (int trial = 0; trial < Thresholds::kRandomMatrices; ++trial) {
        const int n = 1 + trial % 4;
        Eigen::MatrixXd M(n, n);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) M(a, b) = unit(gen);
        }
        const double target = 0.2 + 0.7 * unit(gen);
        M *= target / M.rowwise().sum().maxCoeff();
        std::vector<OffspringLaw> laws;
        for (int a = 0; a < n; ++a) laws.push_back(OffspringLaw::poisson(M.row(a).transpose()));
        Eigen::VectorXd theta(n);
        for (int a = 0; a < n; ++a) theta(a) = 0.2 * (1.0 - target) * (1.0 - target) * (2.0 * unit(gen) - 1.0);
        const auto st = log_laplace_fixed_point(laws, theta);
        worst_residual = std::max(worst_residual, st.residual);
        const Eigen::MatrixXd J = log_laplace_jacobian_at_zero(laws);
        const Eigen::MatrixXd expected = (Eigen::MatrixXd::Identity(n, n) - M).inverse();
        const double rel = ((J - expected).array().abs() / expected.array().abs()).maxCoeff();
        worst_jacobian = std::max(worst_jacobian, rel);
    }
    // Mixture offspring of the clan-test model as well.
    const auto model = clan_test_model();
    const auto laws = offspring_laws(model, {0, 1}, 1024);
    Eigen::VectorXd theta(2);
    theta << 0.03, -0.02;
    worst_residual = std::max(worst_residual, log_laplace_fixed_point(laws, theta).residual);
    const auto M = branching_matrix(model, {0, 1});
    const Eigen::MatrixXd J = log_laplace_jacobian_at_zero(laws);
    const Eigen::MatrixXd expected = (Eigen::MatrixXd::Identity(2, 2) - M).inverse();
    worst_jacobian = std::max(worst_jacobian, ((J - expected).array().abs() / expected.array().abs()).maxCoeff());

    r.seconds = elapsed(start);
    r.measurements.push_back(check("max residual", worst_residual, "< 1e-12", worst_residual < Thresholds::kResidual));
    r.measurements.push_back(
        check("max Jacobian relative error", worst_jacobian, "< 1e-5", worst_jacobian < Thresholds::kJacobianRelative));
    return r;
}

SuiteReport weight_choice(const SuiteOptions&) {
    SuiteReport r{8, "weight-choice", "cost of the power-law weight family"};
    const auto start = std::chrono::steady_clock::now();
    const double series = lattice_cost_series(4.0);
    const double closed = 2.0 * std::riemann_zeta(2.0) - std::riemann_zeta(3.0);
    bool rejected = false;
    try {
        lattice_cost_series(3.0);
    } catch (const NonSummable&) {
        rejected = true;
    }
    std::vector<double> grid;
    for (int k = 0; k <= 4; ++k) grid.push_back(3.2 + 0.2 * k);
    const auto curve = weight_cost_curve(4.0, stationarity_test_delta(), grid);
    r.seconds = elapsed(start);
    r.measurements.push_back(check("|f(4) - (2 zeta(2) - zeta(3))|", std::abs(series - closed), "< 1e-6",
                                   std::abs(series - closed) < Thresholds::kSeriesAgreement));
    r.measurements.push_back(check("p = 3 rejected", rejected ? 1.0 : 0.0, "divergence error", rejected));
    r.measurements.push_back(check("argmin p", curve.argmin.value_or(NAN), "== 4",
                                   curve.argmin && std::abs(*curve.argmin - 4.0) < 1e-9));
    return r;
}

SuiteReport deviation_tail(const SuiteOptions& o) {
    SuiteReport r{9, "deviation-tail", "exponential tail of the clan size"};
    const auto start = std::chrono::steady_clock::now();
    const auto model = clan_test_model();
    const double mean_w = expected_clan_size(branching_matrix(model, {0, 1}), 0);
    const auto n = scaled(Thresholds::kTailRuns, o.scale);
    const auto sizes = clan_sizes(model, n, RandomStream(o.seed), {}, nullptr);
    const std::vector<double> xs{2.0, 4.0, 6.0, 8.0};
    std::vector<double> logp, var;
    for (double x : xs) {
        double c = 0.0;
        for (double w : sizes) c += w > mean_w + x ? 1.0 : 0.0;
        const double p = c / double(n);
        logp.push_back(std::log(p));
        var.push_back((1.0 - p) / (double(n) * p));
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < logp.size(); ++k) decreasing = decreasing && logp[k] < logp[k - 1];
    double worst = -INFINITY;
    bool concave = true;
    for (std::size_t k = 2; k < logp.size(); ++k) {
        const double second = logp[k] - 2.0 * logp[k - 1] + logp[k - 2];
        const double se = std::sqrt(var[k] + 4.0 * var[k - 1] + var[k - 2]);
        worst = std::max(worst, second / se);
        concave = concave && second <= Thresholds::kTailSigma * se;
    }
    r.seconds = elapsed(start);
    std::ostringstream tail;
    for (std::size_t k = 0; k < xs.size(); ++k) tail << (k ? ", " : "") << fmt(logp[k], 4);
    r.measurements.push_back(check("log-tail decreasing [" + tail.str() + "]", decreasing ? 1.0 : 0.0, "strict",
                                   decreasing && std::isfinite(logp.back())));
    r.measurements.push_back(check("max second difference / SE", worst, "<= 3", concave));
    r.measurements.push_back(check("seconds", r.seconds, "< 300", r.seconds < Thresholds::kTailSeconds));
    return r;
}

SuiteReport stationarity(const SuiteOptions& o) {
    SuiteReport r{10, "stationarity", "rates on [0,50) vs [50,100) for the lattice preset"};
    const auto start = std::chrono::steady_clock::now();
    const auto model = stationarity_test_model();
    const auto n = scaled(Thresholds::kShiftRuns, o.scale);
    const RandomStream root(o.seed);
    std::vector<double> first, second, diff;
    for (std::size_t k = 0; k < n; ++k) {
        const auto run = perfect_sample(model, 0, 2.0 * Thresholds::kShiftHalf, root.child(k));
        const auto pts = run.points.points(0);
        double a = 0.0, b = 0.0;
        for (double t : pts) (t < Thresholds::kShiftHalf ? a : b) += 1.0;
        first.push_back(a / Thresholds::kShiftHalf);
        second.push_back(b / Thresholds::kShiftHalf);
        diff.push_back((a - b) / Thresholds::kShiftHalf);
    }
    const double d = stats::mean(diff);
    const double se = stats::standard_error(diff);
    r.seconds = elapsed(start);
    r.measurements.push_back(check("rate [0,50)", stats::mean(first), "reported", true));
    r.measurements.push_back(check("rate [50,100)", stats::mean(second), "reported", true));
    r.measurements.push_back(check("|difference| / SE", std::abs(d) / se, "< 3",
                                   std::abs(d) < Thresholds::kShiftSigma * se));
    return r;
}

const std::vector<std::pair<std::string, std::function<SuiteReport(const SuiteOptions&)>>>& registry() {
    static const std::vector<std::pair<std::string, std::function<SuiteReport(const SuiteOptions&)>>> suites{
        {"poisson-sanity", poisson_sanity}, {"thinning-equivalence", thinning_equivalence},
        {"refractory", refractory},         {"clan-size", clan_size},
        {"subcriticality", subcriticality}, {"forward-oracle", forward_oracle},
        {"fixed-point", fixed_point},       {"weight-choice", weight_choice},
        {"deviation-tail", deviation_tail}, {"stationarity", stationarity}};
    return suites;
}

}  // namespace

std::string SuiteReport::summary_line() const {
    std::ostringstream os;
    os << (passed ? "PASS" : "FAIL") << "  [" << criterion << "] " << name << ": ";
    for (std::size_t k = 0; k < measurements.size(); ++k) {
        const auto& m = measurements[k];
        os << (k ? "; " : "") << m.label << " = " << fmt(m.observed) << " (" << m.threshold << ")";
    }
    os << "  [" << fmt(seconds, 3) << " s]";
    return os.str();
}

std::vector<std::string> suite_names() {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
}

SuiteReport run_suite(const std::string& name, const SuiteOptions& options) {
    for (const auto& [n, fn] : registry()) {
        if (n != name) continue;
        auto report = fn(options);
        report.passed = std::all_of(report.measurements.begin(), report.measurements.end(),
                                    [](const Measurement& m) { return m.passed; });
        return report;
    }
    std::string list;
    for (const auto& n : suite_names()) list += (list.empty() ? "" : ", ") + n;
    throw UnknownSuite("unknown suite '" + name + "'; available: " + list);
}

// ---------------------------------------------------------------------------

TableModel clan_test_model() {
    constexpr std::size_t kEntries = 256;
    const double lengths[2][2] = {{0.2, 0.3}, {0.1, 0.4}};
    std::map<NodeId, TableModel::NodeTable> tables;
    for (NodeId i = 0; i < 2; ++i) {
        TableModel::NodeTable t{1.0, {}};
        for (std::size_t k = 0; k < kEntries; ++k) {
            const double lag = spread_lag(k + kEntries * std::size_t(i), 1000.0);
            std::vector<NeighborhoodPiece> pieces;
            for (NodeId j = 0; j < 2; ++j) pieces.push_back({j, {-lag - lengths[i][j], -lag}});
            t.entries.push_back({Neighborhood(pieces), 1.0 / double(kEntries), 0.5, 0.0});
        }
        tables[i] = std::move(t);
    }
    return TableModel(std::move(tables));
}

TableModel gate_model(double bound) {
    constexpr std::size_t kEntries = 32;
    TableModel::NodeTable t{bound, {{Neighborhood(), 0.5, 0.5, 0.0}}};
    for (std::size_t k = 0; k < kEntries; ++k) {
        const double lag = spread_lag(k, 1000.0);
        t.entries.push_back({Neighborhood(std::vector<NeighborhoodPiece>{{0, {-lag - 0.5, -lag}}}), 1.0 / 64.0, 0.5, 0.0});
    }
    return TableModel({{0, std::move(t)}});
}

AgeHawkesModel thinning_test_model() {
    KernelMatrix kernels(1);
    kernels.set(0, 0, Kernel::exponential(0.5, 5.0));
    return AgeHawkesModel(RateFunction::affine(2.0, 1.0), std::make_shared<FiniteAgeNetwork>(kernels), 0.1,
                          AgeHawkesModel::GammaBarBounds{});
}

double stationarity_test_delta() { return 0.5 / (lattice_bound_constant(4.0) * lattice_cost_series(4.0)); }

AgeHawkesModel stationarity_test_model() { return make_lattice_model(4.0, 4.0, stationarity_test_delta()); }

}  // namespace kalikow::validation
