#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "kalikow/analysis.hpp"
#include "kalikow/config.hpp"
#include "kalikow/forward_sim.hpp"
#include "kalikow/models.hpp"
#include "kalikow/output.hpp"
#include "kalikow/perfect_sim.hpp"
#include "kalikow/validation.hpp"

using namespace kalikow;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailed = 1;
constexpr int kConfigError = 2;
constexpr int kRunFailed = 3;

struct Overrides {
    std::string config;
    std::optional<double> t_max;
    std::optional<std::size_t> n_max;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<NodeId> node;
    std::optional<std::string> out;
    std::optional<std::string> summary;
    std::optional<std::string> ledger;
    std::optional<std::size_t> max_points;
    std::optional<std::size_t> max_generations;
};

RunConfig load(const Overrides& o) {
    auto cfg = load_config(o.config);
    if (!cfg.model) throw ConfigError({"model: missing"});
    if (o.t_max) {
        if (!(*o.t_max > 0.0)) throw ConfigError({"--t-max: must be > 0"});
        cfg.simulation.t_max = *o.t_max;
    }
    if (o.n_max) cfg.simulation.n_max = *o.n_max;
    if (o.seed) cfg.rng.seed = *o.seed;
    if (o.runs) {
        if (*o.runs == 0) throw ConfigError({"--runs: must be >= 1"});
        cfg.rng.runs = *o.runs;
    }
    if (o.node) {
        cfg.simulation.node = *o.node;
        cfg.simulation.window.clear();
    }
    if (o.out) cfg.output.points = *o.out;
    if (o.summary) cfg.output.summary = *o.summary;
    if (o.ledger) cfg.output.ledger = *o.ledger;
    if (o.max_points) cfg.simulation.budget.max_points = *o.max_points;
    if (o.max_generations) cfg.simulation.budget.max_generations = *o.max_generations;
    return cfg;
}

constexpr std::size_t kDefaultActivityCap = 1000000;

// points.csv -> points_3.csv for batch runs.
std::string run_path(const std::string& path, std::size_t k, std::size_t runs) {
    if (runs <= 1) return path;
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + "_" + std::to_string(k) + p.extension().string())).string();
}

int simulate_forward(const Overrides& o) {
    const auto cfg = load(o);
    const auto& sim = cfg.simulation;
    if (sim.nodes.empty()) throw ConfigError({"simulation.nodes: required for models on infinite networks"});
    // Explosive models still stop: no node may exceed a million points.
    const auto guard = std::holds_alternative<SubspaceGuard::None>(cfg.guard.kind)
                           ? SubspaceGuard::activity(sim.t_max, kDefaultActivityCap)
                           : cfg.guard;
    json all = json::array();
    for (std::size_t k = 0; k < cfg.rng.runs; ++k) {
        const RandomStream rng = RandomStream(cfg.rng.seed).child(k);
        const auto run = forward_simulate(*cfg.model, sim.nodes, sim.t_max, sim.n_max.value_or(std::size_t(-1)),
                                          guard, rng);
        const auto path = run_path(cfg.output.points, k, cfg.rng.runs);
        write_points_csv(path, run.accepted);
        auto row = forward_run_json(run, rng);
        row["file"] = path;
        std::cerr << "run " << k << ": " << run.accepted.size() << " points, " << to_string(run.stop_reason)
                  << " at t = " << run.stop_time << " -> " << path << '\n';
        all.push_back(std::move(row));
    }
    if (cfg.output.summary) write_json(*cfg.output.summary, {{"family", cfg.family}, {"runs", all}});
    return kOk;
}

int simulate_perfect(const Overrides& o) {
    const auto cfg = load(o);
    const auto& sim = cfg.simulation;
    std::vector<WindowRequest> window = sim.window;
    if (window.empty()) window.push_back({sim.node, {0.0, sim.t_max}});
    double span = 0.0;
    for (const auto& w : window) span = std::max(span, w.interval.hi - std::min(0.0, w.interval.lo));

    std::vector<PerfectBatchRun> done;
    std::vector<std::string> failures;
    for (std::size_t k = 0; k < cfg.rng.runs; ++k) {
        const RandomStream rng = RandomStream(cfg.rng.seed).child(k);
        std::optional<RegionLedger> ledger;
        if (cfg.output.ledger) ledger.emplace(rng);
        try {
            auto run = perfect_sample_window(*cfg.model, window, rng, sim.budget, ledger ? &*ledger : nullptr);
            const auto path = run_path(cfg.output.points, k, cfg.rng.runs);
            write_points_csv(path, run.points);
            if (ledger) write_json(run_path(*cfg.output.ledger, k, cfg.rng.runs), ledger_to_json(*ledger));
            done.push_back({std::move(run), rng, span, path});
        } catch (const BackwardBudgetExceeded& e) {
            failures.push_back("run " + std::to_string(k) + ": " + e.what());
            std::cerr << failures.back() << '\n';
            if (ledger) write_json(run_path(*cfg.output.ledger, k, cfg.rng.runs), ledger_to_json(*ledger));
        }
    }
    std::size_t points = 0;
    for (const auto& r : done) points += r.run.points.size();
    std::cerr << done.size() << " of " << cfg.rng.runs << " runs completed, " << points << " points\n";
    if (cfg.output.summary) {
        auto summary = perfect_batch_summary(done, failures.size(), failures);
        summary["family"] = cfg.family;
        write_json(*cfg.output.summary, summary);
    }
    return failures.empty() ? kOk : kRunFailed;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back(m(a, b));
        out.push_back(row);
    }
    return out;
}

struct AnalyzeOptions {
    std::optional<std::size_t> nodes;
    bool invariant = false;
    std::vector<double> theta;
    std::vector<double> p_grid;
    std::size_t truncation = 2048;
    std::optional<std::string> out;
};

int analyze(const Overrides& o, const AnalyzeOptions& a) {
    const auto cfg = load(o);
    const auto& model = *cfg.model;
    json report{{"family", cfg.family}};

    const auto finite = model.nodes();
    std::vector<NodeId> nodes;
    const bool invariant = a.invariant || (!finite && !a.nodes);
    BranchingSummary summary;
    if (invariant) {
        summary = summarize_branching_invariant(model, cfg.simulation.node);
        nodes = summary.nodes;
    } else {
        if (a.nodes) {
            for (std::size_t i = 0; i < *a.nodes; ++i) nodes.push_back(NodeId(i));
        } else {
            nodes = *finite;
        }
        summary = summarize_branching(model, nodes);
    }
    report["nodes"] = summary.nodes;
    report["reduction"] = summary.reduction;
    report["M"] = matrix_json(summary.M);
    report["gamma"] = summary.gamma;
    report["gamma_enumerated"] = summary.gamma_enumerated;
    report["subcritical"] = summary.subcritical;
    if (summary.expected_W) {
        report["expected_W"] = std::vector<double>(summary.expected_W->data(),
                                                   summary.expected_W->data() + summary.expected_W->size());
    } else {
        report["expected_W"] = nullptr;
    }

    if (!a.theta.empty()) {
        if (invariant) throw ConfigError({"--theta: needs a finite node set (--nodes N or a finite model)"});
        if (a.theta.size() != nodes.size()) {
            throw ConfigError({"--theta: expected " + std::to_string(nodes.size()) + " values"});
        }
        const auto laws = offspring_laws(model, nodes, a.truncation);
        const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(a.theta.data(), Eigen::Index(a.theta.size()));
        try {
            const auto st = log_laplace_fixed_point(laws, theta);
            report["fixed_point"] = {{"theta", a.theta},
                                     {"Phi", std::vector<double>(st.Phi.data(), st.Phi.data() + st.Phi.size())},
                                     {"iterations", st.iterations},
                                     {"residual", st.residual}};
        } catch (const LaplaceDivergence& e) {
            report["fixed_point"] = {{"theta", a.theta}, {"error", e.what()}};
        }
        report["jacobian_at_zero"] = matrix_json(log_laplace_jacobian_at_zero(laws));
    }

    if (!a.p_grid.empty()) {
        if (cfg.family != "lattice-4.2.6") throw ConfigError({"--p-grid: only defined for the lattice-4.2.6 preset"});
        const auto& m = cfg.source.at("model");
        const double decay = m.value("decay", 4.0);
        const auto curve = weight_cost_curve(decay, m.at("delta").get<double>(), a.p_grid);
        json pts = json::array();
        for (const auto& pt : curve.points) {
            json row{{"p", pt.p}, {"f", pt.f}, {"mean_offspring", pt.mean_offspring}, {"supercritical", pt.supercritical}};
            row["expected_W"] = pt.expected_W ? json(*pt.expected_W) : json(nullptr);
            pts.push_back(row);
        }
        report["cost_curve"] = {{"points", pts}, {"argmin", curve.argmin ? json(*curve.argmin) : json(nullptr)}};
    }

    if (a.out) {
        write_json(*a.out, report);
    } else {
        std::cout << std::setw(2) << report << '\n';
    }
    return kOk;
}

int validate(const std::string& suite, std::uint64_t seed, double scale) {
    validation::SuiteOptions options;
    options.seed = seed;
    options.scale = scale;
    const auto report = validation::run_suite(suite, options);
    std::cout << report.summary_line() << '\n';
    return report.passed ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kalikow-decomposition simulator for multivariate point processes"};
    app.require_subcommand(1);

    Overrides o;
    AnalyzeOptions a;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "model config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "override rng.seed");
    };

    auto* fwd = app.add_subcommand("simulate-forward", "exact simulation from the empty past");
    common(fwd);
    fwd->add_option("--t-max", o.t_max, "time horizon");
    fwd->add_option("--n-max", o.n_max, "stop after this many accepted points");
    fwd->add_option("--runs", o.runs, "number of independent runs");
    fwd->add_option("--out", o.out, "points CSV (time,node)");
    fwd->add_option("--summary", o.summary, "run summary JSON");

    auto* perf = app.add_subcommand("simulate-perfect", "perfect simulation of the stationary regime");
    common(perf);
    perf->add_option("--node", o.node, "node to sample");
    perf->add_option("--t-max", o.t_max, "sample on [0, t_max]");
    perf->add_option("--runs", o.runs, "number of independent runs");
    perf->add_option("--out", o.out, "points CSV; batches get one file per run");
    perf->add_option("--summary", o.summary, "batch summary JSON");
    perf->add_option("--dump-ledger", o.ledger, "dump the dominating-process ledger as JSON");
    perf->add_option("--max-points", o.max_points, "backward budget: clan points");
    perf->add_option("--max-generations", o.max_generations, "backward budget: generations");

    auto* an = app.add_subcommand("analyze", "branching-process cost predictions");
    common(an);
    auto* nodes_opt = an->add_option("--nodes", a.nodes, "analyze nodes 0..N-1");
    an->add_flag("--invariant", a.invariant, "translation-invariant reduction")->excludes(nodes_opt);
    an->add_option("--node", o.node, "representative node for --invariant");
    an->add_option("--theta", a.theta, "log-Laplace argument, one value per node")->expected(1, -1);
    an->add_option("--p-grid", a.p_grid, "weight exponents for the cost curve")->expected(1, -1);
    an->add_option("--truncation", a.truncation, "neighborhoods enumerated per node for offspring laws");
    an->add_option("--out", a.out, "report path (default stdout)");

    std::string suite;
    std::uint64_t seed = validation::SuiteOptions{}.seed;
    double scale = 1.0;
    auto* val = app.add_subcommand("validate", "run a statistical validation suite");
    val->add_option("suite", suite, "suite name")->required();
    val->add_option("--seed", seed, "seed");
    val->add_option("--scale", scale, "sample-size multiplier")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*fwd) return simulate_forward(o);
        if (*perf) return simulate_perfect(o);
        if (*an) return analyze(o, a);
        return validate(suite, seed, scale);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    } catch (const validation::UnknownSuite& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    } catch (const OutputError& e) {
        std::cerr << "output: " << e.what() << '\n';
        return kRunFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRunFailed;
    }
}
