#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "kalikow/config.hpp"
#include "kalikow/models.hpp"
#include "kalikow/output.hpp"
#include "kalikow/validation.hpp"

using namespace kalikow;
using nlohmann::json;

namespace {

std::vector<std::string> problems(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& list, const std::string& needle) {
    for (const auto& s : list) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("minimal constant config") {
    const auto cfg = parse_config(json::parse(R"({"model": {"family": "constant", "rate": 1.5}})"));
    REQUIRE(cfg.model);
    CHECK(cfg.family == "constant");
    CHECK(cfg.simulation.t_max == 1.0);
    CHECK(cfg.rng.runs == 1);
    CHECK(cfg.output.points == "points.csv");
    CHECK(cfg.simulation.nodes == std::vector<NodeId>{0});
    CHECK(*cfg.model->global_bound(0) == 1.5);
}

TEST_CASE("config errors name the field") {
    const auto p = problems(json::parse(R"({"model": {"family": "linear", "mu": [1], "epsilon": -0.1,
        "kernels": [{"target": 0, "source": 0, "type": "exponential", "alpha": 0.5, "beta": 1}]}})"));
    REQUIRE(p.size() == 1);
    CHECK(p[0].find("model.epsilon") != std::string::npos);
    CHECK(p[0].find("> 0") != std::string::npos);
}

TEST_CASE("config errors are collected") {
    const auto p = problems(json::parse(R"({"model": {"family": "nope"}, "rng": {"runs": 0}, "extra": 1})"));
    CHECK(mentions(p, "unknown family 'nope'"));
    CHECK(mentions(p, "rng.runs"));
    CHECK(mentions(p, "extra: unknown field"));
    CHECK(mentions(problems(json::parse(R"({"simulation": {}})")), "model: missing required field"));
    const auto w = problems(json::parse(R"({"model": {"family": "table", "tables": [{"bound": 1,
        "entries": [{"weight": 0.5, "base": 1}, {"weight": 0.5000001, "base": 1}]}]}})"));
    CHECK(mentions(w, "weights sum to"));
    CHECK(problems(json::parse(R"({"model": {"family": "table", "tables": [{"bound": 1,
        "entries": [{"weight": 0.5, "base": 1}, {"weight": 0.5, "base": 1,
        "pieces": [{"node": 0, "lo": -1, "hi": 0}]}]}]}})")).empty());
}

TEST_CASE("lattice preset expands to the lattice model") {
    const auto cfg = parse_config(
        json::parse(R"({"model": {"family": "lattice-4.2.6", "decay": 4, "exponent": 4, "delta": 1}})"));
    REQUIRE(cfg.model);
    const auto& m = dynamic_cast<const AgeHawkesModel&>(*cfg.model);
    CHECK_FALSE(m.nodes());
    for (NodeId j : {1, 2, 3, -5}) {
        CHECK(m.network().kernel(0, j).alpha() == doctest::Approx(1.0 / (2.0 * std::pow(std::abs(double(j)), 4.0))));
    }
    CHECK(m.delta() == 1.0);
    CHECK(m.psi()(0.0) == 1.0);
}

TEST_CASE("every family parses") {
    const char* docs[] = {
        R"({"family": "linear", "mu": [1, 0.5], "epsilon": 0.5, "weights": {"empty": 0.4, "ratio": 0.7},
            "kernels": [{"target": 0, "source": 1, "type": "step", "edges": [0, 1], "values": [0.3]}], "rates": [2, 1]})",
        R"({"family": "analytic", "psi": {"type": "cosh", "scale": 1, "rate": 1}, "nodes": 2, "epsilon": 0.5,
            "radius": 3, "kernels": [{"target": 0, "source": 1, "type": "exponential", "alpha": 0.2, "beta": 1}]})",
        R"({"family": "age", "nodes": 2, "psi": {"type": "sigmoid", "height": 2, "slope": 1, "mid": 0.5},
            "delta": 0.1, "levels": [[[0], [1]], [[1], [0]]], "bounds": {"type": "gamma_bar"},
            "kernels": [{"target": 1, "source": 0, "type": "exponential", "alpha": 0.2, "beta": 1}]})",
        R"({"family": "gl", "psi": [{"type": "affine", "base": 0, "slope": 1}, {"type": "clipped",
            "base": 0.1, "slope": 1, "cap": 3}], "beta": [[0, 1], [1, 0]], "thresholds": [[0, 2], [2, 0]], "delta": 0.1})",
    };
    for (const char* d : docs) {
        json doc{{"model", json::parse(d)}};
        CHECK(problems(doc).empty());
    }
}

TEST_CASE("points csv") {
    std::ostringstream empty;
    write_points_csv(empty, Configuration());
    CHECK(empty.str() == "time,node\n");

    Configuration x;
    x.add(1, 0.5);
    x.add(0, 0.25);
    std::ostringstream two;
    write_points_csv(two, x);
    CHECK(two.str() == "time,node\n0.25,0\n0.5,1\n");

    Configuration y;
    RandomStream rng(1);
    for (int k = 0; k < 200; ++k) y.add(NodeId(k % 3), rng.uniform() * 1000.0);
    std::stringstream io;
    write_points_csv(io, y);
    CHECK(read_points_csv(io) == y);

    std::istringstream bad("t,n\n");
    CHECK_THROWS_AS(read_points_csv(bad), OutputError);
    CHECK_THROWS_AS(write_points_csv("/nonexistent-dir/x.csv", y), OutputError);
}

TEST_CASE("batch summary lists one seed entry per run") {
    const auto model = TableModel::constant(1, 1.0, 2.0);
    std::vector<PerfectBatchRun> runs;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto rng = RandomStream(5).child(k);
        runs.push_back({perfect_sample(model, 0, 10.0, rng), rng, 10.0, ""});
    }
    const auto s = perfect_batch_summary(runs, 0, {});
    REQUIRE(s.at("runs").size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(s["runs"][k]["rng"]["seed"] == 5);
        CHECK(s["runs"][k]["rng"]["path"] == std::vector<std::uint64_t>{k});
    }
    CHECK(s["termination"]["completed_runs"] == 3);
    CHECK(s.at("clan_size").contains("histogram"));
    CHECK(s.at("lookback").contains("mean"));
}

TEST_CASE("validate suites") {
    const auto poisson = validation::run_suite("poisson-sanity");
    CHECK(poisson.passed);
    CHECK(poisson.summary_line().find("KS statistic") != std::string::npos);
    const auto clan = validation::run_suite("clan-size");
    CHECK(clan.passed);
    CHECK(clan.summary_line().find("Monte Carlo") != std::string::npos);
    try {
        validation::run_suite("unknown-name");
        FAIL("expected an error");
    } catch (const validation::UnknownSuite& e) {
        CHECK(std::string(e.what()).find("poisson-sanity") != std::string::npos);
        CHECK(std::string(e.what()).find("stationarity") != std::string::npos);
    }
    CHECK(validation::suite_names().size() == 10);
}
