#include "kalikow/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "kalikow/stats.hpp"

namespace kalikow {

using nlohmann::json;

void write_points_csv(std::ostream& out, const Configuration& points) {
    auto events = points.sorted_events();
    std::stable_sort(events.begin(), events.end());
    out << "time,node\n";
    out << std::setprecision(17);
    for (const auto& [t, node] : events) out << t << ',' << node << '\n';
}

void write_points_csv(const std::string& path, const Configuration& points) {
    std::ofstream out(path);
    if (!out) throw OutputError(path + ": cannot open for writing");
    write_points_csv(out, points);
    if (!out) throw OutputError(path + ": write failed");
}

Configuration read_points_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "time,node") throw OutputError("points csv: expected header 'time,node'");
    Configuration out;
    for (std::size_t row = 2; std::getline(in, line); ++row) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw OutputError("points csv: row " + std::to_string(row) + " has no comma");
        const double t = std::strtod(line.substr(0, comma).c_str(), nullptr);
        NodeId node = 0;
        const auto tail = line.substr(comma + 1);
        const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), node);
        if (ec != std::errc() || !std::isfinite(t)) {
            throw OutputError("points csv: row " + std::to_string(row) + " is malformed");
        }
        out.add(node, t);
    }
    return out;
}

Configuration read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw OutputError(path + ": cannot open for reading");
    return read_points_csv(in);
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw OutputError(path + ": cannot open for writing");
    out << std::setw(2) << doc << '\n';
}

namespace {

const char* decision_name(Decision d) {
    switch (d) {
        case Decision::Accepted: return "accepted";
        case Decision::Rejected: return "rejected";
        default: return "undecided";
    }
}

json stream_json(const RandomStream& rng) {
    return {{"seed", rng.seed()}, {"path", rng.path()}, {"key", rng.key()}};
}

json histogram(const std::vector<double>& xs) {
    std::map<long, long> h;
    for (double x : xs) ++h[long(x)];
    json out = json::array();
    for (const auto& [k, c] : h) out.push_back({{"value", k}, {"count", c}});
    return out;
}

json distribution(std::vector<double> xs) {
    if (xs.empty()) return {{"count", 0}};
    std::sort(xs.begin(), xs.end());
    const auto q = [&](double p) { return xs[std::min(xs.size() - 1, std::size_t(p * double(xs.size())))]; };
    return {{"count", xs.size()},  {"mean", stats::mean(xs)}, {"min", xs.front()}, {"median", q(0.5)},
            {"q90", q(0.9)},       {"q99", q(0.99)},          {"max", xs.back()}};
}

}  // namespace

json ledger_to_json(const RegionLedger& ledger) {
    json nodes = json::array();
    for (NodeId j : ledger.nodes()) {
        json cov = json::array();
        for (const auto& iv : ledger.coverage(j)) cov.push_back({iv.lo, iv.hi});
        nodes.push_back({{"node", j}, {"rate", ledger.rate(j).value_or(0.0)}, {"coverage", cov}});
    }
    json points = json::array();
    for (std::size_t id = 0; id < ledger.point_count(); ++id) {
        const auto& s = ledger.state(id);
        json p{{"id", id}, {"node", s.node}, {"time", s.time}, {"decision", decision_name(s.decision)}};
        if (s.neighborhood) p["neighborhood"] = s.neighborhood->to_string();
        points.push_back(std::move(p));
    }
    return {{"requests", ledger.request_count()}, {"nodes", nodes}, {"points", points}};
}

json forward_run_json(const ForwardRun& run, const RandomStream& rng) {
    json counts = json::object();
    for (const auto& [node, pts] : run.accepted.all()) counts[std::to_string(node)] = pts.size();
    json out{{"rng", stream_json(rng)},
             {"stop_reason", to_string(run.stop_reason)},
             {"stop_time", run.stop_time},
             {"t_max", run.t_max},
             {"points", run.accepted.size()},
             {"counts", counts},
             {"proposals", run.proposals},
             {"bound_updates", run.bound_updates}};
    if (run.n_max != std::size_t(-1)) out["n_max"] = run.n_max;
    if (!run.guard_message.empty()) out["guard"] = run.guard_message;
    return out;
}

json perfect_batch_summary(const std::vector<PerfectBatchRun>& runs, std::size_t failed_runs,
                           const std::vector<std::string>& failures) {
    json per_run = json::array();
    std::vector<double> clan, lookback, stopping, rates;
    std::size_t roots = 0, fresh = 0, accepted = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& r = runs[k];
        const double rate = r.t_max > 0.0 ? double(r.run.points.size()) / r.t_max : 0.0;
        rates.push_back(rate);
        json row{{"run", k},
                 {"rng", stream_json(r.rng)},
                 {"points", r.run.points.size()},
                 {"rate", rate},
                 {"roots", r.run.roots.size()},
                 {"ledger_points", r.run.ledger_points}};
        if (!r.points_path.empty()) row["file"] = r.points_path;
        per_run.push_back(std::move(row));
        for (const auto& root : r.run.roots) {
            ++roots;
            accepted += root.accepted ? 1 : 0;
            if (!root.fresh) continue;
            ++fresh;
            clan.push_back(double(root.clan_size));
            stopping.push_back(double(root.stopping_index));
            lookback.push_back(root.lookback);
        }
    }
    return {{"runs", per_run},
            {"rate", distribution(rates)},
            {"termination",
             {{"completed_runs", runs.size()},
              {"failed_runs", failed_runs},
              {"failures", failures},
              {"roots", roots},
              {"clans_run", fresh},
              {"accepted_roots", accepted}}},
            {"clan_size", {{"summary", distribution(clan)}, {"histogram", histogram(clan)}}},
            {"stopping_generation", distribution(stopping)},
            {"lookback", distribution(lookback)}};
}

}  // namespace kalikow
