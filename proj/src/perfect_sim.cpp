#include "kalikow/perfect_sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace kalikow {

double BoundCache::operator()(NodeId j) {
    auto it = rates_.find(j);
    if (it != rates_.end()) return it->second;
    const auto g = model_->global_bound(j);
    if (!g) {
        throw std::invalid_argument("perfect simulation needs a global bound; model '" + model_->family() +
                                    "' has none for node " + std::to_string(j));
    }
    return rates_.emplace(j, *g).first->second;
}

namespace {

bool earlier(const ClanPoint& a, const ClanPoint& b) {
    return a.time < b.time || (a.time == b.time && a.node < b.node);
}

}  // namespace

AncestorGraph backward_clan(const KalikowModel& model, NodeId i, double T, RegionLedger& ledger, RandomStream& draws,
                            const BackwardBudget& budget, std::size_t root_id) {
    BoundCache rate(model);
    AncestorGraph g;
    g.root_node = i;
    g.root_time = T;
    g.points.push_back({i, T, {}, 0, Decision::Undecided, root_id});
    g.generations.push_back({0});
    double earliest = T;

    for (std::size_t n = 1;; ++n) {
        auto parents = g.generations[n - 1];
        std::sort(parents.begin(), parents.end(),
                  [&](std::size_t a, std::size_t b) { return earlier(g.points[a], g.points[b]); });
        std::vector<std::size_t> current;
        for (std::size_t p : parents) {
            const NodeId node = g.points[p].node;
            const double t = g.points[p].time;
            auto v = model.sample_neighborhood(node, draws);
            const auto hood = model.expand(node, v);
            g.points[p].neighborhood = std::move(v);
            if (g.points[p].ledger_id != kNoLedgerId) ledger.state(g.points[p].ledger_id).neighborhood = g.points[p].neighborhood;
            for (const auto& piece : hood.pieces()) {
                const Interval abs{t + piece.interval.lo, t + piece.interval.hi};
                earliest = std::min(earliest, abs.lo);
                for (const auto& lp : ledger.realize_new(piece.node, abs, rate(piece.node))) {
                    if (!lp.fresh) continue;
                    current.push_back(g.points.size());
                    g.points.push_back({lp.node, lp.time, {}, n, Decision::Undecided, lp.id});
                }
            }
            if (g.points.size() > budget.max_points) {
                g.lookback = T - earliest;
                throw BackwardBudgetExceeded("backward pass exceeded " + std::to_string(budget.max_points) +
                                                 " points (generation " + std::to_string(n) + ")",
                                             std::move(g));
            }
        }
        if (current.empty()) {
            g.stopping_index = n;
            break;
        }
        g.generations.push_back(std::move(current));
        if (n >= budget.max_generations) {
            g.lookback = T - earliest;
            throw BackwardBudgetExceeded("backward pass exceeded " + std::to_string(budget.max_generations) +
                                             " generations",
                                         std::move(g));
        }
    }
    g.lookback = T - earliest;
    g.complete = true;
    return g;
}

void forward_accept(AncestorGraph& graph, const KalikowModel& model, RegionLedger& ledger, RandomStream& uniforms) {
    if (!graph.complete) throw std::logic_error("forward pass on an incomplete ancestor graph");
    BoundCache rate(model);
    std::vector<std::size_t> order(graph.points.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return earlier(graph.points[a], graph.points[b]); });

    for (std::size_t idx : order) {
        auto& p = graph.points[idx];
        const auto hood = model.expand(p.node, p.neighborhood);
        Configuration local;
        for (const auto& piece : hood.pieces()) {
            const Interval abs{p.time + piece.interval.lo, p.time + piece.interval.hi};
            if (!ledger.covered(piece.node, abs)) {
                throw std::logic_error("neighborhood of clan point (" + std::to_string(p.node) + ", " +
                                       std::to_string(p.time) + ") reaches an unrealized region");
            }
            for (std::size_t id : ledger.points_in(piece.node, abs)) {
                const auto& s = ledger.state(id);
                if (s.decision == Decision::Undecided) {
                    throw std::logic_error("undecided dependency (" + std::to_string(s.node) + ", " +
                                           std::to_string(s.time) + ") while deciding (" + std::to_string(p.node) +
                                           ", " + std::to_string(p.time) + ")");
                }
                if (s.decision == Decision::Accepted) local.add(s.node, s.time);
            }
        }
        const double bound = rate(p.node);
        const double phi = model.raw_component(p.node, p.neighborhood, PastView(local, p.time));
        if (phi > bound * (1.0 + 1e-9)) {
            throw std::logic_error("acceptance probability " + std::to_string(phi / bound) + " above 1 for node " +
                                   std::to_string(p.node));
        }
        p.decision = uniforms.uniform() * bound <= phi ? Decision::Accepted : Decision::Rejected;
        if (p.ledger_id != kNoLedgerId) ledger.state(p.ledger_id).decision = p.decision;
    }
}

PerfectRun perfect_sample(const KalikowModel& model, NodeId i, double t_max, RandomStream rng,
                          const BackwardBudget& budget, RegionLedger* keep_ledger) {
    return perfect_sample_window(model, {{i, {0.0, t_max}}}, std::move(rng), budget, keep_ledger);
}

PerfectRun perfect_sample_window(const KalikowModel& model, const std::vector<WindowRequest>& requests,
                                 RandomStream rng, const BackwardBudget& budget, RegionLedger* keep_ledger) {
    RegionLedger own(rng.child(0));
    RegionLedger& ledger = keep_ledger ? *keep_ledger : own;
    if (keep_ledger) ledger = RegionLedger(rng.child(0));
    auto draws = rng.child(1);
    auto uniforms = rng.child(2);
    BoundCache rate(model);

    PerfectRun run;
    struct Pending {
        WindowRequest req;
        std::optional<LedgerPoint> candidate;
    };
    std::vector<Pending> pending;
    for (const auto& r : requests) {
        if (r.interval.empty()) continue;
        Pending p{r, ledger.next_point(r.node, r.interval.lo, rate(r.node))};
        if (p.candidate->time >= r.interval.hi) p.candidate.reset();
        pending.push_back(p);
    }
    std::set<std::size_t> emitted;
    for (;;) {
        Pending* next = nullptr;
        for (auto& p : pending) {
            if (p.candidate && (!next || p.candidate->time < next->candidate->time)) next = &p;
        }
        if (!next) break;
        const auto c = *next->candidate;
        RootRecord rec{c.node, c.time, false, false, 0, 0, 0.0};
        if (ledger.state(c.id).decision == Decision::Undecided) {
            auto g = backward_clan(model, c.node, c.time, ledger, draws, budget, c.id);
            forward_accept(g, model, ledger, uniforms);
            rec.fresh = true;
            rec.clan_size = g.size();
            rec.stopping_index = g.stopping_index;
            rec.lookback = g.lookback;
        }
        rec.accepted = ledger.state(c.id).decision == Decision::Accepted;
        if (rec.accepted && emitted.insert(c.id).second) run.points.add(c.node, c.time);
        run.roots.push_back(rec);

        const double from = std::nextafter(c.time, std::numeric_limits<double>::infinity());
        next->candidate = ledger.next_point(c.node, from, rate(c.node));
        if (next->candidate->time >= next->req.interval.hi) next->candidate.reset();
    }
    run.ledger_points = ledger.point_count();
    run.ledger_requests = ledger.request_count();
    return run;
}

}  // namespace kalikow
