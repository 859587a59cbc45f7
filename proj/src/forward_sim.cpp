#include "kalikow/forward_sim.hpp"

#include <cmath>

#include "kalikow/sampling.hpp"

namespace kalikow {

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::TimeReached: return "time-reached";
        case StopReason::StepBudget: return "step-budget";
        case StopReason::GuardExit: return "guard-exit";
    }
    return "unknown";
}

ForwardRun forward_simulate(const KalikowModel& model, const std::vector<NodeId>& nodes, double t_max,
                            std::size_t n_max, SubspaceGuard guard, RandomStream rng) {
    if (nodes.empty()) throw std::invalid_argument("forward simulation needs at least one node");
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be finite and >= 0");
    if (std::holds_alternative<SubspaceGuard::None>(guard.kind)) guard = SubspaceGuard::activity(t_max, kDefaultActivityCap);
    const auto model_guard = model.guard();

    ForwardRun run;
    run.t_max = t_max;
    run.n_max = n_max;
    if (n_max == 0) {
        run.stop_reason = StopReason::StepBudget;
        return run;
    }

    Configuration& x = run.accepted;
    std::vector<double> bounds(nodes.size());
    double t = 0.0;
    std::size_t count = 0;
    for (;;) {
        // Step 1: local bounds at the current past.
        double total = 0.0;
        double horizon = std::numeric_limits<double>::infinity();
        try {
            // Closed at t so the point just accepted at t is seen.
            const PastView past(x, std::nextafter(t, std::numeric_limits<double>::infinity()));
            for (std::size_t m = 0; m < nodes.size(); ++m) {
                const auto b = model.local_bound(nodes[m], past);
                bounds[m] = b.value;
                total += b.value;
                horizon = std::min(horizon, b.horizon);
            }
        } catch (const ExplosionGuard& e) {
            run.stop_reason = StopReason::GuardExit;
            run.stop_time = t;
            run.guard_message = e.what();
            return run;
        }
        ++run.bound_updates;

        // Step 2: next proposal.
        const double step = total > 0.0 ? sample_exponential(rng, total) : std::numeric_limits<double>::infinity();
        if (step > horizon) {
            t += horizon;
            if (t > t_max) break;
            continue;
        }
        if (t + step > t_max) break;
        t += step;
        double u = rng.uniform() * total;
        std::size_t pick = 0;
        while (pick + 1 < nodes.size() && u >= bounds[pick]) u -= bounds[pick++];
        const NodeId i = nodes[pick];
        ++run.proposals;

        // Steps 3-4: neighborhood and thinning.
        const auto v = model.sample_neighborhood(i, rng);
        const PastView past(x, t);
        const double phi = model.raw_component(i, v, past);
        if (phi > bounds[pick] * (1.0 + 1e-9) + 1e-300) {
            throw BoundViolation("component " + v.to_string() + " of node " + std::to_string(i) + " is " +
                                 std::to_string(phi) + " above the local bound " + std::to_string(bounds[pick]) +
                                 " at t = " + std::to_string(t));
        }
        if (rng.uniform() * bounds[pick] > phi) continue;

        x.push_back(i, t);
        const PastView after(x, std::nextafter(t, std::numeric_limits<double>::infinity()));
        const bool inside = guard.contains(after) && model_guard.contains(after);
        if (!inside) {
            // The point that leaves the subspace is not part of the stopped process.
            Configuration kept;
            for (const auto& [node, pts] : x.all()) {
                for (double s : pts) {
                    if (!(node == i && s == t)) kept.push_back(node, s);
                }
            }
            x = std::move(kept);
            run.stop_reason = StopReason::GuardExit;
            run.stop_time = t;
            run.guard_message = "left subspace " + (guard.contains(after) ? model_guard : guard).describe();
            return run;
        }
        if (++count >= n_max) {
            run.stop_reason = StopReason::StepBudget;
            run.stop_time = t;
            return run;
        }
    }
    run.stop_reason = StopReason::TimeReached;
    run.stop_time = t_max;
    return run;
}

}  // namespace kalikow
