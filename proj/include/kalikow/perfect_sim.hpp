#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "kalikow/core.hpp"
#include "kalikow/model.hpp"
#include "kalikow/random.hpp"
#include "kalikow/sampling.hpp"

namespace kalikow {

inline constexpr std::size_t kNoLedgerId = std::numeric_limits<std::size_t>::max();

struct ClanPoint {
    NodeId node = 0;
    double time = 0.0;
    NeighborhoodDescriptor neighborhood;
    std::size_t generation = 0;
    Decision decision = Decision::Undecided;
    std::size_t ledger_id = kNoLedgerId;
};

struct AncestorGraph {
    NodeId root_node = 0;
    double root_time = 0.0;
    /// points[0] is the root.
    std::vector<ClanPoint> points;
    /// Indices into `points` by generation; generations[0] = {0}.
    std::vector<std::vector<std::size_t>> generations;
    /// First n with an empty n-th generation.
    std::size_t stopping_index = 0;
    /// Root time minus the earliest time touched by any drawn neighborhood.
    double lookback = 0.0;
    bool complete = false;

    /// Total clan size W, the root included.
    std::size_t size() const { return points.size(); }
    const ClanPoint& root() const { return points.front(); }
};

struct BackwardBudget {
    std::size_t max_generations = 10'000;
    std::size_t max_points = 1'000'000;
};

/// The backward pass did not terminate within its budget.
class BackwardBudgetExceeded : public std::runtime_error {
public:
    BackwardBudgetExceeded(const std::string& what, AncestorGraph partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const AncestorGraph& partial() const { return partial_; }

private:
    AncestorGraph partial_;
};

/// Dominating rates Gamma^j, looked up once per node.
class BoundCache {
public:
    explicit BoundCache(const KalikowModel& model) : model_(&model) {}
    double operator()(NodeId j);

private:
    const KalikowModel* model_;
    std::map<NodeId, double> rates_;
};

/// Backward construction of the clan of ancestors of (i, T). Members of a
/// generation are expanded in (time, node) order; neighborhoods are drawn
/// from `draws`, dominating points realized through the ledger. `root_id`
/// is the ledger id of the root when it is itself a ledger point.
AncestorGraph backward_clan(const KalikowModel& model, NodeId i, double T, RegionLedger& ledger, RandomStream& draws,
                            const BackwardBudget& budget = {}, std::size_t root_id = kNoLedgerId);

/// Decides every clan point in increasing time order, thinning each point on
/// the accepted points inside its drawn neighborhood. Updates the ledger.
void forward_accept(AncestorGraph& graph, const KalikowModel& model, RegionLedger& ledger, RandomStream& uniforms);

struct RootRecord {
    NodeId node = 0;
    double time = 0.0;
    bool accepted = false;
    /// False when the candidate was already decided by an earlier clan.
    bool fresh = true;
    std::size_t clan_size = 0;
    std::size_t stopping_index = 0;
    double lookback = 0.0;
};

struct PerfectRun {
    Configuration points;
    std::vector<RootRecord> roots;
    std::size_t ledger_points = 0;
    std::size_t ledger_requests = 0;
};

struct WindowRequest {
    NodeId node = 0;
    Interval interval;
};

/// Stationary sample of node i on [0, t_max]. Stream children: 0 ledger,
/// 1 neighborhood draws, 2 acceptance uniforms.
PerfectRun perfect_sample(const KalikowModel& model, NodeId i, double t_max, RandomStream rng,
                          const BackwardBudget& budget = {}, RegionLedger* keep_ledger = nullptr);

/// Stationary sample on a finite union of (node, interval) requests, always
/// processing the earliest pending candidate and sharing one ledger.
PerfectRun perfect_sample_window(const KalikowModel& model, const std::vector<WindowRequest>& requests,
                                 RandomStream rng, const BackwardBudget& budget = {},
                                 RegionLedger* keep_ledger = nullptr);

}  // namespace kalikow
