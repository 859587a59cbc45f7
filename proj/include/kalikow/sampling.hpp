#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "kalikow/core.hpp"
#include "kalikow/random.hpp"

namespace kalikow {

/// Exponential draw with mean 1/rate. Throws std::invalid_argument unless rate > 0.
double sample_exponential(RandomStream& rng, double rate);

/// Homogeneous Poisson points of the given rate on a union of disjoint
/// intervals, returned globally sorted.
std::vector<double> sample_poisson_region(RandomStream& rng, double rate, std::span<const Interval> region);

enum class Decision { Undecided, Accepted, Rejected };

/// A dominating-process point as stored by the ledger.
struct PointState {
    NodeId node = 0;
    double time = 0.0;
    Decision decision = Decision::Undecided;
    std::optional<NeighborhoodDescriptor> neighborhood;
};

/// Reference to a ledger point returned by a realization request.
struct LedgerPoint {
    NodeId node = 0;
    double time = 0.0;
    std::size_t id = 0;
    /// True when the point was simulated by this request, false when it was
    /// already realized by an earlier one.
    bool fresh = false;
};

/// Record of the space-time regions where the dominating Poisson processes
/// have been realized. Every (node, subinterval) is simulated at most once
/// per ledger; later requests see the same points.
class RegionLedger {
public:
    /// `stream` is the run stream; request k draws from stream.child(k).
    explicit RegionLedger(RandomStream stream);

    /// Realizes the dominating process of `node` (rate Gamma^node) on
    /// `region` (absolute time), simulating only on never-visited parts.
    /// Returns every point of the region, new ones flagged fresh.
    std::vector<LedgerPoint> realize_new(NodeId node, std::span<const Interval> region, double rate);
    std::vector<LedgerPoint> realize_new(NodeId node, Interval region, double rate) {
        return realize_new(node, std::span<const Interval>(&region, 1), rate);
    }

    /// First dominating point of `node` at or after `from`, realizing the
    /// process lazily. The visited stretch before the point is registered as
    /// realized and empty.
    LedgerPoint next_point(NodeId node, double from, double rate);

    /// Merged realized intervals of `node`, sorted.
    std::vector<Interval> coverage(NodeId node) const;

    /// Ids of realized points of `node` in [iv.lo, iv.hi), in time order.
    std::vector<std::size_t> points_in(NodeId node, Interval iv) const;

    /// Whether [iv.lo, iv.hi) is entirely realized for `node`.
    bool covered(NodeId node, Interval iv) const;

    PointState& state(std::size_t id) { return states_.at(id); }
    const PointState& state(std::size_t id) const { return states_.at(id); }

    std::size_t point_count() const { return states_.size(); }
    std::size_t request_count() const { return requests_; }
    std::vector<NodeId> nodes() const;
    std::optional<double> rate(NodeId node) const;

private:
    struct NodeRecord {
        double rate = 0.0;
        std::map<double, double> coverage;     // lo -> hi, disjoint, non-abutting
        std::map<double, std::size_t> points;  // time -> id
    };

    NodeRecord& record(NodeId node, double rate);
    std::vector<Interval> gaps(const NodeRecord& rec, Interval iv) const;
    void add_coverage(NodeRecord& rec, Interval iv);
    std::size_t insert_point(NodeRecord& rec, NodeId node, double t, Interval gap, RandomStream& rng);

    RandomStream stream_;
    std::uint64_t requests_ = 0;
    std::map<NodeId, NodeRecord> nodes_;
    std::vector<PointState> states_;
    std::unordered_set<double> times_;
};

}  // namespace kalikow
