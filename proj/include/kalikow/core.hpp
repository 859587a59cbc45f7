#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kalikow {

/// Node index. Lattice models use all of Z, finite models use 0..N-1.
using NodeId = std::int64_t;

/// Half-open interval [lo, hi).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool empty() const { return !(lo < hi); }
    bool contains(double t) const { return lo <= t && t < hi; }
    bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Finite point configuration: per-node strictly increasing point times.
///
/// `window` is the region where knowledge is complete. An unset window means
/// the configuration is known everywhere (e.g. empty past before 0).
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::optional<Interval> window) : window_(window) {}

    /// Inserts a point, keeping per-node order. Throws on duplicates or on
    /// points outside the window.
    void add(NodeId node, double t);

    /// Appends a point known to be later than every point of `node`.
    void push_back(NodeId node, double t);

    std::span<const double> points(NodeId node) const;
    const std::map<NodeId, std::vector<double>>& all() const { return points_; }
    const std::optional<Interval>& window() const { return window_; }
    void set_window(std::optional<Interval> w) { window_ = w; }

    std::size_t size() const;
    std::size_t count(NodeId node) const { return points(node).size(); }
    bool empty() const { return size() == 0; }

    /// Number of points of `node` in [a, b).
    std::size_t count_in(NodeId node, Interval iv) const;

    /// Checks ordering, window containment and cross-node time collisions.
    void validate() const;

    /// (time, node) pairs sorted by time.
    std::vector<std::pair<double, NodeId>> sorted_events() const;

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::map<NodeId, std::vector<double>> points_;
    std::optional<Interval> window_;
};

/// Read-only view of the points of a configuration strictly before `origin`,
/// addressed in coordinates relative to the origin (all relative times < 0).
/// This is x^{<-t} without materializing the shift.
class PastView {
public:
    PastView(const Configuration& x, double origin) : x_(&x), origin_(origin) {}

    double origin() const { return origin_; }
    const Configuration& base() const { return *x_; }

    /// Absolute times of `node` strictly before the origin.
    std::span<const double> absolute(NodeId node) const;

    /// Relative times of `node` in relative interval [a, b) (b <= 0), as lags
    /// (origin - t), i.e. positive numbers in (-b, -a].
    template <typename F>
    void for_each_lag(NodeId node, Interval rel, F&& f) const;

    std::size_t count_in(NodeId node, Interval rel) const;

    /// Age of `node`: delay since its last point, +inf if none.
    double age(NodeId node) const;

    /// Nodes that have at least one point before the origin.
    std::vector<NodeId> active_nodes() const;

    /// Whether the relative region [a,b) of any node lies inside the window.
    bool covers(Interval rel) const;

private:
    const Configuration* x_;
    double origin_;
};

template <typename F>
void PastView::for_each_lag(NodeId node, Interval rel, F&& f) const {
    const auto pts = x_->points(node);
    const double lo = origin_ + rel.lo;
    const double hi = std::min(origin_ + rel.hi, origin_);
    // Points with lo <= t < hi, visited from the most recent backwards.
    auto first = std::lower_bound(pts.begin(), pts.end(), lo);
    auto last = std::lower_bound(first, pts.end(), hi);
    for (auto it = last; it != first;) {
        --it;
        f(origin_ - *it);
    }
}

/// One piece {node} x [a, b) of a neighborhood, in relative time (b <= 0).
struct NeighborhoodPiece {
    NodeId node = 0;
    Interval interval;

    friend bool operator==(const NeighborhoodPiece&, const NeighborhoodPiece&) = default;
};

/// Finite union of node/interval pieces living strictly in the past.
/// Stored normalized: sorted by (node, lo), overlapping or abutting pieces of
/// the same node merged.
class Neighborhood {
public:
    Neighborhood() = default;
    explicit Neighborhood(std::vector<NeighborhoodPiece> pieces);

    const std::vector<NeighborhoodPiece>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }

    /// Total length of the pieces on `node`.
    double length_on(NodeId node) const;

    /// Earliest relative time of the neighborhood (0 when empty).
    double earliest() const;

    friend bool operator==(const Neighborhood&, const Neighborhood&) = default;

private:
    std::vector<NeighborhoodPiece> pieces_;
};

/// Compact description of a neighborhood, expanded by the owning model.
struct NeighborhoodDescriptor {
    enum class Kind { Empty, Atomic, Nested, Taylor, Table };

    Kind kind = Kind::Empty;
    /// Atomic: (j, n). Nested: (k). Taylor: (j1, n1, ..., jk, nk). Table: (index).
    std::vector<std::int64_t> params;

    static NeighborhoodDescriptor empty_set() { return {}; }
    static NeighborhoodDescriptor atomic(NodeId j, std::int64_t n) { return {Kind::Atomic, {j, n}}; }
    static NeighborhoodDescriptor nested(std::int64_t k) { return {Kind::Nested, {k}}; }
    static NeighborhoodDescriptor table(std::int64_t index) { return {Kind::Table, {index}}; }
    static NeighborhoodDescriptor taylor(const std::vector<std::pair<NodeId, std::int64_t>>& atoms);

    /// Order k of a Taylor descriptor (number of atoms).
    std::size_t taylor_order() const { return params.size() / 2; }

    std::string to_string() const;

    friend auto operator<=>(const NeighborhoodDescriptor&, const NeighborhoodDescriptor&) = default;
};

class GuardViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Drive of node i at a past configuration; used by DriveCap guards.
using DriveFunction = std::function<double(NodeId, const PastView&)>;

/// Subspace Y on which a decomposition holds.
struct SubspaceGuard {
    struct None {};
    /// All same-node gaps strictly larger than delta.
    struct RefractoryGap { double delta; };
    /// No node has more than `cap` points in [0, horizon].
    struct ActivityCap { double horizon; std::size_t cap; };
    /// Every drive strictly below `cap` (radius of convergence).
    struct DriveCap { double cap; DriveFunction drive; std::vector<NodeId> nodes; };
    /// Every intensity finite.
    struct SummableIntensity {};

    std::variant<None, RefractoryGap, ActivityCap, DriveCap, SummableIntensity> kind = None{};

    static SubspaceGuard none() { return {}; }
    static SubspaceGuard refractory(double delta) { return {RefractoryGap{delta}}; }
    static SubspaceGuard activity(double horizon, std::size_t cap) { return {ActivityCap{horizon, cap}}; }

    /// True iff the configuration (seen from `origin`) lies in the subspace.
    bool contains(const PastView& x) const;

    /// Name of the subspace, for diagnostics.
    std::string describe() const;
};

/// P(v) = sum over pieces of Gamma^j * length.
double neighborhood_measure(const Neighborhood& v, const std::map<NodeId, double>& bounds);

/// x =_v y: identical restrictions to v. Both windows must cover v.
bool agrees_on(const Configuration& x, const Configuration& y, const Neighborhood& v);

/// Points strictly before t, shifted by -t.
Configuration shift_to_origin(const Configuration& x, double t);

/// Restriction of the past of `origin` to the absolute translate of v,
/// returned in relative coordinates.
Configuration restrict_to(const PastView& x, const Neighborhood& v);

}  // namespace kalikow
