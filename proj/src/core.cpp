#include "kalikow/core.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace kalikow {

namespace {

const std::vector<double> kNoPoints;

std::string format_point(NodeId node, double t) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << node << ", " << t << ")";
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void Configuration::add(NodeId node, double t) {
    if (!std::isfinite(t)) {
        throw ConfigurationError("point time must be finite: " + format_point(node, t));
    }
    if (window_ && !window_->contains(t)) {
        throw ConfigurationError("point outside window: " + format_point(node, t));
    }
    auto& pts = points_[node];
    auto it = std::lower_bound(pts.begin(), pts.end(), t);
    if (it != pts.end() && *it == t) {
        throw ConfigurationError("duplicate point " + format_point(node, t));
    }
    pts.insert(it, t);
}

void Configuration::push_back(NodeId node, double t) {
    auto& pts = points_[node];
    if (!pts.empty() && !(pts.back() < t)) {
        throw ConfigurationError("push_back out of order at " + format_point(node, t));
    }
    pts.push_back(t);
}

std::span<const double> Configuration::points(NodeId node) const {
    auto it = points_.find(node);
    if (it == points_.end()) return kNoPoints;
    return it->second;
}

std::size_t Configuration::size() const {
    std::size_t n = 0;
    for (const auto& [node, pts] : points_) n += pts.size();
    return n;
}

std::size_t Configuration::count_in(NodeId node, Interval iv) const {
    const auto pts = points(node);
    auto first = std::lower_bound(pts.begin(), pts.end(), iv.lo);
    auto last = std::lower_bound(first, pts.end(), iv.hi);
    return static_cast<std::size_t>(last - first);
}

void Configuration::validate() const {
    std::set<double> seen;
    for (const auto& [node, pts] : points_) {
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (!std::isfinite(pts[k])) {
                throw ConfigurationError("non-finite point " + format_point(node, pts[k]));
            }
            if (k > 0 && !(pts[k - 1] < pts[k])) {
                throw ConfigurationError("points not strictly increasing at " + format_point(node, pts[k]));
            }
            if (window_ && !window_->contains(pts[k])) {
                throw ConfigurationError("point outside window: " + format_point(node, pts[k]));
            }
            if (!seen.insert(pts[k]).second) {
                throw ConfigurationError("time collision across nodes at " + format_point(node, pts[k]));
            }
        }
    }
}

std::vector<std::pair<double, NodeId>> Configuration::sorted_events() const {
    std::vector<std::pair<double, NodeId>> events;
    events.reserve(size());
    for (const auto& [node, pts] : points_) {
        for (double t : pts) events.emplace_back(t, node);
    }
    std::sort(events.begin(), events.end());
    return events;
}

// ---------------------------------------------------------------------------
// PastView

std::span<const double> PastView::absolute(NodeId node) const {
    const auto pts = x_->points(node);
    auto last = std::lower_bound(pts.begin(), pts.end(), origin_);
    return pts.first(static_cast<std::size_t>(last - pts.begin()));
}

std::size_t PastView::count_in(NodeId node, Interval rel) const {
    const double hi = std::min(origin_ + rel.hi, origin_);
    if (!(origin_ + rel.lo < hi)) return 0;
    return x_->count_in(node, {origin_ + rel.lo, hi});
}

double PastView::age(NodeId node) const {
    const auto pts = absolute(node);
    if (pts.empty()) return std::numeric_limits<double>::infinity();
    return origin_ - pts.back();
}

std::vector<NodeId> PastView::active_nodes() const {
    std::vector<NodeId> nodes;
    for (const auto& [node, pts] : x_->all()) {
        if (!pts.empty() && pts.front() < origin_) nodes.push_back(node);
    }
    return nodes;
}

bool PastView::covers(Interval rel) const {
    const auto& w = x_->window();
    if (!w) return true;
    return w->lo <= origin_ + rel.lo && origin_ + rel.hi <= w->hi;
}

// ---------------------------------------------------------------------------
// Neighborhood

Neighborhood::Neighborhood(std::vector<NeighborhoodPiece> pieces) {
    for (const auto& p : pieces) {
        if (!(p.interval.lo < p.interval.hi)) {
            throw std::invalid_argument("neighborhood piece must satisfy a < b");
        }
        if (p.interval.hi > 0.0) {
            throw std::invalid_argument("neighborhood piece must lie in the past (b <= 0)");
        }
    }
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) {
        return a.node != b.node ? a.node < b.node : a.interval.lo < b.interval.lo;
    });
    for (const auto& p : pieces) {
        if (!pieces_.empty() && pieces_.back().node == p.node && p.interval.lo <= pieces_.back().interval.hi) {
            pieces_.back().interval.hi = std::max(pieces_.back().interval.hi, p.interval.hi);
        } else {
            pieces_.push_back(p);
        }
    }
}

double Neighborhood::length_on(NodeId node) const {
    double len = 0.0;
    for (const auto& p : pieces_) {
        if (p.node == node) len += p.interval.length();
    }
    return len;
}

double Neighborhood::earliest() const {
    double e = 0.0;
    for (const auto& p : pieces_) e = std::min(e, p.interval.lo);
    return e;
}

// ---------------------------------------------------------------------------
// NeighborhoodDescriptor

NeighborhoodDescriptor NeighborhoodDescriptor::taylor(const std::vector<std::pair<NodeId, std::int64_t>>& atoms) {
    NeighborhoodDescriptor d{Kind::Taylor, {}};
    if (atoms.empty()) return empty_set();
    for (const auto& [j, n] : atoms) {
        d.params.push_back(j);
        d.params.push_back(n);
    }
    return d;
}

std::string NeighborhoodDescriptor::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Empty: return "empty";
        case Kind::Atomic: os << "atom(" << params[0] << "," << params[1] << ")"; break;
        case Kind::Nested: os << "nested(" << params[0] << ")"; break;
        case Kind::Table: os << "table(" << params[0] << ")"; break;
        case Kind::Taylor:
            os << "taylor(";
            for (std::size_t m = 0; m < params.size(); m += 2) {
                os << (m ? ";" : "") << params[m] << "," << params[m + 1];
            }
            os << ")";
            break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// SubspaceGuard

bool SubspaceGuard::contains(const PastView& x) const {
    return std::visit(
        [&](const auto& g) -> bool {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, RefractoryGap>) {
                for (NodeId node : x.active_nodes()) {
                    const auto pts = x.absolute(node);
                    for (std::size_t k = 1; k < pts.size(); ++k) {
                        if (!(pts[k] - pts[k - 1] > g.delta)) return false;
                    }
                }
                return true;
            } else if constexpr (std::is_same_v<G, ActivityCap>) {
                const double end = std::min(x.origin(), std::nextafter(g.horizon, INFINITY));
                for (const auto& [node, pts] : x.base().all()) {
                    if (x.base().count_in(node, {0.0, end}) > g.cap) return false;
                }
                return true;
            } else if constexpr (std::is_same_v<G, DriveCap>) {
                if (!g.drive) return true;
                for (NodeId i : g.nodes) {
                    if (!(g.drive(i, x) < g.cap)) return false;
                }
                return true;
            } else {
                return true;
            }
        },
        kind);
}

std::string SubspaceGuard::describe() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, RefractoryGap>) {
                os << "refractory-gap(delta=" << g.delta << ")";
            } else if constexpr (std::is_same_v<G, ActivityCap>) {
                os << "activity-cap(T=" << g.horizon << ", K=" << g.cap << ")";
            } else if constexpr (std::is_same_v<G, DriveCap>) {
                os << "drive-cap(K=" << g.cap << ")";
            } else if constexpr (std::is_same_v<G, SummableIntensity>) {
                os << "summable-intensity";
            } else {
                os << "none";
            }
        },
        kind);
    return os.str();
}

// ---------------------------------------------------------------------------
// Free operations

double neighborhood_measure(const Neighborhood& v, const std::map<NodeId, double>& bounds) {
    double total = 0.0;
    for (const auto& p : v.pieces()) {
        auto it = bounds.find(p.node);
        if (it == bounds.end()) {
            throw std::invalid_argument("no bound Gamma for node " + std::to_string(p.node));
        }
        total += it->second * p.interval.length();
    }
    return total;
}

bool agrees_on(const Configuration& x, const Configuration& y, const Neighborhood& v) {
    for (const auto& p : v.pieces()) {
        for (const auto* c : {&x, &y}) {
            if (c->window() && !c->window()->contains(p.interval)) {
                throw std::invalid_argument("neighborhood piece on node " + std::to_string(p.node) +
                                            " is not covered by the configuration window");
            }
        }
        const auto px = x.points(p.node);
        const auto py = y.points(p.node);
        auto xa = std::lower_bound(px.begin(), px.end(), p.interval.lo);
        auto xb = std::lower_bound(xa, px.end(), p.interval.hi);
        auto ya = std::lower_bound(py.begin(), py.end(), p.interval.lo);
        auto yb = std::lower_bound(ya, py.end(), p.interval.hi);
        if (!std::equal(xa, xb, ya, yb)) return false;
    }
    return true;
}

Configuration shift_to_origin(const Configuration& x, double t) {
    std::optional<Interval> window;
    if (x.window()) {
        window = Interval{x.window()->lo - t, std::min(x.window()->hi, t) - t};
    }
    Configuration out(window);
    for (const auto& [node, pts] : x.all()) {
        for (double s : pts) {
            if (s < t) out.push_back(node, s - t);
        }
    }
    return out;
}

Configuration restrict_to(const PastView& x, const Neighborhood& v) {
    Configuration out;
    for (const auto& p : v.pieces()) {
        const auto pts = x.base().points(p.node);
        const double lo = x.origin() + p.interval.lo;
        const double hi = x.origin() + p.interval.hi;
        auto a = std::lower_bound(pts.begin(), pts.end(), lo);
        auto b = std::lower_bound(a, pts.end(), hi);
        for (auto it = a; it != b; ++it) out.add(p.node, *it - x.origin());
    }
    return out;
}

}  // namespace kalikow
