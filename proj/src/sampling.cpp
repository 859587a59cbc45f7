#include "kalikow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace kalikow {

double sample_exponential(RandomStream& rng, double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("exponential rate must be positive and finite, got " + std::to_string(rate));
    }
    return std::exponential_distribution<double>(rate)(rng);
}

std::vector<double> sample_poisson_region(RandomStream& rng, double rate, std::span<const Interval> region) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("Poisson rate must be finite and nonnegative");
    }
    double total = 0.0;
    for (const auto& iv : region) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
            throw std::invalid_argument("Poisson region has infinite total length");
        }
        total += std::max(0.0, iv.length());
    }
    std::vector<double> out;
    if (rate == 0.0 || total == 0.0) return out;
    for (const auto& iv : region) {
        if (iv.empty()) continue;
        const auto n = std::poisson_distribution<long>(rate * iv.length())(rng);
        std::uniform_real_distribution<double> pos(iv.lo, iv.hi);
        for (long k = 0; k < n; ++k) {
            double t = pos(rng);
            // uniform_real_distribution may round up to hi.
            if (!(t < iv.hi)) t = iv.lo;
            out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------

RegionLedger::RegionLedger(RandomStream stream) : stream_(std::move(stream)) {}

RegionLedger::NodeRecord& RegionLedger::record(NodeId node, double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("dominating rate of node " + std::to_string(node) + " must be positive");
    }
    auto [it, inserted] = nodes_.try_emplace(node);
    if (inserted) {
        it->second.rate = rate;
    } else if (it->second.rate != rate) {
        throw std::logic_error("rate mismatch for node " + std::to_string(node) + ": ledger holds " +
                               std::to_string(it->second.rate) + ", request uses " + std::to_string(rate));
    }
    return it->second;
}

std::vector<Interval> RegionLedger::gaps(const NodeRecord& rec, Interval iv) const {
    std::vector<Interval> out;
    double cursor = iv.lo;
    auto it = rec.coverage.upper_bound(iv.lo);
    if (it != rec.coverage.begin()) {
        auto prev = std::prev(it);
        if (prev->second > cursor) cursor = prev->second;
    }
    for (; it != rec.coverage.end() && it->first < iv.hi && cursor < iv.hi; ++it) {
        if (it->first > cursor) out.push_back({cursor, it->first});
        cursor = std::max(cursor, it->second);
    }
    if (cursor < iv.hi) out.push_back({cursor, iv.hi});
    return out;
}

void RegionLedger::add_coverage(NodeRecord& rec, Interval iv) {
    if (iv.empty()) return;
    double lo = iv.lo;
    double hi = iv.hi;
    auto it = rec.coverage.upper_bound(lo);
    if (it != rec.coverage.begin()) {
        auto prev = std::prev(it);
        if (prev->second >= lo) {
            lo = prev->first;
            hi = std::max(hi, prev->second);
            it = rec.coverage.erase(prev);
        }
    }
    while (it != rec.coverage.end() && it->first <= hi) {
        hi = std::max(hi, it->second);
        it = rec.coverage.erase(it);
    }
    rec.coverage.emplace(lo, hi);
}

std::size_t RegionLedger::insert_point(NodeRecord& rec, NodeId node, double t, Interval gap, RandomStream& rng) {
    // Exact collisions with existing points have probability zero; resample.
    while (times_.count(t) != 0) {
        t = std::uniform_real_distribution<double>(gap.lo, gap.hi)(rng);
        if (!(t < gap.hi)) t = gap.lo;
    }
    const std::size_t id = states_.size();
    states_.push_back({node, t, Decision::Undecided, std::nullopt});
    rec.points.emplace(t, id);
    times_.insert(t);
    return id;
}

std::vector<LedgerPoint> RegionLedger::realize_new(NodeId node, std::span<const Interval> region, double rate) {
    NodeRecord& rec = record(node, rate);
    auto rng = stream_.child(requests_++);

    std::vector<Interval> requested(region.begin(), region.end());
    std::erase_if(requested, [](const Interval& iv) { return iv.empty(); });
    std::sort(requested.begin(), requested.end(), [](auto& a, auto& b) { return a.lo < b.lo; });

    std::vector<Interval> fresh_region;
    for (const auto& iv : requested) {
        for (const auto& g : gaps(rec, iv)) {
            if (!fresh_region.empty() && fresh_region.back().hi >= g.lo) {
                fresh_region.back().hi = std::max(fresh_region.back().hi, g.hi);
            } else {
                fresh_region.push_back(g);
            }
        }
    }
    // Two requested intervals may share a gap; dedupe by splitting on overlap.
    std::vector<Interval> disjoint;
    for (const auto& g : fresh_region) {
        for (const auto& piece : gaps(rec, g)) {
            if (!disjoint.empty() && disjoint.back().hi > piece.lo) continue;
            disjoint.push_back(piece);
        }
    }

    std::unordered_set<std::size_t> fresh_ids;
    const auto times = sample_poisson_region(rng, rate, disjoint);
    for (double t : times) {
        auto g = std::find_if(disjoint.begin(), disjoint.end(), [&](const Interval& iv) { return iv.contains(t); });
        fresh_ids.insert(insert_point(rec, node, t, *g, rng));
    }
    for (const auto& g : disjoint) add_coverage(rec, g);

    std::vector<LedgerPoint> out;
    for (const auto& iv : requested) {
        for (auto it = rec.points.lower_bound(iv.lo); it != rec.points.end() && it->first < iv.hi; ++it) {
            if (!out.empty() && out.back().time >= it->first) continue;
            out.push_back({node, it->first, it->second, fresh_ids.count(it->second) != 0});
        }
    }
    return out;
}

LedgerPoint RegionLedger::next_point(NodeId node, double from, double rate) {
    NodeRecord& rec = record(node, rate);
    double t = from;
    for (;;) {
        // Inside a realized interval: look for an existing point.
        auto it = rec.coverage.upper_bound(t);
        if (it != rec.coverage.begin() && std::prev(it)->second > t) {
            const double hi = std::prev(it)->second;
            auto p = rec.points.lower_bound(t);
            if (p != rec.points.end() && p->first < hi) return {node, p->first, p->second, false};
            t = hi;
            continue;
        }
        const double gap_end = it == rec.coverage.end() ? INFINITY : it->first;
        auto rng = stream_.child(requests_++);
        const double candidate = t + sample_exponential(rng, rate);
        if (candidate < gap_end) {
            const double past = std::nextafter(candidate, INFINITY);
            const std::size_t id = insert_point(rec, node, candidate, {t, past}, rng);
            add_coverage(rec, {t, past});
            return {node, states_[id].time, id, true};
        }
        add_coverage(rec, {t, gap_end});
        t = gap_end;
    }
}

std::vector<Interval> RegionLedger::coverage(NodeId node) const {
    std::vector<Interval> out;
    auto it = nodes_.find(node);
    if (it == nodes_.end()) return out;
    for (const auto& [lo, hi] : it->second.coverage) out.push_back({lo, hi});
    return out;
}

std::vector<std::size_t> RegionLedger::points_in(NodeId node, Interval iv) const {
    std::vector<std::size_t> out;
    auto it = nodes_.find(node);
    if (it == nodes_.end()) return out;
    const auto& pts = it->second.points;
    for (auto p = pts.lower_bound(iv.lo); p != pts.end() && p->first < iv.hi; ++p) out.push_back(p->second);
    return out;
}

bool RegionLedger::covered(NodeId node, Interval iv) const {
    auto it = nodes_.find(node);
    if (it == nodes_.end()) return iv.empty();
    return gaps(it->second, iv).empty();
}

std::vector<NodeId> RegionLedger::nodes() const {
    std::vector<NodeId> out;
    for (const auto& [node, rec] : nodes_) out.push_back(node);
    return out;
}

std::optional<double> RegionLedger::rate(NodeId node) const {
    auto it = nodes_.find(node);
    if (it == nodes_.end()) return std::nullopt;
    return it->second.rate;
}

}  // namespace kalikow
