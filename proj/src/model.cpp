#include "kalikow/model.hpp"

#include <cmath>

namespace kalikow {

double KalikowModel::tail_mass(NodeId i, std::size_t n) const {
    double s = 0.0;
    for (const auto& v : enumerate(i, n)) s += pmf(i, v);
    return std::max(0.0, 1.0 - s);
}

std::optional<double> KalikowModel::dominating_rate(NodeId i) const {
    if (auto g = global_bound(i)) return g;
    if (declared_rates_) {
        auto it = declared_rates_->find(i);
        if (it != declared_rates_->end()) return it->second;
    }
    return std::nullopt;
}

std::map<NodeId, double> KalikowModel::mean_footprint(NodeId i) const {
    const auto all = nodes();
    if (!all) throw std::logic_error(family() + ": mean footprint needs a finite node set");
    std::map<NodeId, double> rates;
    for (NodeId j : *all) {
        auto r = dominating_rate(j);
        if (!r) throw std::invalid_argument(family() + ": no dominating rate for node " + std::to_string(j));
        rates[j] = *r;
    }
    std::map<NodeId, double> out;
    for (NodeId j : *all) out[j] = 0.0;
    constexpr std::size_t kBatch = 4096;
    constexpr std::size_t kMax = std::size_t(1) << 22;
    std::size_t n = kBatch;
    for (;;) {
        std::map<NodeId, double> acc;
        for (const auto& v : enumerate(i, n)) {
            const double w = pmf(i, v);
            for (const auto& p : expand(i, v).pieces()) acc[p.node] += w * rates.at(p.node) * p.interval.length();
        }
        const auto tail = measure_tail_bound(i, n);
        if ((tail && *tail < 1e-12) || n >= kMax) {
            for (auto& [j, m] : acc) out[j] = m;
            return out;
        }
        n *= 4;
    }
}

double KalikowModel::mean_offspring_total(NodeId i) const {
    double s = 0.0;
    for (const auto& [j, m] : mean_footprint(i)) s += m;
    return s;
}

void KalikowModel::check_guard(const PastView& x) const {
    const auto g = guard();
    if (!g.contains(x)) {
        throw GuardViolation("configuration lies outside the subspace " + g.describe() + " of model '" + family() + "'");
    }
}

void KalikowModel::check_window(NodeId i, const PastView& x, double reach) const {
    const auto& w = x.base().window();
    if (!w) return;
    const double need = std::min(reach, memory(i));
    if (!(w->lo <= x.origin() - need) || !(x.origin() <= w->hi)) {
        throw ConfigurationError("configuration window does not cover the dependence range of node " +
                                 std::to_string(i));
    }
}

double KalikowModel::intensity(NodeId i, const PastView& x) const {
    check_guard(x);
    check_window(i, x, std::numeric_limits<double>::infinity());
    return raw_intensity(i, x);
}

double KalikowModel::delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const {
    check_guard(x);
    check_window(i, x, -expand(i, v).earliest());
    return raw_delta(i, v, x);
}

double KalikowModel::raw_component(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const {
    const double d = raw_delta(i, v, x);
    const double w = pmf(i, v);
    if (w == 0.0) {
        if (d == 0.0) return 0.0;
        throw std::logic_error(family() + ": nonzero Delta on a zero-weight neighborhood " + v.to_string());
    }
    return d / w;
}

double KalikowModel::component_value(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const {
    check_guard(x);
    check_window(i, x, -expand(i, v).earliest());
    return raw_component(i, v, x);
}

double evaluate_decomposition(const KalikowModel& model, NodeId i, const PastView& x, std::size_t n) {
    model.check_guard(x);
    double s = 0.0;
    for (const auto& v : model.enumerate(i, n)) s += model.pmf(i, v) * model.raw_component(i, v, x);
    return s;
}

double evaluate_decomposition(const KalikowModel& model, NodeId i, const Configuration& x, std::size_t n) {
    return evaluate_decomposition(model, i, PastView(x, 0.0), n);
}

double neighborhood_measure(const KalikowModel& model, const Neighborhood& v) {
    std::map<NodeId, double> rates;
    for (const auto& p : v.pieces()) {
        if (rates.count(p.node)) continue;
        auto r = model.dominating_rate(p.node);
        if (!r) throw std::invalid_argument("no bound Gamma for node " + std::to_string(p.node));
        rates[p.node] = *r;
    }
    return neighborhood_measure(v, rates);
}

}  // namespace kalikow
