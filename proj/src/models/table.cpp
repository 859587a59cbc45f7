#include <algorithm>
#include <cmath>

#include "kalikow/models.hpp"

namespace kalikow {

TableModel::TableModel(std::map<NodeId, NodeTable> tables, std::string family)
    : family_(std::move(family)), tables_(std::move(tables)) {
    if (tables_.empty()) throw std::invalid_argument("table model needs at least one node");
    for (const auto& [i, t] : tables_) {
        const std::string where = "node " + std::to_string(i);
        if (!(t.bound > 0.0) || !std::isfinite(t.bound)) throw std::invalid_argument(where + ": bound must be > 0");
        if (t.entries.empty()) throw std::invalid_argument(where + ": no neighborhoods");
        double total = 0.0;
        auto& cum = cumulative_[i];
        for (const auto& e : t.entries) {
            if (!(e.weight >= 0.0 && e.weight <= 1.0)) throw std::invalid_argument(where + ": weight outside [0, 1]");
            if (!std::isfinite(e.base) || !std::isfinite(e.slope)) throw std::invalid_argument(where + ": bad entry");
            for (const auto& p : e.neighborhood.pieces()) {
                if (!tables_.count(p.node)) {
                    throw std::invalid_argument(where + ": neighborhood references unknown node " +
                                                std::to_string(p.node));
                }
            }
            total += e.weight;
            cum.push_back(total);
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument(where + ": weights sum to " + std::to_string(total) + ", expected 1");
        }
    }
}

TableModel TableModel::constant(std::size_t nodes, double rate, double bound) {
    if (!(rate >= 0.0) || !(rate <= bound)) throw std::invalid_argument("constant model needs 0 <= rate <= bound");
    std::map<NodeId, NodeTable> tables;
    for (std::size_t i = 0; i < nodes; ++i) tables[NodeId(i)] = NodeTable{bound, {Entry{{}, 1.0, rate, 0.0}}};
    return TableModel(std::move(tables), "constant");
}

std::optional<std::vector<NodeId>> TableModel::nodes() const {
    std::vector<NodeId> out;
    for (const auto& [i, t] : tables_) out.push_back(i);
    return out;
}

const TableModel::NodeTable& TableModel::table(NodeId i) const {
    auto it = tables_.find(i);
    if (it == tables_.end()) throw std::out_of_range("node " + std::to_string(i) + " is not part of the model");
    return it->second;
}

double TableModel::component(NodeId i, const Entry& e, const PastView& x) const {
    std::size_t count = 0;
    for (const auto& p : e.neighborhood.pieces()) count += x.count_in(p.node, p.interval);
    return std::clamp(e.base + e.slope * double(count), 0.0, table(i).bound);
}

double TableModel::raw_intensity(NodeId i, const PastView& x) const {
    double s = 0.0;
    for (const auto& e : table(i).entries) s += e.weight * component(i, e, x);
    return s;
}

double TableModel::raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const {
    const auto& e = table(i).entries.at(std::size_t(v.params.at(0)));
    return e.weight * component(i, e, x);
}

double TableModel::pmf(NodeId i, const NeighborhoodDescriptor& v) const {
    if (v.kind != NeighborhoodDescriptor::Kind::Table) return 0.0;
    const auto& entries = table(i).entries;
    const auto idx = v.params.at(0);
    return idx < 0 || std::size_t(idx) >= entries.size() ? 0.0 : entries[std::size_t(idx)].weight;
}

NeighborhoodDescriptor TableModel::sample_neighborhood(NodeId i, RandomStream& rng) const {
    const auto& cum = cumulative_.at(i);
    const double u = rng.uniform() * cum.back();
    auto idx = std::size_t(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    idx = std::min(idx, cum.size() - 1);
    return NeighborhoodDescriptor::table(std::int64_t(idx));
}

Neighborhood TableModel::expand(NodeId i, const NeighborhoodDescriptor& v) const {
    return table(i).entries.at(std::size_t(v.params.at(0))).neighborhood;
}

std::vector<NeighborhoodDescriptor> TableModel::enumerate(NodeId i, std::size_t count) const {
    std::vector<NeighborhoodDescriptor> out;
    const auto n = std::min(count, table(i).entries.size());
    for (std::size_t k = 0; k < n; ++k) out.push_back(NeighborhoodDescriptor::table(std::int64_t(k)));
    return out;
}

std::optional<double> TableModel::global_bound(NodeId i) const { return table(i).bound; }

std::optional<double> TableModel::component_bound(NodeId i, const NeighborhoodDescriptor& v) const {
    return table(i).bound * pmf(i, v);
}

LocalBound TableModel::local_bound(NodeId i, const PastView&) const { return {table(i).bound}; }

std::map<NodeId, double> TableModel::mean_footprint(NodeId i) const {
    std::map<NodeId, double> out;
    for (const auto& [j, t] : tables_) out[j] = 0.0;
    for (const auto& e : table(i).entries) {
        for (const auto& [j, t] : tables_) out[j] += e.weight * t.bound * e.neighborhood.length_on(j);
    }
    return out;
}

}  // namespace kalikow
