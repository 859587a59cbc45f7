#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "kalikow/models.hpp"

namespace kalikow {

using Kind = NeighborhoodDescriptor::Kind;

LinearHawkesModel::LinearHawkesModel(std::vector<double> mu, KernelMatrix kernels, double eps, Weights weights)
    : mu_(std::move(mu)), kernels_(std::move(kernels)), eps_(eps), empty_(weights.empty) {
    if (mu_.empty()) throw std::invalid_argument("linear model needs at least one node");
    if (kernels_.size() != mu_.size()) throw std::invalid_argument("kernel matrix size does not match mu");
    if (!(eps_ > 0.0) || !std::isfinite(eps_)) throw std::invalid_argument("epsilon must be > 0");
    if (!(empty_ >= 0.0 && empty_ <= 1.0)) throw std::invalid_argument("empty weight must lie in [0, 1]");
    for (std::size_t i = 0; i < mu_.size(); ++i) {
        if (!(mu_[i] >= 0.0) || !std::isfinite(mu_[i])) throw std::invalid_argument("mu must be finite and >= 0");
        atoms_.push_back(detail::make_atom_law(kernels_, NodeId(i), eps_, weights.ratio));
        const bool has_sources = !atoms_.back().sources.empty();
        if (mu_[i] > 0.0 && empty_weight(NodeId(i)) == 0.0) {
            throw std::invalid_argument("node " + std::to_string(i) + ": mu > 0 needs a positive empty weight");
        }
        if (has_sources && empty_ >= 1.0) {
            throw std::invalid_argument("node " + std::to_string(i) + ": kernels present but empty weight is 1");
        }
    }
}

std::optional<std::vector<NodeId>> LinearHawkesModel::nodes() const {
    std::vector<NodeId> out(mu_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = NodeId(i);
    return out;
}

double LinearHawkesModel::empty_weight(NodeId i) const { return atoms(i).sources.empty() ? 1.0 : empty_; }

double LinearHawkesModel::memory(NodeId i) const {
    double m = 0.0;
    for (NodeId j : atoms(i).sources) m = std::max(m, kernels_(i, j).support_end());
    return m;
}

double LinearHawkesModel::raw_intensity(NodeId i, const PastView& x) const {
    double s = mu(i);
    for (NodeId j : atoms(i).sources) s += kernel_sum(kernels_(i, j), x, j, 0.0, detail::kInfinity);
    return s;
}

double LinearHawkesModel::raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const {
    switch (v.kind) {
        case Kind::Empty: return mu(i);
        case Kind::Atomic: {
            const NodeId j = v.params.at(0);
            const auto n = v.params.at(1);
            if (n < 1 || j < 0 || std::size_t(j) >= mu_.size()) return 0.0;
            return kernel_sum(kernels_(i, j), x, j, double(n - 1) * eps_, double(n) * eps_);
        }
        default: throw std::invalid_argument("linear model: unsupported neighborhood " + v.to_string());
    }
}

double LinearHawkesModel::pmf(NodeId i, const NeighborhoodDescriptor& v) const {
    switch (v.kind) {
        case Kind::Empty: return empty_weight(i);
        case Kind::Atomic: return (1.0 - empty_weight(i)) * atoms(i).pmf(v.params.at(0), v.params.at(1));
        default: return 0.0;
    }
}

NeighborhoodDescriptor LinearHawkesModel::sample_neighborhood(NodeId i, RandomStream& rng) const {
    if (rng.uniform() < empty_weight(i)) return NeighborhoodDescriptor::empty_set();
    const auto [j, n] = atoms(i).sample(rng);
    return NeighborhoodDescriptor::atomic(j, n);
}

Neighborhood LinearHawkesModel::expand(NodeId, const NeighborhoodDescriptor& v) const {
    if (v.kind == Kind::Empty) return {};
    const auto n = double(v.params.at(1));
    return Neighborhood(std::vector<NeighborhoodPiece>{{v.params.at(0), {-n * eps_, -(n - 1.0) * eps_}}});
}

std::vector<NeighborhoodDescriptor> LinearHawkesModel::enumerate(NodeId i, std::size_t count) const {
    std::vector<NeighborhoodDescriptor> out;
    if (count == 0) return out;
    out.push_back(NeighborhoodDescriptor::empty_set());
    if (atoms(i).sources.empty()) return out;
    for (std::size_t m = 0; out.size() < count; ++m) {
        const auto [j, n] = atoms(i).at(m);
        out.push_back(NeighborhoodDescriptor::atomic(j, n));
    }
    return out;
}

double LinearHawkesModel::tail_mass(NodeId i, std::size_t n) const {
    if (n == 0) return 1.0;
    if (atoms(i).sources.empty()) return 0.0;
    return (1.0 - empty_weight(i)) * atoms(i).tail(n - 1);
}

LocalBound LinearHawkesModel::local_bound(NodeId i, const PastView& x) const {
    const double e = empty_weight(i);
    double bound = mu(i) > 0.0 ? mu(i) / e : 0.0;
    const auto& law = atoms(i);
    if (!law.sources.empty()) {
        const double first = (1.0 - e) * (1.0 - law.ratio) / double(law.sources.size());
        for (NodeId j : law.sources) {
            bound = std::max(bound, atom_ratio_bound(kernels_(i, j), x, j, eps_, first, law.ratio));
        }
    }
    if (!std::isfinite(bound)) {
        throw ExplosionGuard("linear model: no finite component bound for node " + std::to_string(i) +
                             " (atom ratio too small for the kernel decay)");
    }
    return {bound};
}

std::map<NodeId, double> LinearHawkesModel::mean_footprint(NodeId i) const {
    std::map<NodeId, double> out;
    for (std::size_t j = 0; j < mu_.size(); ++j) out[NodeId(j)] = 0.0;
    const auto& law = atoms(i);
    for (NodeId j : law.sources) {
        const auto rate = dominating_rate(j);
        if (!rate) throw std::invalid_argument("linear: no dominating rate declared for node " + std::to_string(j));
        out[j] = (1.0 - empty_weight(i)) / double(law.sources.size()) * eps_ * *rate;
    }
    return out;
}

std::optional<double> LinearHawkesModel::measure_tail_bound(NodeId i, std::size_t n) const {
    double rate = 0.0;
    for (NodeId j : atoms(i).sources) {
        const auto r = dominating_rate(j);
        if (!r) return std::nullopt;
        rate = std::max(rate, *r);
    }
    return eps_ * rate * tail_mass(i, std::max<std::size_t>(n, 1));
}

}  // namespace kalikow
