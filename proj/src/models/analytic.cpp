#include <algorithm>
#include <cmath>
#include <functional>

#include "detail.hpp"
#include "kalikow/models.hpp"

namespace kalikow {

using Kind = NeighborhoodDescriptor::Kind;

namespace {

double full_drive(const KernelMatrix& kernels, NodeId i, const PastView& x) {
    double s = 0.0;
    for (NodeId j : kernels.sources(i)) s += kernel_sum(kernels(i, j), x, j, 0.0, detail::kInfinity);
    return s;
}

// Visits the descriptors of total bin index `level` (sum of n over the atoms)
// by order, then composition, then source assignment. Returns false once
// `visit` asks to stop.
bool visit_level(std::int64_t level, const std::vector<NodeId>& sources,
                 const std::function<bool(const std::vector<std::pair<NodeId, std::int64_t>>&)>& visit) {
    std::vector<std::pair<NodeId, std::int64_t>> atoms;
    std::function<bool(std::int64_t, std::size_t)> parts;
    std::function<bool(std::size_t)> assign;
    std::vector<std::int64_t> comp;

    assign = [&](std::size_t m) -> bool {
        if (m == comp.size()) return visit(atoms);
        for (NodeId j : sources) {
            atoms[m] = {j, comp[m]};
            if (!assign(m + 1)) return false;
        }
        return true;
    };
    parts = [&](std::int64_t remaining, std::size_t left) -> bool {
        if (left == 0) {
            if (remaining != 0) return true;
            atoms.assign(comp.size(), {0, 0});
            return assign(0);
        }
        for (std::int64_t n = 1; n <= remaining - std::int64_t(left - 1); ++n) {
            comp.push_back(n);
            const bool go = parts(remaining - n, left - 1);
            comp.pop_back();
            if (!go) return false;
        }
        return true;
    };
    for (std::int64_t k = 1; k <= level; ++k) {
        comp.clear();
        if (!parts(level, std::size_t(k))) return false;
    }
    return true;
}

}  // namespace

AnalyticHawkesModel::AnalyticHawkesModel(std::vector<RateFunction> psi, KernelMatrix kernels, double eps,
                                         double radius, Weights weights)
    : psi_(std::move(psi)), kernels_(std::move(kernels)), eps_(eps), radius_(radius), rho_(weights.order_ratio) {
    if (psi_.empty()) throw std::invalid_argument("analytic model needs at least one node");
    if (kernels_.size() != psi_.size()) throw std::invalid_argument("kernel matrix size does not match psi");
    if (!(eps_ > 0.0) || !std::isfinite(eps_)) throw std::invalid_argument("epsilon must be > 0");
    if (!(radius_ > 0.0)) throw std::invalid_argument("radius of convergence must be > 0");
    if (!(rho_ > 0.0 && rho_ < 1.0)) throw std::invalid_argument("order ratio must lie in (0, 1)");
    for (std::size_t i = 0; i < psi_.size(); ++i) {
        if (!psi_[i].analytic_nonnegative()) {
            throw std::invalid_argument("node " + std::to_string(i) + ": " + psi_[i].describe() +
                                        " has no nonnegative Taylor expansion at 0");
        }
        atoms_.push_back(detail::make_atom_law(kernels_, NodeId(i), eps_, weights.ratio));
    }
}

std::optional<std::vector<NodeId>> AnalyticHawkesModel::nodes() const {
    std::vector<NodeId> out(psi_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = NodeId(i);
    return out;
}

SubspaceGuard AnalyticHawkesModel::guard() const {
    auto kernels = kernels_;
    DriveFunction drive = [kernels](NodeId i, const PastView& x) { return full_drive(kernels, i, x); };
    auto all = *nodes();
    return {SubspaceGuard::DriveCap{radius_, std::move(drive), std::move(all)}};
}

double AnalyticHawkesModel::drive(NodeId i, const PastView& x) const { return full_drive(kernels_, i, x); }

double AnalyticHawkesModel::atom_value(NodeId i, NodeId j, std::int64_t n, const PastView& x) const {
    if (n < 1 || j < 0 || std::size_t(j) >= psi_.size()) return 0.0;
    return kernel_sum(kernels_(i, j), x, j, double(n - 1) * eps_, double(n) * eps_);
}

double AnalyticHawkesModel::raw_intensity(NodeId i, const PastView& x) const {
    return psi_.at(std::size_t(i))(drive(i, x));
}

double AnalyticHawkesModel::raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const {
    if (v.kind != Kind::Taylor && v.kind != Kind::Empty) {
        throw std::invalid_argument("analytic model: unsupported neighborhood " + v.to_string());
    }
    const auto k = v.taylor_order();
    double d = *psi_.at(std::size_t(i)).taylor_coefficient(k);
    for (std::size_t m = 0; m < k && d != 0.0; ++m) d *= atom_value(i, v.params[2 * m], v.params[2 * m + 1], x);
    return d;
}

double AnalyticHawkesModel::pmf(NodeId i, const NeighborhoodDescriptor& v) const {
    if (v.kind != Kind::Taylor && v.kind != Kind::Empty) return 0.0;
    const auto k = v.taylor_order();
    const auto& law = atoms_.at(std::size_t(i));
    if (law.sources.empty()) return k == 0 ? 1.0 : 0.0;
    double w = (1.0 - rho_) * std::pow(rho_, double(k));
    for (std::size_t m = 0; m < k; ++m) w *= law.pmf(v.params[2 * m], v.params[2 * m + 1]);
    return w;
}

NeighborhoodDescriptor AnalyticHawkesModel::sample_neighborhood(NodeId i, RandomStream& rng) const {
    const auto& law = atoms_.at(std::size_t(i));
    std::vector<std::pair<NodeId, std::int64_t>> atoms;
    if (!law.sources.empty()) {
        const auto k = std::int64_t(std::floor(std::log(rng.uniform()) / std::log(rho_)));
        for (std::int64_t m = 0; m < k; ++m) atoms.push_back(law.sample(rng));
    }
    return NeighborhoodDescriptor::taylor(atoms);
}

Neighborhood AnalyticHawkesModel::expand(NodeId, const NeighborhoodDescriptor& v) const {
    std::vector<NeighborhoodPiece> pieces;
    for (std::size_t m = 0; m < v.taylor_order(); ++m) {
        const double n = double(v.params[2 * m + 1]);
        pieces.push_back({v.params[2 * m], {-n * eps_, -(n - 1.0) * eps_}});
    }
    return Neighborhood(std::move(pieces));
}

std::vector<NeighborhoodDescriptor> AnalyticHawkesModel::enumerate(NodeId i, std::size_t count) const {
    std::vector<NeighborhoodDescriptor> out;
    if (count == 0) return out;
    out.push_back(NeighborhoodDescriptor::taylor({}));
    const auto& sources = atoms_.at(std::size_t(i)).sources;
    if (sources.empty()) return out;
    const auto visit = [&](const std::vector<std::pair<NodeId, std::int64_t>>& atoms) {
        out.push_back(NeighborhoodDescriptor::taylor(atoms));
        return out.size() < count;
    };
    for (std::int64_t level = 1; out.size() < count; ++level) {
        if (!visit_level(level, sources, visit)) break;
    }
    return out;
}

LocalBound AnalyticHawkesModel::local_bound(NodeId i, const PastView& x) const {
    const auto& law = atoms_.at(std::size_t(i));
    if (law.sources.empty()) return {psi_.at(std::size_t(i))(0.0)};
    double ratio = 0.0;
    if (!law.sources.empty()) {
        const double first = (1.0 - law.ratio) / double(law.sources.size());
        for (NodeId j : law.sources) {
            ratio = std::max(ratio, atom_ratio_bound(kernels_(i, j), x, j, eps_, first, law.ratio));
        }
    }
    const double bound = std::isfinite(ratio)
                             ? psi_.at(std::size_t(i)).sup_scaled_coefficient(ratio / rho_) / (1.0 - rho_)
                             : ratio;
    if (!std::isfinite(bound)) {
        throw ExplosionGuard("analytic model: no finite component bound for node " + std::to_string(i));
    }
    return {bound};
}

std::map<NodeId, double> AnalyticHawkesModel::mean_footprint(NodeId i) const {
    std::map<NodeId, double> out;
    for (std::size_t j = 0; j < psi_.size(); ++j) out[NodeId(j)] = 0.0;
    const auto& law = atoms_.at(std::size_t(i));
    for (NodeId j : law.sources) {
        const auto rate = dominating_rate(j);
        if (!rate) throw std::invalid_argument("analytic: no dominating rate declared for node " + std::to_string(j));
        // P(atom in v) = rho pi / (1 - rho + rho pi), summed until the tail is negligible
        double s = 0.0;
        for (std::int64_t n = 1;; ++n) {
            const double p = law.pmf(j, n);
            s += rho_ * p / (1.0 - rho_ + rho_ * p);
            const double tail = rho_ / (1.0 - rho_) * std::pow(law.ratio, double(n)) / double(law.sources.size());
            if (tail < 1e-16 * std::max(s, 1e-300) || n > 100000) break;
        }
        out[j] = eps_ * *rate * s;
    }
    return out;
}

std::optional<double> AnalyticHawkesModel::measure_tail_bound(NodeId i, std::size_t n) const {
    const auto& law = atoms_.at(std::size_t(i));
    if (law.sources.empty()) return 0.0;
    double rate = 0.0;
    for (NodeId j : law.sources) {
        const auto r = dominating_rate(j);
        if (!r) return std::nullopt;
        rate = std::max(rate, *r);
    }
    // The first (1 + S)^L descriptors cover levels 0..L; P(v) <= level * eps * rate.
    const double s = double(law.sources.size());
    std::int64_t level = 0;
    for (double covered = 1.0; covered <= double(n); covered *= 1.0 + s) ++level;
    if (level == 0) level = 1;
    const double q = law.ratio + rho_ * (1.0 - law.ratio);
    const double first = (1.0 - rho_) * rho_ * (1.0 - law.ratio);
    // sum_{l >= level} l * first * q^{l-1}
    return eps_ * rate * first * detail::geometric_moment_tail(q, level - 1, 1);
}

}  // namespace kalikow
