#include <algorithm>
#include <cmath>
#include <set>

#include "detail.hpp"
#include "kalikow/models.hpp"

namespace kalikow {

using Kind = NeighborhoodDescriptor::Kind;

FiniteAgeNetwork::FiniteAgeNetwork(KernelMatrix kernels, std::vector<std::vector<std::vector<NodeId>>> levels)
    : kernels_(std::move(kernels)), levels_(std::move(levels)) {
    const auto n = NodeId(kernels_.size());
    if (n == 0) throw std::invalid_argument("network needs at least one node");
    if (levels_.empty()) {
        for (NodeId i = 0; i < n; ++i) {
            std::vector<NodeId> rest;
            for (NodeId j = 0; j < n; ++j) {
                if (j != i) rest.push_back(j);
            }
            levels_.push_back({{i}});
            if (!rest.empty()) levels_.back().push_back(rest);
        }
    }
    if (NodeId(levels_.size()) != n) throw std::invalid_argument("ring levels must be given for every node");
    for (NodeId i = 0; i < n; ++i) {
        const auto& lv = levels_[std::size_t(i)];
        if (lv.empty() || lv[0] != std::vector<NodeId>{i}) {
            throw std::invalid_argument("node " + std::to_string(i) + ": the first ring must be {" + std::to_string(i) + "}");
        }
        std::set<NodeId> seen;
        for (const auto& ring : lv) {
            if (ring.empty()) throw std::invalid_argument("node " + std::to_string(i) + ": empty ring increment");
            for (NodeId j : ring) {
                if (j < 0 || j >= n) throw std::invalid_argument("ring member " + std::to_string(j) + " out of range");
                if (!seen.insert(j).second) throw std::invalid_argument("ring member " + std::to_string(j) + " repeated");
            }
        }
        for (NodeId j : kernels_.sources(i)) {
            if (!seen.count(j)) {
                throw std::invalid_argument("kernel from node " + std::to_string(j) + " to node " + std::to_string(i) +
                                            " is outside every ring");
            }
        }
    }
}

std::optional<std::vector<NodeId>> FiniteAgeNetwork::nodes() const {
    std::vector<NodeId> out(levels_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = NodeId(i);
    return out;
}

std::vector<NodeId> FiniteAgeNetwork::ring_increment(NodeId i, std::int64_t k) const {
    const auto& lv = levels_.at(std::size_t(i));
    if (k < 1 || k > std::int64_t(lv.size())) return {};
    return lv[std::size_t(k - 1)];
}

std::optional<std::int64_t> FiniteAgeNetwork::saturation_level(NodeId i) const {
    return std::int64_t(levels_.at(std::size_t(i)).size());
}

std::optional<std::int64_t> FiniteAgeNetwork::level_of(NodeId i, NodeId j) const {
    const auto& lv = levels_.at(std::size_t(i));
    for (std::size_t m = 0; m < lv.size(); ++m) {
        if (std::find(lv[m].begin(), lv[m].end(), j) != lv[m].end()) return std::int64_t(m + 1);
    }
    return std::nullopt;
}

std::int64_t FiniteAgeNetwork::ring_size(NodeId i, std::int64_t k) const {
    const auto& lv = levels_.at(std::size_t(i));
    std::int64_t s = 0;
    for (std::int64_t m = 0; m < std::min<std::int64_t>(k, std::int64_t(lv.size())); ++m) {
        s += std::int64_t(lv[std::size_t(m)].size());
    }
    return s;
}

// ---------------------------------------------------------------------------

LatticeAgeNetwork::LatticeAgeNetwork(double decay, double delta) : decay_(decay), delta_(delta) {
    if (!(decay_ > 1.0)) throw std::invalid_argument("lattice decay exponent must be > 1");
    if (!(delta_ > 0.0)) throw std::invalid_argument("delta must be > 0");
}

double LatticeAgeNetwork::coupling(std::int64_t distance) const {
    if (distance == 0) return 1.0;
    return 0.5 * std::pow(double(std::llabs(distance)), -decay_);
}

Kernel LatticeAgeNetwork::kernel(NodeId i, NodeId j) const { return Kernel::exponential(coupling(i - j), 1.0 / delta_); }

std::vector<NodeId> LatticeAgeNetwork::ring_increment(NodeId i, std::int64_t k) const {
    if (k < 1) return {};
    if (k == 1) return {i};
    return {i - (k - 1), i + (k - 1)};
}

std::optional<std::int64_t> LatticeAgeNetwork::level_of(NodeId i, NodeId j) const { return std::llabs(i - j) + 1; }

// ---------------------------------------------------------------------------

namespace {

double kernel_moment_tail(const Kernel& h, double delta, std::int64_t n, int m) {
    // sum_{k > n} k^m h((k - 1) delta)
    switch (h.kind()) {
        case Kernel::Kind::Zero: return 0.0;
        case Kernel::Kind::Exponential:
            return h.alpha() * detail::geometric_moment_tail(std::exp(-h.beta() * delta), n, m);
        case Kernel::Kind::Step: {
            double s = 0.0;
            for (std::int64_t k = n + 1; double(k - 1) * delta < h.support_end(); ++k) {
                s += std::pow(double(k), m) * h(double(k - 1) * delta);
            }
            return s;
        }
    }
    return 0.0;
}

}  // namespace

struct AgeHawkesModel::FiniteTail {
    std::vector<double> head;     // Gamma_k, k = 1..saturation
    std::vector<Kernel> kernels;  // from every ring node to the target
    double lipschitz = 0.0;
    double delta = 0.0;

    double mass(std::int64_t k) const {
        if (k < 1) return 0.0;
        if (k <= std::int64_t(head.size())) return head[std::size_t(k - 1)];
        double s = 0.0;
        for (const auto& h : kernels) s += h(double(k - 1) * delta);
        return lipschitz * s;
    }

    double moment(std::int64_t n, int m) const {
        double s = 0.0;
        const auto sat = std::int64_t(head.size());
        for (std::int64_t k = std::max<std::int64_t>(n + 1, 1); k <= sat; ++k) {
            s += std::pow(double(k), m) * head[std::size_t(k - 1)];
        }
        double rest = 0.0;
        for (const auto& h : kernels) rest += kernel_moment_tail(h, delta, std::max(n, sat), m);
        return s + lipschitz * rest;
    }
};

AgeHawkesModel::AgeHawkesModel(RateFunction psi, std::shared_ptr<const AgeNetwork> network, double delta,
                               Bounds bounds, std::string family)
    : psi_(std::move(psi)),
      lipschitz_(0.0),
      network_(std::move(network)),
      delta_(delta),
      bounds_(bounds),
      family_(std::move(family)) {
    if (!network_) throw std::invalid_argument("age model needs a network");
    if (!(delta_ > 0.0) || !std::isfinite(delta_)) throw std::invalid_argument("delta must be > 0");
    if (!psi_.nondecreasing()) throw std::invalid_argument("rate function " + psi_.describe() + " must be nondecreasing");
    const auto lip = psi_.lipschitz();
    if (!lip) throw std::invalid_argument("rate function " + psi_.describe() + " is not globally Lipschitz");
    lipschitz_ = *lip;
    if (!(psi_(0.0) >= 0.0)) throw std::invalid_argument("rate function must be nonnegative at 0");

    const auto all = network_->nodes();
    if (std::holds_alternative<GammaBarBounds>(bounds_)) {
        if (!all) throw std::invalid_argument("exact gamma-bar bounds need a finite network; use power-law bounds");
        for (NodeId i : *all) {
            auto tail = std::make_shared<FiniteTail>();
            tail->lipschitz = lipschitz_;
            tail->delta = delta_;
            const auto sat = network_->saturation_level(i).value();
            for (std::int64_t k = 1; k <= sat; ++k) {
                tail->head.push_back(gamma_bar(i, k));
                for (NodeId j : network_->ring_increment(i, k)) tail->kernels.push_back(network_->kernel(i, j));
            }
            std::shared_ptr<const FiniteTail> t = tail;
            finite_tails_[i] = t;
            finite_laws_.emplace(i, SeriesLaw(
                                        "gamma-bar", [t](std::int64_t k) { return t->mass(k); },
                                        [t](std::int64_t n) { return t->moment(n, 0); }));
        }
    } else {
        const auto pl = std::get<PowerLawBounds>(bounds_);
        if (!(pl.exponent > 1.0)) throw std::invalid_argument("power-law exponent must be > 1");
        if (!(pl.constant > 0.0)) throw std::invalid_argument("power-law constant must be > 0");
        const std::vector<NodeId> check = all ? *all : std::vector<NodeId>{0};
        for (NodeId i : check) {
            for (std::int64_t k = 1; k <= 1000; ++k) {
                const double g = gamma_bar(i, k);
                if (pl.constant * std::pow(double(k), -pl.exponent) < g * (1.0 - 1e-12)) {
                    throw std::invalid_argument("power-law bound " + std::to_string(pl.constant) + " k^-" +
                                                std::to_string(pl.exponent) + " is below gamma-bar at k = " +
                                                std::to_string(k) + " for node " + std::to_string(i));
                }
            }
        }
        power_law_ = SeriesLaw::power(pl.exponent);
    }
}

double AgeHawkesModel::gamma_bar(NodeId i, std::int64_t k) const {
    if (k < 1) throw std::invalid_argument("gamma_bar needs k >= 1");
    if (k == 1) return psi_(0.0);
    double s = 0.0;
    for (NodeId j : network_->ring_increment(i, k)) {
        const auto h = network_->kernel(i, j);
        s += h.at_zero() + h.l1_norm() / delta_;
    }
    const double lag = double(k - 1) * delta_;
    for (std::int64_t m = 1; m < k; ++m) {
        for (NodeId j : network_->ring_increment(i, m)) s += network_->kernel(i, j)(lag);
    }
    return lipschitz_ * s;
}

double AgeHawkesModel::gamma_k(NodeId i, std::int64_t k) const {
    if (k < 1) return 0.0;
    if (const auto* pl = std::get_if<PowerLawBounds>(&bounds_)) return pl->constant * std::pow(double(k), -pl->exponent);
    return finite_tails_.at(i)->mass(k);
}

double AgeHawkesModel::bound_moment_tail(NodeId i, std::int64_t n, int m) const {
    if (const auto* pl = std::get_if<PowerLawBounds>(&bounds_)) {
        if (pl->exponent - m <= 1.0) return detail::kInfinity;
        return pl->constant * power_tail(pl->exponent - m, std::max<std::int64_t>(n, 0));
    }
    return finite_tails_.at(i)->moment(n, m);
}

const SeriesLaw& AgeHawkesModel::law(NodeId i) const {
    if (power_law_) return *power_law_;
    auto it = finite_laws_.find(i);
    if (it == finite_laws_.end()) throw std::out_of_range("node " + std::to_string(i) + " is not part of the model");
    return it->second;
}

std::optional<double> AgeHawkesModel::global_bound(NodeId i) const {
    if (const auto* pl = std::get_if<PowerLawBounds>(&bounds_)) return pl->constant * zeta(pl->exponent);
    return law(i).total();
}

std::optional<double> AgeHawkesModel::component_bound(NodeId i, const NeighborhoodDescriptor& v) const {
    if (v.kind != Kind::Nested) return 0.0;
    return gamma_k(i, v.params.at(0));
}

double AgeHawkesModel::restricted_drive(NodeId i, std::int64_t k, const PastView& x) const {
    double s = 0.0;
    const double reach = double(k) * delta_;
    for (NodeId j : x.active_nodes()) {
        const auto level = network_->level_of(i, j);
        if (!level || *level > k) continue;
        s += kernel_sum(network_->kernel(i, j), x, j, 0.0, reach);
    }
    return s;
}

double AgeHawkesModel::partial_rate(NodeId i, std::int64_t n, const PastView& x) const {
    if (!(x.age(i) > delta_)) return 0.0;
    return psi_(restricted_drive(i, n, x));
}

double AgeHawkesModel::raw_intensity(NodeId i, const PastView& x) const {
    if (!(x.age(i) > delta_)) return 0.0;
    double s = 0.0;
    for (NodeId j : x.active_nodes()) {
        if (!network_->level_of(i, j)) continue;
        s += kernel_sum(network_->kernel(i, j), x, j, 0.0, detail::kInfinity);
    }
    return psi_(s);
}

double AgeHawkesModel::raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const {
    if (v.kind != Kind::Nested) throw std::invalid_argument("age model: unsupported neighborhood " + v.to_string());
    const auto k = v.params.at(0);
    if (k < 1 || !(x.age(i) > delta_)) return 0.0;
    if (k == 1) return psi_(0.0);
    return psi_(restricted_drive(i, k, x)) - psi_(restricted_drive(i, k - 1, x));
}

double AgeHawkesModel::pmf(NodeId i, const NeighborhoodDescriptor& v) const {
    if (v.kind != Kind::Nested) return 0.0;
    return law(i).pmf(v.params.at(0));
}

NeighborhoodDescriptor AgeHawkesModel::sample_neighborhood(NodeId i, RandomStream& rng) const {
    return NeighborhoodDescriptor::nested(law(i).sample(rng));
}

Neighborhood AgeHawkesModel::expand(NodeId i, const NeighborhoodDescriptor& v) const {
    const auto k = v.params.at(0);
    const Interval span{-double(k) * delta_, 0.0};
    std::vector<NeighborhoodPiece> pieces;
    const auto sat = network_->saturation_level(i);
    const auto top = sat ? std::min(k, *sat) : k;
    for (std::int64_t m = 1; m <= top; ++m) {
        for (NodeId j : network_->ring_increment(i, m)) pieces.push_back({j, span});
    }
    return Neighborhood(std::move(pieces));
}

std::vector<NeighborhoodDescriptor> AgeHawkesModel::enumerate(NodeId, std::size_t count) const {
    std::vector<NeighborhoodDescriptor> out;
    for (std::size_t k = 1; k <= count; ++k) out.push_back(NeighborhoodDescriptor::nested(std::int64_t(k)));
    return out;
}

double AgeHawkesModel::tail_mass(NodeId i, std::size_t n) const { return law(i).tail(std::int64_t(n)); }

LocalBound AgeHawkesModel::local_bound(NodeId i, const PastView&) const { return {*global_bound(i)}; }

std::map<NodeId, double> AgeHawkesModel::mean_footprint(NodeId i) const {
    const auto all = network_->nodes();
    if (!all) throw std::logic_error(family_ + ": infinite network has no finite footprint; use the invariant total");
    const double total = *global_bound(i);
    std::map<NodeId, double> out;
    for (NodeId j : *all) {
        const auto level = network_->level_of(i, j);
        out[j] = level ? *global_bound(j) * delta_ * bound_moment_tail(i, *level - 1, 1) / total : 0.0;
    }
    return out;
}

double AgeHawkesModel::mean_offspring_total(NodeId i) const {
    if (network_->nodes()) return KalikowModel::mean_offspring_total(i);
    if (!dynamic_cast<const LatticeAgeNetwork*>(network_.get())) {
        throw std::logic_error(family_ + ": invariant offspring total is only available for the lattice network");
    }
    // sum_k Gamma_k k delta (2k - 1); every node carries the same bound
    return delta_ * (2.0 * bound_moment_tail(i, 0, 2) - bound_moment_tail(i, 0, 1));
}

std::optional<double> AgeHawkesModel::measure_tail_bound(NodeId i, std::size_t n) const {
    const auto all = network_->nodes();
    const auto nn = std::int64_t(n);
    if (!all) return delta_ * (2.0 * bound_moment_tail(i, nn, 2) - bound_moment_tail(i, nn, 1));
    double top = 0.0;
    for (NodeId j : *all) top = std::max(top, *global_bound(j));
    return top * double(all->size()) * delta_ * bound_moment_tail(i, nn, 1) / *global_bound(i);
}

// ---------------------------------------------------------------------------

double lattice_bound_constant(double decay) {
    if (!(decay > 1.0)) throw std::invalid_argument("lattice decay exponent must be > 1");
    double sup = 1.0;  // k = 1: psi(0) = 1
    double inner = 1.0;  // 1 + sum_{m=1}^{k-2} m^{-decay}
    for (std::int64_t k = 2; k <= 5000; ++k) {
        if (k >= 3) inner += std::pow(double(k - 2), -decay);
        const double g = 2.0 * std::pow(double(k - 1), -decay) + std::exp(-double(k - 1)) * inner;
        sup = std::max(sup, g * std::pow(double(k), decay));
    }
    return sup;
}

AgeHawkesModel make_lattice_model(double decay, double exponent, double delta) {
    if (!(exponent > 1.0 && exponent <= decay)) {
        throw std::invalid_argument("lattice weight exponent must lie in (1, decay]");
    }
    return AgeHawkesModel(RateFunction::affine(1.0, 1.0), std::make_shared<LatticeAgeNetwork>(decay, delta), delta,
                          AgeHawkesModel::PowerLawBounds{lattice_bound_constant(decay), exponent}, "lattice");
}

}  // namespace kalikow
