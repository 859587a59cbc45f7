#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "kalikow/models.hpp"
#include "detail.hpp"

namespace kalikow {

namespace {
const Kernel kZeroKernel;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

void KernelMatrix::set(NodeId target, NodeId source, Kernel h) {
    if (target < 0 || source < 0 || std::size_t(target) >= nodes_ || std::size_t(source) >= nodes_) {
        throw std::out_of_range("kernel index (" + std::to_string(target) + ", " + std::to_string(source) +
                                ") outside the node set");
    }
    if (h.is_zero()) {
        entries_.erase({target, source});
    } else {
        entries_[{target, source}] = std::move(h);
    }
}

const Kernel& KernelMatrix::operator()(NodeId target, NodeId source) const {
    auto it = entries_.find({target, source});
    return it == entries_.end() ? kZeroKernel : it->second;
}

std::vector<NodeId> KernelMatrix::sources(NodeId target) const {
    std::vector<NodeId> out;
    for (auto it = entries_.lower_bound({target, std::numeric_limits<NodeId>::min()});
         it != entries_.end() && it->first.first == target; ++it) {
        out.push_back(it->first.second);
    }
    return out;
}

double kernel_sum(const Kernel& h, const PastView& x, NodeId j, double lo, double hi) {
    if (h.is_zero()) return 0.0;
    double s = 0.0;
    x.for_each_lag(j, {-hi, -lo}, [&](double lag) { s += h(lag); });
    return s;
}

// ---------------------------------------------------------------------------

double AtomLaw::pmf(NodeId j, std::int64_t n) const {
    if (n < 1 || !std::binary_search(sources.begin(), sources.end(), j)) return 0.0;
    return (1.0 - ratio) * std::pow(ratio, double(n - 1)) / double(sources.size());
}

std::pair<NodeId, std::int64_t> AtomLaw::sample(RandomStream& rng) const {
    const auto idx = std::uniform_int_distribution<std::size_t>(0, sources.size() - 1)(rng);
    std::int64_t n = 1;
    if (ratio > 0.0) n += std::int64_t(std::floor(std::log(rng.uniform()) / std::log(ratio)));
    return {sources[idx], n};
}

std::pair<NodeId, std::int64_t> AtomLaw::at(std::size_t m) const {
    return {sources[m % sources.size()], std::int64_t(m / sources.size()) + 1};
}

double AtomLaw::tail(std::size_t m) const {
    const std::size_t s = sources.size();
    const double full = std::pow(ratio, double(m / s));
    return full * (1.0 - double(m % s) / double(s) * (1.0 - ratio));
}

double atom_ratio_bound(const Kernel& h, const PastView& x, NodeId j, double eps, double atom_mass_first,
                        double ratio) {
    if (h.is_zero()) return 0.0;
    const auto pts = x.absolute(j);
    if (pts.empty()) return 0.0;

    // Largest number of points in any window of length eps; shift-invariant.
    std::size_t window = 0;
    for (std::size_t a = 0, b = 0; a < pts.size(); ++a) {
        while (b < pts.size() && pts[b] - pts[a] < eps) ++b;
        window = std::max(window, b - a);
    }
    const double youngest = x.origin() - pts.back();
    const auto first_bin = std::max<std::int64_t>(1, std::int64_t(std::ceil(youngest / eps)));

    double sup = 0.0;
    switch (h.kind()) {
        case Kernel::Kind::Zero: return 0.0;
        case Kernel::Kind::Exponential: {
            const double q = std::exp(-h.beta() * eps) / ratio;
            if (q > 1.0) return kInf;
            sup = h.alpha() * std::exp(-h.beta() * double(first_bin - 1) * eps) /
                  (atom_mass_first * std::pow(ratio, double(first_bin - 1)));
            break;
        }
        case Kernel::Kind::Step: {
            const double end = h.support_end();
            for (std::int64_t n = first_bin; double(n - 1) * eps < end; ++n) {
                sup = std::max(sup, h(double(n - 1) * eps) / (atom_mass_first * std::pow(ratio, double(n - 1))));
            }
            break;
        }
    }
    return double(window) * sup;
}

}  // namespace kalikow

namespace kalikow::detail {

AtomLaw make_atom_law(const KernelMatrix& kernels, NodeId i, double eps, std::optional<double> ratio) {
    AtomLaw law;
    law.sources = kernels.sources(i);
    if (ratio) {
        if (!(*ratio > 0.0 && *ratio < 1.0)) throw std::invalid_argument("atom ratio must lie in (0, 1)");
        law.ratio = *ratio;
        return law;
    }
    double beta_min = kInf;
    for (NodeId j : law.sources) {
        const auto& h = kernels(i, j);
        if (h.kind() == Kernel::Kind::Exponential) beta_min = std::min(beta_min, h.beta());
    }
    law.ratio = std::isfinite(beta_min) ? std::exp(-beta_min * eps / 2.0) : 0.5;
    return law;
}

double geometric_moment_tail(double q, std::int64_t n, int m) {
    if (q <= 0.0) {
        // only k = 1 carries q^0 = 1
        return n < 1 ? 1.0 : 0.0;
    }
    const double nn = double(n);
    const double qn = std::pow(q, nn);
    const double d = 1.0 - q;
    switch (m) {
        case 0: return qn / d;
        case 1: return qn * ((nn + 1.0) - nn * q) / (d * d);
        case 2: {
            // G(q) = q^{n+1} / (1 - q); sum k^2 q^{k-1} = G' + q G''
            const double g1 = qn * ((nn + 1.0) - nn * q) / (d * d);
            const double g2 = (nn * std::pow(q, nn - 1.0) * ((nn + 1.0) - nn * q) - nn * qn) / (d * d) +
                              2.0 * qn * ((nn + 1.0) - nn * q) / (d * d * d);
            return g1 + q * g2;
        }
        default: throw std::invalid_argument("moment order must be 0, 1 or 2");
    }
}

}  // namespace kalikow::detail
