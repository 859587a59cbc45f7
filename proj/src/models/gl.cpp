#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "kalikow/models.hpp"

namespace kalikow {

using Kind = NeighborhoodDescriptor::Kind;

GLModel::GLModel(std::vector<RateFunction> psi, std::vector<std::vector<double>> beta,
                 std::vector<std::vector<double>> thresholds, double delta,
                 std::vector<std::vector<std::vector<NodeId>>> levels, Weights weights)
    : psi_(std::move(psi)),
      beta_(std::move(beta)),
      thresholds_(std::move(thresholds)),
      delta_(delta),
      rings_(KernelMatrix(psi_.size()), std::move(levels)),
      weights_(weights) {
    const std::size_t n = psi_.size();
    if (beta_.size() != n || thresholds_.size() != n) throw std::invalid_argument("gl: beta/threshold size mismatch");
    if (!(delta_ > 0.0) || !std::isfinite(delta_)) throw std::invalid_argument("delta must be > 0");
    if (!(weights_.empty > 0.0 && weights_.empty < 1.0)) throw std::invalid_argument("empty weight must lie in (0, 1)");
    if (!(weights_.ratio > 0.0 && weights_.ratio < 1.0)) throw std::invalid_argument("ratio must lie in (0, 1)");
    for (std::size_t i = 0; i < n; ++i) {
        if (!psi_[i].nondecreasing() || !psi_[i].lipschitz()) {
            throw std::invalid_argument("node " + std::to_string(i) + ": rate function must be nondecreasing and Lipschitz");
        }
        if (beta_[i].size() != n || thresholds_[i].size() != n) {
            throw std::invalid_argument("gl: row " + std::to_string(i) + " has the wrong length");
        }
        if (beta_[i][i] != 0.0) throw std::invalid_argument("gl: self weight beta[i][i] must be 0");
        for (std::size_t j = 0; j < n; ++j) {
            if (!(beta_[i][j] >= 0.0) || !(thresholds_[i][j] >= 0.0) || !std::isfinite(thresholds_[i][j])) {
                throw std::invalid_argument("gl: beta and thresholds must be finite and >= 0");
            }
            if (beta_[i][j] > 0.0 && thresholds_[i][j] > 0.0 && !rings_.level_of(NodeId(i), NodeId(j))) {
                throw std::invalid_argument("gl: node " + std::to_string(j) + " influences node " + std::to_string(i) +
                                            " but lies outside its rings");
            }
        }
    }
}

std::optional<std::vector<NodeId>> GLModel::nodes() const { return rings_.nodes(); }

namespace {

// Number of points of j with lag <= reach that precede the last point of i.
std::size_t counted(const PastView& x, NodeId j, double reach, double age) {
    std::size_t c = 0;
    x.for_each_lag(j, {-reach, 0.0}, [&](double lag) { c += lag < age ? 1 : 0; });
    return c;
}

}  // namespace

double GLModel::saturated_drive(NodeId i, std::int64_t k, const PastView& x) const {
    const double age = x.age(i);
    const double reach = k < 0 ? detail::kInfinity : double(k) * delta_;
    double s = 0.0;
    const auto& b = beta_.at(std::size_t(i));
    const auto& cap = thresholds_.at(std::size_t(i));
    for (NodeId j : x.active_nodes()) {
        if (j < 0 || std::size_t(j) >= psi_.size() || b[std::size_t(j)] == 0.0) continue;
        if (k >= 0) {
            const auto level = rings_.level_of(i, j);
            if (!level || *level > k) continue;
        }
        s += std::min(b[std::size_t(j)] * double(counted(x, j, reach, age)), cap[std::size_t(j)]);
    }
    return s;
}

double GLModel::raw_intensity(NodeId i, const PastView& x) const {
    return psi_.at(std::size_t(i))(saturated_drive(i, -1, x));
}

double GLModel::raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const {
    const auto& psi = psi_.at(std::size_t(i));
    if (v.kind == Kind::Empty) return psi(0.0);
    if (v.kind != Kind::Nested) throw std::invalid_argument("gl model: unsupported neighborhood " + v.to_string());
    const auto k = v.params.at(0);
    if (k < 1) return 0.0;
    const double prev = k == 1 ? 0.0 : saturated_drive(i, k - 1, x);
    return psi(saturated_drive(i, k, x)) - psi(prev);
}

double GLModel::pmf(NodeId, const NeighborhoodDescriptor& v) const {
    if (v.kind == Kind::Empty) return weights_.empty;
    if (v.kind != Kind::Nested || v.params.at(0) < 1) return 0.0;
    return (1.0 - weights_.empty) * (1.0 - weights_.ratio) * std::pow(weights_.ratio, double(v.params[0] - 1));
}

NeighborhoodDescriptor GLModel::sample_neighborhood(NodeId, RandomStream& rng) const {
    if (rng.uniform() < weights_.empty) return NeighborhoodDescriptor::empty_set();
    return NeighborhoodDescriptor::nested(1 + std::int64_t(std::floor(std::log(rng.uniform()) / std::log(weights_.ratio))));
}

Neighborhood GLModel::expand(NodeId i, const NeighborhoodDescriptor& v) const {
    if (v.kind == Kind::Empty) return {};
    const auto k = v.params.at(0);
    const Interval span{-double(k) * delta_, 0.0};
    std::vector<NeighborhoodPiece> pieces;
    const auto top = std::min(k, *rings_.saturation_level(i));
    for (std::int64_t m = 1; m <= top; ++m) {
        for (NodeId j : rings_.ring_increment(i, m)) pieces.push_back({j, span});
    }
    return Neighborhood(std::move(pieces));
}

std::vector<NeighborhoodDescriptor> GLModel::enumerate(NodeId, std::size_t count) const {
    std::vector<NeighborhoodDescriptor> out;
    if (count == 0) return out;
    out.push_back(NeighborhoodDescriptor::empty_set());
    for (std::size_t k = 1; out.size() < count; ++k) out.push_back(NeighborhoodDescriptor::nested(std::int64_t(k)));
    return out;
}

double GLModel::tail_mass(NodeId, std::size_t n) const {
    if (n == 0) return 1.0;
    return (1.0 - weights_.empty) * std::pow(weights_.ratio, double(n - 1));
}

LocalBound GLModel::local_bound(NodeId i, const PastView& x) const {
    // Valid while no point is added during the next `horizon` time units:
    // the counted points only age, so within nested level k node j can
    // contribute at most f(#lags <= k delta) - f(#lags + H <= (k-1) delta).
    const double horizon = delta_;
    const auto& psi = psi_.at(std::size_t(i));
    const double lip = *psi.lipschitz();
    const double age = x.age(i);
    const auto sat = *rings_.saturation_level(i);
    const auto& b = beta_.at(std::size_t(i));
    const auto& cap = thresholds_.at(std::size_t(i));

    struct Source {
        std::int64_t level;
        double beta, cap;
        std::vector<double> lags;  // counted lags, increasing
    };
    std::vector<Source> sources;
    double oldest = 0.0;
    for (NodeId j : x.active_nodes()) {
        if (j < 0 || std::size_t(j) >= psi_.size() || b[std::size_t(j)] == 0.0 || cap[std::size_t(j)] == 0.0) continue;
        const auto level = rings_.level_of(i, j);
        if (!level) continue;
        Source s{*level, b[std::size_t(j)], cap[std::size_t(j)], {}};
        x.for_each_lag(j, {-detail::kInfinity, 0.0}, [&](double lag) {
            if (lag < age) s.lags.push_back(lag);
        });
        if (s.lags.empty()) continue;
        oldest = std::max(oldest, s.lags.back());
        sources.push_back(std::move(s));
    }

    const auto sat_f = [](const Source& s, std::size_t c) { return std::min(s.beta * double(c), s.cap); };
    double bound = psi(0.0) / weights_.empty;
    const auto last = std::max<std::int64_t>(sat, std::int64_t(std::ceil((oldest + horizon) / delta_)) + 1);
    for (std::int64_t k = 1; k <= last; ++k) {
        double inc = 0.0;
        for (const auto& s : sources) {
            if (s.level > k) continue;
            const auto hi = std::size_t(std::upper_bound(s.lags.begin(), s.lags.end(), double(k) * delta_) - s.lags.begin());
            std::size_t lo = 0;
            if (s.level < k) {
                lo = std::size_t(std::upper_bound(s.lags.begin(), s.lags.end(), double(k - 1) * delta_ - horizon) -
                                 s.lags.begin());
            }
            inc += sat_f(s, hi) - sat_f(s, std::min(lo, hi));
        }
        if (inc == 0.0) continue;
        const double w = pmf(i, NeighborhoodDescriptor::nested(k));
        bound = std::max(bound, w > 0.0 ? lip * inc / w : detail::kInfinity);
    }
    if (!std::isfinite(bound)) {
        throw ExplosionGuard("gl model: no finite component bound for node " + std::to_string(i));
    }
    return {bound, horizon};
}

std::map<NodeId, double> GLModel::mean_footprint(NodeId i) const {
    std::map<NodeId, double> out;
    const double r = weights_.ratio;
    const auto all = *nodes();
    for (NodeId j : all) {
        out[j] = 0.0;
        const auto level = rings_.level_of(i, j);
        if (!level) continue;
        const auto rate = dominating_rate(j);
        if (!rate) throw std::invalid_argument("gl: no dominating rate declared for node " + std::to_string(j));
        // sum_{k >= level} lambda_k k delta
        out[j] = (1.0 - weights_.empty) * (1.0 - r) * delta_ * *rate *
                 detail::geometric_moment_tail(r, *level - 1, 1);
    }
    return out;
}

std::optional<double> GLModel::measure_tail_bound(NodeId, std::size_t n) const {
    double top = 0.0;
    const auto all = *nodes();
    for (NodeId j : all) {
        const auto r = dominating_rate(j);
        if (!r) return std::nullopt;
        top = std::max(top, *r);
    }
    const auto first = std::max<std::int64_t>(std::int64_t(n), 1);
    return (1.0 - weights_.empty) * (1.0 - weights_.ratio) * delta_ * top * double(all.size()) *
           detail::geometric_moment_tail(weights_.ratio, first - 1, 1);
}

}  // namespace kalikow
