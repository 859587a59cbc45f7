#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "kalikow/functions.hpp"
#include "kalikow/model.hpp"
#include "kalikow/series.hpp"

namespace kalikow {

/// Sparse kernel matrix h^i_j over a finite node set.
class KernelMatrix {
public:
    KernelMatrix() = default;
    explicit KernelMatrix(std::size_t nodes) : nodes_(nodes) {}

    std::size_t size() const { return nodes_; }
    void set(NodeId target, NodeId source, Kernel h);
    const Kernel& operator()(NodeId target, NodeId source) const;
    /// Sources j with h^i_j not identically zero, increasing.
    std::vector<NodeId> sources(NodeId target) const;

private:
    std::size_t nodes_ = 0;
    std::map<std::pair<NodeId, NodeId>, Kernel> entries_;
};

/// Sum of h^i_j over the points of j whose lag lies in (lo, hi].
double kernel_sum(const Kernel& h, const PastView& x, NodeId j, double lo, double hi);

// ---------------------------------------------------------------------------

/// Explicit finite decomposition: each node has a bound Gamma^i and entries
/// (neighborhood, weight, base, slope) with component value
/// phi_v(x) = clamp(base + slope * #points of x in v, 0, Gamma^i).
/// Covers the constant-rate model (single empty entry) and hand-built
/// branching structures.
class TableModel final : public KalikowModel {
public:
    struct Entry {
        Neighborhood neighborhood;
        double weight = 0.0;
        double base = 0.0;
        double slope = 0.0;
    };
    struct NodeTable {
        double bound = 0.0;
        std::vector<Entry> entries;
    };

    explicit TableModel(std::map<NodeId, NodeTable> tables, std::string family = "table");

    /// phi == rate on every node, bound Gamma, lambda(empty) = 1.
    static TableModel constant(std::size_t nodes, double rate, double bound);

    std::string family() const override { return family_; }
    std::optional<std::vector<NodeId>> nodes() const override;

    double raw_intensity(NodeId i, const PastView& x) const override;
    double raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const override;
    double pmf(NodeId i, const NeighborhoodDescriptor& v) const override;
    NeighborhoodDescriptor sample_neighborhood(NodeId i, RandomStream& rng) const override;
    Neighborhood expand(NodeId i, const NeighborhoodDescriptor& v) const override;
    std::vector<NeighborhoodDescriptor> enumerate(NodeId i, std::size_t count) const override;
    std::optional<double> global_bound(NodeId i) const override;
    std::optional<double> component_bound(NodeId i, const NeighborhoodDescriptor& v) const override;
    LocalBound local_bound(NodeId i, const PastView& x) const override;
    std::map<NodeId, double> mean_footprint(NodeId i) const override;
    std::optional<double> measure_tail_bound(NodeId, std::size_t) const override { return 0.0; }

    const NodeTable& table(NodeId i) const;

private:
    double component(NodeId i, const Entry& e, const PastView& x) const;

    std::string family_;
    std::map<NodeId, NodeTable> tables_;
    std::map<NodeId, std::vector<double>> cumulative_;
};

// ---------------------------------------------------------------------------

/// Law over atoms w_{j,n} = {j} x [-n eps, -(n-1) eps): node j uniform over the
/// sources of the target, n geometric with ratio r.
struct AtomLaw {
    std::vector<NodeId> sources;
    double ratio = 0.5;

    double pmf(NodeId j, std::int64_t n) const;
    std::pair<NodeId, std::int64_t> sample(RandomStream& rng) const;
    /// Atom at position m (0-based) in the order (n, then source index).
    std::pair<NodeId, std::int64_t> at(std::size_t m) const;
    /// Mass of the atoms after the first m.
    double tail(std::size_t m) const;
};

/// Bound on sup_{n >= first bin} (points in any eps-window) * h((n-1) eps)
/// / pi(j, n), valid for every forward shift of x. +inf if unbounded.
double atom_ratio_bound(const Kernel& h, const PastView& x, NodeId j, double eps, double atom_mass_first,
                        double ratio);

struct LinearWeights {
    double empty = 0.5;                 // lambda(empty)
    std::optional<double> ratio;        // geometric ratio over n; default from kernels
};

/// mu^i + sum_j int h^i_j(-s) dx^j_s with the atomic decomposition.
class LinearHawkesModel final : public KalikowModel {
public:
    using Weights = LinearWeights;

    LinearHawkesModel(std::vector<double> mu, KernelMatrix kernels, double eps, Weights weights = {});

    std::string family() const override { return "linear"; }
    std::optional<std::vector<NodeId>> nodes() const override;
    SubspaceGuard guard() const override { return {SubspaceGuard::SummableIntensity{}}; }

    double raw_intensity(NodeId i, const PastView& x) const override;
    double raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const override;
    double pmf(NodeId i, const NeighborhoodDescriptor& v) const override;
    NeighborhoodDescriptor sample_neighborhood(NodeId i, RandomStream& rng) const override;
    Neighborhood expand(NodeId i, const NeighborhoodDescriptor& v) const override;
    std::vector<NeighborhoodDescriptor> enumerate(NodeId i, std::size_t count) const override;
    double tail_mass(NodeId i, std::size_t n) const override;
    LocalBound local_bound(NodeId i, const PastView& x) const override;
    std::map<NodeId, double> mean_footprint(NodeId i) const override;
    std::optional<double> measure_tail_bound(NodeId i, std::size_t n) const override;

    double epsilon() const { return eps_; }
    double empty_weight(NodeId i) const;
    const AtomLaw& atoms(NodeId i) const { return atoms_.at(std::size_t(i)); }
    const KernelMatrix& kernels() const { return kernels_; }
    double mu(NodeId i) const { return mu_.at(std::size_t(i)); }

protected:
    double memory(NodeId i) const override;

private:
    std::vector<double> mu_;
    KernelMatrix kernels_;
    double eps_;
    double empty_;
    std::vector<AtomLaw> atoms_;
};

// ---------------------------------------------------------------------------

struct AnalyticWeights {
    double order_ratio = 0.5;        // P(order = k) = (1 - rho) rho^k
    std::optional<double> ratio;     // atom bin ratio
};

/// psi(sum_j int h^i_j(-s) dx^j_s) with psi analytic, nonnegative Taylor
/// coefficients, decomposed over the Taylor family of atom tuples.
class AnalyticHawkesModel final : public KalikowModel {
public:
    using Weights = AnalyticWeights;

    AnalyticHawkesModel(std::vector<RateFunction> psi, KernelMatrix kernels, double eps, double radius,
                        Weights weights = {});

    std::string family() const override { return "analytic"; }
    std::optional<std::vector<NodeId>> nodes() const override;
    SubspaceGuard guard() const override;

    double raw_intensity(NodeId i, const PastView& x) const override;
    double raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const override;
    double pmf(NodeId i, const NeighborhoodDescriptor& v) const override;
    NeighborhoodDescriptor sample_neighborhood(NodeId i, RandomStream& rng) const override;
    Neighborhood expand(NodeId i, const NeighborhoodDescriptor& v) const override;
    std::vector<NeighborhoodDescriptor> enumerate(NodeId i, std::size_t count) const override;
    LocalBound local_bound(NodeId i, const PastView& x) const override;
    std::map<NodeId, double> mean_footprint(NodeId i) const override;
    std::optional<double> measure_tail_bound(NodeId i, std::size_t n) const override;

    double drive(NodeId i, const PastView& x) const;
    /// a_alpha(x) for alpha = (j, n): kernel mass of j's points in w_{j,n}.
    double atom_value(NodeId i, NodeId j, std::int64_t n, const PastView& x) const;
    double epsilon() const { return eps_; }
    double radius() const { return radius_; }

private:
    std::vector<RateFunction> psi_;
    KernelMatrix kernels_;
    double eps_;
    double radius_;
    double rho_;
    std::vector<AtomLaw> atoms_;
};

// ---------------------------------------------------------------------------

/// Interaction structure of an age-dependent model: kernels and nested
/// node rings omega^i_1 = {i} ⊂ omega^i_2 ⊂ ...
class AgeNetwork {
public:
    virtual ~AgeNetwork() = default;
    virtual std::optional<std::vector<NodeId>> nodes() const = 0;
    virtual Kernel kernel(NodeId i, NodeId j) const = 0;
    /// omega^i_k \ omega^i_{k-1} (omega^i_0 = empty).
    virtual std::vector<NodeId> ring_increment(NodeId i, std::int64_t k) const = 0;
    /// Level at which the rings stop growing (infinite networks: none).
    virtual std::optional<std::int64_t> saturation_level(NodeId i) const = 0;
    /// Level at which j joins the rings of i.
    virtual std::optional<std::int64_t> level_of(NodeId i, NodeId j) const = 0;
    /// |omega^i_k|.
    virtual std::int64_t ring_size(NodeId i, std::int64_t k) const = 0;
};

/// Finite network with explicit kernels and ring levels.
class FiniteAgeNetwork final : public AgeNetwork {
public:
    /// levels[i][m] = nodes joining omega^i at level m + 1; levels[i][0] = {i}.
    /// Empty `levels` uses omega_1 = {i}, omega_2 = all nodes.
    FiniteAgeNetwork(KernelMatrix kernels, std::vector<std::vector<std::vector<NodeId>>> levels = {});

    std::optional<std::vector<NodeId>> nodes() const override;
    Kernel kernel(NodeId i, NodeId j) const override { return kernels_(i, j); }
    std::vector<NodeId> ring_increment(NodeId i, std::int64_t k) const override;
    std::optional<std::int64_t> saturation_level(NodeId i) const override;
    std::optional<std::int64_t> level_of(NodeId i, NodeId j) const override;
    std::int64_t ring_size(NodeId i, std::int64_t k) const override;

private:
    KernelMatrix kernels_;
    std::vector<std::vector<std::vector<NodeId>>> levels_;
};

/// I = Z, h^i_j(t) = beta_{|i-j|} exp(-t/delta) with beta_0 = 1,
/// beta_m = 1 / (2 m^decay), omega^i_k = {i-k+1, ..., i+k-1}.
class LatticeAgeNetwork final : public AgeNetwork {
public:
    LatticeAgeNetwork(double decay, double delta);

    std::optional<std::vector<NodeId>> nodes() const override { return std::nullopt; }
    Kernel kernel(NodeId i, NodeId j) const override;
    std::vector<NodeId> ring_increment(NodeId i, std::int64_t k) const override;
    std::optional<std::int64_t> saturation_level(NodeId) const override { return std::nullopt; }
    std::optional<std::int64_t> level_of(NodeId i, NodeId j) const override;
    std::int64_t ring_size(NodeId, std::int64_t k) const override { return 2 * k - 1; }

    double decay() const { return decay_; }
    double coupling(std::int64_t distance) const;

private:
    double decay_;
    double delta_;
};

/// psi^i(sum_j int h^i_j(-s) dx^j_s) 1{a^i(x) > delta} with nested
/// neighborhoods v_k = omega_k x [-k delta, 0) and weights lambda_k = Gamma_k / Gamma.
class AgeHawkesModel final : public KalikowModel {
public:
    /// Gamma_k = gamma_bar(k) exactly (finite networks only).
    struct GammaBarBounds {};
    /// Gamma_k = constant * k^{-exponent}; must dominate gamma_bar.
    struct PowerLawBounds {
        double constant;
        double exponent;
    };
    using Bounds = std::variant<GammaBarBounds, PowerLawBounds>;

    AgeHawkesModel(RateFunction psi, std::shared_ptr<const AgeNetwork> network, double delta, Bounds bounds,
                   std::string family = "age");

    std::string family() const override { return family_; }
    std::optional<std::vector<NodeId>> nodes() const override { return network_->nodes(); }
    SubspaceGuard guard() const override { return SubspaceGuard::refractory(delta_); }

    double raw_intensity(NodeId i, const PastView& x) const override;
    double raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const override;
    double pmf(NodeId i, const NeighborhoodDescriptor& v) const override;
    NeighborhoodDescriptor sample_neighborhood(NodeId i, RandomStream& rng) const override;
    Neighborhood expand(NodeId i, const NeighborhoodDescriptor& v) const override;
    std::vector<NeighborhoodDescriptor> enumerate(NodeId i, std::size_t count) const override;
    double tail_mass(NodeId i, std::size_t n) const override;
    std::optional<double> global_bound(NodeId i) const override;
    std::optional<double> component_bound(NodeId i, const NeighborhoodDescriptor& v) const override;
    LocalBound local_bound(NodeId i, const PastView& x) const override;
    std::map<NodeId, double> mean_footprint(NodeId i) const override;
    double mean_offspring_total(NodeId i) const override;
    std::optional<double> measure_tail_bound(NodeId i, std::size_t n) const override;

    /// L[sum_{new j}(h(0) + ||h||_1/delta) + sum_{old j} h((k-1) delta)]; psi(0) for k = 1.
    double gamma_bar(NodeId i, std::int64_t k) const;
    /// Gamma^i_k in use.
    double gamma_k(NodeId i, std::int64_t k) const;
    /// psi applied to the drive restricted to v_n (times the age indicator).
    double partial_rate(NodeId i, std::int64_t n, const PastView& x) const;

    using KalikowModel::delta;
    double delta() const { return delta_; }
    const RateFunction& psi() const { return psi_; }
    const AgeNetwork& network() const { return *network_; }
    const Bounds& bounds() const { return bounds_; }

private:
    struct FiniteTail;
    /// sum_{k > n} k^m Gamma_k for m = 0, 1, 2.
    double bound_moment_tail(NodeId i, std::int64_t n, int m) const;
    double restricted_drive(NodeId i, std::int64_t k, const PastView& x) const;
    const SeriesLaw& law(NodeId i) const;

    RateFunction psi_;
    double lipschitz_;
    std::shared_ptr<const AgeNetwork> network_;
    double delta_;
    Bounds bounds_;
    std::string family_;
    // Finite networks with tabulated bounds.
    std::map<NodeId, std::shared_ptr<const FiniteTail>> finite_tails_;
    std::map<NodeId, SeriesLaw> finite_laws_;
    std::optional<SeriesLaw> power_law_;
};

/// Age-dependent lattice model on Z: psi(u) = 1 + u, decay exponent gamma,
/// Gamma_k = C_gamma k^{-p}.
AgeHawkesModel make_lattice_model(double decay, double exponent, double delta);

/// sup_k gamma_bar(k) k^{decay} for the lattice network (delta-independent).
double lattice_bound_constant(double decay);

// ---------------------------------------------------------------------------

struct GLWeights {
    double empty = 0.5;
    double ratio = 0.5;
};

/// psi^i(sum_j (beta^i_j Z^j((-a^i(x), 0))) ∧ K^i_j), decomposed over
/// {empty} ∪ nested neighborhoods with geometric weights.
class GLModel final : public KalikowModel {
public:
    using Weights = GLWeights;

    /// beta[i][j] with beta[i][i] = 0, thresholds[i][j] >= 0.
    GLModel(std::vector<RateFunction> psi, std::vector<std::vector<double>> beta,
            std::vector<std::vector<double>> thresholds, double delta,
            std::vector<std::vector<std::vector<NodeId>>> levels = {}, Weights weights = {});

    std::string family() const override { return "gl"; }
    std::optional<std::vector<NodeId>> nodes() const override;

    double raw_intensity(NodeId i, const PastView& x) const override;
    double raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const override;
    double pmf(NodeId i, const NeighborhoodDescriptor& v) const override;
    NeighborhoodDescriptor sample_neighborhood(NodeId i, RandomStream& rng) const override;
    Neighborhood expand(NodeId i, const NeighborhoodDescriptor& v) const override;
    std::vector<NeighborhoodDescriptor> enumerate(NodeId i, std::size_t count) const override;
    double tail_mass(NodeId i, std::size_t n) const override;
    LocalBound local_bound(NodeId i, const PastView& x) const override;
    std::map<NodeId, double> mean_footprint(NodeId i) const override;
    std::optional<double> measure_tail_bound(NodeId i, std::size_t n) const override;

    /// Saturated drive restricted to omega_k and the window (kδ ∧ a).
    double saturated_drive(NodeId i, std::int64_t k, const PastView& x) const;
    using KalikowModel::delta;
    double delta() const { return delta_; }
    const RateFunction& psi(NodeId i) const { return psi_.at(std::size_t(i)); }

private:
    std::vector<RateFunction> psi_;
    std::vector<std::vector<double>> beta_;
    std::vector<std::vector<double>> thresholds_;
    double delta_;
    FiniteAgeNetwork rings_;
    Weights weights_;
};

}  // namespace kalikow
