#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kalikow/core.hpp"
#include "kalikow/random.hpp"

namespace kalikow {

/// Raised when no finite dominating bound exists for the current past.
class ExplosionGuard : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bound on every component value at the current past, valid for the next
/// `horizon` time units provided no new point is accepted.
struct LocalBound {
    double value = 0.0;
    double horizon = std::numeric_limits<double>::infinity();
};

/// A point process model together with a Kalikow decomposition
/// phi^i = sum_v lambda^i(v) phi^i_v, phi^i_v = Delta^i_v / lambda^i(v).
///
/// Public evaluators check the model's subspace guard; the `raw_` variants
/// skip it and are what the simulators call in their inner loops.
/// All evaluations take the past as a PastView rooted at the evaluation time.
class KalikowModel {
public:
    virtual ~KalikowModel() = default;

    virtual std::string family() const = 0;

    /// Finite node set, or nullopt for infinite networks.
    virtual std::optional<std::vector<NodeId>> nodes() const = 0;

    virtual SubspaceGuard guard() const { return SubspaceGuard::none(); }

    // -- generic intensity and decomposition ------------------------------

    virtual double raw_intensity(NodeId i, const PastView& x) const = 0;
    virtual double raw_delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const = 0;

    virtual double pmf(NodeId i, const NeighborhoodDescriptor& v) const = 0;
    virtual NeighborhoodDescriptor sample_neighborhood(NodeId i, RandomStream& rng) const = 0;
    virtual Neighborhood expand(NodeId i, const NeighborhoodDescriptor& v) const = 0;

    /// First `count` descriptors of the family in the model's fixed order.
    virtual std::vector<NeighborhoodDescriptor> enumerate(NodeId i, std::size_t count) const = 0;

    /// Weight of the descriptors after the first n of enumerate(); defaults
    /// to 1 - sum of the enumerated pmfs.
    virtual double tail_mass(NodeId i, std::size_t n) const;

    // -- bounds ------------------------------------------------------------

    /// Deterministic bound Gamma^i on phi^i and every phi^i_v, when the
    /// decomposition is in the bounded regime.
    virtual std::optional<double> global_bound(NodeId) const { return std::nullopt; }

    /// Gamma^i_v, when bounds are available.
    virtual std::optional<double> component_bound(NodeId, const NeighborhoodDescriptor&) const {
        return std::nullopt;
    }

    /// Step-1 bound of the forward algorithm. Throws ExplosionGuard when no
    /// finite bound exists.
    virtual LocalBound local_bound(NodeId i, const PastView& x) const = 0;

    // -- branching structure -------------------------------------------------

    /// Rate used for the dominating Poisson measure: global_bound(i) if
    /// present, else a rate declared for analysis purposes only.
    std::optional<double> dominating_rate(NodeId i) const;
    void declare_rates(std::map<NodeId, double> rates) { declared_rates_ = std::move(rates); }

    /// j -> sum_v lambda^i(v) Gamma^j mu(p_j(v)): mean offspring of each type.
    /// Closed-form path; finite node sets only unless overridden.
    virtual std::map<NodeId, double> mean_footprint(NodeId i) const;

    /// sum_v lambda^i(v) P(v) over all nodes (closed form).
    virtual double mean_offspring_total(NodeId i) const;

    /// Upper bound on sum over descriptors after the first n of
    /// lambda^i(v) P(v). nullopt when the model cannot bound it.
    virtual std::optional<double> measure_tail_bound(NodeId, std::size_t) const { return std::nullopt; }

    // -- checked evaluators ------------------------------------------------

    double intensity(NodeId i, const PastView& x) const;
    double intensity(NodeId i, const Configuration& x) const { return intensity(i, PastView(x, 0.0)); }

    double delta(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const;
    double delta(NodeId i, const NeighborhoodDescriptor& v, const Configuration& x) const {
        return delta(i, v, PastView(x, 0.0));
    }

    /// Delta / pmf with 0/0 = 0.
    double raw_component(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const;
    double component_value(NodeId i, const NeighborhoodDescriptor& v, const PastView& x) const;
    double component_value(NodeId i, const NeighborhoodDescriptor& v, const Configuration& x) const {
        return component_value(i, v, PastView(x, 0.0));
    }

    /// Throws GuardViolation if x lies outside the model's subspace.
    void check_guard(const PastView& x) const;

protected:
    /// Dependence horizon of node i (time beyond which points are ignored).
    virtual double memory(NodeId) const { return std::numeric_limits<double>::infinity(); }

private:
    void check_window(NodeId i, const PastView& x, double reach) const;

    std::optional<std::map<NodeId, double>> declared_rates_;
};

/// sum over the first n descriptors of lambda^i(v) phi^i_v(x), i.e. of the
/// Delta terms. Checks the guard.
double evaluate_decomposition(const KalikowModel& model, NodeId i, const Configuration& x, std::size_t n);
double evaluate_decomposition(const KalikowModel& model, NodeId i, const PastView& x, std::size_t n);

/// sum over pieces of lambda-independent Gamma^j mu(p_j(v)), using the
/// model's dominating rates. Throws if a node has no rate.
double neighborhood_measure(const KalikowModel& model, const Neighborhood& v);

}  // namespace kalikow
