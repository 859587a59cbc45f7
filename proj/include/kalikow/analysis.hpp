#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kalikow/model.hpp"

namespace kalikow {

/// M_ij = sum_v lambda^i(v) Gamma^j mu(p_j(v)) over a finite node set.
Eigen::MatrixXd branching_matrix(const KalikowModel& model, const std::vector<NodeId>& nodes);

struct GammaResult {
    double gamma = 0.0;
    bool subcritical = false;
    /// Upper bound on the neglected series mass.
    double tail_bound = 0.0;
    std::string method;
};

/// sup_i sum_v P(v) lambda^i(v), summed over the enumerated family with the
/// model's closed-form tail bound (independent of branching_matrix).
GammaResult subcriticality_gamma(const KalikowModel& model, const std::vector<NodeId>& nodes);

/// Translation-invariant reduction: gamma = mean offspring of one
/// representative node.
GammaResult subcriticality_gamma_invariant(const KalikowModel& model, NodeId representative);

class NonSummable : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Row sums of (Id - M)^{-1}: expected clan sizes, ancestor included.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> expected_clan_sizes(const Eigen::MatrixBase<Derived>& M) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (M.rows() != M.cols()) throw std::invalid_argument("branching matrix must be square");
    if ((M.array() < Scalar(0)).any()) throw std::invalid_argument("branching matrix has negative entries");
    if (M.rows() > 0 && !(M.rowwise().sum().maxCoeff() < Scalar(1))) {
        throw NonSummable("non-summable Neumann series: max row sum of M is not below 1");
    }
    const Matrix A = Matrix::Identity(M.rows(), M.cols()) - M;
    return A.partialPivLu().solve(Vector::Ones(M.rows()));
}

template <typename Derived>
typename Derived::Scalar expected_clan_size(const Eigen::MatrixBase<Derived>& M, Eigen::Index i) {
    if (i < 0 || i >= M.rows()) throw std::out_of_range("type index outside the branching matrix");
    return expected_clan_sizes(M)(i);
}

struct BranchingSummary {
    std::vector<NodeId> nodes;
    Eigen::MatrixXd M;
    double gamma = 0.0;
    /// gamma from the enumeration path; equals the max row sum of M.
    double gamma_enumerated = 0.0;
    bool subcritical = false;
    std::optional<Eigen::VectorXd> expected_W;
    std::string reduction;
};

BranchingSummary summarize_branching(const KalikowModel& model, const std::vector<NodeId>& nodes);
BranchingSummary summarize_branching_invariant(const KalikowModel& model, NodeId representative);

// ---------------------------------------------------------------------------
// Log-Laplace transform of the total progeny.

/// Offspring law of one type: with probability weight[c] the offspring
/// counts are independent Poisson with means means[c] (one entry per type).
struct OffspringLaw {
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> means;

    static OffspringLaw poisson(Eigen::VectorXd mean) { return {{1.0}, {std::move(mean)}}; }
};

enum class LaplaceForm {
    /// phi_i(t) = log sum_c w_c exp(sum_j (e^{t_j} - 1) m_cj): the exact
    /// log-Laplace of the mixed Poisson offspring vector.
    Mixture,
    /// phi_i(t) = sum_j log sum_c w_c exp((e^{t_j} - 1) m_cj): product of the
    /// per-type marginals.
    ProductOfMarginals
};

/// Offspring laws for each node from the model's decomposition, using the
/// first `truncation` enumerated neighborhoods renormalized.
std::vector<OffspringLaw> offspring_laws(const KalikowModel& model, const std::vector<NodeId>& nodes,
                                         std::size_t truncation);

Eigen::VectorXd offspring_log_laplace(const std::vector<OffspringLaw>& laws, const Eigen::VectorXd& theta,
                                      LaplaceForm form = LaplaceForm::Mixture);

struct LogLaplaceState {
    Eigen::VectorXd theta;
    Eigen::VectorXd Phi;
    std::size_t iterations = 0;
    double residual = 0.0;
};

class LaplaceDivergence : public std::runtime_error {
public:
    LaplaceDivergence(const std::string& what, Eigen::VectorXd last) : std::runtime_error(what), last_(std::move(last)) {}
    const Eigen::VectorXd& last_iterate() const { return last_; }

private:
    Eigen::VectorXd last_;
};

/// Iterates Phi <- theta + phi(Phi) from Phi = theta, then polishes with
/// Newton steps until the residual is below tol.
LogLaplaceState log_laplace_fixed_point(const std::vector<OffspringLaw>& laws, const Eigen::VectorXd& theta,
                                        double tol = 1e-13, LaplaceForm form = LaplaceForm::Mixture,
                                        std::size_t max_iterations = 100000, double cap = 50.0);

/// dPhi/dtheta at 0 by central differences.
Eigen::MatrixXd log_laplace_jacobian_at_zero(const std::vector<OffspringLaw>& laws, double step = 1e-6,
                                             LaplaceForm form = LaplaceForm::Mixture);

// ---------------------------------------------------------------------------
// Weight choice for the lattice preset.

/// f(p) = sum_k (2k - 1) k^{1-p}, p > 3.
double lattice_cost_series(double p);

struct CostPoint {
    double p = 0.0;
    double f = 0.0;
    double mean_offspring = 0.0;
    std::optional<double> expected_W;
    bool supercritical = false;
};

struct CostCurve {
    std::vector<CostPoint> points;
    std::optional<double> argmin;
};

/// Mean offspring C_gamma delta f(p) and E(W) = 1 / (1 - mean) for each p of
/// the grid; p must lie in (3, decay].
CostCurve weight_cost_curve(double decay, double delta, const std::vector<double>& p_grid);

}  // namespace kalikow
