#include "kalikow/analysis.hpp"

#include <algorithm>
#include <limits>

#include "kalikow/models.hpp"
#include "kalikow/series.hpp"

namespace kalikow {

Eigen::MatrixXd branching_matrix(const KalikowModel& model, const std::vector<NodeId>& nodes) {
    const auto n = Eigen::Index(nodes.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const auto row = model.mean_footprint(nodes[std::size_t(a)]);
        double outside = 0.0;
        for (const auto& [j, m] : row) {
            const auto it = std::find(nodes.begin(), nodes.end(), j);
            if (it == nodes.end()) {
                outside += m;
            } else {
                M(a, Eigen::Index(it - nodes.begin())) += m;
            }
        }
        if (outside > 1e-12) {
            throw std::invalid_argument("node " + std::to_string(nodes[std::size_t(a)]) + " has offspring mass " +
                                        std::to_string(outside) + " outside the requested node set");
        }
    }
    return M;
}

GammaResult subcriticality_gamma(const KalikowModel& model, const std::vector<NodeId>& nodes) {
    GammaResult out;
    out.method = "enumeration";
    constexpr std::size_t kMax = std::size_t(1) << 20;
    for (NodeId i : nodes) {
        double sum = 0.0;
        double tail = std::numeric_limits<double>::infinity();
        for (std::size_t n = 1024;; n *= 4) {
            sum = 0.0;
            const auto family = model.enumerate(i, n);
            for (const auto& v : family) sum += model.pmf(i, v) * neighborhood_measure(model, model.expand(i, v));
            const auto t = model.measure_tail_bound(i, family.size());
            tail = t ? *t : std::numeric_limits<double>::quiet_NaN();
            if (family.size() < n || (t && *t < 1e-12) || n >= kMax) break;
        }
        if (!std::isfinite(sum)) throw NonSummable("divergent offspring series for family '" + model.family() + "'");
        out.gamma = std::max(out.gamma, sum);
        out.tail_bound = std::max(out.tail_bound, tail);
    }
    out.subcritical = out.gamma < 1.0;
    return out;
}

GammaResult subcriticality_gamma_invariant(const KalikowModel& model, NodeId representative) {
    GammaResult out;
    out.method = "invariant";
    out.gamma = model.mean_offspring_total(representative);
    if (!std::isfinite(out.gamma)) {
        throw NonSummable("divergent offspring series for family '" + model.family() + "'");
    }
    out.subcritical = out.gamma < 1.0;
    return out;
}

BranchingSummary summarize_branching(const KalikowModel& model, const std::vector<NodeId>& nodes) {
    BranchingSummary s;
    s.nodes = nodes;
    s.M = branching_matrix(model, nodes);
    s.gamma = s.M.rows() ? s.M.rowwise().sum().maxCoeff() : 0.0;
    s.gamma_enumerated = subcriticality_gamma(model, nodes).gamma;
    s.subcritical = s.gamma < 1.0;
    if (s.subcritical) s.expected_W = expected_clan_sizes(s.M);
    s.reduction = "finite matrix";
    return s;
}

BranchingSummary summarize_branching_invariant(const KalikowModel& model, NodeId representative) {
    BranchingSummary s;
    s.nodes = {representative};
    s.gamma = subcriticality_gamma_invariant(model, representative).gamma;
    s.gamma_enumerated = s.gamma;
    s.M = Eigen::MatrixXd::Constant(1, 1, s.gamma);
    s.subcritical = s.gamma < 1.0;
    if (s.subcritical) s.expected_W = Eigen::VectorXd::Constant(1, 1.0 / (1.0 - s.gamma));
    s.reduction = "translation-invariant scalar";
    return s;
}

// ---------------------------------------------------------------------------

std::vector<OffspringLaw> offspring_laws(const KalikowModel& model, const std::vector<NodeId>& nodes,
                                         std::size_t truncation) {
    std::vector<OffspringLaw> laws;
    for (NodeId i : nodes) {
        OffspringLaw law;
        double total = 0.0;
        for (const auto& v : model.enumerate(i, truncation)) {
            const double w = model.pmf(i, v);
            if (w == 0.0) continue;
            const auto hood = model.expand(i, v);
            Eigen::VectorXd m = Eigen::VectorXd::Zero(Eigen::Index(nodes.size()));
            for (std::size_t b = 0; b < nodes.size(); ++b) {
                const double len = hood.length_on(nodes[b]);
                if (len > 0.0) m(Eigen::Index(b)) = *model.dominating_rate(nodes[b]) * len;
            }
            law.weights.push_back(w);
            law.means.push_back(std::move(m));
            total += w;
        }
        for (auto& w : law.weights) w /= total;
        laws.push_back(std::move(law));
    }
    return laws;
}

namespace {

void check_laws(const std::vector<OffspringLaw>& laws, Eigen::Index dim) {
    if (Eigen::Index(laws.size()) != dim) throw std::invalid_argument("one offspring law per type is required");
    for (const auto& law : laws) {
        if (law.weights.size() != law.means.size() || law.weights.empty()) {
            throw std::invalid_argument("offspring law needs matching, nonempty weights and means");
        }
        for (const auto& m : law.means) {
            if (m.size() != dim) throw std::invalid_argument("offspring mean vector has the wrong dimension");
        }
    }
}

// Log-sum-exp of w_c exp(s_c).
double log_mix(const std::vector<double>& w, const std::vector<double>& s) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < s.size(); ++c) {
        if (w[c] > 0.0) top = std::max(top, s[c]);
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < s.size(); ++c) acc += w[c] * std::exp(s[c] - top);
    return top + std::log(acc);
}

Eigen::MatrixXd log_laplace_jacobian(const std::vector<OffspringLaw>& laws, const Eigen::VectorXd& t, LaplaceForm form) {
    const auto n = t.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    const Eigen::VectorXd et = t.array().exp();
    const Eigen::VectorXd em1 = t.array().exp() - 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& law = laws[std::size_t(i)];
        const std::size_t C = law.weights.size();
        if (form == LaplaceForm::Mixture) {
            std::vector<double> s(C);
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < C; ++c) top = std::max(top, s[c] = em1.dot(law.means[c]));
            double den = 0.0;
            Eigen::VectorXd num = Eigen::VectorXd::Zero(n);
            for (std::size_t c = 0; c < C; ++c) {
                const double w = law.weights[c] * std::exp(s[c] - top);
                den += w;
                num += w * law.means[c];
            }
            J.row(i) = (num.array() * et.array()).matrix().transpose() / den;
        } else {
            for (Eigen::Index j = 0; j < n; ++j) {
                double top = -std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < C; ++c) top = std::max(top, em1(j) * law.means[c](j));
                double den = 0.0, num = 0.0;
                for (std::size_t c = 0; c < C; ++c) {
                    const double w = law.weights[c] * std::exp(em1(j) * law.means[c](j) - top);
                    den += w;
                    num += w * law.means[c](j);
                }
                J(i, j) = et(j) * num / den;
            }
        }
    }
    return J;
}

}  // namespace

Eigen::VectorXd offspring_log_laplace(const std::vector<OffspringLaw>& laws, const Eigen::VectorXd& theta,
                                      LaplaceForm form) {
    check_laws(laws, theta.size());
    const Eigen::VectorXd em1 = theta.array().exp() - 1.0;
    Eigen::VectorXd out(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const auto& law = laws[std::size_t(i)];
        if (form == LaplaceForm::Mixture) {
            std::vector<double> s;
            for (const auto& m : law.means) s.push_back(em1.dot(m));
            out(i) = log_mix(law.weights, s);
        } else {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < theta.size(); ++j) {
                std::vector<double> s;
                for (const auto& m : law.means) s.push_back(em1(j) * m(j));
                acc += log_mix(law.weights, s);
            }
            out(i) = acc;
        }
    }
    return out;
}

LogLaplaceState log_laplace_fixed_point(const std::vector<OffspringLaw>& laws, const Eigen::VectorXd& theta,
                                        double tol, LaplaceForm form, std::size_t max_iterations, double cap) {
    check_laws(laws, theta.size());
    LogLaplaceState st;
    st.theta = theta;
    st.Phi = Eigen::VectorXd::Zero(theta.size());
    if (theta.isZero(0.0)) return st;

    const auto diverged = [&](const Eigen::VectorXd& last, const std::string& why) {
        return LaplaceDivergence("theta outside convergence ball: " + why, last);
    };
    Eigen::VectorXd Phi = theta;
    for (;;) {
        const Eigen::VectorXd next = theta + offspring_log_laplace(laws, Phi, form);
        ++st.iterations;
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > cap) throw diverged(Phi, "iterates exceed the cap");
        const double step = (next - Phi).cwiseAbs().maxCoeff();
        Phi = next;
        if (step < std::max(tol, 1e-10)) break;
        if (st.iterations >= max_iterations) throw diverged(Phi, "no convergence within the iteration budget");
    }
    const auto n = theta.size();
    for (int k = 0; k < 50; ++k) {
        const Eigen::VectorXd F = Phi - theta - offspring_log_laplace(laws, Phi, form);
        if (F.cwiseAbs().maxCoeff() < tol * 0.01) break;
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - log_laplace_jacobian(laws, Phi, form);
        Phi -= A.partialPivLu().solve(F);
        if (!Phi.allFinite()) throw diverged(Phi, "Newton step left the domain");
    }
    st.Phi = Phi;
    st.residual = (Phi - theta - offspring_log_laplace(laws, Phi, form)).cwiseAbs().maxCoeff();
    if (!(st.residual < tol)) throw diverged(Phi, "residual " + std::to_string(st.residual) + " above tolerance");
    return st;
}

Eigen::MatrixXd log_laplace_jacobian_at_zero(const std::vector<OffspringLaw>& laws, double step, LaplaceForm form) {
    const auto n = Eigen::Index(laws.size());
    Eigen::MatrixXd J(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = step;
        const auto up = log_laplace_fixed_point(laws, e, 1e-14, form).Phi;
        const auto down = log_laplace_fixed_point(laws, -e, 1e-14, form).Phi;
        J.col(j) = (up - down) / (2.0 * step);
    }
    return J;
}

// ---------------------------------------------------------------------------

double lattice_cost_series(double p) {
    if (!(p > 3.0)) throw NonSummable("f(p) = sum (2k-1) k^(1-p) diverges for p <= 3");
    return 2.0 * power_tail(p - 2.0, 0) - power_tail(p - 1.0, 0);
}

CostCurve weight_cost_curve(double decay, double delta, const std::vector<double>& p_grid) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    const double C = lattice_bound_constant(decay);
    CostCurve curve;
    for (double p : p_grid) {
        if (p > decay) {
            throw std::invalid_argument("p = " + std::to_string(p) + " exceeds the decay exponent " +
                                        std::to_string(decay) + "; the power-law bound would not dominate");
        }
        CostPoint pt;
        pt.p = p;
        pt.f = lattice_cost_series(p);
        pt.mean_offspring = C * delta * pt.f;
        pt.supercritical = !(pt.mean_offspring < 1.0);
        if (!pt.supercritical) pt.expected_W = 1.0 / (1.0 - pt.mean_offspring);
        curve.points.push_back(pt);
    }
    for (const auto& pt : curve.points) {
        if (!pt.expected_W) continue;
        if (!curve.argmin) {
            curve.argmin = pt.p;
            continue;
        }
        const auto best = std::find_if(curve.points.begin(), curve.points.end(),
                                       [&](const CostPoint& q) { return q.p == *curve.argmin; });
        if (*pt.expected_W < *best->expected_W) curve.argmin = pt.p;
    }
    return curve;
}

}  // namespace kalikow
