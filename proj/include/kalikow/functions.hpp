#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace kalikow {

/// Nonnegative, nonincreasing interaction kernel h(t), t >= 0.
///
/// Only forms with closed-form h(0), ||h||_1 and pointwise values are
/// supported: exponential alpha * exp(-beta t), nonincreasing step tables with
/// compact support, and the zero kernel.
class Kernel {
public:
    enum class Kind { Zero, Exponential, Step };

    Kernel() = default;
    static Kernel zero() { return {}; }
    static Kernel exponential(double alpha, double beta);
    /// value[m] on [edges[m], edges[m+1]); edges[0] = 0; zero past the last edge.
    static Kernel step(std::vector<double> edges, std::vector<double> values);

    Kind kind() const { return kind_; }
    bool is_zero() const { return kind_ == Kind::Zero; }

    /// h(t); zero for t < 0.
    double operator()(double t) const;
    double at_zero() const { return (*this)(0.0); }
    double l1_norm() const;
    /// End of the support (+inf for exponential, 0 for zero).
    double support_end() const;

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& values() const { return values_; }

    std::string describe() const;

private:
    Kind kind_ = Kind::Zero;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    std::vector<double> edges_;
    std::vector<double> values_;
};

/// Rate function psi applied to the drive of a nonlinear model.
class RateFunction {
public:
    enum class Kind {
        Affine,     // base + slope * u
        Clipped,    // min(cap, max(0, base + slope * u))
        Sigmoid,    // height / (1 + exp(-slope * (u - mid)))
        Exp,        // scale * exp(rate * u)
        Cosh,       // scale * cosh(rate * u)
        Polynomial  // sum_k coeffs[k] u^k
    };

    static RateFunction affine(double base, double slope);
    static RateFunction clipped(double base, double slope, double cap);
    static RateFunction sigmoid(double height, double slope, double mid);
    static RateFunction exp(double scale, double rate);
    static RateFunction cosh(double scale, double rate);
    static RateFunction polynomial(std::vector<double> coeffs);

    Kind kind() const { return kind_; }
    double operator()(double u) const;

    /// Global Lipschitz constant on [0, inf), if finite.
    std::optional<double> lipschitz() const;

    /// Taylor coefficient psi^(k)(0) / k!, available for analytic kinds.
    std::optional<double> taylor_coefficient(std::size_t k) const;

    /// Whether all Taylor coefficients are available and nonnegative.
    bool analytic_nonnegative() const;

    /// sup_k taylor_coefficient(k) * z^k for z >= 0 (infinite if unbounded).
    double sup_scaled_coefficient(double z) const;

    bool nondecreasing() const;

    std::string describe() const;

private:
    Kind kind_ = Kind::Affine;
    double a_ = 0.0;
    double b_ = 0.0;
    double c_ = 0.0;
    std::vector<double> coeffs_;
};

}  // namespace kalikow
