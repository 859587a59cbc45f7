#include "kalikow/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kalikow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Kernel Kernel::exponential(double alpha, double beta) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("kernel alpha must be >= 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("kernel beta must be > 0");
    if (alpha == 0.0) return zero();
    Kernel k;
    k.kind_ = Kind::Exponential;
    k.alpha_ = alpha;
    k.beta_ = beta;
    return k;
}

Kernel Kernel::step(std::vector<double> edges, std::vector<double> values) {
    if (edges.size() != values.size() + 1 || values.empty()) {
        throw std::invalid_argument("step kernel needs one more edge than values");
    }
    if (edges.front() != 0.0) throw std::invalid_argument("step kernel must start at 0");
    for (std::size_t m = 0; m < values.size(); ++m) {
        if (!(edges[m] < edges[m + 1]) || !std::isfinite(edges[m + 1])) {
            throw std::invalid_argument("step kernel edges must be finite and increasing");
        }
        if (!(values[m] >= 0.0)) throw std::invalid_argument("step kernel values must be >= 0");
        if (m > 0 && values[m] > values[m - 1]) throw std::invalid_argument("step kernel must be nonincreasing");
    }
    Kernel k;
    k.kind_ = Kind::Step;
    k.edges_ = std::move(edges);
    k.values_ = std::move(values);
    return k;
}

double Kernel::operator()(double t) const {
    if (t < 0.0) return 0.0;
    switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Exponential: return alpha_ * std::exp(-beta_ * t);
        case Kind::Step: {
            auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
            const auto m = static_cast<std::size_t>(it - edges_.begin());
            if (m == 0 || m > values_.size()) return 0.0;
            return values_[m - 1];
        }
    }
    return 0.0;
}

double Kernel::l1_norm() const {
    switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Exponential: return alpha_ / beta_;
        case Kind::Step: {
            double s = 0.0;
            for (std::size_t m = 0; m < values_.size(); ++m) s += values_[m] * (edges_[m + 1] - edges_[m]);
            return s;
        }
    }
    return 0.0;
}

double Kernel::support_end() const {
    switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Exponential: return kInf;
        case Kind::Step: return edges_.back();
    }
    return 0.0;
}

std::string Kernel::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Zero: os << "zero"; break;
        case Kind::Exponential: os << alpha_ << "*exp(-" << beta_ << "t)"; break;
        case Kind::Step: os << "step[" << values_.size() << "]"; break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------

RateFunction RateFunction::affine(double base, double slope) {
    if (!(base >= 0.0) || !(slope >= 0.0)) throw std::invalid_argument("affine rate needs base >= 0, slope >= 0");
    RateFunction f;
    f.kind_ = Kind::Affine;
    f.a_ = base;
    f.b_ = slope;
    return f;
}

RateFunction RateFunction::clipped(double base, double slope, double cap) {
    if (!(slope >= 0.0) || !(cap > 0.0)) throw std::invalid_argument("clipped rate needs slope >= 0, cap > 0");
    RateFunction f;
    f.kind_ = Kind::Clipped;
    f.a_ = base;
    f.b_ = slope;
    f.c_ = cap;
    return f;
}

RateFunction RateFunction::sigmoid(double height, double slope, double mid) {
    if (!(height > 0.0) || !(slope > 0.0)) throw std::invalid_argument("sigmoid rate needs height > 0, slope > 0");
    RateFunction f;
    f.kind_ = Kind::Sigmoid;
    f.a_ = height;
    f.b_ = slope;
    f.c_ = mid;
    return f;
}

RateFunction RateFunction::exp(double scale, double rate) {
    if (!(scale >= 0.0) || !(rate >= 0.0)) throw std::invalid_argument("exp rate needs scale >= 0, rate >= 0");
    RateFunction f;
    f.kind_ = Kind::Exp;
    f.a_ = scale;
    f.b_ = rate;
    return f;
}

RateFunction RateFunction::cosh(double scale, double rate) {
    if (!(scale >= 0.0) || !(rate >= 0.0)) throw std::invalid_argument("cosh rate needs scale >= 0, rate >= 0");
    RateFunction f;
    f.kind_ = Kind::Cosh;
    f.a_ = scale;
    f.b_ = rate;
    return f;
}

RateFunction RateFunction::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    for (double c : coeffs) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("polynomial coefficients must be >= 0");
    }
    RateFunction f;
    f.kind_ = Kind::Polynomial;
    f.coeffs_ = std::move(coeffs);
    return f;
}

double RateFunction::operator()(double u) const {
    switch (kind_) {
        case Kind::Affine: return a_ + b_ * u;
        case Kind::Clipped: return std::min(c_, std::max(0.0, a_ + b_ * u));
        case Kind::Sigmoid: return a_ / (1.0 + std::exp(-b_ * (u - c_)));
        case Kind::Exp: return a_ * std::exp(b_ * u);
        case Kind::Cosh: return a_ * std::cosh(b_ * u);
        case Kind::Polynomial: {
            double s = 0.0;
            for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) s = s * u + *it;
            return s;
        }
    }
    return 0.0;
}

std::optional<double> RateFunction::lipschitz() const {
    switch (kind_) {
        case Kind::Affine:
        case Kind::Clipped: return b_;
        case Kind::Sigmoid: return a_ * b_ / 4.0;
        case Kind::Polynomial:
            if (coeffs_.size() <= 2) return coeffs_.size() == 2 ? coeffs_[1] : 0.0;
            return std::nullopt;
        case Kind::Exp:
        case Kind::Cosh:
            if (a_ == 0.0 || b_ == 0.0) return 0.0;
            return std::nullopt;
    }
    return std::nullopt;
}

std::optional<double> RateFunction::taylor_coefficient(std::size_t k) const {
    const double kd = static_cast<double>(k);
    if ((kind_ == Kind::Exp || kind_ == Kind::Cosh) && b_ == 0.0) return k == 0 ? a_ : 0.0;
    switch (kind_) {
        case Kind::Affine:
            return k == 0 ? a_ : (k == 1 ? b_ : 0.0);
        case Kind::Exp:
            return a_ * std::exp(kd * std::log(b_) - std::lgamma(kd + 1.0));
        case Kind::Cosh:
            if (k % 2 == 1) return 0.0;
            return a_ * std::exp(kd * std::log(b_) - std::lgamma(kd + 1.0));
        case Kind::Polynomial:
            return k < coeffs_.size() ? coeffs_[k] : 0.0;
        default:
            return std::nullopt;
    }
}

bool RateFunction::analytic_nonnegative() const {
    return kind_ == Kind::Affine || kind_ == Kind::Exp || kind_ == Kind::Cosh || kind_ == Kind::Polynomial;
}

double RateFunction::sup_scaled_coefficient(double z) const {
    if (!analytic_nonnegative()) return kInf;
    if (!std::isfinite(z)) return kInf;
    double best = *taylor_coefficient(0);
    switch (kind_) {
        case Kind::Affine: return std::max(a_, b_ * z);
        case Kind::Polynomial:
            for (std::size_t k = 1; k < coeffs_.size(); ++k) best = std::max(best, coeffs_[k] * std::pow(z, double(k)));
            return best;
        case Kind::Exp:
        case Kind::Cosh: {
            // Terms a (bz)^k / k! peak near k = bz.
            const double x = b_ * z;
            if (x == 0.0) return best;
            const double centre = std::floor(x);
            for (double k = std::max(0.0, centre - 1.0); k <= centre + 2.0; k += 1.0) {
                const auto c = taylor_coefficient(static_cast<std::size_t>(k));
                if (*c > 0.0) best = std::max(best, a_ * std::exp(k * std::log(x) - std::lgamma(k + 1.0)));
            }
            return best;
        }
        default: return kInf;
    }
}

bool RateFunction::nondecreasing() const { return true; }

std::string RateFunction::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Affine: os << "affine(" << a_ << "," << b_ << ")"; break;
        case Kind::Clipped: os << "clipped(" << a_ << "," << b_ << "," << c_ << ")"; break;
        case Kind::Sigmoid: os << "sigmoid(" << a_ << "," << b_ << "," << c_ << ")"; break;
        case Kind::Exp: os << "exp(" << a_ << "," << b_ << ")"; break;
        case Kind::Cosh: os << "cosh(" << a_ << "," << b_ << ")"; break;
        case Kind::Polynomial: os << "polynomial[" << coeffs_.size() << "]"; break;
    }
    return os.str();
}

}  // namespace kalikow
