#include "kalikow/oracles.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace kalikow::oracle {

namespace {

double drive(const Kernel& h, const std::vector<double>& pts, double t) {
    double s = 0.0;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        const double lag = t - *it;
        if (lag > h.support_end()) break;
        s += h(lag);
    }
    return s;
}

}  // namespace

std::vector<double> ogata_linear_hawkes(double mu, const Kernel& h, double t_end, RandomStream& rng) {
    std::vector<double> pts;
    double t = 0.0;
    for (;;) {
        const double bound = mu + drive(h, pts, t);
        if (!(bound > 0.0)) break;
        t += std::exponential_distribution<double>(bound)(rng);
        if (t >= t_end) break;
        const double rate = mu + drive(h, pts, t);
        if (rng.uniform() * bound <= rate) pts.push_back(t);
    }
    return pts;
}

std::vector<double> ogata_age_model(const RateFunction& psi, const Kernel& h, double delta, double t_end,
                                    RandomStream& rng) {
    std::vector<double> pts;
    double t = 0.0;
    for (;;) {
        // During the refractory stretch nothing can happen: jump past it.
        if (!pts.empty() && t - pts.back() <= delta) t = std::nextafter(pts.back() + delta, t_end + 1.0);
        const double bound = psi(drive(h, pts, t));
        if (!(bound > 0.0)) break;
        t += std::exponential_distribution<double>(bound)(rng);
        if (t >= t_end) break;
        const bool ready = pts.empty() || t - pts.back() > delta;
        const double rate = ready ? psi(drive(h, pts, t)) : 0.0;
        if (rng.uniform() * bound <= rate) pts.push_back(t);
    }
    return pts;
}

}  // namespace kalikow::oracle
