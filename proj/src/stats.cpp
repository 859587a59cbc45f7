#include "kalikow/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kalikow::stats {

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.3) {
        // small-x form: P(K <= x) = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2))
        double s = 0.0;
        for (int k = 1; k <= 50; ++k) {
            s += std::exp(-std::pow(2.0 * k - 1.0, 2) * M_PI * M_PI / (8.0 * x * x));
        }
        return 1.0 - std::sqrt(2.0 * M_PI) / x * s;
    }
    double s = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

TestResult ks_exponential(std::vector<double> sample, double rate) {
    if (sample.empty()) throw std::invalid_argument("KS test on an empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = double(sample.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sample.size(); ++k) {
        const double F = 1.0 - std::exp(-rate * sample[k]);
        d = std::max({d, double(k + 1) / n - F, F - double(k) / n});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d), 0.0};
}

double chi_square_survival(double statistic, double dof) {
    if (dof <= 0.0) return 1.0;
    return boost::math::gamma_q(dof / 2.0, std::max(statistic, 0.0) / 2.0);
}

namespace {

// Groups consecutive integer bins until each group reaches the threshold.
std::vector<std::pair<long, long>> pooled_bins(const std::vector<long>& keys, const std::vector<double>& weight,
                                               double threshold) {
    std::vector<std::pair<long, long>> groups;
    double acc = 0.0;
    long start = keys.front();
    for (std::size_t k = 0; k < keys.size(); ++k) {
        acc += weight[k];
        if (acc >= threshold) {
            groups.push_back({start, keys[k]});
            acc = 0.0;
            if (k + 1 < keys.size()) start = keys[k + 1];
        }
    }
    if (acc > 0.0 || groups.empty()) {
        if (groups.empty()) {
            groups.push_back({start, keys.back()});
        } else {
            groups.back().second = keys.back();
        }
    }
    return groups;
}

}  // namespace

TestResult chi_square_gof(const std::vector<long>& sample, const std::map<long, double>& pmf, double min_expected) {
    if (sample.empty() || pmf.empty()) throw std::invalid_argument("chi-square test needs data and a pmf");
    const double n = double(sample.size());
    std::map<long, double> obs;
    for (long x : sample) obs[x] += 1.0;
    std::vector<long> keys;
    std::vector<double> expected;
    for (const auto& [k, p] : pmf) {
        keys.push_back(k);
        expected.push_back(n * p);
    }
    const auto groups = pooled_bins(keys, expected, min_expected);
    double stat = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const long lo = g == 0 ? std::numeric_limits<long>::min() : groups[g].first;
        const long hi = g + 1 == groups.size() ? std::numeric_limits<long>::max() : groups[g].second;
        double e = 0.0, o = 0.0;
        for (const auto& [k, p] : pmf) {
            if (k >= lo && k <= hi) e += n * p;
        }
        for (const auto& [k, c] : obs) {
            if (k >= lo && k <= hi) o += c;
        }
        if (e > 0.0) stat += (o - e) * (o - e) / e;
    }
    const double dof = double(groups.size()) - 1.0;
    return {stat, chi_square_survival(stat, dof), dof};
}

TestResult chi_square_two_sample(const std::vector<long>& a, const std::vector<long>& b, double min_expected) {
    if (a.empty() || b.empty()) throw std::invalid_argument("two-sample test needs two nonempty samples");
    std::map<long, std::pair<double, double>> counts;
    for (long x : a) counts[x].first += 1.0;
    for (long x : b) counts[x].second += 1.0;
    const double na = double(a.size()), nb = double(b.size()), n = na + nb;
    std::vector<long> keys;
    std::vector<double> smaller;
    for (const auto& [k, c] : counts) {
        keys.push_back(k);
        smaller.push_back((c.first + c.second) * std::min(na, nb) / n);
    }
    const auto groups = pooled_bins(keys, smaller, min_expected);
    double stat = 0.0;
    for (const auto& [lo, hi] : groups) {
        double ca = 0.0, cb = 0.0;
        for (auto it = counts.lower_bound(lo); it != counts.end() && it->first <= hi; ++it) {
            ca += it->second.first;
            cb += it->second.second;
        }
        const double tot = ca + cb;
        const double ea = tot * na / n, eb = tot * nb / n;
        if (ea > 0.0) stat += (ca - ea) * (ca - ea) / ea;
        if (eb > 0.0) stat += (cb - eb) * (cb - eb) / eb;
    }
    const double dof = double(groups.size()) - 1.0;
    return {stat, chi_square_survival(stat, dof), dof};
}

double total_variation(const std::vector<long>& a, const std::vector<long>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("total variation needs two nonempty samples");
    std::map<long, std::pair<double, double>> freq;
    for (long x : a) freq[x].first += 1.0 / double(a.size());
    for (long x : b) freq[x].second += 1.0 / double(b.size());
    double s = 0.0;
    for (const auto& [k, f] : freq) s += std::abs(f.first - f.second);
    return 0.5 * s;
}

double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

double variance(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / double(x.size() - 1);
}

double standard_error(const std::vector<double>& x) {
    return x.empty() ? 0.0 : std::sqrt(variance(x) / double(x.size()));
}

std::map<long, double> poisson_pmf(double mean, long kmax) {
    std::map<long, double> pmf;
    double total = 0.0;
    for (long k = 0; k < kmax; ++k) {
        const double p = std::exp(-mean + double(k) * std::log(mean) - std::lgamma(double(k) + 1.0));
        pmf[k] = p;
        total += p;
    }
    pmf[kmax] = std::max(0.0, 1.0 - total);
    return pmf;
}

}  // namespace kalikow::stats
