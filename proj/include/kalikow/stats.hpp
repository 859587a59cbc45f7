#pragma once

#include <cstddef>
#include <map>
#include <vector>

namespace kalikow::stats {

struct TestResult {
    double statistic = 0.0;
    double p_value = 0.0;
    double dof = 0.0;
};

/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

/// One-sample KS test of the sample against Exp(rate).
TestResult ks_exponential(std::vector<double> sample, double rate);

/// Upper tail of the chi-square distribution.
double chi_square_survival(double statistic, double dof);

/// Goodness of fit of integer counts to a pmf; bins with expected count
/// below `min_expected` are pooled into their neighbours.
TestResult chi_square_gof(const std::vector<long>& sample, const std::map<long, double>& pmf, double min_expected = 5.0);

/// Two-sample homogeneity test on integer-valued samples, pooling sparse bins.
TestResult chi_square_two_sample(const std::vector<long>& a, const std::vector<long>& b, double min_expected = 5.0);

/// Total variation distance between the empirical laws of two integer samples.
double total_variation(const std::vector<long>& a, const std::vector<long>& b);

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);
/// Standard error of the mean.
double standard_error(const std::vector<double>& x);

/// Poisson pmf on 0..kmax, remainder folded into kmax.
std::map<long, double> poisson_pmf(double mean, long kmax);

}  // namespace kalikow::stats
