#pragma once

#include <vector>

#include "kalikow/functions.hpp"
#include "kalikow/random.hpp"

namespace kalikow::oracle {

/// Ogata thinning for a one-node linear Hawkes process mu + sum h(t - t_k)
/// from empty past on [0, t_end). The bound is the intensity just after the
/// current time, valid because h is nonincreasing.
std::vector<double> ogata_linear_hawkes(double mu, const Kernel& h, double t_end, RandomStream& rng);

/// Ogata thinning for a one-node age-dependent process
/// psi(sum h(t - t_k)) 1{t - t_last > delta} on [0, t_end) from empty past.
std::vector<double> ogata_age_model(const RateFunction& psi, const Kernel& h, double delta, double t_end,
                                    RandomStream& rng);

}  // namespace kalikow::oracle
