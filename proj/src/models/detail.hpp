#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "kalikow/models.hpp"

namespace kalikow::detail {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Atom law for target i: all sources of i, ratio either forced or
/// e^{-beta_min eps / 2} when some kernel is exponential, else 1/2.
AtomLaw make_atom_law(const KernelMatrix& kernels, NodeId i, double eps, std::optional<double> ratio);

/// sum_{k > n} k^m q^{k-1} for m in {0, 1, 2}, 0 <= q < 1.
double geometric_moment_tail(double q, std::int64_t n, int m);

}  // namespace kalikow::detail
