#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kalikow/core.hpp"
#include "kalikow/model.hpp"
#include "kalikow/random.hpp"

namespace kalikow {

/// A component value exceeded the bound used for thinning: the model broke
/// the local-bound contract and the run is invalid.
class BoundViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class StopReason { TimeReached, StepBudget, GuardExit };

std::string to_string(StopReason r);

struct ForwardRun {
    Configuration accepted;
    StopReason stop_reason = StopReason::TimeReached;
    /// Time at which the run stopped (t_max, last accepted point, or exit time).
    double stop_time = 0.0;
    std::size_t proposals = 0;
    std::size_t bound_updates = 0;
    double t_max = 0.0;
    std::size_t n_max = 0;
    std::string guard_message;
};

/// Default activity cap applied when the caller asks for no guard.
inline constexpr std::size_t kDefaultActivityCap = 1'000'000;

/// Forward simulation from empty past on a finite node set.
///
/// Each step recomputes the local bounds, proposes the next point at the
/// total bound rate, picks a node and a neighborhood, and thins. `n_max`
/// counts accepted points. A guard of kind None is replaced by
/// ActivityCap(t_max, kDefaultActivityCap); the model's own subspace guard is
/// always enforced as well.
ForwardRun forward_simulate(const KalikowModel& model, const std::vector<NodeId>& nodes, double t_max,
                            std::size_t n_max, SubspaceGuard guard, RandomStream rng);

}  // namespace kalikow
