#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kalikow/core.hpp"
#include "kalikow/forward_sim.hpp"
#include "kalikow/perfect_sim.hpp"
#include "kalikow/sampling.hpp"

namespace kalikow {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CSV with header `time,node`, rows sorted by time (ties by node), times
/// with 17 significant digits so that reading them back is exact.
void write_points_csv(std::ostream& out, const Configuration& points);
void write_points_csv(const std::string& path, const Configuration& points);

Configuration read_points_csv(std::istream& in);
Configuration read_points_csv(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& doc);

nlohmann::json ledger_to_json(const RegionLedger& ledger);

nlohmann::json forward_run_json(const ForwardRun& run, const RandomStream& rng);

struct PerfectBatchRun {
    PerfectRun run;
    RandomStream rng;
    double t_max = 0.0;
    std::string points_path;
};

/// Per-run seeds, counts and rates plus clan-size histogram, termination
/// statistics and the lookback distribution over every processed root.
nlohmann::json perfect_batch_summary(const std::vector<PerfectBatchRun>& runs, std::size_t failed_runs,
                                     const std::vector<std::string>& failures);

}  // namespace kalikow
