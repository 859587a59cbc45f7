#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kalikow/core.hpp"
#include "kalikow/model.hpp"
#include "kalikow/perfect_sim.hpp"

namespace kalikow {

/// Every schema violation found in a config, one message per problem.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct SimulationSettings {
    double t_max = 1.0;
    std::optional<std::size_t> n_max;
    BackwardBudget budget;
    NodeId node = 0;
    /// Nodes simulated forward; defaults to every node of a finite model.
    std::vector<NodeId> nodes;
    /// Perfect simulation window; empty means {(node, [0, t_max])}.
    std::vector<WindowRequest> window;
};

struct RngSettings {
    std::uint64_t seed = 1;
    std::size_t runs = 1;
};

struct OutputSettings {
    std::string points = "points.csv";
    std::optional<std::string> summary;
    std::optional<std::string> ledger;
};

struct RunConfig {
    std::string family;
    std::shared_ptr<const KalikowModel> model;
    SubspaceGuard guard;
    SimulationSettings simulation;
    RngSettings rng;
    OutputSettings output;
    nlohmann::json source;
};

/// Names accepted in model.family.
std::vector<std::string> model_families();

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

}  // namespace kalikow
