#pragma once

// JSON documents emitted by the command-line tool.

#include "uscnn/metrics.hpp"
#include "uscnn/training.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace uscnn {

struct RunReport {
    std::string command;
    TrainConfig config;
    std::vector<LossReport> loss_history;
    std::optional<Metrics> metrics;
    std::string change_map_path;
    std::optional<std::string> difference_map_path;
    std::optional<double> wall_clock_seconds;

    bool operator==(const RunReport&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const LossReport& r);
void from_json(const nlohmann::json& j, LossReport& r);
void to_json(nlohmann::json& j, const Metrics& m);
void from_json(const nlohmann::json& j, Metrics& m);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

}  // namespace uscnn
