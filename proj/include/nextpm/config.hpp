#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nextpm/model.hpp"

namespace nextpm {

/// Raised by config parsing/validation. `problems` lists every violation found.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Reads and validates a JSON config file.
///
/// Schema:
///   horizon, lambda, window           numbers (required)
///   components[]                      {id?, name?, alpha, beta, cm_cost, pm_cost}
///   calendar                          one of {"constant": d}, {"values": [d_1..d_T]},
///                                     {"pattern": [12 values], "start": 0..11}
///   mc                                {replications?, seed?, max_stderr?} (optional)
SystemConfig load_config(const std::filesystem::path& path);
SystemConfig parse_config(const std::string& text);
SystemConfig config_from_json(const nlohmann::json& j);

/// Calendar block of the schema, for overrides; `horizon` sizes constant/pattern calendars.
SetupCostCalendar calendar_from_json(const nlohmann::json& j, int horizon);

nlohmann::json to_json(const SystemConfig& config);
nlohmann::json to_json(const SetupCostCalendar& calendar);

/// FNV-1a over the canonical JSON dump; stable across platforms.
std::string config_hash(const SystemConfig& config);

/// Non-fatal remarks (e.g. CM cost below PM cost).
std::vector<std::string> config_warnings(const SystemConfig& config);

}  // namespace nextpm
