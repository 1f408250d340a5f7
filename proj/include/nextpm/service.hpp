#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nextpm/model.hpp"
#include "nextpm/scheduler.hpp"

namespace httplib {
class Server;
}

namespace nextpm {

/// What a state file holds.
struct PersistedState {
    SystemState state;
    std::vector<MaintenanceEvent> history;
    std::optional<nlohmann::json> last_plan;  // plan for `state`, if computed
    std::string config_hash;
    std::map<std::string, nlohmann::json> requests;  // request id -> response body
};

nlohmann::json to_json(const MaintenanceEvent& event);
MaintenanceEvent event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SystemState& state, const std::vector<int>& ids);
nlohmann::json to_json(const PersistedState& persisted, const std::vector<int>& ids);
PersistedState persisted_from_json(const nlohmann::json& j, const SystemConfig& config);

/// Atomic write (temp file + rename).
void save_state(const std::filesystem::path& path, const PersistedState& persisted, const SystemConfig& config);
PersistedState load_state(const std::filesystem::path& path, const SystemConfig& config);

/// State reached by applying `history` to the fresh state of `config`.
SystemState replay(const SystemConfig& config, const std::vector<MaintenanceEvent>& history);

/// $NEXTPM_STATE_DIR/state.json, or empty when the variable is unset.
std::optional<std::filesystem::path> default_state_path();

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// The live rescheduling loop behind the HTTP API.
///
/// Mutations are serialized. Reads and what-if requests work on snapshots.
/// Plans are built on a worker thread; get_plan(false) answers 202 while one
/// is in progress.
class PlanningService {
public:
    PlanningService(SystemConfig config, std::optional<std::filesystem::path> state_file);
    ~PlanningService();

    PlanningService(const PlanningService&) = delete;
    PlanningService& operator=(const PlanningService&) = delete;

    ApiResponse get_state() const;
    ApiResponse get_plan(bool wait);
    /// body: {component, time, request_id?}
    ApiResponse report_failure(const nlohmann::json& body);
    /// body: {components, time, request_id?}
    ApiResponse record_pm(const nlohmann::json& body);
    /// body: {calendar?, lambda?}
    ApiResponse whatif(const nlohmann::json& body) const;
    ApiResponse history() const;

    const SystemConfig& config() const { return config_; }
    SystemState state() const;
    bool stale() const { return stale_; }

private:
    nlohmann::json provenance() const;
    nlohmann::json plan_json(const PlanStep& step) const;
    std::optional<ApiResponse> precheck(const nlohmann::json& body, std::string& request_id) const;
    // Caller holds mu_. Starts a build unless one is running or the cached plan is current.
    void start_build(std::unique_lock<std::mutex>& lock);
    // Caller holds mu_. Blocks until a plan for the current state is cached.
    nlohmann::json wait_plan(std::unique_lock<std::mutex>& lock);
    void commit(const MaintenanceEvent& event, const std::string& request_id, const nlohmann::json& response);
    void persist_locked() const;

    SystemConfig config_;
    std::vector<int> ids_;
    std::string hash_;
    std::optional<std::filesystem::path> path_;
    bool stale_ = false;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    PersistedState data_;
    long version_ = 0;  // bumped on every state change
    long plan_version_ = -1;
    bool building_ = false;
    std::optional<std::string> build_error_;
    std::thread worker_;

    std::mutex write_mu_;
};

/// GET /state, GET /plan[?wait=1], POST /failure, POST /maintenance,
/// POST /whatif, GET /history.
void register_routes(httplib::Server& server, PlanningService& service);

}  // namespace nextpm
