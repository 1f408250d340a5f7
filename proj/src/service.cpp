#include "nextpm/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>

#include "nextpm/config.hpp"

namespace nextpm {

namespace {

ApiResponse error(int status, const std::string& code, const std::string& message,
                  nlohmann::json extra = nlohmann::json::object()) {
    extra["error"] = code;
    extra["message"] = message;
    return {status, extra};
}

std::optional<std::size_t> find_index(const std::vector<int>& ids, int id) {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

nlohmann::json to_json(const MaintenanceEvent& e) {
    nlohmann::json j{{"time", e.time},
                     {"kind", e.kind == EventKind::Corrective ? "CM" : "PM"},
                     {"components", e.components},
                     {"setup_cost", e.setup_cost},
                     {"realized_cost", e.realized_cost}};
    if (e.failed) {
        j["failed"] = *e.failed;
        j["failure_time"] = e.failure_time;
    }
    return j;
}

MaintenanceEvent event_from_json(const nlohmann::json& j) {
    MaintenanceEvent e;
    e.time = j.at("time").get<int>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "CM") e.kind = EventKind::Corrective;
    else if (kind == "PM") e.kind = EventKind::Preventive;
    else throw std::invalid_argument("unknown event kind " + kind);
    e.components = j.at("components").get<std::vector<int>>();
    e.setup_cost = j.at("setup_cost").get<double>();
    e.realized_cost = j.at("realized_cost").get<double>();
    if (j.contains("failed")) {
        e.failed = j["failed"].get<int>();
        e.failure_time = j.value("failure_time", 0.0);
    }
    return e;
}

nlohmann::json to_json(const SystemState& state, const std::vector<int>& ids) {
    nlohmann::json last = nlohmann::json::array();
    for (std::size_t j = 0; j < ids.size(); ++j)
        last.push_back({{"id", ids[j]}, {"t", state.last_maintenance[j]}, {"age", state.age(j)}});
    return {{"s", state.s},
            {"r", state.r},
            {"horizon", state.horizon},
            {"window", state.window},
            {"last_maintenance", last}};
}

nlohmann::json to_json(const PersistedState& p, const std::vector<int>& ids) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& e : p.history) history.push_back(to_json(e));
    return {{"format", 1},
            {"config_hash", p.config_hash},
            {"state", to_json(p.state, ids)},
            {"history", history},
            {"last_plan", p.last_plan ? *p.last_plan : nlohmann::json()},
            {"requests", p.requests}};
}

PersistedState persisted_from_json(const nlohmann::json& j, const SystemConfig& config) {
    PersistedState p;
    p.config_hash = j.at("config_hash").get<std::string>();
    const auto& st = j.at("state");
    p.state = SystemState::fresh(config);
    p.state.s = st.at("s").get<int>();
    p.state.r = st.at("r").get<int>();
    p.state.horizon = st.at("horizon").get<int>();
    p.state.window = st.at("window").get<int>();
    const auto& last = st.at("last_maintenance");
    if (last.size() != config.size()) throw std::invalid_argument("state file: component count differs from config");
    for (std::size_t k = 0; k < last.size(); ++k) p.state.last_maintenance[k] = last[k].at("t").get<int>();
    for (const auto& e : j.at("history")) p.history.push_back(event_from_json(e));
    if (j.contains("last_plan") && !j["last_plan"].is_null()) p.last_plan = j["last_plan"];
    if (j.contains("requests")) p.requests = j["requests"].get<std::map<std::string, nlohmann::json>>();
    return p;
}

void save_state(const std::filesystem::path& path, const PersistedState& persisted, const SystemConfig& config) {
    std::vector<int> ids;
    for (const auto& c : config.components) ids.push_back(c.id);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write state file " + tmp.string());
        out << to_json(persisted, ids).dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

PersistedState load_state(const std::filesystem::path& path, const SystemConfig& config) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open state file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("state file " + path.string() + ": " + e.what());
    }
    return persisted_from_json(j, config);
}

SystemState replay(const SystemConfig& config, const std::vector<MaintenanceEvent>& history) {
    std::vector<int> ids;
    for (const auto& c : config.components) ids.push_back(c.id);
    auto state = SystemState::fresh(config);
    for (const auto& e : history) state = apply_event(state, e, ids);
    return state;
}

std::optional<std::filesystem::path> default_state_path() {
    const char* dir = std::getenv("NEXTPM_STATE_DIR");
    if (!dir || !*dir) return std::nullopt;
    return std::filesystem::path(dir) / "state.json";
}

PlanningService::PlanningService(SystemConfig config, std::optional<std::filesystem::path> state_file)
    : config_(std::move(config)), path_(std::move(state_file)) {
    for (const auto& c : config_.components) ids_.push_back(c.id);
    hash_ = config_hash(config_);
    if (path_ && std::filesystem::exists(*path_)) {
        data_ = load_state(*path_, config_);
        stale_ = data_.config_hash != hash_;
        if (!stale_) {
            const auto replayed = replay(config_, data_.history);
            if (replayed.s != data_.state.s || replayed.r != data_.state.r ||
                replayed.last_maintenance != data_.state.last_maintenance)
                throw std::runtime_error("state file " + path_->string() + ": history does not reproduce the state");
            if (data_.last_plan) plan_version_ = version_;
        }
    } else {
        data_.state = SystemState::fresh(config_);
        data_.config_hash = hash_;
        if (path_) persist_locked();
    }
}

PlanningService::~PlanningService() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !building_; });
    lock.unlock();
    if (worker_.joinable()) worker_.join();
}

SystemState PlanningService::state() const {
    std::lock_guard lock(mu_);
    return data_.state;
}

nlohmann::json PlanningService::provenance() const {
    return {{"seed", config_.mc.seed},
            {"replications", config_.mc.replications},
            {"max_stderr", config_.mc.max_stderr},
            {"config_hash", hash_}};
}

nlohmann::json PlanningService::plan_json(const PlanStep& step) const {
    const auto& plan = step.plan;
    const auto& tables = step.tables;
    nlohmann::json assignment = nlohmann::json::array();
    for (std::size_t j = 0; j < plan.assignment.size(); ++j) {
        const int t = plan.assignment[j];
        nlohmann::json row{{"id", ids_[j]}, {"month", t}, {"c", tables.c(j, t)}, {"c_stderr", tables.c_stderr(j, t)}};
        if (t <= tables.r) {
            row["D"] = tables.D(j, t);
            row["D_stderr"] = tables.D_stderr(j, t);
        }
        assignment.push_back(row);
    }
    return {{"s", tables.s},
            {"r", tables.r},
            {"tau", plan.tau},
            {"set_P", plan.set_P},
            {"deferred", plan.deferred(tables.r)},
            {"objective", plan.objective},
            {"assignment", assignment},
            {"benefit_marginal", plan.benefit_marginal},
            {"tables", {{"max_stderr", tables.max_stderr()}, {"replications", tables.settings.replications},
                        {"seed", tables.settings.seed}}}};
}

void PlanningService::start_build(std::unique_lock<std::mutex>& lock) {
    (void)lock;
    if (building_ || plan_version_ == version_) return;
    if (worker_.joinable()) worker_.join();
    building_ = true;
    build_error_.reset();
    const long version = version_;
    const SystemState snapshot = data_.state;
    worker_ = std::thread([this, version, snapshot] {
        std::optional<nlohmann::json> plan;
        std::optional<std::string> failure;
        try {
            if (snapshot.r < snapshot.s + 1) {
                plan = nlohmann::json{{"s", snapshot.s}, {"r", snapshot.r}, {"finished", true}};
            } else {
                plan = plan_json(step_plan(config_, snapshot, config_.mc));
            }
        } catch (const std::exception& e) {
            failure = e.what();
        }
        {
            std::lock_guard guard(mu_);
            if (version == version_) {
                if (plan) {
                    data_.last_plan = std::move(plan);
                    plan_version_ = version;
                    try {
                        persist_locked();
                    } catch (const std::exception& e) {
                        build_error_ = e.what();
                    }
                } else {
                    build_error_ = failure;
                }
            }
            building_ = false;
        }
        cv_.notify_all();
    });
}

nlohmann::json PlanningService::wait_plan(std::unique_lock<std::mutex>& lock) {
    for (;;) {
        if (plan_version_ == version_) return *data_.last_plan;
        if (!building_ && build_error_) throw std::runtime_error(*build_error_);
        start_build(lock);
        cv_.wait(lock, [&] { return !building_; });
    }
}

ApiResponse PlanningService::get_state() const {
    std::lock_guard lock(mu_);
    return {200,
            {{"state", to_json(data_.state, ids_)},
             {"events", data_.history.size()},
             {"stale", stale_},
             {"plan_ready", plan_version_ == version_},
             {"mc", provenance()}}};
}

ApiResponse PlanningService::history() const {
    std::lock_guard lock(mu_);
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : data_.history) events.push_back(to_json(e));
    return {200, {{"events", events}, {"mc", provenance()}}};
}

ApiResponse PlanningService::get_plan(bool wait) {
    if (stale_)
        return error(409, "stale_config", "state file was written under a different config");
    std::unique_lock lock(mu_);
    if (plan_version_ == version_) return {200, {{"plan", *data_.last_plan}, {"mc", provenance()}}};
    if (!wait) {
        start_build(lock);
        return {202, {{"status", "building"}, {"s", data_.state.s}, {"mc", provenance()}}};
    }
    try {
        auto plan = wait_plan(lock);
        return {200, {{"plan", plan}, {"mc", provenance()}}};
    } catch (const std::exception& e) {
        build_error_.reset();
        return error(500, "plan_failed", e.what());
    }
}

std::optional<ApiResponse> PlanningService::precheck(const nlohmann::json& body, std::string& request_id) const {
    if (stale_) return error(409, "stale_config", "state file was written under a different config");
    if (!body.is_object()) return error(422, "validation", "request body must be a JSON object");
    if (body.contains("request_id")) {
        if (!body["request_id"].is_string() || body["request_id"].get<std::string>().empty())
            return error(422, "validation", "request_id must be a non-empty string");
        request_id = body["request_id"].get<std::string>();
        std::lock_guard lock(mu_);
        auto it = data_.requests.find(request_id);
        if (it != data_.requests.end())
            return error(409, "duplicate_request", "request_id " + request_id + " was already applied",
                         {{"original", it->second}});
    }
    return std::nullopt;
}

void PlanningService::commit(const MaintenanceEvent& event, const std::string& request_id,
                             const nlohmann::json& response) {
    std::lock_guard lock(mu_);
    data_.state = apply_event(data_.state, event, ids_);
    data_.history.push_back(event);
    data_.last_plan.reset();
    ++version_;
    if (!request_id.empty()) data_.requests[request_id] = response;
    persist_locked();
}

void PlanningService::persist_locked() const {
    if (path_) save_state(*path_, data_, config_);
}

ApiResponse PlanningService::report_failure(const nlohmann::json& body) {
    std::lock_guard writer(write_mu_);
    std::string request_id;
    if (auto early = precheck(body, request_id)) return *early;
    if (!body.contains("component") || !body["component"].is_number_integer())
        return error(422, "validation", "component must be an integer id");
    if (!body.contains("time") || !body["time"].is_number())
        return error(422, "validation", "time must be a number (continuous months)");
    const int id = body["component"].get<int>();
    const double time = body["time"].get<double>();
    const auto idx = find_index(ids_, id);
    if (!idx) return error(404, "unknown_component", "no component with id " + std::to_string(id));

    SystemState state;
    int tau = 0;
    {
        std::unique_lock lock(mu_);
        try {
            tau = wait_plan(lock).value("tau", data_.state.s);
        } catch (const std::exception& e) {
            build_error_.reset();
            return error(500, "plan_failed", e.what());
        }
        state = data_.state;
    }
    const int T = config_.horizon;
    if (!(time > state.s) || time > tau || std::floor(time) + 1 > T) {
        std::ostringstream msg;
        msg << "failure time must lie in (" << state.s << ", " << std::min(tau, T) << "]";
        if (std::floor(time) + 1 > T) msg << " and before month " << T;
        return error(422, "validation", msg.str(), {{"s", state.s}, {"tau", tau}});
    }

    const int u = static_cast<int>(std::floor(time));
    OmStep om;
    try {
        om = step_om(config_, state, u, *idx, config_.mc);
    } catch (const std::exception& e) {
        return error(500, "om_failed", e.what());
    }
    MaintenanceEvent ev;
    ev.time = u + 1;
    ev.kind = EventKind::Corrective;
    ev.failed = id;
    ev.failure_time = time;
    ev.components = om.plan.set_O;
    ev.setup_cost = config_.calendar.month(ev.time);
    ev.realized_cost = event_cost(config_, ev);

    const SystemState next = apply_event(state, ev, ids_);
    nlohmann::json response{{"event", to_json(ev)},
                            {"om",
                             {{"u", u},
                              {"set_O", om.plan.set_O},
                              {"objective", om.plan.objective},
                              {"second_open", om.plan.second_open}}},
                            {"state", to_json(next, ids_)},
                            {"mc", provenance()}};
    if (!request_id.empty()) response["request_id"] = request_id;
    commit(ev, request_id, response);
    return {200, response};
}

ApiResponse PlanningService::record_pm(const nlohmann::json& body) {
    std::lock_guard writer(write_mu_);
    std::string request_id;
    if (auto early = precheck(body, request_id)) return *early;
    if (!body.contains("time") || !body["time"].is_number_integer())
        return error(422, "validation", "time must be an integer month");
    if (!body.contains("components") || !body["components"].is_array() || body["components"].empty())
        return error(422, "validation", "components must be a non-empty array of ids");
    std::vector<int> comps;
    std::set<int> seen;
    for (const auto& c : body["components"]) {
        if (!c.is_number_integer()) return error(422, "validation", "component ids must be integers");
        const int id = c.get<int>();
        if (!find_index(ids_, id)) return error(404, "unknown_component", "no component with id " + std::to_string(id));
        if (!seen.insert(id).second) return error(422, "validation", "duplicate component " + std::to_string(id));
        comps.push_back(id);
    }
    std::sort(comps.begin(), comps.end());
    const int time = body["time"].get<int>();
    const SystemState state = this->state();
    if (time <= state.s || time > config_.horizon)
        return error(422, "validation",
                     "maintenance month must lie in (" + std::to_string(state.s) + ", " +
                         std::to_string(config_.horizon) + "]",
                     {{"s", state.s}});

    MaintenanceEvent ev;
    ev.time = time;
    ev.kind = EventKind::Preventive;
    ev.components = comps;
    ev.setup_cost = config_.calendar.month(time);
    ev.realized_cost = event_cost(config_, ev);
    const SystemState next = apply_event(state, ev, ids_);
    nlohmann::json response{{"event", to_json(ev)}, {"state", to_json(next, ids_)}, {"mc", provenance()}};
    if (!request_id.empty()) response["request_id"] = request_id;
    commit(ev, request_id, response);
    return {200, response};
}

ApiResponse PlanningService::whatif(const nlohmann::json& body) const {
    if (!body.is_object()) return error(422, "validation", "request body must be a JSON object");
    SystemConfig cfg = config_;
    nlohmann::json overrides = nlohmann::json::object();
    if (body.contains("lambda")) {
        if (!body["lambda"].is_number() || !(body["lambda"].get<double>() > 0.0))
            return error(422, "validation", "lambda must be a number > 0");
        cfg.lambda = body["lambda"].get<double>();
        overrides["lambda"] = cfg.lambda;
    }
    if (body.contains("calendar")) {
        try {
            cfg.calendar = calendar_from_json(body["calendar"], cfg.horizon);
        } catch (const ConfigError& e) {
            return error(422, "validation", e.what(), {{"problems", e.problems()}});
        }
        overrides["calendar"] = to_json(cfg.calendar);
    }
    SystemState snapshot;
    std::optional<nlohmann::json> baseline;
    {
        std::lock_guard lock(mu_);
        snapshot = data_.state;
        if (plan_version_ == version_) baseline = data_.last_plan;
    }
    if (snapshot.r < snapshot.s + 1) return error(409, "finished", "planning horizon exhausted");
    try {
        auto plan = plan_json(step_plan(cfg, snapshot, cfg.mc));
        nlohmann::json out{{"plan", plan}, {"overrides", overrides}, {"mc", provenance()}};
        out["baseline"] = baseline ? *baseline : nlohmann::json();
        return {200, out};
    } catch (const std::exception& e) {
        return error(500, "plan_failed", e.what());
    }
}

void register_routes(httplib::Server& server, PlanningService& service) {
    auto reply = [](httplib::Response& res, const ApiResponse& api) {
        res.status = api.status;
        res.set_content(api.body.dump(), "application/json");
    };
    auto with_body = [reply](auto handler) {
        return [reply, handler](const httplib::Request& req, httplib::Response& res) {
            nlohmann::json body;
            try {
                body = req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::parse_error& e) {
                reply(res, error(400, "bad_json", e.what()));
                return;
            }
            reply(res, handler(body));
        };
    };

    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/state", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.get_state());
    });
    server.Get("/history", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.history());
    });
    server.Get("/plan", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        const auto wait = req.get_param_value("wait");
        reply(res, service.get_plan(wait == "1" || wait == "true"));
    });
    server.Post("/failure", with_body([&service](const nlohmann::json& b) { return service.report_failure(b); }));
    server.Post("/maintenance", with_body([&service](const nlohmann::json& b) { return service.record_pm(b); }));
    server.Post("/whatif", with_body([&service](const nlohmann::json& b) { return service.whatif(b); }));
    server.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            reply(res, error(500, "internal", e.what()));
        }
    });
}

}  // namespace nextpm
