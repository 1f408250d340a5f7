#include <chrono>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "nextpm/config.hpp"
#include "nextpm/costs.hpp"
#include "nextpm/pmspic.hpp"
#include "nextpm/scheduler.hpp"
#include "nextpm/service.hpp"
#include "nextpm/solver.hpp"

using namespace nextpm;

namespace {

struct Common {
    std::string config;
    std::string state;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::string out;
    bool json = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_state = true) {
    cmd->add_option("--config", c.config, "config JSON")->required()->check(CLI::ExistingFile);
    if (with_state) cmd->add_option("--state", c.state, "state file (default: fresh system)");
    cmd->add_option("--seed", c.seed, "Monte Carlo seed (overrides config)");
    cmd->add_option("--reps", c.reps, "replications (overrides config)");
    cmd->add_option("--out", c.out, "output file");
}

SystemConfig load(const Common& c) {
    auto cfg = load_config(c.config);
    for (const auto& w : config_warnings(cfg)) std::cerr << "warning: " << w << '\n';
    if (c.seed) cfg.mc.seed = *c.seed;
    if (c.reps) cfg.mc.replications = *c.reps;
    return cfg;
}

SystemState load_system_state(const Common& c, const SystemConfig& cfg) {
    if (c.state.empty()) return SystemState::fresh(cfg);
    return load_state(c.state, cfg).state;
}

// Writes to --out when given, stdout otherwise.
void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    f << text;
}

std::string ids_text(const std::vector<int>& ids) {
    std::string s = "{";
    for (std::size_t k = 0; k < ids.size(); ++k) s += (k ? "," : "") + std::to_string(ids[k]);
    return s + "}";
}

int cmd_plan(const Common& c) {
    const auto cfg = load(c);
    const auto state = load_system_state(c, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto step = step_plan(cfg, state, cfg.mc);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& p = step.plan;
    std::ostringstream os;
    if (c.json) {
        nlohmann::json j{{"s", state.s},        {"r", state.r},           {"tau", p.tau},
                         {"set_P", p.set_P},    {"objective", p.objective}, {"assignment", p.assignment},
                         {"benefit_marginal", p.benefit_marginal},
                         {"max_stderr", step.tables.max_stderr()},
                         {"seed", cfg.mc.seed}, {"replications", cfg.mc.replications}};
        os << j.dump(2) << '\n';
    } else {
        os << "window      [" << state.s + 1 << ", " << state.r + 1 << "]\n";
        os << "tau         " << p.tau << (p.deferred(state.r) ? " (no PM this window)" : "") << '\n';
        os << "set_P       " << ids_text(p.set_P) << '\n';
        os << "objective   " << std::fixed << std::setprecision(4) << p.objective << " kUSD/month\n";
        os << "assignment ";
        for (std::size_t j = 0; j < p.assignment.size(); ++j)
            os << ' ' << cfg.components[j].id << "@" << p.assignment[j];
        os << '\n';
        if (!p.benefit_marginal.empty()) os << "marginal D  " << ids_text(p.benefit_marginal) << '\n';
        os << "max stderr  " << std::setprecision(4) << step.tables.max_stderr() << '\n';
        os << "seed " << cfg.mc.seed << ", " << cfg.mc.replications << " replications, " << std::setprecision(2)
           << secs << " s\n";
    }
    emit(c, os.str());
    return 0;
}

int cmd_om(const Common& c, int component, double time) {
    const auto cfg = load(c);
    const auto state = load_system_state(c, cfg);
    std::size_t idx = cfg.size();
    for (std::size_t j = 0; j < cfg.size(); ++j)
        if (cfg.components[j].id == component) idx = j;
    if (idx == cfg.size()) throw std::invalid_argument("unknown component " + std::to_string(component));
    if (!(time > state.s)) throw std::invalid_argument("failure time must be after s = " + std::to_string(state.s));
    const int u = static_cast<int>(std::floor(time));
    const auto step = step_om(cfg, state, u, idx, cfg.mc);
    std::ostringstream os;
    if (c.json) {
        os << nlohmann::json{{"u", u},
                             {"cm_month", u + 1},
                             {"failed", component},
                             {"set_O", step.plan.set_O},
                             {"objective", step.plan.objective},
                             {"second_open", step.plan.second_open},
                             {"seed", cfg.mc.seed},
                             {"replications", cfg.mc.replications}}
                  .dump(2)
           << '\n';
    } else {
        os << "CM of " << component << " at month " << u + 1 << " (u = " << u << ")\n";
        os << "set_O       " << ids_text(step.plan.set_O) << '\n';
        os << "objective   " << std::fixed << std::setprecision(4) << step.plan.objective << '\n';
        os << "z_{u+2}     " << (step.plan.second_open ? 1 : 0) << '\n';
    }
    emit(c, os.str());
    return 0;
}

int cmd_simulate(const Common& c, const std::string& strategy, std::size_t table_reps) {
    const auto cfg = load(c);
    StudyOptions opt;
    opt.replications = c.reps.value_or(500);
    opt.seed = cfg.mc.seed;
    opt.table_replications = table_reps;
    if (strategy == "both") opt.strategies = {Strategy::NextPm, Strategy::CmOnly};
    else opt.strategies = {parse_strategy(strategy)};
    const auto report = run_study(cfg, opt);
    std::ostringstream os;
    if (c.json) os << study_json(report) << '\n';
    else write_study_csv(report, os);
    emit(c, os.str());
    return 0;
}

int cmd_tables(const Common& c) {
    const auto cfg = load(c);
    const auto state = load_system_state(c, cfg);
    const auto tables = build_cost_tables(cfg, state, cfg.mc);
    std::ostringstream os;
    write_csv(tables, os);
    emit(c, os.str());
    return 0;
}

int cmd_pmspic(const Common& c, int horizon, double time_limit) {
    const auto cfg = load(c);
    const auto& vals = cfg.calendar.values();
    if (std::any_of(vals.begin(), vals.end(), [&](double v) { return v != vals.front(); }))
        throw std::invalid_argument("pmspic-compare needs a constant set-up cost calendar");
    const double d = vals.front();
    const int T = horizon > 0 ? horizon : cfg.horizon;

    std::vector<ComparisonRow> rows;
    {
        SystemConfig nc = cfg;
        const auto state = SystemState::fresh(nc);
        const auto tables = build_cost_tables(nc, state, nc.mc);
        const auto problem = NextPmProblem::from_tables(tables, nc.calendar);
        const auto t0 = std::chrono::steady_clock::now();
        const auto plan = solve_next_pm(problem);
        ComparisonRow row;
        row.strategy = "nextpm";
        row.setup = d;
        row.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.monthly_cost = plan.objective;
        row.lower_bound = plan.objective;
        for (const auto& comp : cfg.components) {
            const bool in = std::find(plan.set_P.begin(), plan.set_P.end(), comp.id) != plan.set_P.end();
            row.first_month.push_back(in ? std::optional<int>(plan.tau) : std::nullopt);
        }
        rows.push_back(row);
    }
    {
        const auto problem = make_pmspic_problem(cfg.components, d, cfg.lambda, T, cfg.mc);
        const auto t0 = std::chrono::steady_clock::now();
        const auto plan = T <= kPmspicExactCap ? solve_pmspic(problem) : solve_pmspic_best_effort(problem, time_limit);
        ComparisonRow row;
        row.strategy = T <= kPmspicExactCap ? "pmspic" : "pmspic-best-effort";
        row.setup = d;
        row.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.optimal = plan.optimal;
        row.lower_bound = plan.lower_bound;
        const auto first = first_pm_extract(problem, plan);
        row.monthly_cost = pmspic_first_block_rate(problem, first).value_or(std::nan(""));
        for (const auto& comp : cfg.components) {
            const bool in = std::find(first.components.begin(), first.components.end(), comp.id) != first.components.end();
            row.first_month.push_back(in ? first.month : std::nullopt);
        }
        rows.push_back(row);
        std::cerr << "pmspic T=" << T << " total cost " << plan.objective << ", lower bound " << plan.lower_bound
                  << (plan.optimal ? " (optimal)" : " (time limit reached)") << '\n';
    }
    std::ostringstream os;
    write_comparison_csv(rows, os);
    emit(c, os.str());
    return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const Common& c, const std::string& host, int port) {
    const auto cfg = load(c);
    std::optional<std::filesystem::path> path;
    if (!c.state.empty()) path = c.state;
    else path = default_state_path();
    PlanningService service(cfg, path);
    if (service.stale()) std::cerr << "warning: state file was written under a different config; mutations are refused\n";
    httplib::Server server;
    register_routes(server, service);
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "listening on " << host << ":" << port;
    if (path) std::cerr << ", state " << path->string();
    std::cerr << '\n';
    if (!server.listen(host, port)) throw std::runtime_error("cannot listen on port " + std::to_string(port));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NextPM maintenance planner"};
    app.require_subcommand(1);

    Common plan_c, om_c, sim_c, tab_c, cmp_c, srv_c;

    auto* plan = app.add_subcommand("plan", "solve NextPM for the current window");
    add_common(plan, plan_c);
    plan->add_flag("--json", plan_c.json, "JSON output");

    int om_component = 0;
    double om_time = 0.0;
    auto* om = app.add_subcommand("om", "solve NextOM after a failure");
    add_common(om, om_c);
    om->add_option("--component", om_component, "failed component id")->required();
    om->add_option("--time", om_time, "failure time in months (continuous)")->required();
    om->add_flag("--json", om_c.json, "JSON output");

    std::string strategy = "both";
    std::size_t table_reps = 4000;
    auto* sim = app.add_subcommand("simulate", "paired-seed lifecycle study");
    add_common(sim, sim_c, false);
    sim->add_option("--strategy", strategy, "nextpm, cm-only or both")
        ->check(CLI::IsMember({"nextpm", "cm-only", "both"}));
    sim->add_option("--table-reps", table_reps, "replications per cost-table build inside the loop");
    sim->add_flag("--json", sim_c.json, "JSON output");

    auto* tab = app.add_subcommand("tables", "export cost tables as CSV");
    add_common(tab, tab_c);

    int cmp_horizon = 0;
    double cmp_limit = 10.0;
    auto* cmp = app.add_subcommand("pmspic-compare", "first-PM comparison of NextPM and PMSPIC");
    add_common(cmp, cmp_c, false);
    cmp->add_option("--horizon", cmp_horizon, "PMSPIC horizon (default: config horizon)");
    cmp->add_option("--time-limit", cmp_limit, "seconds for best-effort PMSPIC");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* srv = app.add_subcommand("serve", "HTTP API");
    add_common(srv, srv_c);
    srv->add_option("--port", port, "port");
    srv->add_option("--host", host, "bind address");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan) return cmd_plan(plan_c);
        if (*om) return cmd_om(om_c, om_component, om_time);
        if (*sim) return cmd_simulate(sim_c, strategy, table_reps);
        if (*tab) return cmd_tables(tab_c);
        if (*cmp) return cmd_pmspic(cmp_c, cmp_horizon, cmp_limit);
        if (*srv) return cmd_serve(srv_c, host, port);
    } catch (const ConfigError& e) {
        std::cerr << "error: invalid config\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
