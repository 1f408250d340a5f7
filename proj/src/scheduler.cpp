#include "nextpm/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "nextpm/random.hpp"

namespace nextpm {

namespace {

constexpr std::uint64_t kTagTrace = 0x7ACE;
constexpr double kNever = std::numeric_limits<double>::infinity();

std::size_t index_of(const SystemConfig& config, int id) {
    for (std::size_t j = 0; j < config.components.size(); ++j)
        if (config.components[j].id == id) return j;
    throw std::out_of_range("unknown component id " + std::to_string(id));
}

std::vector<int> component_ids(const SystemConfig& config) {
    std::vector<int> ids;
    for (const auto& c : config.components) ids.push_back(c.id);
    return ids;
}

// Earliest pending failure (lowest index on ties).
std::pair<std::size_t, double> earliest_failure(const FailureTrace& trace) {
    std::size_t who = 0;
    double when = kNever;
    for (std::size_t j = 0; j < trace.size(); ++j) {
        const double f = trace.next_failure(j);
        if (f < when) {
            when = f;
            who = j;
        }
    }
    return {who, when};
}

// Repairs failures strictly before T correctively, no earlier than `first_month`.
void run_corrective(const SystemConfig& config, FailureTrace& trace, int first_month,
                    std::vector<MaintenanceEvent>& events) {
    if (config.components.empty()) return;
    const double horizon = config.horizon;
    while (true) {
        auto [j, f] = earliest_failure(trace);
        if (!(f < horizon)) break;
        const int month = std::max(static_cast<int>(std::floor(f)) + 1, first_month);
        MaintenanceEvent ev;
        ev.time = month;
        ev.kind = EventKind::Corrective;
        ev.failed = config.components[j].id;
        ev.failure_time = f;
        const bool shared = !events.empty() && events.back().time == month;
        ev.setup_cost = shared ? 0.0 : config.calendar.month(month);
        ev.realized_cost = event_cost(config, ev);
        events.push_back(std::move(ev));
        trace.renew(j, month);
        first_month = month;
    }
}

McSettings lifecycle_settings(const McSettings& base, std::uint64_t seed) {
    McSettings ts = base;
    ts.seed = mix_keys({base.seed, seed});
    return ts;
}

double sum_costs(const std::vector<MaintenanceEvent>& events) {
    double total = 0.0;
    for (const auto& e : events) total += e.realized_cost;
    return total;
}

const char* kind_name(EventKind k) { return k == EventKind::Corrective ? "CM" : "PM"; }

}  // namespace

double event_cost(const SystemConfig& config, const MaintenanceEvent& event) {
    double cost = event.setup_cost;
    if (event.failed) cost += config.components[index_of(config, *event.failed)].cm_cost;
    for (int id : event.components) cost += config.components[index_of(config, id)].pm_cost;
    return cost;
}

FailureTrace FailureTrace::sampled(const SystemConfig& config, const SystemState& state, std::uint64_t seed) {
    FailureTrace trace;
    trace.mode_ = Mode::Sampled;
    trace.specs_ = config.components;
    for (std::size_t j = 0; j < config.components.size(); ++j) {
        trace.streams_.push_back(
            RandomStream::substream({seed, kTagTrace, static_cast<std::uint64_t>(config.components[j].id)}));
        const int tj = state.last_maintenance.at(j);
        const double life = sample_residual_life(trace.specs_[j], state.s - tj, trace.streams_[j]);
        trace.pending_.push_back(tj + life);
    }
    return trace;
}

FailureTrace FailureTrace::scripted(std::vector<std::vector<double>> lives, std::vector<int> installed) {
    if (lives.size() != installed.size()) throw std::invalid_argument("scripted trace: lives/installed size mismatch");
    FailureTrace trace;
    trace.mode_ = Mode::Scripted;
    trace.lives_ = std::move(lives);
    trace.cursor_.assign(trace.lives_.size(), 0);
    for (std::size_t j = 0; j < trace.lives_.size(); ++j) {
        if (trace.lives_[j].empty()) trace.pending_.push_back(std::nullopt);
        else trace.pending_.push_back(installed[j] + trace.lives_[j][0]);
        trace.cursor_[j] = 1;
    }
    return trace;
}

FailureTrace FailureTrace::none(std::size_t n) {
    FailureTrace trace;
    trace.mode_ = Mode::None;
    trace.pending_.assign(n, kNever);
    return trace;
}

double FailureTrace::next_failure(std::size_t j) const {
    const auto& p = pending_.at(j);
    if (!p) throw std::out_of_range("failure trace shorter than needed for component index " + std::to_string(j));
    return *p;
}

void FailureTrace::renew(std::size_t j, double time) {
    switch (mode_) {
    case Mode::None:
        break;
    case Mode::Sampled:
        pending_[j] = time + sample_life(specs_[j], streams_[j]);
        break;
    case Mode::Scripted: {
        auto& cur = cursor_[j];
        if (cur < lives_[j].size()) pending_[j] = time + lives_[j][cur++];
        else pending_[j] = std::nullopt;
        break;
    }
    }
}

PlanStep step_plan(const SystemConfig& config, const SystemState& state, const McSettings& settings) {
    if (state.r < state.s + 1) throw std::invalid_argument("step_plan: empty planning window");
    PlanStep step;
    step.tables = build_cost_tables(config, state, settings);
    step.problem = NextPmProblem::from_tables(step.tables, config.calendar);
    step.plan = step.problem.size() <= kMaxPartitionComponents ? solve_next_pm(step.problem)
                                                               : solve_next_pm_branch_and_bound(step.problem);
    flag_marginal_benefit(step.tables, step.plan);
    return step;
}

OmStep step_om(const SystemConfig& config, const SystemState& state, int u, std::size_t failed,
               const McSettings& settings) {
    if (u < state.s) throw std::invalid_argument("step_om: u must be >= s");
    if (u + 1 > config.horizon) throw std::invalid_argument("step_om: u + 1 must be <= T");
    SystemState at = state;
    at.s = u;
    at.r = u + 1;
    OmStep step;
    step.tables = build_cost_tables(config, at, settings);
    step.problem = NextOmProblem::from_tables(step.tables, config.calendar, failed);
    step.plan = solve_next_om(step.problem);
    return step;
}

AdvanceResult advance(const SystemConfig& config, const SystemState& state, const PmPlan& plan,
                      FailureTrace& trace, const McSettings& settings) {
    AdvanceResult out;
    out.state = state;
    const int T = config.horizon;
    if (plan.tau >= T) {
        out.stopped = true;
        return out;
    }
    const int span = state.r - state.s;
    const auto ids = component_ids(config);

    auto [failed, when] = earliest_failure(trace);
    if (when <= plan.tau) {
        const int u = std::max(static_cast<int>(std::floor(when)), state.s);
        OmStep om = step_om(config, state, u, failed, settings);
        MaintenanceEvent ev;
        ev.time = u + 1;
        ev.kind = EventKind::Corrective;
        ev.failed = ids[failed];
        ev.failure_time = when;
        ev.components = om.plan.set_O;
        ev.setup_cost = config.calendar.month(ev.time);
        ev.realized_cost = event_cost(config, ev);

        out.state.r = std::min(u + 1 + span, T);
        out.state.s = u + 1;
        out.state.last_maintenance[failed] = u + 1;
        trace.renew(failed, u + 1);
        for (int id : om.plan.set_O) {
            const std::size_t j = index_of(config, id);
            out.state.last_maintenance[j] = u + 1;
            trace.renew(j, u + 1);
        }
        out.om = std::move(om.plan);
        out.events.push_back(std::move(ev));
        return out;
    }

    if (!plan.set_P.empty()) {
        MaintenanceEvent ev;
        ev.time = plan.tau;
        ev.kind = EventKind::Preventive;
        ev.components = plan.set_P;
        ev.setup_cost = config.calendar.month(ev.time);
        ev.realized_cost = event_cost(config, ev);
        for (int id : plan.set_P) {
            const std::size_t j = index_of(config, id);
            out.state.last_maintenance[j] = plan.tau;
            trace.renew(j, plan.tau);
        }
        out.events.push_back(std::move(ev));
    }
    out.state.r = std::min(plan.tau + span, T);
    out.state.s = plan.tau;
    return out;
}

std::string to_string(Strategy s) { return s == Strategy::NextPm ? "nextpm" : "cm-only"; }

Strategy parse_strategy(const std::string& name) {
    if (name == "nextpm" || name == "next-pm") return Strategy::NextPm;
    if (name == "cm-only" || name == "cmonly" || name == "cm") return Strategy::CmOnly;
    throw std::invalid_argument("unknown strategy '" + name + "' (expected nextpm or cm-only)");
}

LifecycleResult run_lifecycle(const SystemConfig& config, Strategy strategy, std::uint64_t seed,
                              const McSettings& table_settings) {
    LifecycleResult result;
    result.strategy = strategy;
    result.seed = seed;
    if (config.horizon <= 0) return result;

    SystemState state = SystemState::fresh(config);
    FailureTrace trace = FailureTrace::sampled(config, state, seed);

    if (strategy == Strategy::CmOnly) {
        run_corrective(config, trace, 1, result.events);
    } else {
        const McSettings ts = lifecycle_settings(table_settings, seed);
        while (state.s < config.horizon && state.r > state.s) {
            PlanStep step = step_plan(config, state, ts);
            if (!result.planning_objective) result.planning_objective = step.plan.objective;
            AdvanceResult adv = advance(config, state, step.plan, trace, ts);
            ++result.iterations;
            for (auto& e : adv.events) result.events.push_back(std::move(e));
            if (adv.stopped) break;
            if (adv.state.s <= state.s) throw std::logic_error("rescheduling loop did not advance");
            state = std::move(adv.state);
        }
        run_corrective(config, trace, state.s + 1, result.events);
    }
    result.total_cost = sum_costs(result.events);
    result.monthly_rate = result.total_cost / config.horizon;
    return result;
}

const StrategySummary* StudyReport::find(Strategy s) const {
    for (const auto& st : strategies)
        if (st.strategy == s) return &st;
    return nullptr;
}

StudyReport run_study(const SystemConfig& config, const StudyOptions& options) {
    if (options.replications < 1) throw std::invalid_argument("run_study: replications must be >= 1");
    StudyReport report;
    report.options = options;
    report.cm_only_approx = cm_only_rate(config);
    McSettings table_settings = config.mc;
    table_settings.replications = options.table_replications;

    const long reps = static_cast<long>(options.replications);
    for (Strategy strategy : options.strategies) {
        StrategySummary sum;
        sum.strategy = strategy;
        sum.rates.assign(options.replications, 0.0);
        std::vector<double> objectives(options.replications, std::nan(""));
#pragma omp parallel for schedule(dynamic)
        for (long k = 0; k < reps; ++k) {
            const std::uint64_t seed = mix_keys({options.seed, static_cast<std::uint64_t>(k)});
            const LifecycleResult res = run_lifecycle(config, strategy, seed, table_settings);
            sum.rates[static_cast<std::size_t>(k)] = res.monthly_rate;
            if (res.planning_objective) objectives[static_cast<std::size_t>(k)] = *res.planning_objective;
        }
        const double n = static_cast<double>(options.replications);
        double mean = 0.0;
        for (double r : sum.rates) mean += r;
        mean /= n;
        double var = 0.0;
        for (double r : sum.rates) var += (r - mean) * (r - mean);
        var = options.replications > 1 ? var / (n - 1.0) : 0.0;
        sum.mean_rate = mean;
        sum.stderr_rate = std::sqrt(var / n);
        sum.ci_low = mean - 1.96 * sum.stderr_rate;
        sum.ci_high = mean + 1.96 * sum.stderr_rate;
        if (strategy == Strategy::NextPm) {
            double acc = 0.0;
            for (double o : objectives) acc += o;
            sum.planning_objective = acc / n;
        }
        report.strategies.push_back(std::move(sum));
    }

    if (const auto* cm = report.find(Strategy::CmOnly); cm && cm->mean_rate > 0.0) {
        for (auto& st : report.strategies)
            st.saving_pct = 100.0 * (cm->mean_rate - st.mean_rate) / cm->mean_rate;
    }
    if (const auto* pm = report.find(Strategy::NextPm); pm && pm->planning_objective && report.cm_only_approx > 0.0)
        report.planning_saving_pct = 100.0 * (report.cm_only_approx - *pm->planning_objective) / report.cm_only_approx;
    return report;
}

void write_study_csv(const StudyReport& report, std::ostream& out) {
    out << "strategy,mean_rate,stderr,saving_pct,ci95_low,ci95_high,planning_objective\n";
    out.precision(8);
    for (const auto& st : report.strategies) {
        out << to_string(st.strategy) << ',' << st.mean_rate << ',' << st.stderr_rate << ',';
        if (st.saving_pct) out << *st.saving_pct;
        out << ',' << st.ci_low << ',' << st.ci_high << ',';
        if (st.planning_objective) out << *st.planning_objective;
        out << '\n';
    }
    out << "cm-only-approx," << report.cm_only_approx << ",0,";
    if (report.planning_saving_pct) out << *report.planning_saving_pct;
    out << ",,,\n";
}

std::string study_json(const StudyReport& report) {
    nlohmann::json j;
    j["replications"] = report.options.replications;
    j["seed"] = report.options.seed;
    j["table_replications"] = report.options.table_replications;
    j["cm_only_approx"] = report.cm_only_approx;
    if (report.planning_saving_pct) j["planning_saving_pct"] = *report.planning_saving_pct;
    for (const auto& st : report.strategies) {
        nlohmann::json row{{"strategy", to_string(st.strategy)},
                           {"mean_rate", st.mean_rate},
                           {"stderr", st.stderr_rate},
                           {"ci95", {st.ci_low, st.ci_high}}};
        if (st.saving_pct) row["saving_pct"] = *st.saving_pct;
        if (st.planning_objective) row["planning_objective"] = *st.planning_objective;
        j["strategies"].push_back(row);
    }
    return j.dump(2);
}

std::string event_log_json(const LifecycleResult& result) {
    nlohmann::json j;
    j["strategy"] = to_string(result.strategy);
    j["seed"] = result.seed;
    j["total_cost"] = result.total_cost;
    j["monthly_rate"] = result.monthly_rate;
    if (result.planning_objective) j["planning_objective"] = *result.planning_objective;
    j["events"] = nlohmann::json::array();
    for (const auto& e : result.events) {
        nlohmann::json ev{{"time", e.time},
                          {"kind", kind_name(e.kind)},
                          {"components", e.components},
                          {"setup_cost", e.setup_cost},
                          {"realized_cost", e.realized_cost}};
        if (e.failed) {
            ev["failed"] = *e.failed;
            ev["failure_time"] = e.failure_time;
        }
        j["events"].push_back(ev);
    }
    return j.dump(2);
}

SystemState apply_event(const SystemState& state, const MaintenanceEvent& event, const std::vector<int>& ids) {
    if (event.time <= state.s) throw std::invalid_argument("event precedes the current month");
    SystemState out = state;
    const int span = state.r - state.s;
    out.r = std::min(event.time + span, state.horizon);
    out.s = event.time;
    auto renew = [&](int id) {
        auto it = std::find(ids.begin(), ids.end(), id);
        if (it == ids.end()) throw std::out_of_range("unknown component id " + std::to_string(id));
        out.last_maintenance[static_cast<std::size_t>(it - ids.begin())] = event.time;
    };
    if (event.failed) renew(*event.failed);
    for (int id : event.components) renew(id);
    return out;
}

}  // namespace nextpm
