#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nextpm/costs.hpp"
#include "nextpm/model.hpp"
#include "nextpm/solver.hpp"

namespace nextpm {

enum class EventKind { Corrective, Preventive };

/// One maintenance occasion. A corrective event renews the failed component
/// and any opportunistic ones; the set-up cost is paid once per month.
struct MaintenanceEvent {
    int time = 0;
    EventKind kind = EventKind::Preventive;
    std::optional<int> failed;       // CM component id
    double failure_time = 0.0;       // continuous failure time (CM only)
    std::vector<int> components;     // PM set, or OM set for a CM event
    double setup_cost = 0.0;
    double realized_cost = 0.0;      // setup + b_failed + sum of c over components
};

/// Recomputes an event's realized cost from the config.
double event_cost(const SystemConfig& config, const MaintenanceEvent& event);

/// Source of component failures for simulation and hand traces.
///
/// Each component has one pending (absolute) failure time drawn from its life
/// since last renewal; renew() replaces it with a fresh life.
class FailureTrace {
public:
    /// Lives drawn from each component's Weibull law on substreams of `seed`;
    /// the first pending failure is conditioned on survival to the state's age.
    static FailureTrace sampled(const SystemConfig& config, const SystemState& state, std::uint64_t seed);
    /// lives[j] lists successive TOTAL lives of component j, the first one
    /// measured from installed[j].
    static FailureTrace scripted(std::vector<std::vector<double>> lives, std::vector<int> installed);
    /// No component ever fails.
    static FailureTrace none(std::size_t n);

    std::size_t size() const { return pending_.size(); }
    /// Throws std::out_of_range when a scripted trace has run out of lives.
    double next_failure(std::size_t j) const;
    void renew(std::size_t j, double time);

private:
    enum class Mode { Sampled, Scripted, None };
    Mode mode_ = Mode::None;
    std::vector<ComponentSpec> specs_;
    std::vector<RandomStream> streams_;
    std::vector<std::vector<double>> lives_;
    std::vector<std::size_t> cursor_;
    std::vector<std::optional<double>> pending_;
};

struct PlanStep {
    CostTables tables;
    NextPmProblem problem;
    PmPlan plan;
};

/// Builds the window's cost tables and solves NextPM.
PlanStep step_plan(const SystemConfig& config, const SystemState& state, const McSettings& settings);

struct OmStep {
    CostTables tables;
    NextOmProblem problem;
    OmPlan plan;
};

/// NextOM at month u for failed component index i, using the ages in `state`.
OmStep step_om(const SystemConfig& config, const SystemState& state, int u, std::size_t failed,
               const McSettings& settings);

struct AdvanceResult {
    SystemState state;
    std::vector<MaintenanceEvent> events;
    std::optional<OmPlan> om;
    bool stopped = false;  // tau >= T: the loop ends
};

/// One pass of the rescheduling loop after NextPM produced `plan`.
///
/// The earliest pending failure at or before tau preempts the plan: u is its
/// floor (raised to s if the failure was left over from a previous month),
/// NextOM runs at u, and a CM+OM event happens at u+1. Otherwise the PM
/// happens at tau. The window keeps its length, clipped at T.
AdvanceResult advance(const SystemConfig& config, const SystemState& state, const PmPlan& plan,
                      FailureTrace& trace, const McSettings& settings);

enum class Strategy { NextPm, CmOnly };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct LifecycleResult {
    Strategy strategy = Strategy::NextPm;
    std::uint64_t seed = 0;
    std::vector<MaintenanceEvent> events;
    double total_cost = 0.0;
    double monthly_rate = 0.0;
    /// Objective of the first NextPM solve (NextPM strategy only).
    std::optional<double> planning_objective;
    int iterations = 0;
};

/// Simulates [0, T] under a strategy. Failures are paired across strategies
/// for the same seed. Cost tables use `table_settings.replications` and a seed
/// derived from (table_settings.seed, seed). Failures left after the loop
/// stops are repaired correctively until T.
LifecycleResult run_lifecycle(const SystemConfig& config, Strategy strategy, std::uint64_t seed,
                              const McSettings& table_settings);

struct StudyOptions {
    std::size_t replications = 500;
    std::uint64_t seed = 1;
    std::size_t table_replications = 4000;
    std::vector<Strategy> strategies{Strategy::NextPm, Strategy::CmOnly};
};

struct StrategySummary {
    Strategy strategy = Strategy::NextPm;
    double mean_rate = 0.0;
    double stderr_rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    /// Saving of the realized rate against the simulated CM-only rate, percent.
    std::optional<double> saving_pct;
    std::optional<double> planning_objective;  // mean over replications
    std::vector<double> rates;                 // per replication
};

struct StudyReport {
    StudyOptions options;
    std::vector<StrategySummary> strategies;
    double cm_only_approx = 0.0;  // renewal approximation
    /// Saving of the mean planning objective against the approximation, percent.
    std::optional<double> planning_saving_pct;

    const StrategySummary* find(Strategy s) const;
};

/// Paired-seed batch of lifecycles (replication k uses the same seed for every strategy).
StudyReport run_study(const SystemConfig& config, const StudyOptions& options);

void write_study_csv(const StudyReport& report, std::ostream& out);
std::string study_json(const StudyReport& report);
std::string event_log_json(const LifecycleResult& result);

/// Applies the state updates of a recorded event (used for replay).
SystemState apply_event(const SystemState& state, const MaintenanceEvent& event, const std::vector<int>& ids);

}  // namespace nextpm
