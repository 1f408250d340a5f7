#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nextpm/calendar.hpp"
#include "nextpm/costs.hpp"

namespace nextpm {

/// NextPM instance over the window [s+1, r+1]; column k is month s+1+k.
struct NextPmProblem {
    int s = 0;
    int r = 1;
    std::vector<double> setup;           // d_{s+1} .. d_{r+1}
    std::vector<int> ids;                // component labels
    std::vector<std::vector<double>> c;  // [j][k], k = 0..r-s
    std::vector<std::vector<double>> D;  // [j][k], k = 0..r-s-1

    static NextPmProblem from_tables(const CostTables& tables, const SetupCostCalendar& calendar);

    std::size_t size() const { return c.size(); }
    int width() const { return r - s + 1; }
    int month(int k) const { return s + 1 + k; }
    bool allowed(std::size_t j, int t) const;
};

struct PmPlan {
    int tau = 0;
    std::vector<int> set_P;       // component ids maintained at tau, empty iff tau = r + 1
    double objective = 0.0;       // kUSD per month
    std::vector<int> assignment;  // month per component index
    /// Components in set_P whose D at tau is within one standard error of 0.
    std::vector<int> benefit_marginal;

    bool deferred(int r) const { return tau == r + 1; }
};

/// NextOM instance: component `failed` (index) is renewed at s+1.
struct NextOmProblem {
    int s = 0;
    std::size_t failed = 0;
    double setup_first = 0.0;   // d_{s+1}
    double setup_second = 0.0;  // d_{s+2}
    std::vector<int> ids;
    std::vector<double> c_first;   // c_{s,s+1}^j
    std::vector<double> c_second;  // c_{s,s+2}^j
    std::vector<double> D_first;   // D_{s,s+1}^j

    /// `tables` must cover the window [s+1, s+2] (r = s + 1).
    static NextOmProblem from_tables(const CostTables& tables, const SetupCostCalendar& calendar,
                                     std::size_t failed);

    std::size_t size() const { return ids.size(); }
};

struct OmPlan {
    std::vector<int> set_O;  // ids, excludes the failed component
    double objective = 0.0;
    bool second_open = false;     // z_{s+2}
    std::vector<int> assignment;  // month per component index (s+1 or s+2)
};

/// Largest n accepted by the set-partition solver (Bell(10) = 115975 partitions).
inline constexpr std::size_t kMaxPartitionComponents = 10;

/// Canonical objective of an assignment; every solver scores plans with it.
double pm_objective(const NextPmProblem& problem, const std::vector<int>& assignment);
double om_objective(const NextOmProblem& problem, const std::vector<int>& assignment);

/// Exact NextPM by set-partition enumeration. Ties: smallest objective, then
/// earliest tau, then lexicographically smallest set_P.
/// Throws std::length_error when n exceeds kMaxPartitionComponents.
PmPlan solve_next_pm(const NextPmProblem& problem);

/// Exact NextPM by depth-first branch and bound (no size cap). The bound adds,
/// for each unassigned component, its cheapest feasible c/(t-s) with the
/// set-up cost treated as already paid.
PmPlan solve_next_pm_branch_and_bound(const NextPmProblem& problem);

/// Exact NextOM by case split on z_{s+2}.
OmPlan solve_next_om(const NextOmProblem& problem);

/// Exhaustive oracles. Throw std::length_error beyond (r-s+1)^n > 1e7 or n > 20.
PmPlan brute_force_next_pm(const NextPmProblem& problem);
OmPlan brute_force_next_om(const NextOmProblem& problem);

/// Constraint violations of a plan (empty when feasible and consistent).
std::vector<std::string> check_plan(const NextPmProblem& problem, const PmPlan& plan);
std::vector<std::string> check_plan(const NextOmProblem& problem, const OmPlan& plan);

/// Fills PmPlan::benefit_marginal from the table standard errors.
void flag_marginal_benefit(const CostTables& tables, PmPlan& plan);

}  // namespace nextpm
