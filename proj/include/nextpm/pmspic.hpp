#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nextpm/costs.hpp"
#include "nextpm/lifetime.hpp"

namespace nextpm {

/// Which time feeds the first argument of g(u, t) = b + d - (u/t)^lambda (c + d).
enum class IntervalConvention {
    AbsoluteRenewal,  // g(U_{0,i}, t): component age taken as the absolute failure time
    InterFailure,     // g(L_i, t): age since the previous renewal
};

/// c_t^j for t = 1..max_t with constant set-up cost d, common random numbers
/// across t. Index k holds interval length k + 1.
std::vector<Estimate> pmspic_interval_costs(const ComponentSpec& spec, double setup, double lambda, int max_t,
                                            const McSettings& settings,
                                            IntervalConvention convention = IntervalConvention::AbsoluteRenewal);

Estimate pmspic_interval_cost(const ComponentSpec& spec, double setup, double lambda, int t,
                              const McSettings& settings,
                              IntervalConvention convention = IntervalConvention::AbsoluteRenewal);

/// Full-horizon interval-cost model with constant set-up cost, starting at 0.
struct PmspicProblem {
    int horizon = 0;
    double setup = 0.0;
    std::vector<int> ids;
    std::vector<std::vector<double>> interval_cost;  // [j][k] = c^j_{k+1}, k = 0..T

    std::size_t size() const { return ids.size(); }
    double cost(std::size_t j, int length) const {
        return interval_cost[j][static_cast<std::size_t>(length - 1)];
    }
};

PmspicProblem make_pmspic_problem(const std::vector<ComponentSpec>& components, double setup, double lambda,
                                  int horizon, const McSettings& settings);

struct PmspicPlan {
    std::vector<char> z;                    // z[t-1], t = 1..T
    std::vector<std::vector<int>> renewals; // per component, PM months in (0, T], increasing
    double objective = 0.0;                 // F, total cost
    bool optimal = false;
    double lower_bound = 0.0;
    long nodes = 0;
};

/// F = d * sum z_t + sum_j sum over consecutive renewal pairs (u, t) of c^j_{t-u},
/// with the chain closed by 0 and T+1.
double pmspic_objective(const PmspicProblem& problem, const std::vector<char>& z,
                        const std::vector<std::vector<int>>& renewals);

/// Largest horizon accepted by the exact solver.
inline constexpr int kPmspicExactCap = 36;

/// Exact branch and bound over z with per-component DAG shortest paths.
/// Throws std::length_error when T > kPmspicExactCap.
PmspicPlan solve_pmspic(const PmspicProblem& problem);

/// Same search under a wall-clock budget. Returns the incumbent with a valid
/// lower bound; `optimal` is set only when the search finished.
PmspicPlan solve_pmspic_best_effort(const PmspicProblem& problem, double seconds);

struct FirstPm {
    std::optional<int> month;     // empty: no PM planned
    std::vector<int> components;  // ids renewing at month
};

FirstPm first_pm_extract(const PmspicProblem& problem, const PmspicPlan& plan);

/// (d + sum of interval costs of the first renewal block) / first month.
std::optional<double> pmspic_first_block_rate(const PmspicProblem& problem, const FirstPm& first);

/// One row of the NextPM vs PMSPIC comparison.
struct ComparisonRow {
    std::string strategy;
    double setup = 0.0;
    std::vector<std::optional<int>> first_month;  // per component, empty if not in the first block
    double monthly_cost = 0.0;
    double solve_seconds = 0.0;
    bool optimal = true;
    double lower_bound = 0.0;
};

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);

}  // namespace nextpm
