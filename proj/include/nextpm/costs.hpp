#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "nextpm/calendar.hpp"
#include "nextpm/lifetime.hpp"
#include "nextpm/model.hpp"

namespace nextpm {

/// Monte Carlo point estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Replications are processed in fixed blocks; block b always covers the
/// same replication indices, so serial and parallel builds reduce identically.
inline constexpr std::size_t kReplicationBlock = 1024;

/// Expected-cost tables for one planning window [s+1, r+1].
///
/// c is stored for t = s+1..r+1, D for t = s+1..r (the deferral column r+1 has
/// no benefit constraint).
struct CostTables {
    struct Component {
        int id = 0;
        std::vector<double> c, c_stderr;  // size r - s + 1
        std::vector<double> D, D_stderr;  // size r - s
    };

    int s = 0;
    int r = 0;
    int horizon = 0;
    double lambda = 3.0;
    McSettings settings;
    std::vector<Component> components;

    int width() const { return r - s + 1; }
    std::size_t size() const { return components.size(); }

    double c(std::size_t j, int t) const { return components[j].c[static_cast<std::size_t>(t - s - 1)]; }
    double c_stderr(std::size_t j, int t) const { return components[j].c_stderr[static_cast<std::size_t>(t - s - 1)]; }
    double D(std::size_t j, int t) const { return components[j].D[static_cast<std::size_t>(t - s - 1)]; }
    double D_stderr(std::size_t j, int t) const { return components[j].D_stderr[static_cast<std::size_t>(t - s - 1)]; }

    /// Largest standard error over all c and D cells.
    double max_stderr() const;
};

/// G_j(s,u,t) = b_j + d_{s+u} - (u/t)^lambda (c_j + d_{s+t}), 0 <= u <= t.
/// Throws std::domain_error outside that range.
double failure_cost_G(const ComponentSpec& spec, const SetupCostCalendar& calendar, double lambda,
                      double s, double u, double t);

/// c_{s,t}^j: PM cost plus the expected G-cost of failures of the delayed
/// renewal process (renewal clock at t_last, observed alive at s) up to t.
Estimate expected_pm_cost(const ComponentSpec& spec, const SetupCostCalendar& calendar, double lambda,
                          int s, int last_maintained, int t, const McSettings& settings);

/// D_{s,t}^j: run-to-failure cost from s minus (c_{s,t}^j + run-to-failure cost
/// restarted at t), both over [s, horizon].
Estimate pm_benefit_D(const ComponentSpec& spec, const SetupCostCalendar& calendar, double lambda,
                      int s, int last_maintained, int t, int horizon, const McSettings& settings);

/// Batches c and D over the window of `state` for every component. OpenMP
/// parallel over (component, replication block); bit-identical to the serial build.
CostTables build_cost_tables(const SystemConfig& config, const SystemState& state, const McSettings& settings);
CostTables build_cost_tables_serial(const SystemConfig& config, const SystemState& state,
                                    const McSettings& settings);

/// H(t): expected number of renewals in [0, t] of a zero-delay renewal process.
Estimate renewal_function(const ComponentSpec& spec, double t, const McSettings& settings);

/// Large-T approximation of the CM-only monthly cost: sum_j (mean(d) + b_j) / mu_j.
double cm_only_rate(const SystemConfig& config);

/// Finite-horizon CM-only monthly cost, sum_j E[sum_{V_i <= T} (d_{V_i} + b_j)] / T.
Estimate cm_only_rate_exact(const SystemConfig& config, const McSettings& settings);

/// CSV with header j,t,c,c_stderr,D,D_stderr. D fields are empty at t = r+1.
void write_csv(const CostTables& tables, std::ostream& out);

}  // namespace nextpm
