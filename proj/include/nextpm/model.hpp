#pragma once

#include <cstdint>
#include <vector>

#include "nextpm/calendar.hpp"
#include "nextpm/lifetime.hpp"

namespace nextpm {

struct McSettings {
    std::size_t replications = 100000;
    std::uint64_t seed = 1;
    /// Advisory only; reported when a cell's standard error exceeds it (0 = off).
    double max_stderr = 0.0;
};

/// Everything needed to plan: horizon T, lambda, window length r - s, the
/// components, the set-up calendar and Monte Carlo settings.
struct SystemConfig {
    int horizon = 240;
    double lambda = 3.0;
    int window = 80;
    std::vector<ComponentSpec> components;
    SetupCostCalendar calendar;
    McSettings mc;

    std::size_t size() const { return components.size(); }
};

/// Observation point of the rescheduling loop. Months are integers.
struct SystemState {
    int s = 0;                          // current month
    int r = 0;                          // planning window end
    std::vector<int> last_maintenance;  // t_j <= s
    int horizon = 0;                    // T
    int window = 0;                     // constant r - s carried between iterations

    static SystemState fresh(const SystemConfig& config);

    int age(std::size_t j) const { return s - last_maintenance[j]; }
};

/// Throws std::invalid_argument unless 0 <= t_j <= s <= r <= T.
void validate(const SystemState& state);

}  // namespace nextpm
