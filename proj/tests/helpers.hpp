#pragma once

#include <cmath>
#include <vector>

#include "nextpm/lifetime.hpp"
#include "nextpm/model.hpp"

namespace testing_support {

inline std::vector<nextpm::ComponentSpec> table1() {
    return {{1, "rotor", 100, 3, 162, 36.75},
            {2, "main bearing", 125, 2, 110, 23.75},
            {3, "gearbox", 80, 3, 202, 46.75},
            {4, "generator", 110, 2, 150, 33.75}};
}

inline nextpm::SystemConfig table1_config(nextpm::SetupCostCalendar calendar, std::size_t reps = 100000,
                                          std::uint64_t seed = 7) {
    nextpm::SystemConfig cfg;
    cfg.components = table1();
    cfg.calendar = std::move(calendar);
    cfg.mc.replications = reps;
    cfg.mc.seed = seed;
    return cfg;
}

inline double weibull_cdf(const nextpm::ComponentSpec& s, double t) {
    return t <= 0 ? 0.0 : 1.0 - std::exp(-std::pow(t / s.alpha, s.beta));
}

// Renewal function H(t) on a grid of step h from the renewal equation
// H = F + H * dF, midpoint rule on the Stieltjes integral.
inline std::vector<double> renewal_oracle(const nextpm::ComponentSpec& s, double t_max, double h) {
    const std::size_t n = static_cast<std::size_t>(std::ceil(t_max / h));
    std::vector<double> F(n + 1), dF(n + 1, 0.0), H(n + 1, 0.0);
    for (std::size_t k = 0; k <= n; ++k) F[k] = weibull_cdf(s, h * static_cast<double>(k));
    for (std::size_t k = 1; k <= n; ++k) dF[k] = F[k] - F[k - 1];
    for (std::size_t k = 1; k <= n; ++k) {
        double acc = F[k] + 0.5 * dF[1] * H[k - 1];
        for (std::size_t i = 2; i <= k; ++i) acc += 0.5 * (H[k - i] + H[k - i + 1]) * dF[i];
        H[k] = acc / (1.0 - 0.5 * dF[1]);
    }
    return H;
}

}  // namespace testing_support
