#pragma once

#include <string>
#include <vector>

#include "nextpm/random.hpp"

namespace nextpm {

/// One component: Weibull lifetime (months) and maintenance costs (kUSD).
struct ComponentSpec {
    int id = 1;
    std::string name;
    double alpha = 1.0;    // scale
    double beta = 1.0;     // shape
    double cm_cost = 0.0;  // b_j, corrective
    double pm_cost = 0.0;  // c_j, preventive
};

struct LifetimeMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Throws std::invalid_argument for non-positive alpha/beta or negative costs.
void validate(const ComponentSpec& spec);

/// True when cm_cost >= pm_cost >= 0; all shipped instances satisfy it, callers warn otherwise.
bool has_ordered_costs(const ComponentSpec& spec);

/// P(L > t) = exp(-(t/alpha)^beta). Throws std::domain_error for t < 0.
double survival(const ComponentSpec& spec, double t);

/// Weibull density at t >= 0.
double density(const ComponentSpec& spec, double t);

LifetimeMoments moments(const ComponentSpec& spec);

/// Inverse-CDF life draw, alpha * (-ln U)^(1/beta).
double sample_life(const ComponentSpec& spec, RandomStream& rng);

/// Total life conditioned on exceeding `age`:
///   alpha * ((age/alpha)^beta - ln U)^(1/beta).
/// Returns TOTAL life (> age); remaining life is the result minus age.
double sample_residual_life(const ComponentSpec& spec, double age, RandomStream& rng);

/// Same transforms driven by a caller-supplied uniform, so several processes can
/// share one uniform sequence (common random numbers).
double life_from_uniform(const ComponentSpec& spec, double u);
double residual_life_from_uniform(const ComponentSpec& spec, double age, double u);

}  // namespace nextpm
