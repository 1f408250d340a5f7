#include "nextpm/lifetime.hpp"

#include <cmath>
#include <stdexcept>

namespace nextpm {

void validate(const ComponentSpec& spec) {
    if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha))
        throw std::invalid_argument("component " + std::to_string(spec.id) + ": alpha must be > 0");
    if (!(spec.beta > 0.0) || !std::isfinite(spec.beta))
        throw std::invalid_argument("component " + std::to_string(spec.id) + ": beta must be > 0");
    if (spec.cm_cost < 0.0 || spec.pm_cost < 0.0)
        throw std::invalid_argument("component " + std::to_string(spec.id) + ": costs must be >= 0");
}

bool has_ordered_costs(const ComponentSpec& spec) {
    return spec.cm_cost >= spec.pm_cost && spec.pm_cost >= 0.0;
}

double survival(const ComponentSpec& spec, double t) {
    if (t < 0.0) throw std::domain_error("survival: negative time");
    return std::exp(-std::pow(t / spec.alpha, spec.beta));
}

double density(const ComponentSpec& spec, double t) {
    if (t < 0.0) throw std::domain_error("density: negative time");
    const double x = t / spec.alpha;
    return spec.beta / spec.alpha * std::pow(x, spec.beta - 1.0) * std::exp(-std::pow(x, spec.beta));
}

LifetimeMoments moments(const ComponentSpec& spec) {
    const double g1 = std::tgamma(1.0 + 1.0 / spec.beta);
    const double g2 = std::tgamma(1.0 + 2.0 / spec.beta);
    const double mean = spec.alpha * g1;
    return {mean, spec.alpha * spec.alpha * g2 - mean * mean};
}

double life_from_uniform(const ComponentSpec& spec, double u) {
    return spec.alpha * std::pow(-std::log(u), 1.0 / spec.beta);
}

double residual_life_from_uniform(const ComponentSpec& spec, double age, double u) {
    if (age <= 0.0) return life_from_uniform(spec, u);
    const double h = std::pow(age / spec.alpha, spec.beta) - std::log(u);
    const double life = spec.alpha * std::pow(h, 1.0 / spec.beta);
    // -ln U > 0 so life > age mathematically; guard the last ulp.
    return life > age ? life : std::nextafter(age, INFINITY);
}

double sample_life(const ComponentSpec& spec, RandomStream& rng) {
    return life_from_uniform(spec, rng.uniform());
}

double sample_residual_life(const ComponentSpec& spec, double age, RandomStream& rng) {
    if (age < 0.0) throw std::domain_error("sample_residual_life: negative age");
    return residual_life_from_uniform(spec, age, rng.uniform());
}

}  // namespace nextpm
