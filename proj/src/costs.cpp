#include "nextpm/costs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nextpm/random.hpp"

namespace nextpm {

namespace {

// Stream tags keep the different estimators on unrelated substreams.
constexpr std::uint64_t kTagCost = 0xC057;
constexpr std::uint64_t kTagRenewal = 0x4E4E;
constexpr std::uint64_t kTagCmOnly = 0xC30;

struct KernelInput {
    const ComponentSpec* spec;
    const SetupCostCalendar* calendar;
    double lambda;
    int s;
    int last;
    int r;
    int horizon;
    bool with_benefit;
};

// Sums over one replication block. x_t is the accumulated G-cost of one
// replication (without the constant c_j); y_t is the per-replication D sample
// plus c_j.
struct BlockSums {
    std::vector<double> x_sum, x_sq, y_sum, y_sq;
    std::size_t count = 0;

    void resize(std::size_t width, bool with_benefit) {
        x_sum.assign(width, 0.0);
        x_sq.assign(width, 0.0);
        if (with_benefit) {
            y_sum.assign(width - 1, 0.0);
            y_sq.assign(width - 1, 0.0);
        }
    }

    void add(const BlockSums& o) {
        for (std::size_t k = 0; k < x_sum.size(); ++k) {
            x_sum[k] += o.x_sum[k];
            x_sq[k] += o.x_sq[k];
        }
        for (std::size_t k = 0; k < y_sum.size(); ++k) {
            y_sum[k] += o.y_sum[k];
            y_sq[k] += o.y_sq[k];
        }
        count += o.count;
    }
};

struct Scratch {
    std::vector<double> uniforms;
    std::vector<double> delayed;  // U_1, U_2, ... (U_0 = s implicit)
    std::vector<double> fresh;    // V_1, V_2, ...
    std::vector<double> x;
    std::vector<double> e2;
};

// One replication of the delayed renewal process observed at s, plus the
// zero-delay process driven by the same uniforms.
void simulate_replication(const KernelInput& in, RandomStream& rng, Scratch& sc, BlockSums& acc) {
    const ComponentSpec& spec = *in.spec;
    const SetupCostCalendar& cal = *in.calendar;
    const int width = in.r - in.s + 1;
    const double b = spec.cm_cost;
    const double c = spec.pm_cost;

    const double delayed_limit = in.with_benefit ? std::max(in.horizon, in.r + 1) : in.r + 1;
    const double fresh_limit = in.with_benefit ? static_cast<double>(in.horizon - in.s - 1) : -1.0;

    sc.uniforms.clear();
    sc.delayed.clear();
    sc.fresh.clear();

    const double age = static_cast<double>(in.s - in.last);
    sc.uniforms.push_back(rng.uniform());
    double u_time = in.last + residual_life_from_uniform(spec, age, sc.uniforms.back());
    while (u_time <= delayed_limit) {
        sc.delayed.push_back(u_time);
        sc.uniforms.push_back(rng.uniform());
        u_time += life_from_uniform(spec, sc.uniforms.back());
    }
    if (in.with_benefit) {
        double v_time = 0.0;
        for (std::size_t i = 0;; ++i) {
            if (i == sc.uniforms.size()) sc.uniforms.push_back(rng.uniform());
            v_time += life_from_uniform(spec, sc.uniforms[i]);
            if (v_time > fresh_limit) break;
            sc.fresh.push_back(v_time);
        }
    }

    sc.x.assign(static_cast<std::size_t>(width), 0.0);
    double prev = in.s;
    for (double fail : sc.delayed) {
        if (fail > in.r + 1) break;
        const double gap = fail - prev;
        const double d_fail = cal.at(fail);
        const int t_min = std::max(in.s + 1, static_cast<int>(std::ceil(fail)));
        for (int t = t_min; t <= in.r + 1; ++t) {
            const double span = t - in.s;
            const double discount = std::pow(gap / span, in.lambda) * (c + cal.at(prev + span));
            sc.x[static_cast<std::size_t>(t - in.s - 1)] += b + d_fail - discount;
        }
        prev = fail;
    }
    for (int k = 0; k < width; ++k) {
        const double v = sc.x[static_cast<std::size_t>(k)];
        acc.x_sum[static_cast<std::size_t>(k)] += v;
        acc.x_sq[static_cast<std::size_t>(k)] += v * v;
    }

    if (in.with_benefit) {
        double e1 = 0.0;
        for (double fail : sc.delayed) {
            if (fail > in.horizon) break;
            e1 += b + cal.at(fail);
        }
        for (int t = in.s + 1; t <= in.r; ++t) {
            double e2 = 0.0;
            for (double v : sc.fresh) {
                const double when = t + v;
                if (when > in.horizon) break;
                e2 += b + cal.at(when);
            }
            const std::size_t k = static_cast<std::size_t>(t - in.s - 1);
            const double y = e1 - sc.x[k] - e2;
            acc.y_sum[k] += y;
            acc.y_sq[k] += y * y;
        }
    }
    ++acc.count;
}

void run_block(const KernelInput& in, std::uint64_t seed, std::size_t block, std::size_t replications,
               BlockSums& acc) {
    const std::size_t first = block * kReplicationBlock;
    const std::size_t last = std::min(first + kReplicationBlock, replications);
    acc.resize(static_cast<std::size_t>(in.r - in.s + 1), in.with_benefit);
    acc.count = 0;
    Scratch scratch;
    for (std::size_t rep = first; rep < last; ++rep) {
        RandomStream rng = RandomStream::substream(
            {seed, kTagCost, static_cast<std::uint64_t>(in.s), static_cast<std::uint64_t>(in.spec->id), rep});
        simulate_replication(in, rng, scratch, acc);
    }
}

std::size_t block_count(std::size_t replications) {
    return (replications + kReplicationBlock - 1) / kReplicationBlock;
}

double standard_error(double sum, double sq, std::size_t n) {
    if (n < 2) return 0.0;
    const double dn = static_cast<double>(n);
    const double var = std::max(0.0, (sq - sum * sum / dn) / (dn - 1.0));
    return std::sqrt(var / dn);
}

CostTables::Component finalize(const KernelInput& in, const BlockSums& total) {
    CostTables::Component out;
    out.id = in.spec->id;
    const double n = static_cast<double>(total.count);
    const double cj = in.spec->pm_cost;
    const std::size_t width = total.x_sum.size();
    out.c.resize(width);
    out.c_stderr.resize(width);
    for (std::size_t k = 0; k < width; ++k) {
        out.c[k] = cj + total.x_sum[k] / n;
        out.c_stderr[k] = standard_error(total.x_sum[k], total.x_sq[k], total.count);
    }
    out.D.resize(total.y_sum.size());
    out.D_stderr.resize(total.y_sum.size());
    for (std::size_t k = 0; k < total.y_sum.size(); ++k) {
        out.D[k] = total.y_sum[k] / n - cj;
        out.D_stderr[k] = standard_error(total.y_sum[k], total.y_sq[k], total.count);
    }
    return out;
}

void check_settings(const McSettings& settings) {
    if (settings.replications < 1) throw std::invalid_argument("replications must be >= 1");
}

KernelInput make_input(const ComponentSpec& spec, const SetupCostCalendar& calendar, double lambda, int s,
                       int last, int r, int horizon, bool with_benefit) {
    return KernelInput{&spec, &calendar, lambda, s, last, r, horizon, with_benefit};
}

void check_window(const SystemConfig& config, const SystemState& state) {
    validate(state);
    if (state.last_maintenance.size() != config.components.size())
        throw std::invalid_argument("state has " + std::to_string(state.last_maintenance.size()) +
                                    " components, config has " + std::to_string(config.components.size()));
    if (state.horizon != config.horizon) throw std::invalid_argument("state horizon differs from config horizon");
}

CostTables table_shell(const SystemConfig& config, const SystemState& state, const McSettings& settings) {
    CostTables tables;
    tables.s = state.s;
    tables.r = state.r;
    tables.horizon = config.horizon;
    tables.lambda = config.lambda;
    tables.settings = settings;
    return tables;
}

template <bool Parallel>
CostTables build_tables(const SystemConfig& config, const SystemState& state, const McSettings& settings) {
    check_settings(settings);
    check_window(config, state);
    CostTables tables = table_shell(config, state, settings);

    const std::size_t n = config.components.size();
    const std::size_t blocks = block_count(settings.replications);
    std::vector<KernelInput> inputs;
    inputs.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        inputs.push_back(make_input(config.components[j], config.calendar, config.lambda, state.s,
                                    state.last_maintenance[j], state.r, config.horizon, true));

    std::vector<BlockSums> partial(n * blocks);
    const long tasks = static_cast<long>(n * blocks);
    if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long task = 0; task < tasks; ++task) {
            const std::size_t j = static_cast<std::size_t>(task) / blocks;
            const std::size_t blk = static_cast<std::size_t>(task) % blocks;
            run_block(inputs[j], settings.seed, blk, settings.replications, partial[static_cast<std::size_t>(task)]);
        }
    } else {
        for (long task = 0; task < tasks; ++task) {
            const std::size_t j = static_cast<std::size_t>(task) / blocks;
            const std::size_t blk = static_cast<std::size_t>(task) % blocks;
            run_block(inputs[j], settings.seed, blk, settings.replications, partial[static_cast<std::size_t>(task)]);
        }
    }

    tables.components.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        BlockSums total = partial[j * blocks];
        for (std::size_t blk = 1; blk < blocks; ++blk) total.add(partial[j * blocks + blk]);
        tables.components.push_back(finalize(inputs[j], total));
    }
    return tables;
}

// Single-component estimate over window [s+1, r+1] on the same substreams the
// table builder uses.
CostTables::Component single_component(const KernelInput& in, const McSettings& settings) {
    check_settings(settings);
    const std::size_t blocks = block_count(settings.replications);
    BlockSums total;
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        BlockSums part;
        run_block(in, settings.seed, blk, settings.replications, part);
        if (blk == 0)
            total = std::move(part);
        else
            total.add(part);
    }
    return finalize(in, total);
}

}  // namespace

double CostTables::max_stderr() const {
    double m = 0.0;
    for (const auto& comp : components) {
        for (double v : comp.c_stderr) m = std::max(m, v);
        for (double v : comp.D_stderr) m = std::max(m, v);
    }
    return m;
}

double failure_cost_G(const ComponentSpec& spec, const SetupCostCalendar& calendar, double lambda, double s,
                      double u, double t) {
    if (!(t > 0.0)) throw std::domain_error("failure_cost_G: t must be > 0");
    if (u < 0.0 || u > t) throw std::domain_error("failure_cost_G: u must lie in [0, t]");
    return spec.cm_cost + calendar.at(s + u) - std::pow(u / t, lambda) * (spec.pm_cost + calendar.at(s + t));
}

Estimate expected_pm_cost(const ComponentSpec& spec, const SetupCostCalendar& calendar, double lambda, int s,
                          int last_maintained, int t, const McSettings& settings) {
    if (t <= s) throw std::domain_error("expected_pm_cost: target month must be after s");
    if (last_maintained < 0 || last_maintained > s) throw std::domain_error("expected_pm_cost: need 0 <= t_j <= s");
    const auto comp =
        single_component(make_input(spec, calendar, lambda, s, last_maintained, t - 1, 0, false), settings);
    return {comp.c.back(), comp.c_stderr.back()};
}

Estimate pm_benefit_D(const ComponentSpec& spec, const SetupCostCalendar& calendar, double lambda, int s,
                      int last_maintained, int t, int horizon, const McSettings& settings) {
    if (t > horizon) throw std::domain_error("pm_benefit_D: t must be <= T");
    if (t <= s) throw std::domain_error("pm_benefit_D: t must be after s");
    if (last_maintained < 0 || last_maintained > s) throw std::domain_error("pm_benefit_D: need 0 <= t_j <= s");
    const auto comp =
        single_component(make_input(spec, calendar, lambda, s, last_maintained, t, horizon, true), settings);
    return {comp.D.back(), comp.D_stderr.back()};
}

CostTables build_cost_tables(const SystemConfig& config, const SystemState& state, const McSettings& settings) {
    return build_tables<true>(config, state, settings);
}

CostTables build_cost_tables_serial(const SystemConfig& config, const SystemState& state,
                                    const McSettings& settings) {
    return build_tables<false>(config, state, settings);
}

Estimate renewal_function(const ComponentSpec& spec, double t, const McSettings& settings) {
    check_settings(settings);
    if (t < 0.0) throw std::domain_error("renewal_function: t must be >= 0");
    double sum = 0.0, sq = 0.0;
    for (std::size_t rep = 0; rep < settings.replications; ++rep) {
        RandomStream rng =
            RandomStream::substream({settings.seed, kTagRenewal, static_cast<std::uint64_t>(spec.id), rep});
        double clock = sample_life(spec, rng);
        double count = 0.0;
        while (clock <= t) {
            count += 1.0;
            clock += sample_life(spec, rng);
        }
        sum += count;
        sq += count * count;
    }
    return {sum / static_cast<double>(settings.replications), standard_error(sum, sq, settings.replications)};
}

double cm_only_rate(const SystemConfig& config) {
    const double dbar = config.calendar.mean();
    double rate = 0.0;
    for (const auto& spec : config.components) rate += (dbar + spec.cm_cost) / moments(spec).mean;
    return rate;
}

Estimate cm_only_rate_exact(const SystemConfig& config, const McSettings& settings) {
    check_settings(settings);
    if (config.horizon <= 0) return {0.0, 0.0};
    const double T = config.horizon;
    // Components are independent, so the variance of the total is the sum of variances.
    double mean = 0.0, var = 0.0;
    for (const auto& spec : config.components) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t rep = 0; rep < settings.replications; ++rep) {
            RandomStream rng =
                RandomStream::substream({settings.seed, kTagCmOnly, static_cast<std::uint64_t>(spec.id), rep});
            double clock = sample_life(spec, rng);
            double cost = 0.0;
            while (clock <= T) {
                cost += spec.cm_cost + config.calendar.at(clock);
                clock += sample_life(spec, rng);
            }
            sum += cost;
            sq += cost * cost;
        }
        const double se = standard_error(sum, sq, settings.replications);
        mean += sum / static_cast<double>(settings.replications);
        var += se * se;
    }
    return {mean / T, std::sqrt(var) / T};
}

void write_csv(const CostTables& tables, std::ostream& out) {
    out << "j,t,c,c_stderr,D,D_stderr\n";
    out.precision(10);
    for (std::size_t j = 0; j < tables.size(); ++j) {
        for (int t = tables.s + 1; t <= tables.r + 1; ++t) {
            out << tables.components[j].id << ',' << t << ',' << tables.c(j, t) << ',' << tables.c_stderr(j, t) << ',';
            if (t <= tables.r) out << tables.D(j, t) << ',' << tables.D_stderr(j, t);
            else out << ',';
            out << '\n';
        }
    }
}

}  // namespace nextpm
