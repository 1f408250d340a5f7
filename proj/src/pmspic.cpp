#include "nextpm/pmspic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "nextpm/random.hpp"

namespace nextpm {

namespace {

constexpr std::uint64_t kTagInterval = 0x1C57;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct IntervalSums {
    std::vector<double> sum, sq;
    std::size_t count = 0;
};

void interval_block(const ComponentSpec& spec, double setup, double lambda, int max_t, const McSettings& settings,
                    IntervalConvention convention, std::size_t block, IntervalSums& acc) {
    acc.sum.assign(static_cast<std::size_t>(max_t), 0.0);
    acc.sq.assign(static_cast<std::size_t>(max_t), 0.0);
    acc.count = 0;
    std::vector<double> x(static_cast<std::size_t>(max_t));
    const std::size_t first = block * kReplicationBlock;
    const std::size_t last = std::min(first + kReplicationBlock, settings.replications);
    for (std::size_t rep = first; rep < last; ++rep) {
        RandomStream rng =
            RandomStream::substream({settings.seed, kTagInterval, static_cast<std::uint64_t>(spec.id), rep});
        std::fill(x.begin(), x.end(), 0.0);
        double clock = 0.0;
        while (true) {
            const double life = sample_life(spec, rng);
            clock += life;
            if (clock > max_t) break;
            const double arg = convention == IntervalConvention::AbsoluteRenewal ? clock : life;
            for (int t = std::max(1, static_cast<int>(std::ceil(clock))); t <= max_t; ++t)
                x[static_cast<std::size_t>(t - 1)] +=
                    spec.cm_cost + setup - std::pow(arg / t, lambda) * (spec.pm_cost + setup);
        }
        for (std::size_t k = 0; k < x.size(); ++k) {
            acc.sum[k] += x[k];
            acc.sq[k] += x[k] * x[k];
        }
        ++acc.count;
    }
}

// Branch and bound over z_1..z_T; z_k is decided at depth k.
class PmspicSearch {
public:
    PmspicSearch(const PmspicProblem& p, std::optional<std::chrono::steady_clock::time_point> deadline)
        : p_(p), T_(p.horizon), n_(p.size()), deadline_(deadline) {
        back_.assign(n_, std::vector<double>(static_cast<std::size_t>(T_ + 2), kInf));
        fwd_.assign(n_, std::vector<double>(static_cast<std::size_t>(T_ + 2), kInf));
        pred_.assign(n_, std::vector<int>(static_cast<std::size_t>(T_ + 2), -1));
        for (std::size_t j = 0; j < n_; ++j) {
            back_[j][static_cast<std::size_t>(T_ + 1)] = 0.0;
            for (int v = T_; v >= 0; --v) {
                double best = kInf;
                for (int w = v + 1; w <= T_ + 1; ++w)
                    best = std::min(best, p_.cost(j, w - v) + back_[j][static_cast<std::size_t>(w)]);
                back_[j][static_cast<std::size_t>(v)] = best;
            }
            fwd_[j][0] = 0.0;
        }
        hint_.assign(static_cast<std::size_t>(T_ + 1), 0);
        for (std::size_t j = 0; j < n_; ++j) {
            int v = 0;
            while (v <= T_) {
                int next = T_ + 1;
                for (int w = v + 1; w <= T_ + 1; ++w) {
                    if (p_.cost(j, w - v) + back_[j][static_cast<std::size_t>(w)] ==
                        back_[j][static_cast<std::size_t>(v)]) {
                        next = w;
                        break;
                    }
                }
                if (next <= T_) hint_[static_cast<std::size_t>(next)] = 1;
                v = next;
            }
        }
        z_.assign(static_cast<std::size_t>(T_), 0);
        open_.push_back(0);
    }

    PmspicPlan run() {
        seed_incumbent();
        root_bound_ = bound(0, 0);
        dfs(1, 0);
        PmspicPlan plan = best_;
        plan.nodes = nodes_;
        plan.optimal = !timed_out_;
        plan.lower_bound = timed_out_ ? std::min({plan.objective, skipped_lb_}) : plan.objective;
        plan.lower_bound = std::max(plan.lower_bound, std::min(root_bound_, plan.objective));
        return plan;
    }

    // Restricted shortest paths for a fixed z; fills renewals and returns F.
    double evaluate(const std::vector<char>& z, std::vector<std::vector<int>>* renewals) const {
        std::vector<int> nodes{0};
        for (int t = 1; t <= T_; ++t)
            if (z[static_cast<std::size_t>(t - 1)]) nodes.push_back(t);
        nodes.push_back(T_ + 1);
        std::vector<char> used(static_cast<std::size_t>(T_), 0);
        std::vector<std::vector<int>> paths(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            std::vector<double> dist(nodes.size(), kInf);
            std::vector<std::size_t> prev(nodes.size(), 0);
            dist[0] = 0.0;
            for (std::size_t b = 1; b < nodes.size(); ++b)
                for (std::size_t a = 0; a < b; ++a) {
                    const double v = dist[a] + p_.cost(j, nodes[b] - nodes[a]);
                    if (v < dist[b]) {
                        dist[b] = v;
                        prev[b] = a;
                    }
                }
            for (std::size_t b = prev[nodes.size() - 1]; b != 0; b = prev[b]) paths[j].push_back(nodes[b]);
            std::reverse(paths[j].begin(), paths[j].end());
            for (int t : paths[j]) used[static_cast<std::size_t>(t - 1)] = 1;
        }
        const double f = pmspic_objective(p_, used, paths);
        if (renewals) *renewals = std::move(paths);
        return f;
    }

private:
    void consider(const std::vector<char>& z) {
        std::vector<std::vector<int>> paths;
        const double f = evaluate(z, &paths);
        if (f < best_.objective) {
            best_.objective = f;
            best_.renewals = std::move(paths);
            best_.z.assign(static_cast<std::size_t>(T_), 0);
            for (const auto& path : best_.renewals)
                for (int t : path) best_.z[static_cast<std::size_t>(t - 1)] = 1;
        }
    }

    // Incumbent from the all-deferral plan, the union of free shortest paths,
    // then best-improvement single toggles.
    void seed_incumbent() {
        best_.objective = kInf;
        std::vector<char> z(static_cast<std::size_t>(T_), 0);
        consider(z);
        for (int t = 1; t <= T_; ++t) z[static_cast<std::size_t>(t - 1)] = hint_[static_cast<std::size_t>(t)];
        consider(z);
        z = best_.z;
        for (int pass = 0; pass < 4 * T_ + 4; ++pass) {
            if (expired()) break;
            double best_f = best_.objective;
            int flip = -1;
            for (int t = 1; t <= T_; ++t) {
                z[static_cast<std::size_t>(t - 1)] ^= 1;
                const double f = evaluate(z, nullptr);
                z[static_cast<std::size_t>(t - 1)] ^= 1;
                if (f < best_f) {
                    best_f = f;
                    flip = t;
                }
            }
            if (flip < 0) break;
            z[static_cast<std::size_t>(flip - 1)] ^= 1;
            consider(z);
            z = best_.z;
        }
    }

    bool expired() {
        if (!deadline_) return false;
        if (timed_out_) return true;
        if (std::chrono::steady_clock::now() >= *deadline_) timed_out_ = true;
        return timed_out_;
    }

    double tail(std::size_t j, int u, int k) const {
        double best = p_.cost(j, T_ + 1 - u);
        for (int v = std::max(k + 1, u + 1); v <= T_; ++v)
            best = std::min(best, p_.cost(j, v - u) + back_[j][static_cast<std::size_t>(v)]);
        return best;
    }

    // z_1..z_k fixed; later months free and set-up free.
    double bound(int k, int ones) const {
        double total = p_.setup * ones;
        for (std::size_t j = 0; j < n_; ++j) {
            double best = kInf;
            for (int u : open_) best = std::min(best, fwd_[j][static_cast<std::size_t>(u)] + tail(j, u, k));
            total += best;
        }
        return total;
    }

    void open_month(int k) {
        for (std::size_t j = 0; j < n_; ++j) {
            double best = kInf;
            int arg = 0;
            for (int u : open_) {
                const double v = fwd_[j][static_cast<std::size_t>(u)] + p_.cost(j, k - u);
                if (v < best) {
                    best = v;
                    arg = u;
                }
            }
            fwd_[j][static_cast<std::size_t>(k)] = best;
            pred_[j][static_cast<std::size_t>(k)] = arg;
        }
        open_.push_back(k);
    }

    bool prunable(double b) const { return b > best_.objective - 1e-12 * std::abs(best_.objective); }

    void leaf() {
        std::vector<std::vector<int>> paths(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            double best = kInf;
            int arg = 0;
            for (int u : open_) {
                const double v = fwd_[j][static_cast<std::size_t>(u)] + p_.cost(j, T_ + 1 - u);
                if (v < best) {
                    best = v;
                    arg = u;
                }
            }
            for (int u = arg; u != 0; u = pred_[j][static_cast<std::size_t>(u)]) paths[j].push_back(u);
            std::reverse(paths[j].begin(), paths[j].end());
        }
        std::vector<char> used(static_cast<std::size_t>(T_), 0);
        for (const auto& path : paths)
            for (int t : path) used[static_cast<std::size_t>(t - 1)] = 1;
        const double f = pmspic_objective(p_, used, paths);
        if (f < best_.objective) {
            best_.objective = f;
            best_.z = std::move(used);
            best_.renewals = std::move(paths);
        }
    }

    void dfs(int k, int ones) {
        ++nodes_;
        if (k > T_) {
            leaf();
            return;
        }
        const char preferred = hint_[static_cast<std::size_t>(k)];
        for (char val : {preferred, static_cast<char>(1 - preferred)}) {
            z_[static_cast<std::size_t>(k - 1)] = val;
            if (val) open_month(k);
            const int now = ones + val;
            const double b = bound(k, now);
            if (expired()) skipped_lb_ = std::min(skipped_lb_, b);
            else if (!prunable(b)) dfs(k + 1, now);
            if (val) open_.pop_back();
        }
        z_[static_cast<std::size_t>(k - 1)] = 0;
    }

    const PmspicProblem& p_;
    int T_;
    std::size_t n_;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
    std::vector<std::vector<double>> back_, fwd_;
    std::vector<std::vector<int>> pred_;
    std::vector<char> hint_;
    std::vector<char> z_;
    std::vector<int> open_;
    PmspicPlan best_;
    double root_bound_ = 0.0;
    double skipped_lb_ = kInf;
    bool timed_out_ = false;
    long nodes_ = 0;
};

void validate(const PmspicProblem& p) {
    if (p.horizon < 0) throw std::invalid_argument("PMSPIC horizon must be >= 0");
    if (p.interval_cost.size() != p.ids.size()) throw std::invalid_argument("PMSPIC component arrays differ");
    for (const auto& row : p.interval_cost) {
        if (row.size() != static_cast<std::size_t>(p.horizon + 1))
            throw std::invalid_argument("PMSPIC interval costs must cover lengths 1..T+1");
        for (double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("PMSPIC interval costs must be finite");
    }
}

}  // namespace

std::vector<Estimate> pmspic_interval_costs(const ComponentSpec& spec, double setup, double lambda, int max_t,
                                            const McSettings& settings, IntervalConvention convention) {
    if (max_t < 1) throw std::domain_error("pmspic_interval_costs: t must be >= 1");
    if (settings.replications < 1) throw std::invalid_argument("replications must be >= 1");
    const std::size_t blocks = (settings.replications + kReplicationBlock - 1) / kReplicationBlock;
    std::vector<IntervalSums> parts(blocks);
#pragma omp parallel for schedule(dynamic)
    for (long b = 0; b < static_cast<long>(blocks); ++b)
        interval_block(spec, setup, lambda, max_t, settings, convention, static_cast<std::size_t>(b),
                       parts[static_cast<std::size_t>(b)]);
    IntervalSums total = parts[0];
    for (std::size_t b = 1; b < blocks; ++b) {
        for (std::size_t k = 0; k < total.sum.size(); ++k) {
            total.sum[k] += parts[b].sum[k];
            total.sq[k] += parts[b].sq[k];
        }
        total.count += parts[b].count;
    }
    std::vector<Estimate> out(static_cast<std::size_t>(max_t));
    const double n = static_cast<double>(total.count);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k].value = spec.pm_cost + total.sum[k] / n;
        const double var = total.count > 1 ? std::max(0.0, (total.sq[k] - total.sum[k] * total.sum[k] / n) / (n - 1.0))
                                           : 0.0;
        out[k].std_error = std::sqrt(var / n);
    }
    return out;
}

Estimate pmspic_interval_cost(const ComponentSpec& spec, double setup, double lambda, int t,
                              const McSettings& settings, IntervalConvention convention) {
    return pmspic_interval_costs(spec, setup, lambda, t, settings, convention).back();
}

PmspicProblem make_pmspic_problem(const std::vector<ComponentSpec>& components, double setup, double lambda,
                                  int horizon, const McSettings& settings) {
    PmspicProblem p;
    p.horizon = horizon;
    p.setup = setup;
    for (const auto& spec : components) {
        p.ids.push_back(spec.id);
        std::vector<double> row;
        for (const auto& e : pmspic_interval_costs(spec, setup, lambda, horizon + 1, settings)) row.push_back(e.value);
        p.interval_cost.push_back(std::move(row));
    }
    return p;
}

double pmspic_objective(const PmspicProblem& p, const std::vector<char>& z,
                        const std::vector<std::vector<int>>& renewals) {
    double opened = 0.0;
    for (char v : z) opened += v ? 1.0 : 0.0;
    double total = p.setup * opened;
    for (std::size_t j = 0; j < renewals.size(); ++j) {
        int prev = 0;
        for (int t : renewals[j]) {
            total += p.cost(j, t - prev);
            prev = t;
        }
        total += p.cost(j, p.horizon + 1 - prev);
    }
    return total;
}

PmspicPlan solve_pmspic(const PmspicProblem& problem) {
    validate(problem);
    if (problem.horizon > kPmspicExactCap)
        throw std::length_error("solve_pmspic: exact mode is capped at T = " + std::to_string(kPmspicExactCap) +
                                "; use solve_pmspic_best_effort");
    return PmspicSearch(problem, std::nullopt).run();
}

PmspicPlan solve_pmspic_best_effort(const PmspicProblem& problem, double seconds) {
    validate(problem);
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(seconds));
    return PmspicSearch(problem, deadline).run();
}

FirstPm first_pm_extract(const PmspicProblem& problem, const PmspicPlan& plan) {
    FirstPm out;
    for (int t = 1; t <= problem.horizon; ++t) {
        if (!plan.z[static_cast<std::size_t>(t - 1)]) continue;
        out.month = t;
        for (std::size_t j = 0; j < plan.renewals.size(); ++j) {
            const auto& path = plan.renewals[j];
            if (std::find(path.begin(), path.end(), t) != path.end()) out.components.push_back(problem.ids[j]);
        }
        break;
    }
    return out;
}

std::optional<double> pmspic_first_block_rate(const PmspicProblem& problem, const FirstPm& first) {
    if (!first.month) return std::nullopt;
    double total = problem.setup;
    for (int id : first.components) {
        const auto it = std::find(problem.ids.begin(), problem.ids.end(), id);
        total += problem.cost(static_cast<std::size_t>(it - problem.ids.begin()), *first.month);
    }
    return total / *first.month;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
    std::size_t n = 0;
    for (const auto& r : rows) n = std::max(n, r.first_month.size());
    out << "strategy,d";
    for (std::size_t j = 0; j < n; ++j) out << ",m" << (j + 1);
    out << ",monthly_cost,solve_seconds,optimal,lower_bound\n";
    out.precision(8);
    for (const auto& r : rows) {
        out << r.strategy << ',' << r.setup;
        for (std::size_t j = 0; j < n; ++j) {
            out << ',';
            if (j < r.first_month.size() && r.first_month[j]) out << *r.first_month[j];
            else out << 'x';
        }
        out << ',' << r.monthly_cost << ',' << r.solve_seconds << ',' << (r.optimal ? 1 : 0) << ',' << r.lower_bound
            << '\n';
    }
}

}  // namespace nextpm
