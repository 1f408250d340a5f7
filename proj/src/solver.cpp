#include "nextpm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace nextpm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const NextPmProblem& p) {
    if (p.r < p.s + 1) throw std::invalid_argument("NextPM requires r >= s + 1");
    const auto w = static_cast<std::size_t>(p.width());
    if (p.setup.size() != w) throw std::invalid_argument("NextPM set-up vector does not match window");
    if (p.ids.size() != p.c.size() || p.D.size() != p.c.size())
        throw std::invalid_argument("NextPM component arrays differ in length");
    if (p.c.empty()) throw std::invalid_argument("NextPM needs at least one component");
    for (std::size_t j = 0; j < p.c.size(); ++j) {
        if (p.c[j].size() != w) throw std::invalid_argument("NextPM c table does not match window");
        if (p.D[j].size() != w - 1) throw std::invalid_argument("NextPM D table does not match window");
    }
}

void validate(const NextOmProblem& p) {
    const std::size_t n = p.ids.size();
    if (n == 0) throw std::invalid_argument("NextOM needs at least one component");
    if (p.failed >= n) throw std::invalid_argument("NextOM failed component out of range");
    if (p.c_first.size() != n || p.c_second.size() != n || p.D_first.size() != n)
        throw std::invalid_argument("NextOM component arrays differ in length");
}

struct PlanKey {
    double objective;
    int tau;
    std::vector<int> set;
};

bool better(const PlanKey& a, const PlanKey& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    if (a.tau != b.tau) return a.tau < b.tau;
    return a.set < b.set;
}

PmPlan make_pm_plan(const NextPmProblem& p, std::vector<int> assignment) {
    PmPlan plan;
    plan.tau = *std::min_element(assignment.begin(), assignment.end());
    if (plan.tau <= p.r)
        for (std::size_t j = 0; j < assignment.size(); ++j)
            if (assignment[j] == plan.tau) plan.set_P.push_back(p.ids[j]);
    std::sort(plan.set_P.begin(), plan.set_P.end());
    plan.objective = pm_objective(p, assignment);
    plan.assignment = std::move(assignment);
    return plan;
}

PlanKey key_of(const PmPlan& plan) { return {plan.objective, plan.tau, plan.set_P}; }

OmPlan make_om_plan(const NextOmProblem& p, std::vector<int> assignment) {
    OmPlan plan;
    for (std::size_t j = 0; j < assignment.size(); ++j) {
        if (j == p.failed) continue;
        if (assignment[j] == p.s + 1) plan.set_O.push_back(p.ids[j]);
        else plan.second_open = true;
    }
    std::sort(plan.set_O.begin(), plan.set_O.end());
    plan.objective = om_objective(p, assignment);
    plan.assignment = std::move(assignment);
    return plan;
}

bool om_better(const OmPlan& a, const OmPlan& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.set_O < b.set_O;
}

}  // namespace

NextPmProblem NextPmProblem::from_tables(const CostTables& tables, const SetupCostCalendar& calendar) {
    NextPmProblem p;
    p.s = tables.s;
    p.r = tables.r;
    for (int t = p.s + 1; t <= p.r + 1; ++t) p.setup.push_back(calendar.month(t));
    for (const auto& comp : tables.components) {
        p.ids.push_back(comp.id);
        p.c.push_back(comp.c);
        p.D.push_back(comp.D);
    }
    return p;
}

bool NextPmProblem::allowed(std::size_t j, int t) const {
    if (t == r + 1) return true;
    return D[j][static_cast<std::size_t>(t - s - 1)] >= 0.0;
}

NextOmProblem NextOmProblem::from_tables(const CostTables& tables, const SetupCostCalendar& calendar,
                                         std::size_t failed) {
    if (tables.r != tables.s + 1) throw std::invalid_argument("NextOM tables must cover exactly [s+1, s+2]");
    NextOmProblem p;
    p.s = tables.s;
    p.failed = failed;
    p.setup_first = calendar.month(p.s + 1);
    p.setup_second = calendar.month(p.s + 2);
    for (std::size_t j = 0; j < tables.size(); ++j) {
        p.ids.push_back(tables.components[j].id);
        p.c_first.push_back(tables.c(j, p.s + 1));
        p.c_second.push_back(tables.c(j, p.s + 2));
        p.D_first.push_back(tables.D(j, p.s + 1));
    }
    if (failed >= p.ids.size()) throw std::invalid_argument("NextOM failed component out of range");
    return p;
}

double pm_objective(const NextPmProblem& p, const std::vector<int>& assignment) {
    double total = 0.0;
    for (int k = 0; k < p.width(); ++k) {
        const int t = p.month(k);
        bool open = false;
        double sum = p.setup[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < assignment.size(); ++j) {
            if (assignment[j] != t) continue;
            open = true;
            sum += p.c[j][static_cast<std::size_t>(k)];
        }
        if (open) total += sum / static_cast<double>(t - p.s);
    }
    return total;
}

double om_objective(const NextOmProblem& p, const std::vector<int>& assignment) {
    double first = p.setup_first;
    double second = p.setup_second;
    bool second_open = false;
    for (std::size_t j = 0; j < assignment.size(); ++j) {
        if (j == p.failed) continue;
        if (assignment[j] == p.s + 1) {
            first += p.c_first[j];
        } else {
            second_open = true;
            second += p.c_second[j];
        }
    }
    return first + (second_open ? second / 2.0 : 0.0);
}

PmPlan solve_next_pm(const NextPmProblem& p) {
    validate(p);
    const std::size_t n = p.size();
    if (n > kMaxPartitionComponents)
        throw std::length_error("solve_next_pm: " + std::to_string(n) + " components exceeds the partition cap of " +
                                std::to_string(kMaxPartitionComponents) +
                                "; use solve_next_pm_branch_and_bound");

    // Best common months of every block (bitmask); all exact ties are kept,
    // since a later tied month can still win the tau / set_P tie-break.
    std::vector<std::optional<std::vector<int>>> block_months(std::size_t{1} << n);
    auto best_months = [&](std::size_t mask) -> const std::vector<int>& {
        auto& slot = block_months[mask];
        if (slot) return *slot;
        double best = kInf;
        std::vector<int> months;
        for (int k = 0; k < p.width(); ++k) {
            const int t = p.month(k);
            double sum = p.setup[static_cast<std::size_t>(k)];
            bool ok = true;
            for (std::size_t j = 0; j < n && ok; ++j) {
                if (!(mask >> j & 1U)) continue;
                ok = p.allowed(j, t);
                sum += p.c[j][static_cast<std::size_t>(k)];
            }
            if (!ok) continue;
            const double value = sum / static_cast<double>(t - p.s);
            if (value < best) {
                best = value;
                months.assign(1, t);
            } else if (value == best) {
                months.push_back(t);
            }
        }
        if (months.empty()) months.push_back(p.r + 1);
        slot = std::move(months);
        return *slot;
    };

    // Restricted growth strings enumerate each set partition once.
    std::vector<int> label(n, 0);
    std::vector<int> assignment(n);
    std::optional<PmPlan> best;
    std::vector<std::size_t> masks;
    auto choose = [&](auto&& self, std::size_t b) -> void {
        if (b == masks.size()) {
            PmPlan plan = make_pm_plan(p, assignment);
            if (!best || better(key_of(plan), key_of(*best))) best = std::move(plan);
            return;
        }
        for (int t : best_months(masks[b])) {
            for (std::size_t j = 0; j < n; ++j)
                if (masks[b] >> j & 1U) assignment[j] = t;
            self(self, b + 1);
        }
    };
    auto visit = [&](int blocks) {
        masks.assign(static_cast<std::size_t>(blocks), 0);
        for (std::size_t j = 0; j < n; ++j) masks[static_cast<std::size_t>(label[j])] |= std::size_t{1} << j;
        choose(choose, 0);
    };
    auto recurse = [&](auto&& self, std::size_t j, int max_label) -> void {
        if (j == n) {
            visit(max_label + 1);
            return;
        }
        for (int l = 0; l <= max_label + 1; ++l) {
            label[j] = l;
            self(self, j + 1, std::max(max_label, l));
        }
    };
    label[0] = 0;
    recurse(recurse, 1, 0);
    return std::move(*best);
}

PmPlan solve_next_pm_branch_and_bound(const NextPmProblem& p) {
    validate(p);
    const std::size_t n = p.size();
    const int w = p.width();

    // Cheapest feasible per-component share, set-up excluded.
    std::vector<double> floor_cost(n, kInf);
    std::vector<std::vector<int>> order(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (int k = 0; k < w; ++k) {
            const int t = p.month(k);
            if (!p.allowed(j, t)) continue;
            order[j].push_back(t);
            floor_cost[j] = std::min(floor_cost[j], p.c[j][static_cast<std::size_t>(k)] / (t - p.s));
        }
        std::stable_sort(order[j].begin(), order[j].end(), [&](int a, int b) {
            const auto ka = static_cast<std::size_t>(a - p.s - 1), kb = static_cast<std::size_t>(b - p.s - 1);
            return (p.setup[ka] + p.c[j][ka]) / (a - p.s) < (p.setup[kb] + p.c[j][kb]) / (b - p.s);
        });
    }
    std::vector<double> suffix_floor(n + 1, 0.0);
    for (std::size_t j = n; j-- > 0;) suffix_floor[j] = suffix_floor[j + 1] + floor_cost[j];

    std::vector<int> assignment(n, p.r + 1);
    PmPlan best = make_pm_plan(p, assignment);
    std::vector<int> open_count(static_cast<std::size_t>(w), 0);
    // Slack so that rounding in the running sum never prunes an exact tie.
    auto prune = [&](double bound) { return bound > best.objective + 1e-9 * (1.0 + std::abs(best.objective)); };

    auto recurse = [&](auto&& self, std::size_t j, double cost) -> void {
        if (prune(cost + suffix_floor[j])) return;
        if (j == n) {
            PmPlan plan = make_pm_plan(p, assignment);
            if (better(key_of(plan), key_of(best))) best = std::move(plan);
            return;
        }
        for (int t : order[j]) {
            const auto k = static_cast<std::size_t>(t - p.s - 1);
            const double span = t - p.s;
            double add = p.c[j][k] / span;
            if (open_count[k] == 0) add += p.setup[k] / span;
            assignment[j] = t;
            ++open_count[k];
            self(self, j + 1, cost + add);
            --open_count[k];
        }
        assignment[j] = p.r + 1;
    };
    recurse(recurse, 0, 0.0);
    return best;
}

OmPlan solve_next_om(const NextOmProblem& p) {
    validate(p);
    const std::size_t n = p.size();
    const int first = p.s + 1, second = p.s + 2;
    std::optional<OmPlan> best;
    auto consider = [&](OmPlan plan) {
        if (!best || om_better(plan, *best)) best = std::move(plan);
    };

    // z_{s+2} = 0: everyone joins the CM occasion, which needs D >= 0 for all.
    {
        bool ok = true;
        for (std::size_t j = 0; j < n; ++j)
            if (j != p.failed && p.D_first[j] < 0.0) ok = false;
        if (ok) consider(make_om_plan(p, std::vector<int>(n, first)));
    }
    // z_{s+2} = 1: each component independently takes its cheaper slot.
    {
        std::vector<int> assignment(n, second);
        assignment[p.failed] = first;
        std::vector<std::size_t> tied;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == p.failed || p.D_first[j] < 0.0) continue;
            const double now = p.c_first[j];
            const double later = p.c_second[j] / 2.0;
            if (now < later) assignment[j] = first;
            else if (now == later) tied.push_back(j);
        }
        // Exact ties only change set_O; resolve them by enumeration when few.
        const std::size_t subsets = tied.size() <= 16 ? std::size_t{1} << tied.size() : 1;
        for (std::size_t mask = 0; mask < subsets; ++mask) {
            auto a = assignment;
            for (std::size_t q = 0; q < tied.size(); ++q)
                if (mask >> q & 1U) a[tied[q]] = first;
            consider(make_om_plan(p, std::move(a)));
        }
    }
    return std::move(*best);
}

PmPlan brute_force_next_pm(const NextPmProblem& p) {
    validate(p);
    const std::size_t n = p.size();
    const double combos = std::pow(static_cast<double>(p.width()), static_cast<double>(n));
    if (combos > 1e7) throw std::length_error("brute_force_next_pm: instance too large");

    std::vector<int> assignment(n, p.s + 1);
    std::optional<PmPlan> best;
    while (true) {
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) ok = p.allowed(j, assignment[j]);
        if (ok) {
            PmPlan plan = make_pm_plan(p, assignment);
            if (!best || better(key_of(plan), key_of(*best))) best = std::move(plan);
        }
        std::size_t j = 0;
        while (j < n && assignment[j] == p.r + 1) assignment[j++] = p.s + 1;
        if (j == n) break;
        ++assignment[j];
    }
    return std::move(*best);
}

OmPlan brute_force_next_om(const NextOmProblem& p) {
    validate(p);
    const std::size_t n = p.size();
    if (n > 20) throw std::length_error("brute_force_next_om: instance too large");
    std::optional<OmPlan> best;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        if (mask >> p.failed & 1U) continue;  // failed component is pinned to s+1
        std::vector<int> a(n);
        bool ok = true;
        for (std::size_t j = 0; j < n; ++j) {
            a[j] = (mask >> j & 1U) ? p.s + 2 : p.s + 1;
            if (j != p.failed && a[j] == p.s + 1 && p.D_first[j] < 0.0) ok = false;
        }
        if (!ok) continue;
        OmPlan plan = make_om_plan(p, std::move(a));
        if (!best || om_better(plan, *best)) best = std::move(plan);
    }
    if (!best) throw std::logic_error("brute_force_next_om: no feasible plan");
    return std::move(*best);
}

std::vector<std::string> check_plan(const NextPmProblem& p, const PmPlan& plan) {
    std::vector<std::string> issues;
    if (plan.assignment.size() != p.size()) {
        issues.push_back("assignment covers " + std::to_string(plan.assignment.size()) + " of " +
                         std::to_string(p.size()) + " components");
        return issues;
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
        const int t = plan.assignment[j];
        if (t < p.s + 1 || t > p.r + 1) {
            issues.push_back("component " + std::to_string(p.ids[j]) + " assigned outside the window");
            continue;
        }
        if (!p.allowed(j, t))
            issues.push_back("component " + std::to_string(p.ids[j]) + " assigned at month " + std::to_string(t) +
                             " with negative benefit");
    }
    if (!issues.empty()) return issues;
    const PmPlan expect = make_pm_plan(p, plan.assignment);
    if (expect.tau != plan.tau) issues.push_back("tau is not the earliest assigned month");
    if (expect.set_P != plan.set_P) issues.push_back("set_P does not match the components assigned at tau");
    if (expect.objective != plan.objective) issues.push_back("objective does not match the assignment");
    return issues;
}

std::vector<std::string> check_plan(const NextOmProblem& p, const OmPlan& plan) {
    std::vector<std::string> issues;
    if (plan.assignment.size() != p.size()) {
        issues.push_back("assignment has the wrong length");
        return issues;
    }
    if (plan.assignment[p.failed] != p.s + 1) issues.push_back("failed component is not renewed at s+1");
    for (std::size_t j = 0; j < p.size(); ++j) {
        const int t = plan.assignment[j];
        if (t != p.s + 1 && t != p.s + 2) issues.push_back("component assigned outside {s+1, s+2}");
        if (j != p.failed && t == p.s + 1 && p.D_first[j] < 0.0)
            issues.push_back("component " + std::to_string(p.ids[j]) + " opportunistically maintained with D < 0");
    }
    if (!issues.empty()) return issues;
    const OmPlan expect = make_om_plan(p, plan.assignment);
    if (expect.set_O != plan.set_O) issues.push_back("set_O does not match the assignment");
    if (expect.objective != plan.objective) issues.push_back("objective does not match the assignment");
    return issues;
}

void flag_marginal_benefit(const CostTables& tables, PmPlan& plan) {
    plan.benefit_marginal.clear();
    if (plan.tau > tables.r) return;
    for (std::size_t j = 0; j < tables.size(); ++j) {
        const int id = tables.components[j].id;
        if (!std::binary_search(plan.set_P.begin(), plan.set_P.end(), id)) continue;
        if (std::abs(tables.D(j, plan.tau)) <= tables.D_stderr(j, plan.tau)) plan.benefit_marginal.push_back(id);
    }
}

}  // namespace nextpm
