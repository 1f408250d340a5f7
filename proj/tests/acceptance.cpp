// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nextpm/config.hpp"
#include "nextpm/costs.hpp"
#include "nextpm/pmspic.hpp"
#include "nextpm/scheduler.hpp"
#include "nextpm/solver.hpp"

using namespace nextpm;

namespace {

const std::string kFixtures = NEXTPM_FIXTURES;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
    Outcome out;
    const auto t0 = Clock::now();
    try {
        out = check();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("%s  %-34s %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
}

SystemConfig fixture(const std::string& name) { return load_config(kFixtures + "/" + name); }

bool within_rel(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

std::string set_text(const std::vector<int>& ids) {
    std::string s = "{";
    for (std::size_t k = 0; k < ids.size(); ++k) s += (k ? "," : "") + std::to_string(ids[k]);
    return s + "}";
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct FirstPlan {
    PmPlan plan;
    double solve_seconds = 0.0;
};

// Reference comparisons run at 1e6 replications: the minimum over months of a
// noisy ratio is biased low, and 1e5 leaves that bias near 1%.
constexpr std::size_t kReferenceReps = 1000000;

FirstPlan first_plan(const SystemConfig& cfg) {
    const auto tables = build_cost_tables(cfg, SystemState::fresh(cfg), cfg.mc);
    const auto problem = NextPmProblem::from_tables(tables, cfg.calendar);
    const auto t0 = Clock::now();
    FirstPlan out;
    const int repeats = 200;
    for (int k = 0; k < repeats; ++k) out.plan = solve_next_pm(problem);
    out.solve_seconds = seconds_since(t0) / repeats;
    return out;
}

const FirstPlan& reference_plan(const std::string& name) {
    static std::map<std::string, FirstPlan> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        auto cfg = fixture(name);
        cfg.mc.replications = kReferenceReps;
        it = cache.emplace(name, first_plan(cfg)).first;
    }
    return it->second;
}

struct Expect {
    std::string fixture;
    std::string label;
    int tau;
    int tau_tol;
    std::vector<int> set;
    bool superset;  // set must contain `set` rather than equal it
    double objective;
};

// tau within tolerance and objective within 1%; the component set may differ
// only when the objective is within 1% of the reference value.
Outcome check_row(const Expect& e, const FirstPlan& fp, bool set_tie_allowed) {
    const auto& p = fp.plan;
    bool set_ok = true;
    if (e.superset) {
        for (int id : e.set)
            if (std::find(p.set_P.begin(), p.set_P.end(), id) == p.set_P.end()) set_ok = false;
    } else {
        set_ok = p.set_P == e.set;
    }
    const bool tau_ok = std::abs(p.tau - e.tau) <= e.tau_tol;
    const bool obj_ok = within_rel(p.objective, e.objective, 0.01);
    const bool pass = tau_ok && obj_ok && (set_ok || (set_tie_allowed && obj_ok));
    std::ostringstream os;
    os << e.label << ": tau=" << p.tau << " P=" << set_text(p.set_P) << " obj=" << fmt("%.4f", p.objective)
       << " (want " << e.tau << "+-" << e.tau_tol << ", " << (e.superset ? "contains " : "") << set_text(e.set)
       << ", " << fmt("%.3f", e.objective) << "+-1%)";
    if (!set_ok && pass) os << " [set differs, objective within 1%]";
    return {pass, os.str()};
}

NextPmProblem random_pm(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> cost(0.0, 100.0), setup(0.0, 30.0), unit(0.0, 1.0);
    const std::size_t n = 1 + rng() % 3;
    const int width = 1 + static_cast<int>(rng() % 10);
    NextPmProblem p;
    p.s = static_cast<int>(rng() % 100);
    p.r = p.s + width;
    for (int k = 0; k <= width; ++k) p.setup.push_back(setup(rng));
    for (std::size_t j = 0; j < n; ++j) {
        p.ids.push_back(static_cast<int>(j) + 1);
        std::vector<double> c, D;
        for (int k = 0; k <= width; ++k) c.push_back(cost(rng));
        for (int k = 0; k < width; ++k) D.push_back(unit(rng) < 0.3 ? -cost(rng) : cost(rng));
        p.c.push_back(c);
        p.D.push_back(D);
    }
    return p;
}

NextOmProblem random_om(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> cost(0.0, 100.0), setup(0.0, 40.0);
    const std::size_t n = 1 + rng() % 5;
    NextOmProblem p;
    p.s = static_cast<int>(rng() % 100);
    p.failed = rng() % n;
    p.setup_first = setup(rng);
    p.setup_second = setup(rng);
    for (std::size_t j = 0; j < n; ++j) {
        p.ids.push_back(static_cast<int>(j) + 1);
        p.c_first.push_back(cost(rng));
        p.c_second.push_back(cost(rng));
        p.D_first.push_back(rng() % 3 == 0 ? -cost(rng) : cost(rng));
    }
    return p;
}

// Exhaustive PMSPIC: every z, every renewal subset of open months per component.
double pmspic_brute_force(const PmspicProblem& p) {
    const int T = p.horizon;
    double best = std::numeric_limits<double>::infinity();
    for (unsigned z = 0; z < (1u << T); ++z) {
        std::vector<int> open;
        for (int t = 1; t <= T; ++t)
            if (z >> (t - 1) & 1u) open.push_back(t);
        double total = p.setup * static_cast<double>(open.size());
        for (std::size_t j = 0; j < p.size(); ++j) {
            double bj = std::numeric_limits<double>::infinity();
            for (unsigned sub = 0; sub < (1u << open.size()); ++sub) {
                int prev = 0;
                double acc = 0.0;
                for (std::size_t k = 0; k < open.size(); ++k)
                    if (sub >> k & 1u) {
                        acc += p.cost(j, open[k] - prev);
                        prev = open[k];
                    }
                bj = std::min(bj, acc + p.cost(j, T + 1 - prev));
            }
            total += bj;
        }
        best = std::min(best, total);
    }
    return best;
}

double separable_bound(const PmspicProblem& p) {
    const int T = p.horizon;
    double total = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        std::vector<double> dist(static_cast<std::size_t>(T) + 2, std::numeric_limits<double>::infinity());
        dist[0] = 0.0;
        for (int t = 1; t <= T + 1; ++t)
            for (int u = 0; u < t; ++u) dist[t] = std::min(dist[t], dist[u] + p.cost(j, t - u));
        total += dist.back();
    }
    return total;
}

}  // namespace

int main() {
    std::printf("acceptance suite (OpenMP threads may vary; results are thread-count independent)\n");

    report("Component life moments", [] {
        const auto cfg = fixture("table1.json");
        const double want[] = {89.9, 110.8, 71.4, 97.5};
        bool ok = true;
        std::ostringstream os;
        os << "mu =";
        for (std::size_t j = 0; j < 4; ++j) {
            const double mu = moments(cfg.components[j]).mean;
            const bool hit = std::abs(mu - want[j]) <= 0.05;
            ok = ok && hit;
            os << ' ' << fmt("%.3f", mu) << (hit ? "" : "(!)");
        }
        os << " want (89.9, 110.8, 71.4, 97.5)+-0.05";
        if (!ok) os << "; 100*Gamma(4/3) = 89.298, reference rotor value is inconsistent with alpha=100, beta=3";
        return Outcome{ok, os.str()};
    });

    report("CM-only baseline", [] {
        const double r5 = cm_only_rate(fixture("table1_d5.json"));
        const double r10 = cm_only_rate(fixture("table1_d10.json"));
        const bool ok = std::abs(r5 - 7.396) <= 0.002 && std::abs(r10 - 7.618) <= 0.002;
        return Outcome{ok, "d=5: " + fmt("%.4f", r5) + " (7.396), d=10: " + fmt("%.4f", r10) + " (7.618), +-0.002"};
    });

    report("Study 1 (gearbox, d=10)", [] {
        auto cfg = fixture("gearbox_d10.json");
        cfg.mc.replications = 1000000;
        const auto t0 = Clock::now();
        const auto fp = first_plan(cfg);
        const double secs = seconds_since(t0);
        const bool ok = std::abs(fp.plan.tau - 47) <= 1 && std::abs(fp.plan.objective - 1.90) <= 0.05 && secs <= 60.0;
        return Outcome{ok, "tau=" + std::to_string(fp.plan.tau) + " obj=" + fmt("%.4f", fp.plan.objective) +
                               " at 1e6 reps, build+solve " + fmt("%.1f", secs) + " s (want 47+-1, 1.90+-0.05, <=60 s)"};
    });

    report("Seasonal first plans (d=5)", [] {
        const std::vector<Expect> rows{
            {"table1_d5.json", "constant", 50, 1, {1, 2, 3, 4}, false, 4.964},
            {"summer_d5.json", "summer", 48, 2, {3}, true, 4.863},
            {"winter_d5.json", "winter", 43, 2, {3}, false, 4.876},
        };
        bool ok = true;
        std::string detail;
        for (const auto& e : rows) {
            const auto out = check_row(e, reference_plan(e.fixture), true);
            ok = ok && out.pass;
            detail += (detail.empty() ? "" : "; ") + out.detail;
        }
        return Outcome{ok, detail};
    });

    report("Seasonal first plans (d=10)", [] {
        const std::vector<std::pair<std::string, double>> rows{
            {"winter_d10.json", 5.010}, {"summer_d10.json", 4.979}, {"table1_d10.json", 5.061}};
        bool ok = true;
        std::string detail;
        std::vector<double> objs;
        for (const auto& [name, want] : rows) {
            const auto& fp = reference_plan(name);
            const bool all = fp.plan.set_P == std::vector<int>{1, 2, 3, 4};
            const bool obj = within_rel(fp.plan.objective, want, 0.01);
            ok = ok && all && obj;
            objs.push_back(fp.plan.objective);
            detail += (detail.empty() ? "" : "; ") + name.substr(0, name.find('.')) + ": tau=" +
                      std::to_string(fp.plan.tau) + " P=" + set_text(fp.plan.set_P) + " obj=" +
                      fmt("%.4f", fp.plan.objective) + " (" + fmt("%.3f", want) + ")";
        }
        const bool summer_cheapest = objs[1] < objs[0] && objs[1] < objs[2];
        ok = ok && summer_cheapest;
        detail += summer_cheapest ? "; summer cheapest" : "; summer NOT cheapest";
        return Outcome{ok, detail};
    });

    report("NextPM comparison rows", [] {
        const std::vector<Expect> rows{
            {"table1_d1.json", "d=1", 43, 2, {3}, false, 4.731},
            {"table1_d5.json", "d=5", 50, 1, {1, 2, 3, 4}, false, 4.964},
            {"table1_d10.json", "d=10", 52, 1, {1, 2, 3, 4}, false, 5.061},
        };
        bool ok = true;
        double worst = 0.0;
        std::string detail;
        for (const auto& e : rows) {
            const auto& fp = reference_plan(e.fixture);
            const auto out = check_row(e, fp, false);
            worst = std::max(worst, fp.solve_seconds);
            ok = ok && out.pass;
            detail += (detail.empty() ? "" : "; ") + out.detail;
        }
        ok = ok && worst <= 1e-3;
        detail += "; slowest solve " + fmt("%.1f", worst * 1e6) + " us (<=1 ms)";
        return Outcome{ok, detail};
    });

    report("Solver oracle equivalence", [] {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(20240601);
        int pm_bad = 0, om_bad = 0;
        for (int k = 0; k < 1000; ++k) {
            const auto p = random_pm(rng);
            if (solve_next_pm(p).objective != brute_force_next_pm(p).objective) ++pm_bad;
        }
        for (int k = 0; k < 1000; ++k) {
            const auto p = random_om(rng);
            if (solve_next_om(p).objective != brute_force_next_om(p).objective) ++om_bad;
        }
        const double secs = seconds_since(t0);
        const bool ok = pm_bad == 0 && om_bad == 0 && secs <= 10.0;
        return Outcome{ok, "NextPM mismatches " + std::to_string(pm_bad) + "/1000, NextOM mismatches " +
                               std::to_string(om_bad) + "/1000, " + fmt("%.2f", secs) + " s (<=10 s)"};
    });

    report("PMSPIC small-horizon oracle", [] {
        std::mt19937_64 rng(77);
        int bad = 0;
        for (int k = 0; k < 200; ++k) {
            PmspicProblem p;
            p.horizon = 1 + static_cast<int>(rng() % 8);
            p.setup = static_cast<double>(rng() % 40);
            const std::size_t n = 1 + rng() % 2;
            std::uniform_real_distribution<double> u(1.0, 50.0);
            for (std::size_t j = 0; j < n; ++j) {
                p.ids.push_back(static_cast<int>(j) + 1);
                std::vector<double> row;
                for (int t = 0; t <= p.horizon; ++t) row.push_back(u(rng) + 4.0 * t);
                p.interval_cost.push_back(row);
            }
            const auto plan = solve_pmspic(p);
            const double brute = pmspic_brute_force(p);
            if (std::abs(plan.objective - brute) > 1e-9 * std::max(1.0, brute) || !plan.optimal) ++bad;
        }
        auto cfg = fixture("table1_d5.json");
        McSettings mc = cfg.mc;
        mc.replications = 20000;
        const auto problem = make_pmspic_problem(cfg.components, 5.0, cfg.lambda, 240, mc);
        const auto plan = solve_pmspic_best_effort(problem, 10.0);
        const double root = separable_bound(problem);
        const bool lb_ok = plan.lower_bound <= plan.objective + 1e-9 && plan.lower_bound >= root - 1e-9 &&
                           std::isfinite(plan.objective);
        const auto first = first_pm_extract(problem, plan);
        std::ostringstream os;
        os << "mismatches " << bad << "/200; T=240 d=5 best effort: F=" << fmt("%.2f", plan.objective)
           << " LB=" << fmt("%.2f", plan.lower_bound) << " gap=" << fmt("%.2f", 100.0 * (plan.objective - plan.lower_bound) / plan.objective)
           << "%" << (plan.optimal ? " (optimal)" : "");
        if (first.month)
            os << ", first PM month " << *first.month << " " << set_text(first.components) << " rate "
               << fmt("%.3f", *pmspic_first_block_rate(problem, first)) << " (reference 4.884, not asserted)";
        return Outcome{bad == 0 && lb_ok, os.str()};
    });

    report("Savings study (summer, d=5)", [] {
        const auto cfg = fixture("summer_d5.json");
        StudyOptions opt;
        opt.replications = 500;
        opt.seed = 2024;
        opt.table_replications = 4000;
        const auto rep = run_study(cfg, opt);
        const auto* pm = rep.find(Strategy::NextPm);
        const auto* cm = rep.find(Strategy::CmOnly);
        const double saving = rep.planning_saving_pct.value_or(-1.0);
        const bool saving_ok = saving >= 30.0 && saving <= 40.0;
        const bool ci_ok = pm->mean_rate < cm->mean_rate && pm->ci_high < cm->ci_low;
        std::ostringstream os;
        os << "planning obj " << fmt("%.3f", *pm->planning_objective) << " vs CM-only approx "
           << fmt("%.3f", rep.cm_only_approx) << ": saving " << fmt("%.1f", saving) << "% (30..40); realized NextPM "
           << fmt("%.3f", pm->mean_rate) << " [" << fmt("%.3f", pm->ci_low) << "," << fmt("%.3f", pm->ci_high)
           << "] vs CM-only " << fmt("%.3f", cm->mean_rate) << " [" << fmt("%.3f", cm->ci_low) << ","
           << fmt("%.3f", cm->ci_high) << "]";
        return Outcome{saving_ok && ci_ok, os.str()};
    });

    report("Rolling loop hand traces", [] {
        auto cfg = fixture("table1_d5.json");
        cfg.mc.replications = 20000;
        const auto state = SystemState::fresh(cfg);
        PmPlan plan;
        plan.tau = 50;
        plan.set_P = {1, 2, 3, 4};
        plan.assignment = {50, 50, 50, 50};

        auto none = FailureTrace::none(4);
        const auto a = advance(cfg, state, plan, none, cfg.mc);
        const bool first_ok = a.state.s == 50 && a.state.r == 130 &&
                              a.state.last_maintenance == std::vector<int>{50, 50, 50, 50} && a.events.size() == 1 &&
                              a.events[0].time == 50 && a.events[0].realized_cost == 146.0;

        const double never = 1e9;
        auto trace = FailureTrace::scripted({{never}, {never}, {12.4, never}, {never}}, {0, 0, 0, 0});
        const auto b = advance(cfg, state, plan, trace, cfg.mc);
        const auto om = step_om(cfg, state, 12, 2, cfg.mc);
        double cost = 5.0 + 202.0;
        for (int id : om.plan.set_O) cost += cfg.components[static_cast<std::size_t>(id - 1)].pm_cost;
        const bool second_ok = b.events.size() == 1 && b.events[0].time == 13 && b.events[0].failed == 3 &&
                               b.events[0].components == om.plan.set_O && b.events[0].realized_cost == cost &&
                               b.state.s == 13 && b.state.r == 93 && b.state.last_maintenance[2] == 13;
        std::ostringstream os;
        os << "no failure: s=" << a.state.s << " r=" << a.state.r << " cost=" << (a.events.empty() ? 0.0 : a.events[0].realized_cost)
           << " (50, 130, 146); failure 3@12.4: CM at " << (b.events.empty() ? -1 : b.events[0].time) << " O="
           << set_text(om.plan.set_O) << " s=" << b.state.s << " cost=" << (b.events.empty() ? 0.0 : b.events[0].realized_cost);
        return Outcome{first_ok && second_ok, os.str()};
    });

    std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
