#include <doctest.h>

#include <random>
#include <stdexcept>

#include "nextpm/solver.hpp"

using namespace nextpm;

namespace {

NextPmProblem random_pm(std::mt19937_64& rng, std::size_t n, int width, double p_negative) {
    std::uniform_real_distribution<double> cost(0.0, 100.0), setup(0.0, 30.0), unit(0.0, 1.0);
    NextPmProblem p;
    p.s = static_cast<int>(rng() % 50);
    p.r = p.s + width;
    for (int k = 0; k <= width; ++k) p.setup.push_back(setup(rng));
    for (std::size_t j = 0; j < n; ++j) {
        p.ids.push_back(static_cast<int>(j) + 1);
        std::vector<double> c, D;
        for (int k = 0; k <= width; ++k) c.push_back(cost(rng));
        for (int k = 0; k < width; ++k) D.push_back(unit(rng) < p_negative ? -1.0 - cost(rng) : cost(rng));
        p.c.push_back(c);
        p.D.push_back(D);
    }
    return p;
}

// Coarse integer costs produce many exact ties.
NextPmProblem tied_pm(std::mt19937_64& rng, std::size_t n, int width) {
    NextPmProblem p;
    p.s = 0;
    p.r = width;
    for (int k = 0; k <= width; ++k) p.setup.push_back(static_cast<double>(rng() % 3));
    for (std::size_t j = 0; j < n; ++j) {
        p.ids.push_back(static_cast<int>(j) + 1);
        std::vector<double> c, D;
        for (int k = 0; k <= width; ++k) c.push_back(static_cast<double>((k + 1) * (rng() % 3)));
        for (int k = 0; k < width; ++k) D.push_back(rng() % 4 == 0 ? -1.0 : 1.0);
        p.c.push_back(c);
        p.D.push_back(D);
    }
    return p;
}

NextOmProblem random_om(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> cost(0.0, 100.0), setup(0.0, 40.0);
    NextOmProblem p;
    p.s = 5;
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

}  // namespace

TEST_CASE("NextPM equals brute force on random instances") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 1 + rng() % 3;
        const int width = 1 + static_cast<int>(rng() % 10);
        const auto p = k % 4 == 0 ? tied_pm(rng, n, width) : random_pm(rng, n, width, 0.3);
        const auto exact = solve_next_pm(p);
        const auto brute = brute_force_next_pm(p);
        REQUIRE(exact.objective == brute.objective);
        REQUIRE(exact.tau == brute.tau);
        REQUIRE(exact.set_P == brute.set_P);
        REQUIRE(check_plan(p, exact).empty());
    }
}

TEST_CASE("branch and bound agrees with the partition solver") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 300; ++k) {
        const std::size_t n = 1 + rng() % 6;
        const int width = 1 + static_cast<int>(rng() % 20);
        const auto p = k % 3 == 0 ? tied_pm(rng, n, width) : random_pm(rng, n, width, 0.2);
        const auto a = solve_next_pm(p);
        const auto b = solve_next_pm_branch_and_bound(p);
        REQUIRE(a.objective == b.objective);
        REQUIRE(a.tau == b.tau);
        REQUIRE(a.set_P == b.set_P);
        REQUIRE(check_plan(p, b).empty());
    }
}

TEST_CASE("branch and bound handles more components than the partition cap") {
    std::mt19937_64 rng(3);
    const auto p = random_pm(rng, 12, 15, 0.2);
    CHECK_THROWS_AS(solve_next_pm(p), std::length_error);
    const auto plan = solve_next_pm_branch_and_bound(p);
    CHECK(check_plan(p, plan).empty());
    CHECK(plan.objective == doctest::Approx(pm_objective(p, plan.assignment)));
}

TEST_CASE("hand enumeration of a 2x3 instance") {
    NextPmProblem p;
    p.s = 0;
    p.r = 2;
    p.setup = {4.0, 6.0, 9.0};
    p.ids = {1, 2};
    p.c = {{10.0, 12.0, 30.0}, {8.0, 20.0, 21.0}};
    p.D = {{1.0, 1.0}, {1.0, 1.0}};
    // The nine assignments (month of 1, month of 2) and their costs:
    //   (1,1) 22        (1,2) 14+13=27   (1,3) 14+10=24
    //   (2,1) 12+9=21   (2,2) 19         (2,3) 9+10=19
    //   (3,1) 12+13=25  (3,2) 13+13=26   (3,3) 20
    // (2,2) and (2,3) tie with tau = 2; set_P {1} sorts before {1,2}.
    const auto plan = solve_next_pm(p);
    CHECK(plan.objective == doctest::Approx(19.0));
    CHECK(plan.tau == 2);
    CHECK(plan.set_P == std::vector<int>{1});
    CHECK(brute_force_next_pm(p).set_P == plan.set_P);
}

TEST_CASE("ties prefer the earliest month") {
    NextPmProblem p;
    p.s = 10;
    p.r = 15;
    p.ids = {1};
    p.setup.assign(6, 0.0);
    // (d_t + c_t) / (t - s) = 3 for every month
    for (int k = 0; k <= 5; ++k) p.setup[k] = 1.0 * (k + 1);
    p.c = {{2.0, 4.0, 6.0, 8.0, 10.0, 12.0}};
    p.D = {{1, 1, 1, 1, 1}};
    const auto plan = solve_next_pm(p);
    CHECK(plan.tau == 11);
    CHECK(plan.objective == 3.0);
}

TEST_CASE("negative benefit everywhere defers") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        auto p = random_pm(rng, 1 + rng() % 4, 1 + static_cast<int>(rng() % 12), 1.0);
        const auto plan = solve_next_pm(p);
        CHECK(plan.tau == p.r + 1);
        CHECK(plan.set_P.empty());
        CHECK(plan.deferred(p.r));
        CHECK(brute_force_next_pm(p).objective == plan.objective);
    }
}

TEST_CASE("scaling costs keeps the plan") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        auto p = random_pm(rng, 1 + rng() % 4, 1 + static_cast<int>(rng() % 15), 0.2);
        auto q = p;
        for (auto& d : q.setup) d *= 3.0;
        for (auto& row : q.c)
            for (auto& v : row) v *= 3.0;
        const auto a = solve_next_pm(p);
        const auto b = solve_next_pm(q);
        CHECK(b.objective == doctest::Approx(3.0 * a.objective).epsilon(1e-12));
        CHECK(a.tau == b.tau);
        CHECK(a.set_P == b.set_P);
    }
}

TEST_CASE("objective counts the deferral column") {
    NextPmProblem p;
    p.s = 0;
    p.r = 1;
    p.ids = {1};
    p.setup = {100.0, 7.0};
    p.c = {{1.0, 3.0}};
    p.D = {{-1.0}};
    const auto plan = solve_next_pm(p);
    CHECK(plan.tau == 2);
    CHECK(plan.objective == 5.0);  // (7 + 3) / 2
}

TEST_CASE("plan checker catches violations") {
    NextPmProblem p;
    p.s = 0;
    p.r = 2;
    p.ids = {1, 2};
    p.setup = {1, 1, 1};
    p.c = {{1, 1, 1}, {1, 1, 1}};
    p.D = {{-1, 1}, {1, 1}};
    PmPlan bad;
    bad.assignment = {1, 2};
    bad.tau = 1;
    bad.set_P = {1};
    bad.objective = pm_objective(p, bad.assignment);
    CHECK_FALSE(check_plan(p, bad).empty());
    bad.assignment = {3, 2};
    bad.tau = 2;
    bad.set_P = {1};
    bad.objective = pm_objective(p, bad.assignment);
    CHECK_FALSE(check_plan(p, bad).empty());
}

TEST_CASE("brute force refuses huge instances") {
    std::mt19937_64 rng(6);
    const auto p = random_pm(rng, 5, 40, 0.1);
    CHECK_THROWS_AS(brute_force_next_pm(p), std::length_error);
}

TEST_CASE("NextOM equals brute force on random instances") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 1000; ++k) {
        const auto p = random_om(rng, 1 + rng() % 5);
        const auto exact = solve_next_om(p);
        const auto brute = brute_force_next_om(p);
        REQUIRE(exact.objective == brute.objective);
        REQUIRE(exact.set_O == brute.set_O);
        REQUIRE(check_plan(p, exact).empty());
    }
}

TEST_CASE("NextOM corner cases") {
    NextOmProblem p;
    p.s = 3;
    p.failed = 0;
    p.setup_first = 10.0;
    p.setup_second = 4.0;
    p.ids = {7};
    p.c_first = {50.0};
    p.c_second = {60.0};
    p.D_first = {1.0};
    auto plan = solve_next_om(p);
    CHECK(plan.set_O.empty());
    CHECK_FALSE(plan.second_open);
    CHECK(plan.objective == 10.0);

    p.ids = {1, 2, 3};
    p.failed = 1;
    p.c_first = {1.0, 50.0, 1.0};
    p.c_second = {100.0, 60.0, 100.0};
    p.D_first = {-1.0, 1.0, -0.5};
    plan = solve_next_om(p);
    CHECK(plan.set_O.empty());
    CHECK(plan.second_open);
    CHECK(plan.objective == doctest::Approx(10.0 + (4.0 + 200.0) / 2.0));

    // Cheap now, expensive later: both join the CM occasion.
    p.D_first = {1.0, 1.0, 1.0};
    plan = solve_next_om(p);
    CHECK(plan.set_O == std::vector<int>{1, 3});
    CHECK_FALSE(plan.second_open);
    CHECK(plan.objective == 12.0);
}
