#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "sc3/intraloop.hpp"
#include "sc3/oracle.hpp"
#include "sc3/reference_scenarios.hpp"

using namespace sc3;

namespace {
LoopSpec loop1() { // first loop of the four-loop network
    return reference::make_loop(10.5, 12.2, 100.0, 10.0);
}

Budget budget(double b, double f) {
    Budget bd;
    bd.total_bandwidth_hz = b;
    bd.total_cpu_hz = f;
    return bd;
}
} // namespace

TEST_CASE("bandwidth split") {
    SUBCASE("symmetric links split evenly") {
        auto [bu, bd] = optimal_bandwidth_split(1.0, 8.0, 8.0, 1e6);
        CHECK(bu == doctest::Approx(5e5));
        CHECK(bd == doctest::Approx(5e5));
    }
    SUBCASE("published operating point") {
        auto [bu, bd] = optimal_bandwidth_split(0.01, 10.5, 12.2, 5e5);
        CHECK(bu == doctest::Approx(457.6e3).epsilon(1e-3));
        CHECK(bu / 5e5 == doctest::Approx(0.915).epsilon(1e-3));
        CHECK(bu + bd == doctest::Approx(5e5));
    }
    SUBCASE("small extraction ratio pushes everything uplink") {
        auto [bu, bd] = optimal_bandwidth_split(1e-9, 10.0, 10.0, 1e6);
        CHECK(bu / 1e6 == doctest::Approx(1.0).epsilon(1e-3));
        (void)bd;
    }
}

TEST_CASE("time split") {
    SUBCASE("symmetric pipes with negligible computing") {
        auto [tu, tc, td] = optimal_time_split(1.0, 1e-9, 8.0, 8.0, 5e5, 5e5, 1e12, 0.01);
        CHECK(tu == doctest::Approx(0.005).epsilon(1e-6));
        CHECK(td == doctest::Approx(0.005).epsilon(1e-6));
        CHECK(tc >= 0.0);
    }
    SUBCASE("balances task information across the two links") {
        double rho = 0.01, alpha = 100.0, f = 0.5e9, T = 0.01;
        auto [bu, bd] = optimal_bandwidth_split(rho, 10.5, 12.2, 5e5);
        auto [tu, tc, td] = optimal_time_split(rho, alpha, 10.5, 12.2, bu, bd, f, T);
        double d_ul = link_bits(bu, tu, 10.5);
        double d_dl = link_bits(bd, td, 12.2);
        CHECK(rho * d_ul == doctest::Approx(d_dl).epsilon(1e-12));
        CHECK(tu + tc + td == doctest::Approx(T).epsilon(1e-12));
    }
    SUBCASE("computing time vanishes with infinite CPU") {
        double rho = 0.25;
        auto [tu, tc, td] = optimal_time_split(rho, 100.0, 10.0, 12.0, 4e5, 1e5, 1e15, 0.01);
        CHECK(tc == doctest::Approx(0.0).epsilon(1e-6));
        CHECK(tu / td == doctest::Approx((1e5 * 12.0) / (rho * 4e5 * 10.0)).epsilon(1e-6));
    }
}

TEST_CASE("loop rates") {
    LoopRates r = loop_rates(0.01, 100.0, 10.5, 12.2);
    CHECK(r.r_comm == doctest::Approx(0.0879).epsilon(1e-3));
    CHECK(r.r_comp == doctest::Approx(1e-4));

    // balanced task-level rates collapse to a quarter of either
    LoopRates sym = loop_rates(0.25, 1.0, 8.0, 2.0); // rho*r_ul = r_dl = 2
    CHECK(sym.r_comm == doctest::Approx(0.5));
}

TEST_CASE("closed-loop information") {
    LoopRates r = loop_rates(0.01, 100.0, 10.5, 12.2);
    CHECK(closed_loop_info(r, 5e5, 5e8, 0.01) == doctest::Approx(233.9).epsilon(1e-3));
    CHECK(closed_loop_info(r, 5e5, 1e18, 0.01) ==
          doctest::Approx(0.01 * 5e5 * r.r_comm).epsilon(1e-6));
    CHECK(closed_loop_info(r, 1e18, 5e8, 0.01) ==
          doctest::Approx(0.01 * 5e8 * r.r_comp).epsilon(1e-6));
}

TEST_CASE("weak-link spectral efficiency") {
    CHECK(weak_link_se(0.01, 10.0, 12.0) == doctest::Approx(0.1)); // 0.1 vs 12
    CHECK(weak_link_se(1.0, 8.0, 8.0) == doctest::Approx(2.0));
    // the exact closed-loop rate never exceeds the weak link
    for (double rho : {0.01, 0.3, 1.0})
        for (double ru : {2.0, 8.0, 12.0})
            for (double rd : {2.0, 8.0, 12.0}) {
                LoopRates r = loop_rates(rho, 1.0, ru, rd);
                CHECK(r.r_comm <= std::min(rho * ru, rd) + 1e-12);
            }
}

TEST_CASE("bandwidth and CPU exchange") {
    SUBCASE("first published point") {
        LoopRates r{1.0, 1.0 / 5e4}; // ratio r_comp/r_comm = 1/5e4
        double db = bandwidth_for_cpu(1e6, 2e9, r, 1e6);
        CHECK(db == doctest::Approx(12.6e3).epsilon(0.02));
    }
    SUBCASE("second published point") {
        LoopRates r{1.0, 1.0 / 1e5};
        double db = bandwidth_for_cpu(2e6, 1e9, r, 1e6);
        CHECK(db == doctest::Approx(500e3).epsilon(0.02));
    }
    SUBCASE("exchange preserves closed-loop information") {
        LoopRates r = loop_rates(0.01, 100.0, 10.5, 12.2);
        for (double df : {1e5, 1e6, 1e7}) {
            double b = 1e6, f = 2e9, T = 0.01;
            double db = bandwidth_for_cpu(b, f, r, df);
            double before = closed_loop_info(r, b, f, T);
            double after = closed_loop_info(r, b + db, f - df, T);
            CHECK(after == doctest::Approx(before).epsilon(1e-9));
        }
    }
    SUBCASE("impossible exchanges are rejected") {
        LoopRates r{1.0, 1.0};
        CHECK_THROWS_AS(bandwidth_for_cpu(1e6, 1e3, r, 999.0), InfeasibleExchangeError);
    }
}

TEST_CASE("single-loop solution") {
    auto [alloc, cost] = solve_single_loop(loop1(), budget(5e5, 5e8));
    CHECK(alloc.d_sc3 == doctest::Approx(233.9).epsilon(1e-3));
    CHECK(cost.is_finite()); // 233.9 bits clears the 10-bit floor
    CHECK(alloc.b_ul + alloc.b_dl == doctest::Approx(5e5).epsilon(1e-12));
    CHECK(alloc.t_ul + alloc.t_comp + alloc.t_dl == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(alloc.f == doctest::Approx(5e8));

    SUBCASE("vanishing bandwidth starves the loop") {
        auto [a0, c0] = solve_single_loop(loop1(), budget(0.0, 5e8));
        CHECK(a0.d_sc3 == 0.0);
        CHECK_FALSE(c0.is_finite());
    }
    SUBCASE("balanced symmetric loop") {
        LoopSpec sym = reference::make_loop(8.0, 8.0, 1e-9, 1.0, 1.0);
        auto [a, c] = solve_single_loop(sym, budget(1e6, 1e15));
        CHECK(a.d_sc3 == doctest::Approx(0.01 * 1e6 * 8.0 / 4.0).epsilon(1e-3));
        (void)c;
    }
}

TEST_CASE("single-loop invariants on random instances") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        LoopSpec sp = reference::make_loop(
            4.0 + 9.0 * unif(rng), 4.0 + 9.0 * unif(rng),
            10.0 + 990.0 * unif(rng), 5.0 + 30.0 * unif(rng),
            0.005 + 0.9 * unif(rng));
        Budget bd = budget(2e5 + 1.8e6 * unif(rng), 1e8 + 3.9e9 * unif(rng));
        auto [a, c] = solve_single_loop(sp, bd);
        CHECK(sp.extraction_ratio * a.d_ul == doctest::Approx(a.d_dl).epsilon(1e-12));
        CHECK(a.b_ul + a.b_dl == doctest::Approx(bd.total_bandwidth_hz).epsilon(1e-12));
        CHECK(a.t_ul + a.t_comp + a.t_dl ==
              doctest::Approx(sp.cycle_time_s).epsilon(1e-12));
        CHECK(a.d_sc3 <= std::min(sp.extraction_ratio * a.d_ul, a.d_dl) * (1 + 1e-12));
        // the split recovered from totals reproduces the direct solution
        IntraAllocation r = recover_intra(sp, bd.total_bandwidth_hz, bd.total_cpu_hz);
        CHECK(r.d_sc3 == doctest::Approx(a.d_sc3).epsilon(1e-12));
        (void)c;
    }
}

TEST_CASE("information is monotone in every resource") {
    LoopSpec base = loop1();
    Budget bd = budget(5e5, 5e8);
    double d0 = solve_single_loop(base, bd).first.d_sc3;

    CHECK(solve_single_loop(base, budget(6e5, 5e8)).first.d_sc3 > d0);
    CHECK(solve_single_loop(base, budget(5e5, 6e8)).first.d_sc3 > d0);

    LoopSpec longer = base;
    longer.cycle_time_s *= 1.5;
    CHECK(solve_single_loop(longer, bd).first.d_sc3 > d0);

    LoopSpec richer = base;
    richer.extraction_ratio *= 1.5;
    CHECK(solve_single_loop(richer, bd).first.d_sc3 > d0);

    LoopSpec faster_ul = base;
    faster_ul.ul.spectral_efficiency *= 1.2;
    CHECK(solve_single_loop(faster_ul, bd).first.d_sc3 > d0);

    LoopSpec faster_dl = base;
    faster_dl.dl.spectral_efficiency *= 1.2;
    CHECK(solve_single_loop(faster_dl, bd).first.d_sc3 > d0);

    LoopSpec harder = base;
    harder.processing_difficulty *= 2.0;
    CHECK(solve_single_loop(harder, bd).first.d_sc3 < d0);
}

TEST_CASE("closed form dominates the grid oracle") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    GridSpec grid;
    grid.points_per_axis = 32;
    for (int i = 0; i < 5; ++i) {
        LoopSpec sp = reference::make_loop(
            5.0 + 8.0 * unif(rng), 5.0 + 8.0 * unif(rng),
            50.0 + 500.0 * unif(rng), 10.0 + 20.0 * unif(rng),
            0.01 + 0.5 * unif(rng));
        Budget bd = budget(5e5 + 1e6 * unif(rng), 5e8 + 2e9 * unif(rng));
        auto [a, c] = solve_single_loop(sp, bd);
        auto g = grid_intraloop(sp, bd, grid);
        CHECK(a.d_sc3 >= g.d_sc3 * (1 - 1e-9));
        CHECK(a.d_sc3 - g.d_sc3 <= g.resolution_bound);
        (void)c;
    }
}
