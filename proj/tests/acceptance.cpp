// End-to-end acceptance harness: one pass/fail line per criterion, nonzero
// exit if anything fails. Criteria cover the single-loop closed forms, the
// bandwidth/CPU interchange, solver convergence, scheme comparisons, the
// adequate-CPU closed form, information-shaping objectives, the control-cost
// machinery, and byte-for-byte CLI determinism.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sc3/sc3.hpp"

using namespace sc3;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& note) {
    std::printf("criterion %d [%s] %s%s%s\n", idx, ok ? "PASS" : "FAIL", name.c_str(),
                note.empty() ? "" : " — ", note.c_str());
    if (!ok) ++g_failures;
}

Budget budget(double b, double f) {
    Budget bd;
    bd.total_bandwidth_hz = b;
    bd.total_cpu_hz = f;
    return bd;
}

std::string fnum(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// 1. Single-loop closed form vs. exhaustive grid on random instances.
void criterion1() {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    GridSpec grid;
    grid.points_per_axis = 64;
    bool ok = true;
    std::string note;
    double worst_rel = 0.0;
    for (int i = 0; i < 50 && ok; ++i) {
        LoopSpec sp = reference::make_loop(
            4.0 + 10.0 * unif(rng), 4.0 + 10.0 * unif(rng),
            20.0 + 800.0 * unif(rng), 5.0 + 30.0 * unif(rng),
            0.005 + 0.5 * unif(rng));
        Budget bd = budget(2e5 + 1.5e6 * unif(rng), 2e8 + 3e9 * unif(rng));
        auto [a, c] = solve_single_loop(sp, bd);
        auto g = grid_intraloop(sp, bd, grid);
        if (a.d_sc3 < g.d_sc3 * (1 - 1e-9)) {
            ok = false;
            note = "grid beat the closed form on trial " + std::to_string(i);
        }
        if (a.d_sc3 - g.d_sc3 > g.resolution_bound) {
            ok = false;
            note = "grid gap above resolution bound on trial " + std::to_string(i);
        }
        double bal = std::abs(sp.extraction_ratio * a.d_ul - a.d_dl) /
                     std::max(a.d_dl, 1e-300);
        if (bal > 1e-12) {
            ok = false;
            note = "link information imbalance " + fnum(bal);
        }
        worst_rel = std::max(worst_rel, (a.d_sc3 - g.d_sc3) / std::max(a.d_sc3, 1e-300));
        (void)c;
    }
    if (ok) note = "50 trials, worst grid gap " + fnum(worst_rel) + " rel";
    report(1, "single-loop allocation matches the exhaustive oracle", ok, note);
}

// 2. Bandwidth/CPU interchange: quoted operating points and rate invariance.
void criterion2() {
    bool ok = true;
    std::string note;
    LoopRates r1{1.0, 1.0 / 5e4};
    double p1 = bandwidth_for_cpu(1e6, 2e9, r1, 1e6);
    if (std::abs(p1 - 12.6e3) / 12.6e3 > 0.02) {
        ok = false;
        note = "first exchange point " + fnum(p1) + " Hz";
    }
    LoopRates r2{1.0, 1.0 / 1e5};
    double p2 = bandwidth_for_cpu(2e6, 1e9, r2, 1e6);
    if (std::abs(p2 - 500e3) / 500e3 > 0.02) {
        ok = false;
        note = "second exchange point " + fnum(p2) + " Hz";
    }
    LoopRates r = loop_rates(0.01, 100.0, 10.5, 12.2);
    for (double df : {1e5, 1e6, 5e6}) {
        double db = bandwidth_for_cpu(1e6, 2e9, r, df);
        double before = closed_loop_info(r, 1e6, 2e9, 0.01);
        double after = closed_loop_info(r, 1e6 + db, 2e9 - df, 0.01);
        if (std::abs(after - before) / before > 1e-9) {
            ok = false;
            note = "exchange changed the loop rate by " +
                   fnum(std::abs(after - before) / before);
        }
    }
    if (ok)
        note = "points " + fnum(p1) + " Hz and " + fnum(p2) + " Hz, rate preserved";
    report(2, "bandwidth/CPU interchange matches the quoted operating points", ok, note);
}

// 3. Convergence across 100 randomized networks.
void criterion3() {
    std::mt19937 rng(42);
    bool ok = true;
    std::string note;
    std::vector<int> iters;
    for (int i = 0; i < 100 && ok; ++i) {
        Scenario sc = reference::random_trial(rng);
        SystemSolution sol;
        try {
            sol = sca_optimize(sc.loops, sc.budget, sc.solver);
        } catch (const std::exception& e) {
            ok = false;
            note = std::string("trial ") + std::to_string(i) + " failed: " + e.what();
            break;
        }
        for (size_t j = 1; j < sol.objective_history.size(); ++j)
            if (sol.objective_history[j] >
                sol.objective_history[j - 1] * (1 + 1e-9)) {
                ok = false;
                note = "objective increased on trial " + std::to_string(i);
            }
        iters.push_back(sol.iterations);
    }
    if (ok) {
        std::sort(iters.begin(), iters.end());
        int median = iters[iters.size() / 2];
        if (median > 6) {
            ok = false;
            note = "median outer iterations " + std::to_string(median);
        } else {
            note = "100/100 converged, median " + std::to_string(median) +
                   " iterations, max " + std::to_string(iters.back());
        }
    }
    report(3, "alternating optimization converges monotonically and fast", ok, note);
}

// 4. Scheme comparison across a bandwidth sweep.
void criterion4() {
    Scenario sc = reference::four_loop();
    const std::vector<Scheme> others{Scheme::Equal,       Scheme::Proportional,
                                     Scheme::Tdd,         Scheme::UlComputing,
                                     Scheme::DlComputing, Scheme::UlDl};
    bool ok = true;
    std::string note;
    int idx = 0;
    for (double b = 0.6e6; b <= 2.0e6 + 1; b += 0.2e6, ++idx) {
        Scenario pt = sc;
        pt.budget.total_bandwidth_hz = b;
        double best = sca_optimize(pt.loops, pt.budget, pt.solver).total_cost().as_double();
        double ul = 0, dl = 0, uldl = 0;
        for (Scheme s : others) {
            double c = solve_scheme(s, pt.loops, pt.budget, pt.solver)
                           .total_cost().as_double();
            if (best > c * (1 + 1e-9)) {
                ok = false;
                note = "heuristic beat the optimizer at B=" + fnum(b);
            }
            if (s == Scheme::UlComputing) ul = c;
            if (s == Scheme::DlComputing) dl = c;
            if (s == Scheme::UlDl) uldl = c;
        }
        if (idx < 3 && !(dl >= ul && dl >= uldl)) {
            ok = false;
            note = "partial scheme ordering broken at B=" + fnum(b);
        }
        if (b >= 1e6 - 1) {
            double sum_ms = 0, sum_mm = 0;
            SystemSolution ms = sca_optimize(pt.loops, pt.budget, pt.solver,
                                             SystemObjective::MaxSumInfo);
            SystemSolution mm = sca_optimize(pt.loops, pt.budget, pt.solver,
                                             SystemObjective::MaxMinInfo);
            for (size_t k = 0; k < pt.loops.size(); ++k) {
                sum_ms += ms.loops[k].d;
                sum_mm += mm.loops[k].d;
            }
            if (sum_ms < sum_mm * (1 - 1e-9)) {
                ok = false;
                note = "max-min out-collected max-sum at B=" + fnum(b);
            }
        }
    }
    if (ok) note = "8 bandwidth points, optimizer dominates all 6 heuristics";
    report(4, "optimized allocation dominates every baseline over the sweep", ok, note);
}

// 5. Adequate-CPU closed form against the full optimizer.
void criterion5() {
    Scenario sc = reference::adequate_cpu();
    bool ok = true;
    std::string note;
    double lo_gap = 0, hi_gap = 0;
    for (double b = 0.6e6; b <= 2.0e6 + 1; b += 0.2e6) {
        Scenario pt = sc;
        pt.budget.total_bandwidth_hz = b;
        double full = sca_optimize(pt.loops, pt.budget, pt.solver).total_cost().as_double();
        SystemSolution t2 = solve_scheme(Scheme::Theorem2, pt.loops, pt.budget, pt.solver);
        double gap = (t2.total_cost().as_double() - full) / full;
        if (b <= 0.61e6) lo_gap = gap;
        if (b >= 1.99e6) hi_gap = gap;
        std::vector<double> bv;
        for (const auto& l : t2.loops) bv.push_back(l.b);
        double res = kkt_residual_bandwidth(bv, pt.loops, pt.budget.total_bandwidth_hz);
        if (res > 1e-8) {
            ok = false;
            note = "closed-form stationarity residual " + fnum(res);
        }
    }
    if (lo_gap > 0.05) {
        ok = false;
        note = "low-bandwidth gap " + fnum(lo_gap);
    }
    if (hi_gap > 0.01) {
        ok = false;
        note = "high-bandwidth gap " + fnum(hi_gap);
    }
    if (ok) note = "gap " + fnum(lo_gap) + " at 0.6 MHz, " + fnum(hi_gap) + " at 2 MHz";
    report(5, "closed-form bandwidth matches the optimizer when CPU is ample", ok, note);
}

// 6. Information-shaping objectives: share orderings and symmetric flatness.
void criterion6() {
    bool ok = true;
    std::string note;

    Scenario ent = reference::entropy_spread();
    SystemSolution lqr = sca_optimize(ent.loops, ent.budget, ent.solver);
    for (size_t k = 1; k < ent.loops.size(); ++k)
        if (lqr.loops[k].b < lqr.loops[k - 1].b * (1 - 1e-9)) {
            ok = false;
            note = "cost objective: bandwidth not increasing with entropy";
        }
    SystemSolution ms = sca_optimize(ent.loops, ent.budget, ent.solver,
                                     SystemObjective::MaxSumInfo);
    SystemSolution mm = sca_optimize(ent.loops, ent.budget, ent.solver,
                                     SystemObjective::MaxMinInfo);
    for (size_t k = 0; k < ent.loops.size(); ++k) {
        if (std::abs(ms.loops[k].b - ms.loops[0].b) > 1e-6 * ms.loops[0].b) {
            ok = false;
            note = "max-sum shares not flat across equal-rate loops";
        }
        if (std::abs(mm.loops[k].d - mm.loops[0].d) > 1e-6 * mm.loops[0].d) {
            ok = false;
            note = "max-min information not equalized";
        }
    }

    Scenario rate = reference::rate_spread();
    SystemSolution lqr2 = sca_optimize(rate.loops, rate.budget, rate.solver);
    for (size_t k = 1; k < rate.loops.size(); ++k)
        if (lqr2.loops[k].b > lqr2.loops[k - 1].b * (1 + 1e-9)) {
            ok = false;
            note = "cost objective: faster links did not release bandwidth";
        }
    SystemSolution mm2 = sca_optimize(rate.loops, rate.budget, rate.solver,
                                      SystemObjective::MaxMinInfo);
    for (size_t k = 1; k < rate.loops.size(); ++k)
        if (mm2.loops[k].b > mm2.loops[k - 1].b * (1 + 1e-9)) {
            ok = false;
            note = "max-min: faster links did not release bandwidth";
        }
    if (ok) note = "entropy and link-rate spreads shape shares as expected";
    report(6, "objective choice shapes the bandwidth shares correctly", ok, note);
}

// 7. Control-cost machinery: fixed point defects, inversion, convexity.
void criterion7() {
    bool ok = true;
    std::string note;

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 20 && ok; ++i) {
        int n = 2 + i % 4;
        ControlMatrices m;
        m.A.resize(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) m.A(r, c) = 0.6 * unif(rng) + (r == c ? 1.1 : 0.0);
        m.B = Eigen::MatrixXd::Identity(n, n);
        m.Q = Eigen::MatrixXd::Identity(n, n);
        m.R = Eigen::MatrixXd::Identity(n, n);
        m.Sigma_v = 0.01 * Eigen::MatrixXd::Identity(n, n);
        auto sol = solve_riccati(m);
        Eigen::MatrixXd lhs = m.A.transpose() * sol.S * m.A + m.Q -
                              m.A.transpose() * sol.S * m.B *
                                  (m.B.transpose() * sol.S * m.B + m.R).inverse() *
                                  m.B.transpose() * sol.S * m.A;
        double defect = (lhs - sol.S).norm() / sol.S.norm();
        if (defect > 1e-10) {
            ok = false;
            note = "fixed-point defect " + fnum(defect);
        }
    }

    ControlSummary c = reference::diagonal_summary(10.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 1000 && ok; ++i) {
        double d = c.log2_det_A + (0.05 + 10.0 * u01(rng)) * c.n / 2.0;
        double cost = lqr_lower_bound(c, d).as_double();
        double back = info_for_cost(c, cost);
        if (std::abs(back - d) / d > 1e-10) {
            ok = false;
            note = "cost inversion mismatch " + fnum(std::abs(back - d) / d);
        }
    }

    if (ok) {
        auto fn = [&](const std::vector<double>& x) {
            return lqr_lower_bound(c, x[0]).as_double();
        };
        auto rep = convexity_probe(fn, {c.log2_det_A + 0.25},
                                   {c.log2_det_A + 800.0}, 100000, 9);
        if (rep.violations != 0) {
            ok = false;
            note = std::to_string(rep.violations) + " convexity violations";
        } else {
            note = "fixed point exact, 1000 inversions, 100000 convexity samples clean";
        }
    }
    report(7, "control cost model is exact, invertible, and convex", ok, note);
}

// 8. CLI determinism: identical bytes across repeated runs.
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion8() {
#ifndef SC3_CLI_PATH
    report(8, "command-line outputs are byte-for-byte reproducible", false,
           "CLI path not configured");
    return;
#else
    const std::string cli = SC3_CLI_PATH;
    const std::string dir = "acceptance_tmp";
    std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
    struct Run {
        std::string cmd;
        std::vector<std::string> outputs;
    };
    std::vector<Run> runs = {
        {" solve --scenario builtin:four-loop --out " + dir + "/solve_%d.csv",
         {dir + "/solve_%d.csv"}},
        {" sweep --scenario builtin:four-loop --param budget.bandwidth "
         "--from 6e5 --to 2e6 --steps 8 --scheme proposed --scheme equal "
         "--scheme tdd --out " +
             dir + "/sweep_%d.csv",
         {dir + "/sweep_%d.csv"}},
        {" reproduce --figure fig6 --seed 42 --out " + dir + "/fig6_%d",
         {dir + "/fig6_%d/fig6.csv", dir + "/fig6_%d/fig6_claims.txt"}},
    };
    bool ok = true;
    std::string note;
    auto fill = [](std::string s, int i) {
        for (size_t p; (p = s.find("%d")) != std::string::npos;)
            s.replace(p, 2, std::to_string(i));
        return s;
    };
    for (const auto& r : runs) {
        for (int i = 0; i < 2; ++i) {
            std::string cmd = cli + fill(r.cmd, i) + " > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                ok = false;
                note = "command failed: " + fill(r.cmd, i);
            }
        }
        for (const auto& out : r.outputs) {
            std::string a = slurp(fill(out, 0)), b = slurp(fill(out, 1));
            if (a.empty() || a != b) {
                ok = false;
                note = "outputs differ or missing for " + fill(out, 0);
            }
        }
    }
    if (ok) note = "solve, sweep, and reproduce runs byte-identical";
    report(8, "command-line outputs are byte-for-byte reproducible", ok, note);
#endif
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    if (g_failures == 0) {
        std::printf("acceptance: all 8 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria failed\n", g_failures);
    return 1;
}
