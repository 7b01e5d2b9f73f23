#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sc3/control.hpp"
#include "sc3/intraloop.hpp"
#include "sc3/scenario.hpp"

namespace sc3 {

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scheme {
    Proposed, Equal, Proportional, Tdd,
    UlComputing, DlComputing, UlDl,
    MaxSum, MaxMin, Theorem2
};

enum class SystemObjective { MinTotalLqr, MaxSumInfo, MaxMinInfo };

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Proposed: return "proposed";
        case Scheme::Equal: return "equal";
        case Scheme::Proportional: return "proportional";
        case Scheme::Tdd: return "tdd";
        case Scheme::UlComputing: return "ul-comp";
        case Scheme::DlComputing: return "dl-comp";
        case Scheme::UlDl: return "uldl";
        case Scheme::MaxSum: return "max-sum";
        case Scheme::MaxMin: return "max-min";
        case Scheme::Theorem2: return "theorem2";
    }
    return "?";
}

inline std::optional<Scheme> scheme_from_name(const std::string& s) {
    for (Scheme sc : {Scheme::Proposed, Scheme::Equal, Scheme::Proportional, Scheme::Tdd,
                      Scheme::UlComputing, Scheme::DlComputing, Scheme::UlDl,
                      Scheme::MaxSum, Scheme::MaxMin, Scheme::Theorem2})
        if (scheme_name(sc) == s) return sc;
    return std::nullopt;
}

struct SystemSolution {
    struct PerLoop {
        double b = 0.0;  // loop bandwidth share, Hz
        double f = 0.0;  // loop CPU share, cycles/s
        double d = 0.0;  // closed-loop information, bits
        LqrCost cost = LqrCost::infinite();
        IntraAllocation intra;
    };
    std::vector<PerLoop> loops;
    int iterations = 0;
    std::vector<double> objective_history;
    double dual_bandwidth = 0.0;
    double dual_cpu = 0.0;
    double kkt_residual = 0.0;
    std::string scheme;
    // linearization point of the last convex subproblem (SCA schemes only)
    std::vector<double> d_linearization;

    LqrCost total_cost() const {
        LqrCost t = LqrCost::finite(0.0);
        for (const auto& l : loops) t += l.cost;
        return t;
    }
};

namespace detail {

constexpr double kStabilityMargin = 1e-6; // bits above log2|det A| kept strictly positive

// One loop reduced to what the inter-loop problem needs: the closed-loop
// information is d = 1/(p/b + q/f), and the cost is the LQR bound in d.
struct LoopModel {
    double p = 0.0;  // 1/(r_comm * T)
    double q = 0.0;  // 1/(r_comp * T)
    ControlSummary ctl;
    double d_floor = 0.0;  // stability floor (plus any cost-requirement floor)
    double d_cap = std::numeric_limits<double>::infinity();
};

inline LoopModel make_model(const LoopSpec& spec) {
    LoopRates r = loop_rates(spec);
    LoopModel m;
    m.p = 1.0 / (r.r_comm * spec.cycle_time_s);
    m.q = 1.0 / (r.r_comp * spec.cycle_time_s);
    m.ctl = spec.control;
    m.d_floor = spec.control.log2_det_A + kStabilityMargin;
    return m;
}

inline double harmonic_info(const LoopModel& m, double b, double f) {
    double d = 1.0 / (m.p / b + m.q / f);
    return std::min(d, m.d_cap);
}

inline double cost_value(const LoopModel& m, double d) {
    return lqr_lower_bound(m.ctl, std::min(d, m.d_cap)).as_double();
}

// d(cost)/dd of the finite branch; negative, tends to 0 as d grows.
inline double cost_slope(const LoopModel& m, double d) {
    const double beta = 2.0 / m.ctl.n;
    const double c = m.ctl.n * m.ctl.entropy_power * m.ctl.det_M_nth_root;
    double x = beta * (d - m.ctl.log2_det_A);
    if (x > 500.0) return -c * beta * M_LN2 * std::exp2(-x);
    double y = std::exp2(x);
    double den = (y - 1.0) * (y - 1.0);
    return -c * beta * M_LN2 * y / den;
}

inline double cost_curvature(const LoopModel& m, double d) {
    const double beta = 2.0 / m.ctl.n;
    const double c = m.ctl.n * m.ctl.entropy_power * m.ctl.det_M_nth_root;
    double x = beta * (d - m.ctl.log2_det_A);
    double b2 = beta * M_LN2;
    if (x > 500.0) return c * b2 * b2 * std::exp2(-x);
    double y = std::exp2(x);
    double den = (y - 1.0) * (y - 1.0) * (y - 1.0);
    return c * b2 * b2 * y * (y + 1.0) / den;
}

// ---------------------------------------------------------------------------
// Per-loop subproblem in the scalar u = p/b + q/f.
//
// Given budget prices (lamB, lamF), the cheapest (b, f) achieving a given u
// splits along a fixed ray, with price w/u where w = (sqrt(lamB p) +
// sqrt(lamF q))^2. The linearized constraint gives d = 2 d_prev - d_prev^2 u,
// so the loop reduces to a strictly convex scalar problem in u.
// ---------------------------------------------------------------------------
struct RayPoint {
    double u = 0.0, b = 0.0, f = 0.0, d = 0.0;
};

inline RayPoint solve_loop_price(const LoopModel& m, double d_prev,
                                 double lamB, double lamF, double tol) {
    const double dp2 = d_prev * d_prev;
    const double w_sqrt = std::sqrt(lamB * m.p) + std::sqrt(lamF * m.q);
    const double w = w_sqrt * w_sqrt;
    double u_hi = (2.0 * d_prev - m.d_floor) / dp2;
    double u_lo = std::isfinite(m.d_cap) ? std::max(0.0, (2.0 * d_prev - m.d_cap) / dp2) : 0.0;

    double u;
    if (u_hi <= u_lo || u_hi <= 0.0) {
        // cap at or below the stability floor: the loop cannot be stabilized;
        // it still aims at its cap (the best achievable information)
        u = std::max(u_lo, 1e-300);
    } else {
        auto slope = [&](double x) {
            double d = 2.0 * d_prev - dp2 * x;
            return -dp2 * cost_slope(m, d) - w / (x * x);
        };
        double lo = u_lo;
        if (lo <= 0.0) {
            lo = u_hi * 1e-12;
            while (slope(lo) > 0.0 && lo > u_hi * 1e-250) lo *= 1e-4;
        }
        if (slope(lo) >= 0.0) {
            u = lo;
        } else if (slope(u_hi) <= 0.0) {
            u = u_hi; // pinned at the stability floor
        } else {
            // safeguarded Newton on the monotone slope
            double a = lo, b = u_hi;
            u = 0.5 * (a + b);
            for (int it = 0; it < 200; ++it) {
                double g = slope(u);
                if (g > 0.0) b = u; else a = u;
                if (b - a <= tol * b) break;
                double d = 2.0 * d_prev - dp2 * u;
                double gp = dp2 * dp2 * cost_curvature(m, d) + 2.0 * w / (u * u * u);
                double step = u - g / gp;
                u = (step > a && step < b) ? step : 0.5 * (a + b);
            }
        }
    }

    RayPoint r;
    r.u = u;
    double gamma = lamF / lamB;
    r.b = (m.p + std::sqrt(m.p * m.q * gamma)) / u;
    r.f = (m.q + std::sqrt(m.p * m.q / gamma)) / u;
    r.d = 2.0 * d_prev - dp2 * u;
    return r;
}

// ---------------------------------------------------------------------------
// Minimal-resource frontier: the cheapest (b_k, f_k) that reach per-loop
// per-bit-time targets u_req, parameterized by the price ratio gamma.
// Sum of b is increasing in gamma, sum of f decreasing.
// ---------------------------------------------------------------------------
struct FrontierPoint {
    std::vector<double> b, f;
    double sum_b = 0.0, sum_f = 0.0;
};

inline FrontierPoint frontier_point(const std::vector<LoopModel>& ms,
                                    const std::vector<double>& u_req, double gamma) {
    FrontierPoint fp;
    fp.b.resize(ms.size());
    fp.f.resize(ms.size());
    for (size_t k = 0; k < ms.size(); ++k) {
        double root = std::sqrt(ms[k].p * ms[k].q);
        fp.b[k] = (ms[k].p + root * std::sqrt(gamma)) / u_req[k];
        fp.f[k] = (ms[k].q + root / std::sqrt(gamma)) / u_req[k];
        fp.sum_b += fp.b[k];
        fp.sum_f += fp.f[k];
    }
    return fp;
}

// Feasibility of a set of per-bit-time targets within (B, F); on success the
// returned point uses the bandwidth budget exactly.
inline std::optional<FrontierPoint> feasible_for_targets(
    const std::vector<LoopModel>& ms, const std::vector<double>& u_req,
    double B, double F) {
    double min_b = 0.0;
    for (size_t k = 0; k < ms.size(); ++k) min_b += ms[k].p / u_req[k];
    if (min_b >= B) return std::nullopt;
    double lo = 1e-30, hi = 1e30;
    while (frontier_point(ms, u_req, hi).sum_b < B && hi < 1e290) hi *= 1e4;
    FrontierPoint fp;
    for (int it = 0; it < 200; ++it) {
        double g = std::sqrt(lo * hi);
        fp = frontier_point(ms, u_req, g);
        if (fp.sum_b > B) hi = g; else lo = g;
        if (hi / lo < 1.0 + 1e-14) break;
    }
    fp = frontier_point(ms, u_req, std::sqrt(lo * hi));
    if (fp.sum_f > F * (1.0 + 1e-9)) return std::nullopt;
    return fp;
}

// ---------------------------------------------------------------------------
// Convex subproblem of one SCA round (PB-2 with d and l eliminated), solved
// by Lagrangian dual decomposition: nested bisection on the two budget
// prices, per-loop scalar solves in between.
// ---------------------------------------------------------------------------
struct SubproblemResult {
    std::vector<RayPoint> loops;
    double lamB = 0.0, lamF = 0.0;
};

inline SubproblemResult solve_subproblem_dual(const std::vector<LoopModel>& ms,
                                              const std::vector<double>& d_prev,
                                              double B, double F,
                                              const SolverConfig& cfg,
                                              double lamB_seed, double lamF_seed) {
    const size_t K = ms.size();
    auto sum_f = [&](double lamB, double lamF, std::vector<RayPoint>* out) {
        double s = 0.0;
        for (size_t k = 0; k < K; ++k) {
            RayPoint r = solve_loop_price(ms[k], d_prev[k], lamB, lamF, cfg.inner_tol);
            s += r.f;
            if (out) (*out)[k] = r;
        }
        return s;
    };
    std::vector<RayPoint> pts(K);

    // inner: close the CPU budget for a fixed bandwidth price
    double lamF_warm = lamF_seed;
    auto solve_inner = [&](double lamB) -> double {
        double lo = lamF_warm, hi = lamF_warm;
        int guard = 0;
        while (sum_f(lamB, hi, nullptr) > F && guard++ < 900) hi *= 8.0;
        guard = 0;
        while (sum_f(lamB, lo, nullptr) < F && guard++ < 900) lo /= 8.0;
        if (lo > hi) std::swap(lo, hi);
        if (hi / lo > 1e250)
            throw SolverError("dual search: CPU price failed to bracket the budget gap");
        double lamF = std::sqrt(lo * hi);
        for (int it = 0; it < 300; ++it) {
            lamF = std::sqrt(lo * hi);
            double gap = sum_f(lamB, lamF, nullptr) - F;
            if (std::abs(gap) <= cfg.dual_tol * F) break;
            if (gap > 0.0) lo = lamF; else hi = lamF;
            if (hi / lo < 1.0 + 1e-15) break;
        }
        lamF_warm = lamF;
        return lamF;
    };

    auto band_gap = [&](double lamB, double* lamF_out) {
        double lamF = solve_inner(lamB);
        double s = 0.0;
        sum_f(lamB, lamF, &pts);
        for (const auto& r : pts) s += r.b;
        if (lamF_out) *lamF_out = lamF;
        return s - B;
    };

    double lo = lamB_seed, hi = lamB_seed;
    int guard = 0;
    while (band_gap(hi, nullptr) > 0.0 && guard++ < 900) hi *= 8.0;
    guard = 0;
    while (band_gap(lo, nullptr) < 0.0 && guard++ < 900) lo /= 8.0;
    if (lo > hi) std::swap(lo, hi);
    if (hi / lo > 1e250)
        throw SolverError("dual search: bandwidth price failed to bracket the budget gap");

    double lamB = std::sqrt(lo * hi), lamF = 0.0;
    for (int it = 0; it < 300; ++it) {
        lamB = std::sqrt(lo * hi);
        double gap = band_gap(lamB, &lamF);
        if (std::abs(gap) <= cfg.dual_tol * B) break;
        if (gap > 0.0) lo = lamB; else hi = lamB;
        if (hi / lo < 1.0 + 1e-15) break;
    }
    band_gap(lamB, &lamF);

    SubproblemResult res;
    res.loops = pts;
    res.lamB = lamB;
    res.lamF = lamF;
    return res;
}

// Euclidean projection onto { x >= lower, sum x = total }.
inline void project_simplex(std::vector<double>& x, double total, double lower) {
    const size_t n = x.size();
    std::vector<double> y(n);
    double shifted_total = total - lower * n;
    for (size_t i = 0; i < n; ++i) y[i] = x[i] - lower;
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int rank = 0;
    for (size_t i = 0; i < n; ++i) {
        cum += sorted[i];
        double t = (cum - shifted_total) / static_cast<double>(i + 1);
        if (sorted[i] - t > 0.0) {
            theta = t;
            rank = static_cast<int>(i + 1);
        }
    }
    (void)rank;
    for (size_t i = 0; i < n; ++i) x[i] = std::max(0.0, y[i] - theta) + lower;
}

// Projected-gradient fallback for the same convex subproblem, selectable via
// SolverConfig; floors enforced by quadratic penalty above a feasible start.
inline SubproblemResult solve_subproblem_pgd(const std::vector<LoopModel>& ms,
                                             const std::vector<double>& d_prev,
                                             double B, double F,
                                             const SolverConfig& cfg,
                                             const std::vector<double>& b0,
                                             const std::vector<double>& f0) {
    const size_t K = ms.size();
    const double penalty = 1e8;
    std::vector<double> xb(K), xf(K);
    for (size_t k = 0; k < K; ++k) { xb[k] = b0[k] / B; xf[k] = f0[k] / F; }

    auto d_of = [&](size_t k, double b, double f) {
        return 2.0 * d_prev[k] - d_prev[k] * d_prev[k] * (ms[k].p / b + ms[k].q / f);
    };
    auto objective = [&](const std::vector<double>& vb, const std::vector<double>& vf) {
        double total = 0.0;
        for (size_t k = 0; k < K; ++k) {
            double d = d_of(k, vb[k] * B, vf[k] * F);
            double dc = std::max(d, ms[k].d_floor);
            total += cost_value(ms[k], dc);
            double viol = std::max(0.0, ms[k].d_floor - d) +
                          std::max(0.0, d - std::min(ms[k].d_cap, 2.0 * d_prev[k]));
            total += penalty * viol * viol;
        }
        return total;
    };

    double step = 1e-2;
    double cur = objective(xb, xf);
    std::vector<double> gb(K), gf(K), nb(K), nf(K);
    for (int it = 0; it < 4000; ++it) {
        for (size_t k = 0; k < K; ++k) {
            double b = xb[k] * B, f = xf[k] * F;
            double d = d_of(k, b, f);
            double dc = std::max(d, ms[k].d_floor);
            double slope = cost_slope(ms[k], dc);
            double viol_lo = std::max(0.0, ms[k].d_floor - d);
            double viol_hi = std::max(0.0, d - std::min(ms[k].d_cap, 2.0 * d_prev[k]));
            double chain = slope - 2.0 * penalty * viol_lo + 2.0 * penalty * viol_hi;
            double dp2 = d_prev[k] * d_prev[k];
            gb[k] = chain * dp2 * ms[k].p / (b * b) * B;
            gf[k] = chain * dp2 * ms[k].q / (f * f) * F;
        }
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            for (size_t k = 0; k < K; ++k) {
                nb[k] = xb[k] - step * gb[k];
                nf[k] = xf[k] - step * gf[k];
            }
            project_simplex(nb, 1.0, 1e-9);
            project_simplex(nf, 1.0, 1e-9);
            double val = objective(nb, nf);
            if (val <= cur) {
                double moved = 0.0;
                for (size_t k = 0; k < K; ++k)
                    moved += std::abs(nb[k] - xb[k]) + std::abs(nf[k] - xf[k]);
                xb = nb; xf = nf; cur = val;
                step *= 2.0;
                accepted = true;
                if (moved < 1e-14) it = 4000;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }

    SubproblemResult res;
    res.loops.resize(K);
    double grad_b = 0.0, grad_f = 0.0;
    for (size_t k = 0; k < K; ++k) {
        RayPoint r;
        r.b = xb[k] * B;
        r.f = xf[k] * F;
        r.u = ms[k].p / r.b + ms[k].q / r.f;
        r.d = d_of(k, r.b, r.f);
        res.loops[k] = r;
        double dp2 = d_prev[k] * d_prev[k];
        grad_b += -cost_slope(ms[k], std::max(r.d, ms[k].d_floor)) * dp2 * ms[k].p / (r.b * r.b);
        grad_f += -cost_slope(ms[k], std::max(r.d, ms[k].d_floor)) * dp2 * ms[k].q / (r.f * r.f);
    }
    res.lamB = grad_b / K;
    res.lamF = grad_f / K;
    return res;
}


// ---------------------------------------------------------------------------
// SCA outer loop (Algorithm 1) for the total-LQR objective, shared by the
// proposed scheme and the frozen-stage baselines that keep the harmonic form.
// ---------------------------------------------------------------------------
struct ScaResult {
    std::vector<double> b, f, d_lin, d_prev_final;
    double lamB = 0.0, lamF = 0.0;
    int iterations = 0;
    std::vector<double> history;
};

inline void check_feasible(const std::vector<LoopModel>& ms,
                           const std::vector<double>& d_init,
                           double B, double F) {
    std::vector<double> u_req(ms.size());
    for (size_t k = 0; k < ms.size(); ++k) {
        double target = std::min(ms[k].d_floor, ms[k].d_cap);
        u_req[k] = (2.0 * d_init[k] - target) / (d_init[k] * d_init[k]);
    }
    if (!feasible_for_targets(ms, u_req, B, F)) {
        // name the loops with the largest minimal demands
        FrontierPoint fp = frontier_point(ms, u_req, 1.0);
        std::ostringstream os;
        os << "infeasible: budgets cannot hold every loop above its information floor;"
           << " minimal bandwidth shares:";
        for (size_t k = 0; k < ms.size(); ++k)
            os << " loop" << k << "=" << fp.b[k] / B;
        throw InfeasibleError(os.str());
    }
}

inline ScaResult sca_min_total_lqr(const std::vector<LoopModel>& ms,
                                   double B, double F, const SolverConfig& cfg) {
    const size_t K = ms.size();
    std::vector<double> d_prev(K);
    for (size_t k = 0; k < K; ++k) {
        d_prev[k] = ms[k].ctl.log2_det_A + cfg.d_init_offset;
        // warm start near the equal-share information level: the equal-share
        // point is feasible for its own linearization, and starting there
        // skips the doubling phase of the trust-region-like SCA constraint
        double d_eq = 1.0 / (ms[k].p * K / B + ms[k].q * K / F);
        d_prev[k] = std::max(d_prev[k], 0.9 * d_eq);
        if (std::isfinite(ms[k].d_cap))
            d_prev[k] = std::min(d_prev[k], std::max(ms[k].d_cap, kStabilityMargin));
    }
    check_feasible(ms, d_prev, B, F);

    ScaResult out;
    double prev_obj = std::numeric_limits<double>::infinity();
    double prev_finite = std::numeric_limits<double>::infinity();
    double lamB_seed = 1e-6, lamF_seed = 1e-6;
    std::vector<double> b_last(K, B / K), f_last(K, F / K);
    SubproblemResult sub;
    for (int s = 1; s <= cfg.max_outer_iters; ++s) {
        if (cfg.subproblem == SubproblemMethod::DualDecomposition) {
            sub = solve_subproblem_dual(ms, d_prev, B, F, cfg, lamB_seed, lamF_seed);
            lamB_seed = sub.lamB;
            lamF_seed = sub.lamF;
        } else {
            sub = solve_subproblem_pgd(ms, d_prev, B, F, cfg, b_last, f_last);
        }
        double obj = 0.0, finite_part = 0.0;
        for (size_t k = 0; k < K; ++k) {
            double c = cost_value(ms[k], std::max(sub.loops[k].d, 0.0));
            obj += c;
            if (std::isfinite(c)) finite_part += c;
            b_last[k] = sub.loops[k].b;
            f_last[k] = sub.loops[k].f;
        }
        out.history.push_back(obj);
        out.iterations = s;

        bool converged;
        if (std::isfinite(obj) && std::isfinite(prev_obj)) {
            converged = std::abs(obj - prev_obj) <= cfg.delta * std::abs(prev_obj);
        } else {
            // infinite totals (a capped loop below its floor): fall back to the
            // finite part plus the iterate movement
            double move = 0.0;
            for (size_t k = 0; k < K; ++k)
                move = std::max(move, std::abs(sub.loops[k].d - d_prev[k]) /
                                          std::max(1.0, std::abs(d_prev[k])));
            converged = s > 1 && move <= cfg.delta &&
                        std::abs(finite_part - prev_finite) <=
                            cfg.delta * std::max(1.0, std::abs(prev_finite));
        }
        prev_obj = obj;
        prev_finite = finite_part;
        if (s > 1 && converged) break;
        for (size_t k = 0; k < K; ++k) d_prev[k] = sub.loops[k].d;
    }
    if (out.iterations >= cfg.max_outer_iters)
        throw SolverError("sca: no convergence within max_outer_iters");

    out.b.resize(K);
    out.f.resize(K);
    out.d_lin.resize(K);
    out.d_prev_final.resize(K);
    for (size_t k = 0; k < K; ++k) {
        out.b[k] = sub.loops[k].b;
        out.f[k] = sub.loops[k].f;
        out.d_lin[k] = sub.loops[k].d;
        out.d_prev_final[k] = d_prev[k];
    }
    out.lamB = sub.lamB;
    out.lamF = sub.lamF;
    return out;
}

// ---------------------------------------------------------------------------
// Single-resource water-filling: minimize sum of convex per-loop costs of one
// resource under one budget. slope(k, x) must be increasing in x.
// ---------------------------------------------------------------------------
struct SingleAlloc {
    std::vector<double> x;
    double lambda = 0.0;
    bool binding = true;
};

inline SingleAlloc allocate_single(
    size_t K, const std::function<double(size_t, double)>& slope,
    const std::vector<double>& lo, const std::vector<double>& hi,
    double X, double tol) {
    auto invert = [&](size_t k, double lam) {
        // solve slope(k, x) = -lam on (lo_k, hi_k]
        double a = lo[k], b = hi[k];
        if (!std::isfinite(b)) {
            b = std::max(2.0 * a, 1.0);
            int guard = 0;
            while (slope(k, b) < -lam && guard++ < 600) b *= 4.0;
        } else if (slope(k, b) <= -lam) {
            return b; // saturated
        }
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (a + b);
            if (slope(k, mid) < -lam) a = mid; else b = mid;
            if (b - a <= 1e-14 * b) break;
        }
        return 0.5 * (a + b);
    };

    SingleAlloc res;
    res.x.assign(K, 0.0);
    // lambda -> 0: everyone saturates; check for a non-binding budget
    bool all_finite = true;
    double sat_total = 0.0;
    for (size_t k = 0; k < K; ++k) {
        if (!std::isfinite(hi[k])) { all_finite = false; break; }
        sat_total += hi[k];
    }
    if (all_finite && sat_total <= X) {
        res.x = hi;
        res.lambda = 0.0;
        res.binding = false;
        return res;
    }
    double lam_lo = 1e-300, lam_hi = 1.0;
    auto total = [&](double lam) {
        double s = 0.0;
        for (size_t k = 0; k < K; ++k) s += invert(k, lam);
        return s;
    };
    int guard = 0;
    while (total(lam_hi) > X && guard++ < 900) lam_hi *= 8.0;
    guard = 0;
    lam_lo = lam_hi;
    while (total(lam_lo) < X && guard++ < 900) lam_lo /= 8.0;
    double lam = std::sqrt(lam_lo * lam_hi);
    for (int it = 0; it < 300; ++it) {
        lam = std::sqrt(lam_lo * lam_hi);
        double gap = total(lam) - X;
        if (std::abs(gap) <= tol * X) break;
        if (gap > 0.0) lam_lo = lam; else lam_hi = lam;
        if (lam_hi / lam_lo < 1.0 + 1e-15) break;
    }
    for (size_t k = 0; k < K; ++k) res.x[k] = invert(k, lam);
    res.lambda = lam;
    return res;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Water-filling closed form for the inter-loop bandwidth under adequate CPU,
// with standard active-set clamping outside its validity region.
// ---------------------------------------------------------------------------
inline std::vector<double> closed_form_bandwidth(const std::vector<LoopSpec>& loops,
                                                 double b_max, bool* clamped = nullptr) {
    const size_t K = loops.size();
    std::vector<double> w(K), theta(K), b(K, 0.0);
    for (size_t k = 0; k < K; ++k) {
        const auto& c = loops[k].control;
        double r = loop_rates(loops[k]).r_comm;
        double T = loops[k].cycle_time_s;
        double e_k = std::log2(c.entropy_power) + (2.0 / c.n) * c.log2_det_A;
        w[k] = c.n / (2.0 * r * T);
        theta[k] = std::log2(2.0 * M_LN2 * c.det_M_nth_root * T * r) + e_k;
    }
    std::vector<bool> active(K, true);
    if (clamped) *clamped = false;
    for (int round = 0; round < static_cast<int>(K); ++round) {
        double sw = 0.0, swt = 0.0;
        for (size_t k = 0; k < K; ++k)
            if (active[k]) { sw += w[k]; swt += w[k] * theta[k]; }
        double water = (swt - b_max) / sw; // log2 of the bandwidth price
        bool changed = false;
        for (size_t k = 0; k < K; ++k) {
            if (!active[k]) { b[k] = 0.0; continue; }
            b[k] = w[k] * (theta[k] - water);
            if (b[k] < 0.0) {
                active[k] = false;
                changed = true;
                if (clamped) *clamped = true;
            }
        }
        if (!changed) break;
    }
    for (auto& v : b) v = std::max(v, 0.0);
    return b;
}

// KKT residual of a bandwidth vector for the adequate-CPU bandwidth problem.
inline double kkt_residual_bandwidth(const std::vector<double>& b,
                               const std::vector<LoopSpec>& loops, double b_max) {
    const size_t K = loops.size();
    std::vector<double> g(K);
    double gmax = 0.0;
    for (size_t k = 0; k < K; ++k) {
        const auto& c = loops[k].control;
        double r = loop_rates(loops[k]).r_comm;
        double T = loops[k].cycle_time_s;
        double beta = 2.0 / c.n;
        double coeff = c.n * c.entropy_power * c.det_M_nth_root;
        g[k] = -coeff * beta * M_LN2 * T * r *
               std::exp2(-beta * (T * b[k] * r - c.log2_det_A));
        gmax = std::max(gmax, std::abs(g[k]));
    }
    double lam = 0.0;
    int nact = 0;
    for (size_t k = 0; k < K; ++k)
        if (b[k] > 0.0) { lam += -g[k]; ++nact; }
    lam /= std::max(nact, 1);
    double res = 0.0;
    for (size_t k = 0; k < K; ++k) {
        if (b[k] > 0.0) res = std::max(res, std::abs(g[k] + lam) / std::max(lam, gmax));
        else res = std::max(res, std::max(0.0, -(g[k] + lam)) / std::max(lam, gmax));
    }
    double total = std::accumulate(b.begin(), b.end(), 0.0);
    res = std::max(res, std::abs(total - b_max) / b_max);
    return res;
}

// ---------------------------------------------------------------------------
// KKT residual of a system solution against the final linearized subproblem.
// ---------------------------------------------------------------------------
inline double kkt_residual(const SystemSolution& sol,
                           const std::vector<LoopSpec>& loops, const Budget& budget) {
    if (sol.d_linearization.empty()) return 0.0;
    const size_t K = loops.size();
    double lamB = sol.dual_bandwidth, lamF = sol.dual_cpu;
    double res = 0.0, sum_b = 0.0, sum_f = 0.0;
    for (size_t k = 0; k < K; ++k) {
        detail::LoopModel m = detail::make_model(loops[k]);
        double dp = sol.d_linearization[k];
        double dp2 = dp * dp;
        double b = sol.loops[k].b, f = sol.loops[k].f;
        double d_lin = 2.0 * dp - dp2 * (m.p / b + m.q / f);
        double slope = detail::cost_slope(m, std::max(d_lin, m.d_floor));
        double st_b = slope * dp2 * m.p / (b * b) + lamB;
        double st_f = slope * dp2 * m.q / (f * f) + lamF;
        bool at_floor = d_lin <= m.d_floor * (1.0 + 1e-9);
        double scale_b = std::max(lamB, std::abs(slope) * dp2 * m.p / (b * b));
        double scale_f = std::max(lamF, std::abs(slope) * dp2 * m.q / (f * f));
        if (at_floor) {
            // active information floor: stationarity holds with a sign
            res = std::max(res, std::max(0.0, -st_b) / scale_b);
            res = std::max(res, std::max(0.0, -st_f) / scale_f);
        } else {
            res = std::max(res, std::abs(st_b) / scale_b);
            res = std::max(res, std::abs(st_f) / scale_f);
        }
        sum_b += b;
        sum_f += f;
    }
    res = std::max(res, std::abs(sum_b - budget.total_bandwidth_hz) / budget.total_bandwidth_hz);
    res = std::max(res, std::abs(sum_f - budget.total_cpu_hz) / budget.total_cpu_hz);
    return res;
}

namespace detail {

inline SystemSolution assemble_from_shares(const std::vector<LoopSpec>& loops,
                                           const std::vector<double>& b,
                                           const std::vector<double>& f,
                                           const std::string& name) {
    SystemSolution sol;
    sol.scheme = name;
    for (size_t k = 0; k < loops.size(); ++k) {
        SystemSolution::PerLoop pl;
        pl.b = b[k];
        pl.f = f[k];
        pl.intra = recover_intra(loops[k], b[k], f[k]);
        pl.d = pl.intra.d_sc3;
        pl.cost = lqr_lower_bound(loops[k].control, pl.d);
        sol.loops.push_back(pl);
    }
    return sol;
}

// information floors implied by a per-loop LQR-cost requirement
inline std::vector<double> requirement_floors(const std::vector<LoopSpec>& loops,
                                              const SolverConfig& cfg) {
    if (cfg.lqr_requirement.empty())
        throw std::invalid_argument("rate objectives need solver.lqr_requirement");
    std::vector<double> req(loops.size());
    for (size_t k = 0; k < loops.size(); ++k) {
        if (cfg.lqr_requirement[k] <= loops[k].control.trace_sigma_S)
            throw InfeasibleError("lqr_requirement at or below tr(Sigma_v S) for loop " +
                                  std::to_string(k));
        req[k] = info_for_cost(loops[k].control, cfg.lqr_requirement[k]);
    }
    return req;
}

// Max-min information: bisection on the common information level; for each
// level, the cheapest allocation lies on the two-resource frontier.
inline SystemSolution solve_max_min(const std::vector<LoopSpec>& loops,
                                    const Budget& budget, const SolverConfig& cfg) {
    const size_t K = loops.size();
    std::vector<LoopModel> ms(K);
    for (size_t k = 0; k < K; ++k) ms[k] = make_model(loops[k]);
    std::vector<double> floors = requirement_floors(loops, cfg);
    for (size_t k = 0; k < K; ++k) floors[k] = std::max(floors[k], ms[k].d_floor);

    const double B = budget.total_bandwidth_hz, F = budget.total_cpu_hz;
    auto try_level = [&](double t) -> std::optional<FrontierPoint> {
        std::vector<double> u_req(K);
        for (size_t k = 0; k < K; ++k) u_req[k] = 1.0 / std::max(t, floors[k]);
        return feasible_for_targets(ms, u_req, B, F);
    };

    auto base = try_level(0.0);
    if (!base)
        throw InfeasibleError("max-min: budgets cannot meet the per-loop LQR requirements");
    double hi = 0.0;
    for (size_t k = 0; k < K; ++k)
        hi = std::max(hi, 1.0 / (ms[k].p / B + ms[k].q / F));
    hi *= 1.0000001;
    while (try_level(hi)) hi *= 2.0;
    double lo = 0.0;
    FrontierPoint best = *base;
    for (int it = 0; it < 200; ++it) {
        double t = 0.5 * (lo + hi);
        auto fp = try_level(t);
        if (fp) { lo = t; best = *fp; } else { hi = t; }
        if (hi - lo <= 1e-13 * hi) break;
    }
    SystemSolution sol = assemble_from_shares(loops, best.b, best.f, "max-min");
    double min_d = std::numeric_limits<double>::infinity();
    for (const auto& l : sol.loops) min_d = std::min(min_d, l.d);
    sol.objective_history = {-min_d};
    sol.iterations = 1;
    return sol;
}

// Max-sum information: the exact problem is concave (the harmonic form is
// jointly concave), solved by projected gradient ascent from the max-min
// point. A vanishing proximal pull toward equal shares resolves the flat
// directions of the otherwise LP-like optimum deterministically.
inline SystemSolution solve_max_sum(const std::vector<LoopSpec>& loops,
                                    const Budget& budget, const SolverConfig& cfg) {
    const size_t K = loops.size();
    std::vector<LoopModel> ms(K);
    for (size_t k = 0; k < K; ++k) ms[k] = make_model(loops[k]);
    std::vector<double> floors = requirement_floors(loops, cfg);
    for (size_t k = 0; k < K; ++k) floors[k] = std::max(floors[k], ms[k].d_floor);

    const double B = budget.total_bandwidth_hz, F = budget.total_cpu_hz;
    SystemSolution seed = solve_max_min(loops, budget, cfg);
    std::vector<double> xb(K), xf(K);
    for (size_t k = 0; k < K; ++k) {
        xb[k] = seed.loops[k].b / B;
        xf[k] = seed.loops[k].f / F;
    }

    double scale = 0.0;
    for (size_t k = 0; k < K; ++k) scale += harmonic_info(ms[k], xb[k] * B, xf[k] * F);
    const double prox = 1e-7 * scale;
    const double penalty = 1e6; // per squared bit of floor violation

    auto objective = [&](const std::vector<double>& vb, const std::vector<double>& vf) {
        double total = 0.0;
        for (size_t k = 0; k < K; ++k) {
            double d = 1.0 / (ms[k].p / (vb[k] * B) + ms[k].q / (vf[k] * F));
            total += d;
            double viol = std::max(0.0, floors[k] - d);
            total -= penalty * viol * viol;
            double db = vb[k] - 1.0 / K, df = vf[k] - 1.0 / K;
            total -= prox * (db * db + df * df);
        }
        return total;
    };

    std::vector<double> gb(K), gf(K), nb(K), nf(K);
    double cur = objective(xb, xf);
    std::vector<double> history = {-cur};
    double step = 1e-3;
    for (int it = 0; it < 6000; ++it) {
        for (size_t k = 0; k < K; ++k) {
            double b = xb[k] * B, f = xf[k] * F;
            double d = 1.0 / (ms[k].p / b + ms[k].q / f);
            double chain = 1.0 + 2.0 * penalty * std::max(0.0, floors[k] - d);
            gb[k] = chain * ms[k].p * d * d / (b * b) * B - 2.0 * prox * (xb[k] - 1.0 / K);
            gf[k] = chain * ms[k].q * d * d / (f * f) * F - 2.0 * prox * (xf[k] - 1.0 / K);
        }
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt) {
            for (size_t k = 0; k < K; ++k) {
                nb[k] = xb[k] + step * gb[k];
                nf[k] = xf[k] + step * gf[k];
            }
            project_simplex(nb, 1.0, 1e-9);
            project_simplex(nf, 1.0, 1e-9);
            double val = objective(nb, nf);
            if (val >= cur) {
                double moved = 0.0;
                for (size_t k = 0; k < K; ++k)
                    moved += std::abs(nb[k] - xb[k]) + std::abs(nf[k] - xf[k]);
                xb = nb; xf = nf; cur = val;
                step *= 2.0;
                accepted = true;
                if (moved < 1e-13) it = 6000;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (it % 50 == 0) history.push_back(-cur);
    }
    history.push_back(-cur);

    std::vector<double> b(K), f(K);
    for (size_t k = 0; k < K; ++k) { b[k] = xb[k] * B; f[k] = xf[k] * F; }
    SystemSolution sol = assemble_from_shares(loops, b, f, "max-sum");
    sol.objective_history = std::move(history);
    sol.iterations = static_cast<int>(sol.objective_history.size());
    return sol;
}

} // namespace detail

// ---------------------------------------------------------------------------
// The iterative goal-oriented scheme (Algorithm 1) and the rate objectives.
// ---------------------------------------------------------------------------
inline SystemSolution sca_optimize(const std::vector<LoopSpec>& loops,
                                   const Budget& budget, const SolverConfig& cfg,
                                   SystemObjective objective = SystemObjective::MinTotalLqr) {
    if (loops.empty()) throw std::invalid_argument("sca_optimize: no loops");
    if (objective == SystemObjective::MaxSumInfo)
        return detail::solve_max_sum(loops, budget, cfg);
    if (objective == SystemObjective::MaxMinInfo)
        return detail::solve_max_min(loops, budget, cfg);

    std::vector<detail::LoopModel> ms(loops.size());
    for (size_t k = 0; k < loops.size(); ++k) ms[k] = detail::make_model(loops[k]);
    detail::ScaResult r = detail::sca_min_total_lqr(
        ms, budget.total_bandwidth_hz, budget.total_cpu_hz, cfg);

    SystemSolution sol = detail::assemble_from_shares(loops, r.b, r.f, "proposed");
    sol.iterations = r.iterations;
    sol.objective_history = r.history;
    sol.dual_bandwidth = r.lamB;
    sol.dual_cpu = r.lamF;
    sol.d_linearization = r.d_prev_final;
    sol.kkt_residual = kkt_residual(sol, loops, budget);
    return sol;
}

namespace detail {

inline SystemSolution solve_equal_like(const std::vector<LoopSpec>& loops,
                                       const Budget& budget, const SolverConfig& cfg,
                                       bool proportional) {
    const size_t K = loops.size();
    SystemSolution sol;
    sol.scheme = proportional ? "proportional" : "equal";
    for (size_t k = 0; k < K; ++k) {
        const auto& sp = loops[k];
        double B_loop = budget.total_bandwidth_hz / K;
        double f = budget.total_cpu_hz / K;
        double rho = sp.extraction_ratio;
        IntraAllocation a;
        a.f = f;
        if (proportional) {
            a.b_ul = B_loop / (1.0 + rho);
            a.b_dl = B_loop * rho / (1.0 + rho);
        } else {
            a.b_ul = a.b_dl = 0.5 * B_loop;
        }
        double T = sp.cycle_time_s;
        a.t_dl = cfg.baselines.equal_t_dl_frac * T;
        // remaining time shared so the uplink data are processed in-cycle
        double rest = T - a.t_dl;
        a.t_ul = rest / (1.0 + sp.processing_difficulty * a.b_ul * sp.ul.spectral_efficiency / f);
        a.d_ul = link_bits(a.b_ul, a.t_ul, sp.ul.spectral_efficiency);
        a.t_comp = sp.processing_difficulty * a.d_ul / f;
        a.d_dl = link_bits(a.b_dl, a.t_dl, sp.dl.spectral_efficiency);
        a.d_sc3 = std::min(rho * a.d_ul, a.d_dl);
        SystemSolution::PerLoop pl;
        pl.b = B_loop;
        pl.f = f;
        pl.intra = a;
        pl.d = a.d_sc3;
        pl.cost = lqr_lower_bound(sp.control, pl.d);
        sol.loops.push_back(pl);
    }
    sol.objective_history = {sol.total_cost().as_double()};
    sol.iterations = 1;
    return sol;
}

inline SystemSolution solve_tdd(const std::vector<LoopSpec>& loops, const Budget& budget) {
    const size_t K = loops.size();
    SystemSolution sol;
    sol.scheme = "tdd";
    for (size_t k = 0; k < K; ++k) {
        LoopSpec slot = loops[k];
        slot.cycle_time_s = loops[k].cycle_time_s / K; // equal exclusive slot
        auto [a, cost] = solve_single_loop(slot, budget);
        SystemSolution::PerLoop pl;
        pl.b = budget.total_bandwidth_hz;
        pl.f = budget.total_cpu_hz;
        pl.intra = a;
        pl.d = a.d_sc3;
        pl.cost = cost;
        sol.loops.push_back(pl);
    }
    sol.objective_history = {sol.total_cost().as_double()};
    sol.iterations = 1;
    return sol;
}

inline SystemSolution solve_ul_computing(const std::vector<LoopSpec>& loops,
                                         const Budget& budget, const SolverConfig& cfg) {
    const size_t K = loops.size();
    const double B = budget.total_bandwidth_hz, F = budget.total_cpu_hz;
    const double b_dl_fix = B / (2.0 * K);
    const double t_dl_fix = cfg.baselines.ulcomp_t_dl_s;

    // UL + computing keep the harmonic form with T' = T - t_dl and the
    // downlink acting as a hard information cap
    std::vector<LoopModel> ms(K);
    std::vector<double> caps(K);
    for (size_t k = 0; k < K; ++k) {
        const auto& sp = loops[k];
        double T_eff = sp.cycle_time_s - t_dl_fix;
        if (T_eff <= 0.0) throw InfeasibleError("ul-comp: fixed downlink time exceeds the cycle");
        LoopModel m;
        m.p = 1.0 / (sp.extraction_ratio * sp.ul.spectral_efficiency * T_eff);
        m.q = 1.0 / ((sp.extraction_ratio / sp.processing_difficulty) * T_eff);
        m.ctl = sp.control;
        m.d_floor = sp.control.log2_det_A + kStabilityMargin;
        caps[k] = link_bits(b_dl_fix, t_dl_fix, sp.dl.spectral_efficiency);
        m.d_cap = caps[k];
        ms[k] = m;
    }
    ScaResult r = sca_min_total_lqr(ms, B / 2.0, F, cfg);

    SystemSolution sol;
    sol.scheme = "ul-comp";
    for (size_t k = 0; k < K; ++k) {
        const auto& sp = loops[k];
        double T_eff = sp.cycle_time_s - t_dl_fix;
        IntraAllocation a;
        a.b_ul = r.b[k];
        a.b_dl = b_dl_fix;
        a.f = r.f[k];
        a.d_ul = T_eff / (1.0 / (a.b_ul * sp.ul.spectral_efficiency) +
                          sp.processing_difficulty / a.f);
        a.t_ul = a.d_ul / (a.b_ul * sp.ul.spectral_efficiency);
        a.t_comp = sp.processing_difficulty * a.d_ul / a.f;
        a.t_dl = t_dl_fix;
        a.d_dl = caps[k];
        a.d_sc3 = std::min(sp.extraction_ratio * a.d_ul, a.d_dl);
        SystemSolution::PerLoop pl;
        pl.b = a.b_ul + a.b_dl;
        pl.f = a.f;
        pl.intra = a;
        pl.d = a.d_sc3;
        pl.cost = lqr_lower_bound(sp.control, pl.d);
        sol.loops.push_back(pl);
    }
    sol.iterations = r.iterations;
    sol.objective_history = r.history;
    sol.dual_bandwidth = r.lamB;
    sol.dual_cpu = r.lamF;
    return sol;
}

inline SystemSolution solve_dl_computing(const std::vector<LoopSpec>& loops,
                                         const Budget& budget, const SolverConfig& cfg) {
    const size_t K = loops.size();
    const double B = budget.total_bandwidth_hz, F = budget.total_cpu_hz;
    const double b_ul_fix = B / (2.0 * K);
    const double t_ul_fix = cfg.baselines.dlcomp_t_ul_s;

    std::vector<double> d_up(K), cycles(K), caps(K), t_rest(K);
    for (size_t k = 0; k < K; ++k) {
        const auto& sp = loops[k];
        d_up[k] = link_bits(b_ul_fix, t_ul_fix, sp.ul.spectral_efficiency);
        cycles[k] = sp.processing_difficulty * d_up[k];
        caps[k] = sp.extraction_ratio * d_up[k];
        t_rest[k] = sp.cycle_time_s - t_ul_fix;
        if (t_rest[k] <= 0.0) throw InfeasibleError("dl-comp: fixed uplink time exceeds the cycle");
    }

    auto info = [&](size_t k, double b, double f) {
        double t_dl = t_rest[k] - cycles[k] / f;
        if (t_dl <= 0.0) return 0.0;
        return std::min(caps[k], link_bits(b, t_dl, loops[k].dl.spectral_efficiency));
    };

    // coordinate-wise convex: alternate exact bandwidth and CPU water-fills
    std::vector<double> b(K, B / (2.0 * K)), f(K, F / K);
    double prev_total = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 60; ++round) {
        // bandwidth step (downlink pool B/2), f fixed
        {
            std::vector<double> lo(K), hi(K);
            for (size_t k = 0; k < K; ++k) {
                double t_dl = std::max(t_rest[k] - cycles[k] / f[k], 0.0);
                double y = t_dl * loops[k].dl.spectral_efficiency;
                double a_floor = loops[k].control.log2_det_A + kStabilityMargin;
                if (y <= 0.0 || caps[k] <= a_floor) {
                    // dead loop in b: aim at its cap with minimal waste
                    lo[k] = 0.0;
                    hi[k] = (y > 0.0) ? caps[k] / y : 1e-9 * B;
                } else {
                    lo[k] = a_floor / y;
                    hi[k] = caps[k] / y;
                }
            }
            auto slope = [&](size_t k, double x) {
                double t_dl = std::max(t_rest[k] - cycles[k] / f[k], 0.0);
                double y = t_dl * loops[k].dl.spectral_efficiency;
                double a_floor = loops[k].control.log2_det_A + kStabilityMargin;
                if (y <= 0.0 || caps[k] <= a_floor) return 0.0;
                LoopModel m = make_model(loops[k]);
                return cost_slope(m, std::max(x * y, a_floor * (1.0 + 1e-12))) * y;
            };
            double min_total = std::accumulate(lo.begin(), lo.end(), 0.0);
            if (min_total >= B / 2.0) {
                for (size_t k = 0; k < K; ++k)
                    b[k] = (B / 2.0) * (lo[k] > 0 ? lo[k] / min_total : 0.0);
            } else {
                SingleAlloc al = allocate_single(K, slope, lo, hi, B / 2.0, cfg.dual_tol);
                b = al.x;
            }
        }
        // CPU step, b fixed
        {
            std::vector<double> lo(K), hi(K);
            for (size_t k = 0; k < K; ++k) {
                double y = b[k] * loops[k].dl.spectral_efficiency;
                double a_floor = loops[k].control.log2_det_A + kStabilityMargin;
                lo[k] = cycles[k] / t_rest[k]; // below this the downlink never starts
                double d_max = y * t_rest[k];  // f -> infinity limit
                if (d_max <= a_floor || caps[k] <= a_floor) {
                    hi[k] = lo[k] * (1.0 + 1e-6);
                } else if (caps[k] < d_max) {
                    hi[k] = cycles[k] / (t_rest[k] - caps[k] / y);
                } else {
                    hi[k] = std::numeric_limits<double>::infinity();
                }
                lo[k] *= 1.0 + 1e-12;
            }
            auto slope = [&](size_t k, double x) {
                double y = b[k] * loops[k].dl.spectral_efficiency;
                double a_floor = loops[k].control.log2_det_A + kStabilityMargin;
                double d = y * (t_rest[k] - cycles[k] / x);
                if (d <= a_floor || caps[k] <= a_floor) return 0.0;
                LoopModel m = make_model(loops[k]);
                return cost_slope(m, std::min(d, caps[k])) * y * cycles[k] / (x * x);
            };
            double min_total = 0.0;
            for (size_t k = 0; k < K; ++k) min_total += lo[k];
            if (min_total >= F) {
                for (size_t k = 0; k < K; ++k) f[k] = F * lo[k] / min_total;
            } else {
                SingleAlloc al = allocate_single(K, slope, lo, hi, F, cfg.dual_tol);
                f = al.x;
            }
        }
        double total = 0.0;
        for (size_t k = 0; k < K; ++k) {
            LoopModel m = make_model(loops[k]);
            total += lqr_lower_bound(loops[k].control, info(k, b[k], f[k])).as_double();
        }
        if (std::isfinite(total) && std::isfinite(prev_total) &&
            std::abs(total - prev_total) <= 1e-10 * std::max(1.0, std::abs(prev_total)))
            break;
        prev_total = total;
    }

    SystemSolution sol;
    sol.scheme = "dl-comp";
    for (size_t k = 0; k < K; ++k) {
        const auto& sp = loops[k];
        IntraAllocation a;
        a.b_ul = b_ul_fix;
        a.b_dl = b[k];
        a.f = f[k];
        a.t_ul = t_ul_fix;
        a.t_comp = std::min(cycles[k] / f[k], t_rest[k]);
        a.t_dl = std::max(t_rest[k] - a.t_comp, 0.0);
        a.d_ul = d_up[k];
        a.d_dl = link_bits(a.b_dl, a.t_dl, sp.dl.spectral_efficiency);
        a.d_sc3 = std::min(caps[k], a.d_dl);
        SystemSolution::PerLoop pl;
        pl.b = a.b_ul + a.b_dl;
        pl.f = a.f;
        pl.intra = a;
        pl.d = a.d_sc3;
        pl.cost = lqr_lower_bound(sp.control, pl.d);
        sol.loops.push_back(pl);
    }
    sol.objective_history = {sol.total_cost().as_double()};
    sol.iterations = 1;
    return sol;
}

inline SystemSolution solve_uldl(const std::vector<LoopSpec>& loops,
                                 const Budget& budget, const SolverConfig& cfg) {
    const size_t K = loops.size();
    const double B = budget.total_bandwidth_hz;
    const double f_fix = budget.total_cpu_hz / K;
    std::vector<LoopModel> ms(K);
    std::vector<double> lo(K), hi(K, std::numeric_limits<double>::infinity());
    for (size_t k = 0; k < K; ++k) {
        ms[k] = make_model(loops[k]);
        double d_sat = f_fix / ms[k].q; // bandwidth -> infinity limit
        double a_floor = ms[k].d_floor;
        if (d_sat <= a_floor) {
            // CPU share alone cannot stabilize this loop
            lo[k] = 0.0;
            hi[k] = 1e-9 * B;
        } else {
            // smallest bandwidth that clears the floor
            lo[k] = ms[k].p / (1.0 / a_floor - ms[k].q / f_fix) * (1.0 + 1e-12);
        }
    }
    auto slope = [&](size_t k, double x) {
        if (hi[k] <= 1e-9 * B) return 0.0;
        double d = 1.0 / (ms[k].p / x + ms[k].q / f_fix);
        return cost_slope(ms[k], d) * ms[k].p * d * d / (x * x);
    };
    double min_total = std::accumulate(lo.begin(), lo.end(), 0.0);
    std::vector<double> b(K);
    double lam = 0.0;
    if (min_total >= B) {
        for (size_t k = 0; k < K; ++k) b[k] = B * (lo[k] > 0 ? lo[k] / min_total : 0.0);
    } else {
        SingleAlloc al = allocate_single(K, slope, lo, hi, B, cfg.dual_tol);
        b = al.x;
        lam = al.lambda;
    }
    std::vector<double> f(K, f_fix);
    SystemSolution sol = assemble_from_shares(loops, b, f, "uldl");
    sol.objective_history = {sol.total_cost().as_double()};
    sol.iterations = 1;
    sol.dual_bandwidth = lam;
    return sol;
}

inline SystemSolution solve_theorem2(const std::vector<LoopSpec>& loops,
                                     const Budget& budget) {
    const size_t K = loops.size();
    std::vector<double> b = closed_form_bandwidth(loops, budget.total_bandwidth_hz);
    std::vector<double> f(K, budget.total_cpu_hz / K);
    SystemSolution sol = assemble_from_shares(loops, b, f, "theorem2");
    sol.objective_history = {sol.total_cost().as_double()};
    sol.iterations = 1;
    sol.kkt_residual = kkt_residual_bandwidth(b, loops, budget.total_bandwidth_hz);
    return sol;
}

} // namespace detail

// All comparison schemes behind one entry point.
inline SystemSolution solve_scheme(Scheme scheme, const std::vector<LoopSpec>& loops,
                                   const Budget& budget, const SolverConfig& cfg) {
    switch (scheme) {
        case Scheme::Proposed:
            return sca_optimize(loops, budget, cfg, SystemObjective::MinTotalLqr);
        case Scheme::Equal:
            return detail::solve_equal_like(loops, budget, cfg, false);
        case Scheme::Proportional:
            return detail::solve_equal_like(loops, budget, cfg, true);
        case Scheme::Tdd:
            return detail::solve_tdd(loops, budget);
        case Scheme::UlComputing:
            return detail::solve_ul_computing(loops, budget, cfg);
        case Scheme::DlComputing:
            return detail::solve_dl_computing(loops, budget, cfg);
        case Scheme::UlDl:
            return detail::solve_uldl(loops, budget, cfg);
        case Scheme::MaxSum:
            return sca_optimize(loops, budget, cfg, SystemObjective::MaxSumInfo);
        case Scheme::MaxMin:
            return sca_optimize(loops, budget, cfg, SystemObjective::MaxMinInfo);
        case Scheme::Theorem2:
            return detail::solve_theorem2(loops, budget);
    }
    throw std::invalid_argument("unknown scheme");
}

inline SystemSolution baseline(Scheme scheme, const std::vector<LoopSpec>& loops,
                               const Budget& budget, const SolverConfig& cfg) {
    if (scheme == Scheme::Proposed)
        throw std::invalid_argument("baseline: 'proposed' is not a baseline");
    return solve_scheme(scheme, loops, budget, cfg);
}

} // namespace sc3
