#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "sc3/control.hpp"
#include "sc3/scenario.hpp"

namespace sc3 {

// One loop's internal split of its bandwidth, time, and CPU allocation.
struct IntraAllocation {
    double b_ul = 0.0, b_dl = 0.0;          // Hz
    double t_ul = 0.0, t_dl = 0.0, t_comp = 0.0; // s
    double f = 0.0;                          // cycles/s
    double d_ul = 0.0, d_dl = 0.0, d_sc3 = 0.0;  // bits
};

// Closed-loop spectral efficiency (bits/s/Hz) and computing efficiency
// (bits/cycle) of a whole loop.
struct LoopRates {
    double r_comm = 0.0;
    double r_comp = 0.0;
};

// Optimal UL/DL bandwidth split: b_ul/b_dl = sqrt(r_dl / (rho r_ul)).
inline std::pair<double, double> optimal_bandwidth_split(double rho, double r_ul,
                                                         double r_dl, double b_total) {
    double su = std::sqrt(rho * r_ul);
    double sd = std::sqrt(r_dl);
    double b_ul = sd * b_total / (su + sd);
    return {b_ul, b_total - b_ul};
}

// Optimal time split given a bandwidth split and CPU frequency. The
// denominator is the total per-bit time of the loop's three stages.
inline std::tuple<double, double, double> optimal_time_split(
    double rho, double alpha, double r_ul, double r_dl,
    double b_ul, double b_dl, double f, double T) {
    double denom = 1.0 / (rho * b_ul * r_ul) + alpha / (rho * f) + 1.0 / (b_dl * r_dl);
    double t_ul = (1.0 / (rho * b_ul * r_ul)) / denom * T;
    double t_dl = (1.0 / (b_dl * r_dl)) / denom * T;
    double t_comp = T - t_ul - t_dl;
    return {t_ul, t_comp, t_dl};
}

inline LoopRates loop_rates(double rho, double alpha, double r_ul, double r_dl) {
    double su = std::sqrt(rho * r_ul);
    double sd = std::sqrt(r_dl);
    LoopRates r;
    r.r_comm = rho * r_ul * r_dl / ((su + sd) * (su + sd));
    r.r_comp = rho / alpha;
    return r;
}

inline LoopRates loop_rates(const LoopSpec& spec) {
    return loop_rates(spec.extraction_ratio, spec.processing_difficulty,
                      spec.ul.spectral_efficiency, spec.dl.spectral_efficiency);
}

// Closed-loop information of one cycle at a given bandwidth/CPU operating point.
inline double closed_loop_info(const LoopRates& rates, double b, double f, double T) {
    return T / (1.0 / (b * rates.r_comm) + 1.0 / (f * rates.r_comp));
}

// Weak-link approximation of the closed-loop SE. Reporting only; solvers use
// the exact expression.
inline double weak_link_se(double rho, double r_ul, double r_dl,
                           double dominance_factor = 100.0) {
    double task_ul = rho * r_ul;
    double hi = std::max(task_ul, r_dl);
    double lo = std::min(task_ul, r_dl);
    if (hi > dominance_factor * lo) return lo;
    return task_ul / 4.0;
}

struct InfeasibleExchangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bandwidth needed to give up delta_f of CPU at constant closed-loop
// information.
inline double bandwidth_for_cpu(double b, double f, const LoopRates& rates, double delta_f) {
    if (delta_f <= 0.0 || delta_f >= f)
        throw std::invalid_argument("bandwidth_for_cpu: need 0 < delta_f < f");
    double denom = (rates.r_comp / rates.r_comm) * (f * f / (delta_f * b) - f / b) - 1.0;
    if (denom <= 0.0)
        throw InfeasibleExchangeError("bandwidth_for_cpu: no finite bandwidth restores this exchange");
    return b / denom;
}

// Full single-loop optimum: CPU pinned at its maximum, bandwidth split per the
// closed form, time split balancing the three stages.
inline std::pair<IntraAllocation, LqrCost> solve_single_loop(const LoopSpec& spec,
                                                             const Budget& budget) {
    IntraAllocation a;
    if (budget.total_bandwidth_hz <= 0.0 || spec.cycle_time_s <= 0.0) {
        // degenerate budgets yield an all-zero allocation, so sweeps stay total
        return {a, LqrCost::infinite()};
    }
    double rho = spec.extraction_ratio;
    double r_ul = spec.ul.spectral_efficiency;
    double r_dl = spec.dl.spectral_efficiency;
    double T = spec.cycle_time_s;
    a.f = budget.total_cpu_hz;
    std::tie(a.b_ul, a.b_dl) = optimal_bandwidth_split(rho, r_ul, r_dl, budget.total_bandwidth_hz);
    std::tie(a.t_ul, a.t_comp, a.t_dl) = optimal_time_split(
        rho, spec.processing_difficulty, r_ul, r_dl, a.b_ul, a.b_dl, a.f, T);
    a.d_ul = link_bits(a.b_ul, a.t_ul, r_ul);
    a.d_dl = link_bits(a.b_dl, a.t_dl, r_dl);
    a.d_sc3 = closed_loop_info(loop_rates(spec), budget.total_bandwidth_hz, a.f, T);
    return {a, lqr_lower_bound(spec.control, a.d_sc3)};
}

// Recover a loop's internal split from its inter-loop (bandwidth, cpu) share.
inline IntraAllocation recover_intra(const LoopSpec& spec, double b_k, double f_k) {
    Budget sub{b_k, f_k};
    return solve_single_loop(spec, sub).first;
}

} // namespace sc3
