#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "sc3/interloop.hpp"
#include "sc3/intraloop.hpp"
#include "sc3/scenario.hpp"

namespace sc3 {

struct GridAxis {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
};

struct GridSpec {
    int points_per_axis = 64;
    std::vector<GridAxis> axes; // optional; defaults depend on the search

    void validate() const {
        if (points_per_axis < 16)
            throw std::invalid_argument("GridSpec: points_per_axis must be >= 16");
        for (const auto& a : axes) {
            if (!std::isfinite(a.lower) || !std::isfinite(a.upper) || a.lower >= a.upper)
                throw std::invalid_argument("GridSpec: axis bounds must be finite with lower < upper");
        }
    }
};

struct IntraGridResult {
    IntraAllocation best;
    double d_sc3 = 0.0;
    double resolution_bound = 0.0; // Lipschitz estimate x cell diagonal
    long long evaluated = 0;
};

// Exhaustive search over (b_ul fraction, t_ul fraction, t_dl fraction) with
// the cycle-time constraint filtering infeasible cells. Fractions are i/N so
// a doubled grid contains every coarse point.
inline IntraGridResult grid_intraloop(const LoopSpec& spec, const Budget& budget,
                                      const GridSpec& grid) {
    grid.validate();
    const int N = grid.points_per_axis;
    const double B = budget.total_bandwidth_hz;
    const double F = budget.total_cpu_hz;
    const double T = spec.cycle_time_s;
    const double rho = spec.extraction_ratio;
    const double alpha = spec.processing_difficulty;
    const double ru = spec.ul.spectral_efficiency;
    const double rd = spec.dl.spectral_efficiency;

    auto evaluate = [&](double bf, double tu_f, double td_f, IntraAllocation* out) {
        double t_ul = tu_f * T, t_dl = td_f * T;
        double t_comp = T - t_ul - t_dl;
        if (t_comp < 0.0) return -1.0;
        double b_ul = bf * B, b_dl = B - b_ul;
        double d_raw = link_bits(b_ul, t_ul, ru);
        double d_ul = std::min(d_raw, F * t_comp / alpha); // processed share
        double d_dl = link_bits(b_dl, t_dl, rd);
        double d = std::min(rho * d_ul, d_dl);
        if (out) {
            out->b_ul = b_ul;
            out->b_dl = b_dl;
            out->t_ul = t_ul;
            out->t_comp = t_comp;
            out->t_dl = t_dl;
            out->f = F;
            out->d_ul = d_ul;
            out->d_dl = d_dl;
            out->d_sc3 = d;
        }
        return d;
    };

    IntraGridResult res;
    double best = -1.0;
    double bi = 0, bj = 0, bk = 0;
    for (int i = 1; i < N; ++i) {
        double bf = static_cast<double>(i) / N;
        for (int j = 1; j < N; ++j) {
            double tu = static_cast<double>(j) / N;
            for (int k = 1; k < N; ++k) {
                double td = static_cast<double>(k) / N;
                if (tu + td >= 1.0) break;
                double d = evaluate(bf, tu, td, nullptr);
                ++res.evaluated;
                if (d > best) {
                    best = d;
                    bi = bf; bj = tu; bk = td;
                }
            }
        }
    }
    if (best < 0.0) throw std::invalid_argument("grid_intraloop: empty feasible grid");
    evaluate(bi, bj, bk, &res.best);
    res.d_sc3 = best;

    // sampled finite differences around the best cell give the Lipschitz scale
    double h = 1.0 / N;
    double lip = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        for (double sgn : {-1.0, 1.0}) {
            double x = bi + (axis == 0 ? sgn * h : 0.0);
            double y = bj + (axis == 1 ? sgn * h : 0.0);
            double z = bk + (axis == 2 ? sgn * h : 0.0);
            if (x <= 0.0 || x >= 1.0 || y <= 0.0 || z <= 0.0 || y + z >= 1.0) continue;
            double d = evaluate(x, y, z, nullptr);
            if (d >= 0.0) lip = std::max(lip, std::abs(d - best) / h);
        }
    }
    res.resolution_bound = lip * h * std::sqrt(3.0);
    return res;
}

struct InterGridResult {
    std::vector<double> b, f;
    double total_cost = 0.0;
    double resolution_bound = 0.0;
    long long evaluated = 0;
};

namespace detail {

inline void compositions(int total, int parts, std::vector<int>& cur,
                         const std::function<void(const std::vector<int>&)>& fn) {
    if (parts == 1) {
        if (total >= 1) {
            cur.push_back(total);
            fn(cur);
            cur.pop_back();
        }
        return;
    }
    for (int i = 1; i <= total - (parts - 1); ++i) {
        cur.push_back(i);
        compositions(total - i, parts - 1, cur, fn);
        cur.pop_back();
    }
}

} // namespace detail

// Exhaustive search of the inter-loop shares over the two simplices; costs
// are exact because the intra-loop allocation is closed-form.
inline InterGridResult grid_interloop(const std::vector<LoopSpec>& loops,
                                      const Budget& budget, const GridSpec& grid) {
    grid.validate();
    const size_t K = loops.size();
    if (K > 3)
        throw std::invalid_argument(
            "grid_interloop: refusing K > 3 (exhaustive search over two simplices is "
            "exponential); verify a K <= 3 subset instead");
    const int N = grid.points_per_axis;
    const double B = budget.total_bandwidth_hz, F = budget.total_cpu_hz;

    std::vector<LoopRates> rates(K);
    for (size_t k = 0; k < K; ++k) rates[k] = loop_rates(loops[k]);
    auto total_cost = [&](const std::vector<double>& b, const std::vector<double>& f) {
        LqrCost t = LqrCost::finite(0.0);
        for (size_t k = 0; k < K; ++k) {
            double d = closed_loop_info(rates[k], b[k], f[k], loops[k].cycle_time_s);
            t += lqr_lower_bound(loops[k].control, d);
        }
        return t.as_double();
    };

    std::vector<std::vector<double>> b_points, f_points;
    std::vector<int> cur;
    detail::compositions(N, static_cast<int>(K), cur, [&](const std::vector<int>& c) {
        std::vector<double> b(K), f(K);
        for (size_t k = 0; k < K; ++k) {
            b[k] = B * c[k] / N;
            f[k] = F * c[k] / N;
        }
        b_points.push_back(b);
        f_points.push_back(f);
    });

    InterGridResult res;
    double best = std::numeric_limits<double>::infinity();
    size_t bb = 0, bf = 0;
    for (size_t i = 0; i < b_points.size(); ++i) {
        for (size_t j = 0; j < f_points.size(); ++j) {
            double c = total_cost(b_points[i], f_points[j]);
            ++res.evaluated;
            if (c < best) {
                best = c;
                bb = i;
                bf = j;
            }
        }
    }
    res.b = b_points[bb];
    res.f = f_points[bf];
    res.total_cost = best;

    // finite-difference Lipschitz estimate in share space around the best cell
    double h = 1.0 / N;
    double lip = 0.0;
    if (std::isfinite(best) && K >= 2) {
        for (size_t k = 0; k + 1 < K; ++k) {
            for (double sgn : {-1.0, 1.0}) {
                auto b = res.b;
                auto f = res.f;
                double shift = sgn * h;
                if (b[k] + shift * B <= 0.0 || b[k + 1] - shift * B <= 0.0) continue;
                b[k] += shift * B;
                b[k + 1] -= shift * B;
                double c = total_cost(b, res.f);
                if (std::isfinite(c)) lip = std::max(lip, std::abs(c - best) / h);
                f[k] += shift * F;
                f[k + 1] -= shift * F;
                c = total_cost(res.b, f);
                if (std::isfinite(c)) lip = std::max(lip, std::abs(c - best) / h);
            }
        }
    }
    res.resolution_bound = lip * h * std::sqrt(2.0 * std::max<size_t>(K - 1, 1));
    return res;
}

struct ProbeReport {
    long long samples = 0;
    long long violations = 0;
    double worst_gap = 0.0; // most positive f(mid) - avg, scaled
};

// Midpoint-convexity probe over a box domain; pairs are drawn from a seeded
// generator so reports are reproducible.
inline ProbeReport convexity_probe(
    const std::function<double(const std::vector<double>&)>& fn,
    const std::vector<double>& lower, const std::vector<double>& upper,
    long long samples, unsigned seed, double tol = 1e-9) {
    if (lower.size() != upper.size() || lower.empty())
        throw std::invalid_argument("convexity_probe: bad domain");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const size_t n = lower.size();
    std::vector<double> x1(n), x2(n), mid(n);
    ProbeReport rep;
    for (long long s = 0; s < samples; ++s) {
        for (size_t i = 0; i < n; ++i) {
            x1[i] = lower[i] + (upper[i] - lower[i]) * unif(rng);
            x2[i] = lower[i] + (upper[i] - lower[i]) * unif(rng);
            mid[i] = 0.5 * (x1[i] + x2[i]);
        }
        double f1 = fn(x1), f2 = fn(x2);
        if (!std::isfinite(f1) || !std::isfinite(f2)) continue;
        double fm = fn(mid);
        ++rep.samples;
        double avg = 0.5 * (f1 + f2);
        double scale = std::max({1.0, std::abs(f1), std::abs(f2)});
        if (!std::isfinite(fm)) {
            ++rep.violations;
            rep.worst_gap = std::numeric_limits<double>::infinity();
            continue;
        }
        double gap = (fm - avg) / scale;
        if (gap > tol) {
            ++rep.violations;
            rep.worst_gap = std::max(rep.worst_gap, gap);
        }
    }
    return rep;
}

} // namespace sc3
