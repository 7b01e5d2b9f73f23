#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "sc3/interloop.hpp"
#include "sc3/scenario.hpp"

#define SC3_VERSION "1.0.0"

namespace sc3 {

// All floating-point output at 12 significant digits.
inline std::string fmt12(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string solver_config_echo(const SolverConfig& cfg) {
    std::ostringstream os;
    os << "delta=" << fmt12(cfg.delta)
       << " max_outer_iters=" << cfg.max_outer_iters
       << " dual_tol=" << fmt12(cfg.dual_tol)
       << " inner_tol=" << fmt12(cfg.inner_tol)
       << " d_init_offset=" << fmt12(cfg.d_init_offset)
       << " subproblem="
       << (cfg.subproblem == SubproblemMethod::DualDecomposition ? "dual" : "pgd");
    if (!cfg.lqr_requirement.empty()) {
        os << " lqr_requirement=";
        for (size_t i = 0; i < cfg.lqr_requirement.size(); ++i)
            os << (i ? "," : "") << fmt12(cfg.lqr_requirement[i]);
    }
    return os.str();
}

// Leading '#' lines carried by every output file for provenance.
inline std::string provenance_header(const Scenario& sc, const std::string& what) {
    std::ostringstream os;
    os << "# sc3 " << SC3_VERSION << "\n";
    os << "# " << what << "\n";
    os << "# scenario_digest: " << scenario_digest(sc) << "\n";
    os << "# solver: " << solver_config_echo(sc.solver) << "\n";
    return os.str();
}

inline const std::string kLoopCsvHeader =
    "loop_id,b_ul_hz,b_dl_hz,t_ul_s,t_comp_s,t_dl_s,f_hz,d_sc3_bits,lqr_cost";

inline std::string loop_csv_row(const std::string& id, const SystemSolution::PerLoop& pl) {
    std::ostringstream os;
    os << id << ','
       << fmt12(pl.intra.b_ul) << ',' << fmt12(pl.intra.b_dl) << ','
       << fmt12(pl.intra.t_ul) << ',' << fmt12(pl.intra.t_comp) << ','
       << fmt12(pl.intra.t_dl) << ',' << fmt12(pl.f) << ','
       << fmt12(pl.d) << ',' << fmt12(pl.cost.as_double());
    return os.str();
}

inline SystemSolution::PerLoop totals_row(const SystemSolution& sol) {
    SystemSolution::PerLoop t;
    for (const auto& l : sol.loops) {
        t.intra.b_ul += l.intra.b_ul;
        t.intra.b_dl += l.intra.b_dl;
        t.intra.t_ul += l.intra.t_ul;
        t.intra.t_comp += l.intra.t_comp;
        t.intra.t_dl += l.intra.t_dl;
        t.f += l.f;
        t.d += l.d;
    }
    t.cost = sol.total_cost();
    return t;
}

inline std::string solution_csv(const Scenario& sc, const SystemSolution& sol) {
    std::ostringstream os;
    os << provenance_header(sc, "scheme: " + sol.scheme);
    os << "# iterations: " << sol.iterations << "\n";
    os << "# kkt_residual: " << fmt12(sol.kkt_residual) << "\n";
    os << kLoopCsvHeader << "\n";
    for (size_t k = 0; k < sol.loops.size(); ++k)
        os << loop_csv_row(std::to_string(k), sol.loops[k]) << "\n";
    os << loop_csv_row("TOTAL", totals_row(sol)) << "\n";
    return os.str();
}

inline std::string sweep_csv_header() {
    return "param,param_value,scheme," + kLoopCsvHeader;
}

inline void append_sweep_rows(std::ostringstream& os, const std::string& param,
                              double value, const SystemSolution& sol) {
    for (size_t k = 0; k < sol.loops.size(); ++k)
        os << param << ',' << fmt12(value) << ',' << sol.scheme << ','
           << loop_csv_row(std::to_string(k), sol.loops[k]) << "\n";
    os << param << ',' << fmt12(value) << ',' << sol.scheme << ','
       << loop_csv_row("TOTAL", totals_row(sol)) << "\n";
}

} // namespace sc3
