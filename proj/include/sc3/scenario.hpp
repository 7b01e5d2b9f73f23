#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sc3/channel.hpp"
#include "sc3/control.hpp"

namespace sc3 {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One sensing-communication-computing-control loop.
struct LoopSpec {
    double cycle_time_s = 0.0;        // T
    double extraction_ratio = 0.0;    // rho, in (0, 1]
    double processing_difficulty = 0.0; // alpha, cycles/bit
    LinkSpec ul, dl;
    ControlSummary control;
};

struct Budget {
    double total_bandwidth_hz = 0.0; // B_max
    double total_cpu_hz = 0.0;       // f_max
};

enum class SubproblemMethod { DualDecomposition, ProjectedGradient };

// Free parameters of the non-iterative comparison schemes.
struct BaselineParams {
    double equal_t_dl_frac = 1.0 / 3.0; // downlink share of the cycle (equal/proportional)
    double ulcomp_t_dl_s = 1e-3;        // frozen downlink time (ul-comp)
    double dlcomp_t_ul_s = 4e-3;        // frozen uplink time (dl-comp)
};

struct SolverConfig {
    double delta = 1e-3;          // relative objective convergence threshold
    int max_outer_iters = 100;
    double dual_tol = 1e-9;
    double inner_tol = 1e-12;
    double d_init_offset = 1.0;   // bits above log2|det A| for the first iterate
    SubproblemMethod subproblem = SubproblemMethod::DualDecomposition;
    std::vector<double> lqr_requirement; // per-loop cost caps for the rate objectives
    BaselineParams baselines;
};

struct Scenario {
    std::vector<LoopSpec> loops;
    Budget budget;
    SolverConfig solver;
    std::vector<std::string> warnings; // non-fatal load diagnostics
};

namespace detail {

// Accepts raw numbers (base units) or strings with a unit suffix.
inline double parse_quantity(const nlohmann::json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw ConfigError("field '" + field + "': expected number or unit string");
    std::string s = j.get<std::string>();
    size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("field '" + field + "': cannot parse '" + s + "'");
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    std::string unit = s.substr(pos);
    if (unit.empty()) return v;
    if (unit == "Hz") return v;
    if (unit == "kHz") return v * 1e3;
    if (unit == "MHz") return v * 1e6;
    if (unit == "GHz") return v * 1e9;
    if (unit == "s") return v;
    if (unit == "ms") return v * 1e-3;
    if (unit == "us") return v * 1e-6;
    throw ConfigError("field '" + field + "': unknown unit '" + unit + "'");
}

// Matrices are dense row-major arrays or the shorthands
// diag(value, n) / identity(n) / zero(n).
inline Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const std::string& field) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        auto open = s.find('(');
        auto close = s.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw ConfigError("field '" + field + "': bad matrix shorthand '" + s + "'");
        std::string name = s.substr(0, open);
        std::string args = s.substr(open + 1, close - open - 1);
        std::vector<double> vals;
        std::stringstream ss(args);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (name == "identity" && vals.size() == 1)
            return Eigen::MatrixXd::Identity((int)vals[0], (int)vals[0]);
        if (name == "zero" && vals.size() == 1)
            return Eigen::MatrixXd::Zero((int)vals[0], (int)vals[0]);
        if (name == "diag" && vals.size() == 2)
            return vals[0] * Eigen::MatrixXd::Identity((int)vals[1], (int)vals[1]);
        throw ConfigError("field '" + field + "': bad matrix shorthand '" + s + "'");
    }
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ConfigError("field '" + field + "': expected matrix rows or shorthand");
    int n = static_cast<int>(j.size());
    Eigen::MatrixXd m(n, (int)j[0].size());
    for (int r = 0; r < n; ++r) {
        if ((int)j[r].size() != m.cols())
            throw ConfigError("field '" + field + "': ragged matrix rows");
        for (int c = 0; c < m.cols(); ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline LinkSpec parse_link(const nlohmann::json& j, const std::string& field,
                           std::vector<std::string>& warnings) {
    LinkSpec link;
    bool has_se = j.contains("se");
    bool has_ch = j.contains("channel");
    if (!has_se && !has_ch)
        throw ConfigError("field '" + field + "': needs 'se' or 'channel'");
    if (has_ch) {
        const auto& c = j.at("channel");
        ChannelGeometry g;
        g.distance_km = c.at("d_km").get<double>();
        g.carrier_freq_mhz = c.at("fc_mhz").get<double>();
        g.noise_power_dbm = c.value("noise_dbm", -107.0);
        if (c.value("pathloss_log_base", std::string("log10")) == "log2")
            g.pathloss_log_base = PathlossLogBase::Log2;
        double snr_db;
        if (c.contains("target_snr_db")) {
            snr_db = c.at("target_snr_db").get<double>();
        } else {
            // constant-received-SNR convention: power control holds the SNR at
            // the value set by transmit power, path loss, and noise floor
            double tx = c.value("tx_power_dbm", 0.0);
            snr_db = tx - pathloss_db(g) - g.noise_power_dbm;
        }
        link.spectral_efficiency = spectral_efficiency(db_to_linear(snr_db));
    }
    if (has_se) {
        double se = j.at("se").get<double>();
        if (has_ch && std::abs(se - link.spectral_efficiency) > 1e-9 * std::max(1.0, se))
            warnings.push_back("field '" + field + "': explicit se overrides channel-derived value");
        link.spectral_efficiency = se; // direct values win
    }
    if (link.spectral_efficiency <= 0.0)
        throw ConfigError("field '" + field + "': spectral efficiency must be > 0");
    return link;
}

inline ControlSummary parse_control(const nlohmann::json& j, const std::string& field) {
    ControlSummary s;
    if (j.contains("A")) {
        ControlMatrices m;
        m.A = parse_matrix(j.at("A"), field + ".A");
        m.B = parse_matrix(j.at("B"), field + ".B");
        m.Q = parse_matrix(j.at("Q"), field + ".Q");
        m.R = parse_matrix(j.at("R"), field + ".R");
        m.Sigma_v = parse_matrix(j.at("Sigma_v"), field + ".Sigma_v");
        return summarize(m);
    }
    s.n = j.at("n").get<int>();
    s.log2_det_A = j.at("log2_det_A").get<double>();
    s.entropy_power = j.at("entropy_power").get<double>();
    s.det_M_nth_root = j.value("det_M_nth_root", 1.0);
    s.trace_sigma_S = j.value("trace_sigma_S", 0.0);
    if (s.n < 1) throw ConfigError("field '" + field + ".n': must be >= 1");
    if (s.entropy_power < 0) throw ConfigError("field '" + field + ".entropy_power': must be >= 0");
    if (s.det_M_nth_root < 0) throw ConfigError("field '" + field + ".det_M_nth_root': must be >= 0");
    return s;
}

} // namespace detail

inline Scenario load_scenario(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario parse error: ") + e.what());
    }
    Scenario sc;
    try {
        const auto& b = j.at("budget");
        sc.budget.total_bandwidth_hz = detail::parse_quantity(b.at("bandwidth"), "budget.bandwidth");
        sc.budget.total_cpu_hz = detail::parse_quantity(b.at("cpu"), "budget.cpu");
        if (sc.budget.total_bandwidth_hz <= 0.0) throw ConfigError("budget.bandwidth must be > 0");
        if (sc.budget.total_cpu_hz <= 0.0) throw ConfigError("budget.cpu must be > 0");

        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            sc.solver.delta = s.value("delta", 1e-3);
            sc.solver.max_outer_iters = s.value("max_outer_iters", 100);
            sc.solver.dual_tol = s.value("dual_tol", 1e-9);
            sc.solver.inner_tol = s.value("inner_tol", 1e-12);
            sc.solver.d_init_offset = s.value("d_init_offset", 1.0);
            std::string method = s.value("subproblem", std::string("dual"));
            if (method == "dual") sc.solver.subproblem = SubproblemMethod::DualDecomposition;
            else if (method == "pgd") sc.solver.subproblem = SubproblemMethod::ProjectedGradient;
            else throw ConfigError("solver.subproblem must be 'dual' or 'pgd'");
            if (s.contains("lqr_requirement")) {
                const auto& r = s.at("lqr_requirement");
                if (r.is_number()) sc.solver.lqr_requirement.push_back(r.get<double>());
                else sc.solver.lqr_requirement = r.get<std::vector<double>>();
            }
            if (s.contains("baselines")) {
                const auto& bl = s.at("baselines");
                sc.solver.baselines.equal_t_dl_frac = bl.value("equal_t_dl_frac", 1.0 / 3.0);
                if (bl.contains("ulcomp_t_dl"))
                    sc.solver.baselines.ulcomp_t_dl_s =
                        detail::parse_quantity(bl.at("ulcomp_t_dl"), "solver.baselines.ulcomp_t_dl");
                if (bl.contains("dlcomp_t_ul"))
                    sc.solver.baselines.dlcomp_t_ul_s =
                        detail::parse_quantity(bl.at("dlcomp_t_ul"), "solver.baselines.dlcomp_t_ul");
                if (sc.solver.baselines.equal_t_dl_frac <= 0.0 ||
                    sc.solver.baselines.equal_t_dl_frac >= 1.0 ||
                    sc.solver.baselines.ulcomp_t_dl_s <= 0.0 ||
                    sc.solver.baselines.dlcomp_t_ul_s <= 0.0)
                    throw ConfigError("solver.baselines parameters out of range");
            }
            if (sc.solver.delta <= 0 || sc.solver.max_outer_iters <= 0 ||
                sc.solver.dual_tol <= 0 || sc.solver.inner_tol <= 0 || sc.solver.d_init_offset <= 0)
                throw ConfigError("solver parameters must be positive");
        }

        const auto& loops = j.at("loops");
        if (!loops.is_array() || loops.empty())
            throw ConfigError("loops: at least one loop is required");
        for (size_t i = 0; i < loops.size(); ++i) {
            const auto& l = loops[i];
            std::string pfx = "loops[" + std::to_string(i) + "]";
            LoopSpec spec;
            spec.cycle_time_s = detail::parse_quantity(l.at("T"), pfx + ".T");
            spec.extraction_ratio = l.at("rho").get<double>();
            spec.processing_difficulty = l.at("alpha").get<double>();
            if (spec.cycle_time_s <= 0.0) throw ConfigError(pfx + ".T must be > 0");
            if (spec.extraction_ratio <= 0.0 || spec.extraction_ratio > 1.0)
                throw ConfigError(pfx + ".rho must be in (0, 1]");
            if (spec.processing_difficulty <= 0.0) throw ConfigError(pfx + ".alpha must be > 0");
            spec.ul = detail::parse_link(l.at("ul"), pfx + ".ul", sc.warnings);
            spec.dl = detail::parse_link(l.at("dl"), pfx + ".dl", sc.warnings);
            spec.control = detail::parse_control(l.at("control"), pfx + ".control");
            sc.loops.push_back(spec);
        }
        if (sc.solver.lqr_requirement.size() == 1 && sc.loops.size() > 1)
            sc.solver.lqr_requirement.resize(sc.loops.size(), sc.solver.lqr_requirement[0]);
        if (!sc.solver.lqr_requirement.empty() &&
            sc.solver.lqr_requirement.size() != sc.loops.size())
            throw ConfigError("solver.lqr_requirement length must match loops");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario schema error: ") + e.what());
    }
    return sc;
}

// Canonical serialization (base units, resolved control summaries). Reloading
// the output reproduces the scenario; the digest hashes this text.
inline std::string serialize(const Scenario& sc) {
    nlohmann::json j;
    j["budget"]["bandwidth"] = sc.budget.total_bandwidth_hz;
    j["budget"]["cpu"] = sc.budget.total_cpu_hz;
    j["solver"]["delta"] = sc.solver.delta;
    j["solver"]["max_outer_iters"] = sc.solver.max_outer_iters;
    j["solver"]["dual_tol"] = sc.solver.dual_tol;
    j["solver"]["inner_tol"] = sc.solver.inner_tol;
    j["solver"]["d_init_offset"] = sc.solver.d_init_offset;
    j["solver"]["subproblem"] =
        sc.solver.subproblem == SubproblemMethod::DualDecomposition ? "dual" : "pgd";
    if (!sc.solver.lqr_requirement.empty())
        j["solver"]["lqr_requirement"] = sc.solver.lqr_requirement;
    j["solver"]["baselines"]["equal_t_dl_frac"] = sc.solver.baselines.equal_t_dl_frac;
    j["solver"]["baselines"]["ulcomp_t_dl"] = sc.solver.baselines.ulcomp_t_dl_s;
    j["solver"]["baselines"]["dlcomp_t_ul"] = sc.solver.baselines.dlcomp_t_ul_s;
    j["loops"] = nlohmann::json::array();
    for (const auto& l : sc.loops) {
        nlohmann::json jl;
        jl["T"] = l.cycle_time_s;
        jl["rho"] = l.extraction_ratio;
        jl["alpha"] = l.processing_difficulty;
        jl["ul"]["se"] = l.ul.spectral_efficiency;
        jl["dl"]["se"] = l.dl.spectral_efficiency;
        jl["control"]["n"] = l.control.n;
        jl["control"]["log2_det_A"] = l.control.log2_det_A;
        jl["control"]["entropy_power"] = l.control.entropy_power;
        jl["control"]["det_M_nth_root"] = l.control.det_M_nth_root;
        jl["control"]["trace_sigma_S"] = l.control.trace_sigma_S;
        j["loops"].push_back(jl);
    }
    return j.dump(2);
}

// FNV-1a over the canonical serialization; stable across runs and platforms.
inline std::string scenario_digest(const Scenario& sc) {
    std::string text = serialize(sc);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace sc3
