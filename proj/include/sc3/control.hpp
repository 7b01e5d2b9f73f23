#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sc3/cost.hpp"

namespace sc3 {

// Scalar constants of one loop's control problem. Everything the LQR bound
// needs; scenarios may supply these directly instead of full matrices.
struct ControlSummary {
    int n = 0;                    // state dimension
    double log2_det_A = 0.0;      // intrinsic entropy
    double entropy_power = 0.0;   // N(v)
    double det_M_nth_root = 0.0;  // |det M|^(1/n)
    double trace_sigma_S = 0.0;   // tr(Sigma_v S)
};

struct ControlMatrices {
    Eigen::MatrixXd A, B, Q, R, Sigma_v;
};

struct RiccatiSolution {
    Eigen::MatrixXd S, M;
    double residual = 0.0;
    int iterations = 0;
};

struct RiccatiError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline double riccati_defect(const ControlMatrices& m,
                             const Eigen::MatrixXd& S, const Eigen::MatrixXd& M) {
    Eigen::MatrixXd dS = S - (m.Q + m.A.transpose() * (S - M) * m.A);
    Eigen::MatrixXd dM = M - S.transpose() * m.B *
        (m.R + m.B.transpose() * S * m.B).inverse() * m.B.transpose() * S;
    return std::max(dS.cwiseAbs().maxCoeff(), dM.cwiseAbs().maxCoeff());
}
} // namespace detail

// Fixed-point iteration on the coupled Riccati pair, initialized at S = Q.
inline RiccatiSolution solve_riccati(const ControlMatrices& m,
                                     double tol = 1e-10, int max_iter = 10000) {
    const auto n = m.A.rows();
    if (m.B.rows() != n || m.Q.rows() != n || m.R.rows() != n)
        throw std::invalid_argument("solve_riccati: matrix dimensions disagree");

    Eigen::MatrixXd S = m.Q;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    double defect = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::MatrixXd inner = m.R + m.B.transpose() * S * m.B;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(inner);
        if (!lu.isInvertible())
            throw RiccatiError("solve_riccati: singular R + B'SB at iteration " + std::to_string(it));
        M = S.transpose() * m.B * lu.inverse() * m.B.transpose() * S;
        Eigen::MatrixXd S_next = m.Q + m.A.transpose() * (S - M) * m.A;
        S = 0.5 * (S_next + S_next.transpose()); // keep symmetric
        defect = detail::riccati_defect(m, S, M);
        if (defect <= tol) return {S, M, defect, it};
    }
    throw RiccatiError("solve_riccati: no convergence after " + std::to_string(max_iter) +
                       " iterations, residual " + std::to_string(defect));
}

// Entropy power of a Gaussian with covariance Sigma: det(Sigma)^(1/n).
inline double entropy_power(const Eigen::MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const auto& ev = es.eigenvalues();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-12 * std::abs(ev[ev.size() - 1]))
            throw std::invalid_argument("entropy_power: covariance not PSD");
        if (ev[i] <= 0.0) return 0.0;
        log_det += std::log(ev[i]);
    }
    return std::exp(log_det / static_cast<double>(sigma.rows()));
}

inline ControlSummary summarize(const ControlMatrices& m,
                                double tol = 1e-10, int max_iter = 10000) {
    RiccatiSolution r = solve_riccati(m, tol, max_iter);
    ControlSummary s;
    s.n = static_cast<int>(m.A.rows());

    // log-determinants via LU with partial pivoting keep |det| stable for
    // large n where the determinant itself over/underflows.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_a(m.A);
    double log_abs_det_a = 0.0;
    for (Eigen::Index i = 0; i < m.A.rows(); ++i) {
        double p = std::abs(lu_a.matrixLU()(i, i));
        if (p == 0.0) throw std::invalid_argument("summarize: det A is zero");
        log_abs_det_a += std::log(p);
    }
    s.log2_det_A = log_abs_det_a / std::log(2.0);

    s.entropy_power = entropy_power(m.Sigma_v);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(r.M);
    double log_abs_det_m = 0.0;
    bool zero = false;
    for (Eigen::Index i = 0; i < es_m.eigenvalues().size(); ++i) {
        double ev = std::abs(es_m.eigenvalues()[i]);
        if (ev <= 0.0) { zero = true; break; }
        log_abs_det_m += std::log(ev);
    }
    s.det_M_nth_root = zero ? 0.0 : std::exp(log_abs_det_m / static_cast<double>(s.n));

    s.trace_sigma_S = (m.Sigma_v * r.S).trace();
    return s;
}

// Helper used by matrix-mode tests: A = 2^(e/n) I with B = I reaches entropy
// e through a diagonal plant.
inline ControlMatrices diagonal_plant(int n, double log2_det_a, double sigma_v_sq) {
    ControlMatrices m;
    double a = std::pow(2.0, log2_det_a / n);
    m.A = a * Eigen::MatrixXd::Identity(n, n);
    m.B = Eigen::MatrixXd::Identity(n, n);
    m.Q = Eigen::MatrixXd::Identity(n, n);
    m.R = Eigen::MatrixXd::Zero(n, n);
    m.Sigma_v = sigma_v_sq * Eigen::MatrixXd::Identity(n, n);
    return m;
}

// Lower bound on the LQR cost given the closed-loop information of one cycle.
// Below the intrinsic entropy the plant cannot be stabilized.
inline LqrCost lqr_lower_bound(const ControlSummary& s, double d_sc3) {
    if (d_sc3 < 0.0) throw std::invalid_argument("lqr_lower_bound: d_sc3 must be >= 0");
    if (d_sc3 <= s.log2_det_A) return LqrCost::infinite();
    double denom = std::exp2((2.0 / s.n) * (d_sc3 - s.log2_det_A)) - 1.0;
    return LqrCost::finite(s.n * s.entropy_power * s.det_M_nth_root / denom + s.trace_sigma_S);
}

struct InfeasibleCostError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inverse of lqr_lower_bound: the information needed to meet a cost target.
inline double info_for_cost(const ControlSummary& s, double target_cost) {
    if (target_cost <= s.trace_sigma_S)
        throw InfeasibleCostError("info_for_cost: target at or below tr(Sigma_v S), no finite information suffices");
    double ratio = s.n * s.entropy_power * s.det_M_nth_root / (target_cost - s.trace_sigma_S);
    return (s.n / 2.0) * std::log2(ratio + 1.0) + s.log2_det_A;
}

} // namespace sc3
