#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsr/collocation.hpp"
#include "gsr/solver.hpp"

namespace gsr {

/// ARL to false alarm and STADD of the GSR procedure with headstart r and
/// threshold A, plus whatever diagnostics were computed alongside.
struct PerformanceReport {
    std::string model;
    std::optional<double> theta;
    double threshold = 0.0;
    double headstart = 0.0;
    std::size_t n = 0;
    Method method = Method::hat;

    double arl = 0.0;
    double stadd = 0.0;

    double operator_norm = 0.0;
    double residual_ell = 0.0;
    double residual_xi = 0.0;
    double h_max = 0.0;

    std::optional<double> rate;
    std::optional<double> error_estimate;
    std::optional<double> error_bound;

    // Redundant delta_0 / psi path, present only when requested.
    std::optional<double> delta0;
    std::optional<double> iadd;
};

inline void check_headstart(const SolutionPair& s, double x) {
    if (!(x >= 0.0 && x <= s.threshold())) throw std::domain_error("headstart outside [0, A]");
}

/// ell(x, A) = ARL to false alarm of the procedure started at R_0 = x.
inline double arl_at(const LrModel& model, const SolutionPair& s, double x) {
    check_headstart(s, x);
    return iterated_eval(model, s, Unknown::ell, x);
}

/// STADD(x) = Xi(x) / (ell(x) + x).
inline double stadd_at(const LrModel& model, const SolutionPair& s, double x) {
    check_headstart(s, x);
    return iterated_eval(model, s, Unknown::xi, x) / (iterated_eval(model, s, Unknown::ell, x) + x);
}

/// Matrix of the post-change operator K_0 on the same discretization.
///
/// midpoint: exact P_0 interval masses.
/// hat: (1+x) K_0(x,y) = y K_inf(x,y) means K_0 u = K_inf(y u)/(1+x);
/// interpolating y u(y) in the hat basis gives K0 = diag(1/(1+z)) K diag(z),
/// which reuses the K_inf entries.
inline DenseMatrix post_change_matrix(const LrModel& model, const KernelMatrix& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    DenseMatrix k0(n, n);
    if (m.method == Method::midpoint) {
        for (Eigen::Index i = 0; i < n; ++i)
            midpoint_row_post(model, m.partition, m.collocation[i],
                              std::span<double>(k0.row(i).data(), m.size()));
        return k0;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k0(i, j) = m.entries(i, j) * m.collocation[j] / (1.0 + m.collocation[i]);
    return k0;
}

/// delta_0(z_j) = E_0[S_A] from R_0 = z_j: solves (I - K_0) delta_0 = 1.
inline Eigen::VectorXd solve_delta0(const LrModel& model, const KernelMatrix& m) {
    const DenseMatrix k0 = post_change_matrix(model, m);
    const ResolventFactorization lu(k0);
    return lu.solve(Eigen::MatrixXd::Ones(k0.rows(), 1)).col(0);
}

/// psi = IADD as a function of the headstart: (I - K_inf) psi = delta_0.
inline Eigen::VectorXd solve_iadd(const KernelMatrix& m, const Eigen::VectorXd& delta0) {
    if (delta0.size() != static_cast<Eigen::Index>(m.size()))
        throw std::invalid_argument("solve_iadd: delta0 size mismatch");
    const ResolventFactorization lu(m.entries);
    return lu.solve(delta0).col(0);
}

/// delta_{k+1} = K delta_k for k < k_max, stopping early once
/// ||delta_k||_inf < stop_below. Element k of the result is delta_k.
inline std::vector<Eigen::VectorXd> add_k_sequence(const KernelMatrix& m, const Eigen::VectorXd& delta0,
                                                   std::size_t k_max = 200, double stop_below = 1e-12) {
    if (delta0.size() != static_cast<Eigen::Index>(m.size()))
        throw std::invalid_argument("add_k_sequence: delta0 size mismatch");
    std::vector<Eigen::VectorXd> seq{delta0};
    for (std::size_t k = 0; k < k_max; ++k) {
        if (seq.back().cwiseAbs().maxCoeff() < stop_below) break;
        seq.push_back(m.entries * seq.back());
    }
    return seq;
}

/// Iterated evaluation of delta_0 and psi at an arbitrary headstart x.
struct DelayComponents {
    double delta0 = 0.0;
    double iadd = 0.0;
};

inline DelayComponents delay_components_at(const LrModel& model, const KernelMatrix& m,
                                           const Eigen::VectorXd& delta0, const Eigen::VectorXd& psi,
                                           double x) {
    std::vector<double> row(m.size());
    operator_row(model, m, x, row);
    DelayComponents out;
    if (m.method == Method::hat) {
        double k0_dot = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) k0_dot += row[j] * m.collocation[j] * delta0[j];
        out.delta0 = 1.0 + k0_dot / (1.0 + x);
    } else {
        std::vector<double> row0(m.size());
        midpoint_row_post(model, m.partition, x, row0);
        double k0_dot = 0.0;
        for (std::size_t j = 0; j < row0.size(); ++j) k0_dot += row0[j] * delta0[j];
        out.delta0 = 1.0 + k0_dot;
    }
    double k_dot = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) k_dot += row[j] * psi[j];
    out.iadd = out.delta0 + k_dot;
    return out;
}

struct EvaluateOptions {
    bool verify_delay_components = false;
    std::optional<double> theta;
};

/// Assembles, solves and reads off ARL and STADD at headstart r.
inline PerformanceReport evaluate(const LrModel& model, Method method, double threshold, double headstart,
                                  std::size_t n, const EvaluateOptions& opts = {}) {
    if (!(headstart >= 0.0 && headstart <= threshold))
        throw std::domain_error("evaluate: headstart must lie in [0, A]");
    const SolutionPair s = solve_pair(assemble(model, method, threshold, n));

    PerformanceReport rep;
    rep.model = model.describe();
    rep.theta = opts.theta;
    rep.threshold = threshold;
    rep.headstart = headstart;
    rep.n = n;
    rep.method = method;
    rep.arl = arl_at(model, s, headstart);
    rep.stadd = stadd_at(model, s, headstart);
    rep.operator_norm = s.norm;
    rep.residual_ell = s.residual_ell;
    rep.residual_xi = s.residual_xi;
    rep.h_max = s.partition().h_max;
    if (method == Method::hat && n >= 3) rep.error_bound = apriori_bound(s, Unknown::xi);

    if (opts.verify_delay_components) {
        const Eigen::VectorXd d0 = solve_delta0(model, *s.matrix);
        const Eigen::VectorXd psi = solve_iadd(*s.matrix, d0);
        const DelayComponents c = delay_components_at(model, *s.matrix, d0, psi, headstart);
        rep.delta0 = c.delta0;
        rep.iadd = c.iadd;
    }
    return rep;
}

}  // namespace gsr
