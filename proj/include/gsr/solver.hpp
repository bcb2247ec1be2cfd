#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsr/collocation.hpp"
#include "gsr/model.hpp"

namespace gsr {

/// Raised when I - K has an exactly zero (or non-finite) pivot. For the
/// hat method this cannot happen while ||K|| < 1; the midpoint method
/// produces it on coarse grids where whole rows of K round to identity.
class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string& what, double norm) : std::runtime_error(what), norm_(norm) {}
    double norm() const { return norm_; }

private:
    double norm_;
};

/// Relative residual accepted without a refinement step.
inline constexpr double residual_tolerance = 1e-10;

/// LU factorization of I - K, reused for every right-hand side.
class ResolventFactorization {
public:
    explicit ResolventFactorization(const DenseMatrix& k) : k_(&k) {
        const auto n = k.rows();
        Eigen::MatrixXd system = -k;
        system.diagonal().array() += 1.0;
        lu_.compute(system);
        const auto diag = lu_.matrixLU().diagonal();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (diag[i] == 0.0 || !std::isfinite(diag[i])) {
                double norm = k.cwiseAbs().rowwise().sum().maxCoeff();
                throw SingularSystemError("I - K is singular (zero pivot at row " + std::to_string(i) +
                                              "), ||K||_inf = " + std::to_string(norm),
                                          norm);
            }
        }
    }

    /// Solves (I - K) U = V column by column; one refinement step is taken
    /// for any column whose relative residual exceeds residual_tolerance.
    /// Relative residuals ||(I-K)u - v||_inf / ||v||_inf are written to
    /// `residuals`.
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs, std::vector<double>* residuals = nullptr) const {
        Eigen::MatrixXd u = lu_.solve(rhs);
        Eigen::MatrixXd r = residual(u, rhs);
        for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
            if (relative(r.col(c), rhs.col(c)) > residual_tolerance) {
                u.col(c) += lu_.solve(r.col(c));
                r.col(c) = residual(u.col(c), rhs.col(c));
            }
        }
        if (!u.allFinite()) throw SingularSystemError("solution of (I - K)u = v is not finite", 1.0);
        if (residuals) {
            residuals->clear();
            for (Eigen::Index c = 0; c < rhs.cols(); ++c) residuals->push_back(relative(r.col(c), rhs.col(c)));
        }
        return u;
    }

private:
    Eigen::MatrixXd residual(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) const {
        return v - (u - (*k_) * u);
    }

    static double relative(const Eigen::VectorXd& r, const Eigen::VectorXd& v) {
        const double scale = v.cwiseAbs().maxCoeff();
        return scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
    }

    const DenseMatrix* k_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

enum class Unknown { ell, xi };

/// ell solves (I - K) ell = 1 and xi solves (I - K) xi = 1 + z, both from
/// one factorization. ell_j is the ARL to false alarm started from z_j and
/// xi_j is the STADD numerator Xi(z_j) = psi(z_j) + z_j delta_0(z_j).
struct SolutionPair {
    Eigen::VectorXd ell;
    Eigen::VectorXd xi;
    std::shared_ptr<const KernelMatrix> matrix;
    double norm = 0.0;
    double residual_ell = 0.0;
    double residual_xi = 0.0;

    const Partition& partition() const { return matrix->partition; }
    double threshold() const { return matrix->partition.threshold; }
    const std::vector<double>& collocation() const { return matrix->collocation; }
    const Eigen::VectorXd& values(Unknown which) const { return which == Unknown::ell ? ell : xi; }
};

inline SolutionPair solve_pair(std::shared_ptr<const KernelMatrix> m) {
    if (!m) throw std::invalid_argument("solve_pair: null matrix");
    SolutionPair s;
    s.norm = operator_norm(*m);
    const auto n = static_cast<Eigen::Index>(m->size());
    Eigen::MatrixXd rhs(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        rhs(i, 0) = 1.0;
        rhs(i, 1) = 1.0 + m->collocation[i];
    }
    const ResolventFactorization lu(m->entries);
    std::vector<double> residuals;
    const Eigen::MatrixXd u = lu.solve(rhs, &residuals);
    s.ell = u.col(0);
    s.xi = u.col(1);
    s.residual_ell = residuals[0];
    s.residual_xi = residuals[1];
    s.matrix = std::move(m);
    return s;
}

inline SolutionPair solve_pair(KernelMatrix m) {
    return solve_pair(std::make_shared<const KernelMatrix>(std::move(m)));
}

/// max |u''| over interior collocation points by three-point divided
/// differences on the (nonuniform) grid.
inline double second_derivative_sup(std::span<const double> z, const Eigen::VectorXd& u) {
    if (z.size() < 3) throw std::invalid_argument("second derivative needs at least 3 nodes");
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < z.size(); ++i) {
        const double hl = z[i] - z[i - 1];
        const double hr = z[i + 1] - z[i];
        const double d2 = 2.0 * ((u[i + 1] - u[i]) / hr - (u[i] - u[i - 1]) / hl) / (hl + hr);
        m = std::max(m, std::abs(d2));
    }
    return m;
}

/// ||ell||_inf ||u_xx||_inf h^2 / 8, using ||(I - K)^{-1}||_inf = ||ell||_inf.
inline double apriori_bound(const SolutionPair& s, Unknown which) {
    if (s.ell.size() < 3) throw std::invalid_argument("apriori_bound: need N >= 3");
    const double h = s.partition().h_max;
    return s.ell.cwiseAbs().maxCoeff() * second_derivative_sup(s.collocation(), s.values(which)) * h * h / 8.0;
}

/// Iterated projection solution
///   u~(x) = v(x) + sum_j u_j int_0^A K_inf(x,y) phi_j(y) dy,
/// computed with the same closed-form row as the assembly. At a
/// collocation point it returns the nodal value itself.
inline double iterated_eval(const LrModel& model, const SolutionPair& s, Unknown which, double x) {
    const double a = s.threshold();
    if (!(x >= 0.0 && x <= a)) throw std::domain_error("iterated_eval: x outside [0, A]");
    const auto& z = s.collocation();
    const auto& u = s.values(which);
    auto it = std::lower_bound(z.begin(), z.end(), x);
    if (it != z.end() && *it == x) return u[it - z.begin()];

    std::vector<double> row(z.size());
    operator_row(model, *s.matrix, x, row);
    double acc = which == Unknown::ell ? 1.0 : 1.0 + x;
    for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * u[static_cast<Eigen::Index>(j)];
    return acc;
}

inline std::vector<double> iterated_eval(const LrModel& model, const SolutionPair& s, Unknown which,
                                         std::span<const double> xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(iterated_eval(model, s, which, x));
    return out;
}

}  // namespace gsr
