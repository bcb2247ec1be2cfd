#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gsr/grid.hpp"
#include "gsr/model.hpp"

namespace gsr {

/// Discretization of the integral operator.
///  - hat: piecewise-linear basis on a Chebyshev grid, collocation at the
///    nodes, entries integrated exactly.
///  - midpoint: piecewise-constant basis, collocation at interval
///    midpoints (the Markov chain approximation).
enum class Method { hat, midpoint };

inline std::string_view to_string(Method m) { return m == Method::hat ? "hat" : "midpoint"; }

inline Method parse_method(std::string_view s) {
    if (s == "hat") return Method::hat;
    if (s == "midpoint") return Method::midpoint;
    throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected hat or midpoint)");
}

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thrown when a discretized operator has ||K||_inf > 1 beyond rounding.
class InconsistentOperatorError : public std::runtime_error {
public:
    InconsistentOperatorError(const std::string& what, double norm)
        : std::runtime_error(what), norm_(norm) {}
    double norm() const { return norm_; }

private:
    double norm_;
};

/// The N x N matrix K with K_ij = int_0^A K_inf(z_i, y) phi_j(y) dy.
///
/// Stored dense and row-major: 8 N^2 bytes, i.e. 512 MiB at N = 8192,
/// which is the largest size this library targets.
struct KernelMatrix {
    DenseMatrix entries;
    Method method = Method::hat;
    Partition partition;
    std::vector<double> collocation;   ///< z_1..z_N
    std::string model;

    std::size_t size() const { return collocation.size(); }
};

/// Row of the hat-basis matrix at an arbitrary point x >= 0:
/// out[j] = int_0^A K_inf(x,y) phi_{j+1}(y) dy.
///
/// With t_k = x_k/(1+x) and y = (1+x)t, the change of measure
/// dP_0(t) = t dP_inf(t) turns the ramps into
///   left  (interval k, basis k+1): [(1+x) dP_0 - x_k     dP_inf] / h_k
///   right (interval k, basis k)  : [x_{k+1}  dP_inf - (1+x) dP_0] / h_k
/// so every entry is a combination of cdf differences. Each t_k is
/// evaluated once and shared between the two measures.
inline void hat_row(const LrModel& model, const Partition& p, double x, std::span<double> out) {
    const std::size_t n = p.size();
    if (out.size() != n) throw std::invalid_argument("hat_row: output size mismatch");
    const double scale = 1.0 + x;

    std::fill(out.begin(), out.end(), 0.0);
    LrTails lo = model.tails(p.nodes[0] / scale);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const LrTails hi = model.tails(p.nodes[k + 1] / scale);
        const double d_inf = mass_between(lo.inf, hi.inf);
        const double d_zero = mass_between(lo.zero, hi.zero);
        const double h = p.widths[k];
        const double left = (scale * d_zero - p.nodes[k] * d_inf) / h;
        const double right = (p.nodes[k + 1] * d_inf - scale * d_zero) / h;
        // Both ramps integrate a nonnegative function; only rounding can
        // push them below zero.
        out[k + 1] += std::max(left, 0.0);
        out[k] += std::max(right, 0.0);
        lo = hi;
    }
}

/// Row of the midpoint matrix at x: out[j] = P_inf(x_{j+1}/(1+x)) - P_inf(x_j/(1+x)).
inline void midpoint_row(const LrModel& model, const Partition& p, double x, std::span<double> out) {
    if (out.size() != p.intervals()) throw std::invalid_argument("midpoint_row: output size mismatch");
    const double scale = 1.0 + x;
    LrTails lo = model.tails(p.nodes[0] / scale);
    for (std::size_t k = 0; k < p.intervals(); ++k) {
        const LrTails hi = model.tails(p.nodes[k + 1] / scale);
        out[k] = mass_between(lo.inf, hi.inf);
        lo = hi;
    }
}

/// Midpoint row under P_0, used by the delta_0 verification path.
inline void midpoint_row_post(const LrModel& model, const Partition& p, double x, std::span<double> out) {
    if (out.size() != p.intervals()) throw std::invalid_argument("midpoint_row_post: output size mismatch");
    const double scale = 1.0 + x;
    LrTails lo = model.tails(p.nodes[0] / scale);
    for (std::size_t k = 0; k < p.intervals(); ++k) {
        const LrTails hi = model.tails(p.nodes[k + 1] / scale);
        out[k] = mass_between(lo.zero, hi.zero);
        lo = hi;
    }
}

/// Row of K at an arbitrary evaluation point, for either discretization.
inline void operator_row(const LrModel& model, const KernelMatrix& m, double x, std::span<double> out) {
    if (m.method == Method::hat)
        hat_row(model, m.partition, x, out);
    else
        midpoint_row(model, m.partition, x, out);
}

/// Hat-basis matrix on p; collocation at the nodes. Rows are independent.
inline KernelMatrix assemble_hat(const LrModel& model, const Partition& p) {
    KernelMatrix m;
    m.method = Method::hat;
    m.partition = p;
    m.collocation = p.nodes;
    m.model = model.describe();
    const auto n = static_cast<Eigen::Index>(p.size());
    m.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        hat_row(model, p, m.collocation[i], std::span<double>(m.entries.row(i).data(), p.size()));
    return m;
}

/// Midpoint matrix: p has N+1 nodes, giving N intervals and N collocation
/// points z_j = (x_{j-1} + x_j)/2.
inline KernelMatrix assemble_midpoint(const LrModel& model, const Partition& p) {
    KernelMatrix m;
    m.method = Method::midpoint;
    m.partition = p;
    m.model = model.describe();
    const std::size_t n = p.intervals();
    m.collocation.resize(n);
    for (std::size_t j = 0; j < n; ++j) m.collocation[j] = 0.5 * (p.nodes[j] + p.nodes[j + 1]);
    const auto en = static_cast<Eigen::Index>(n);
    m.entries.resize(en, en);
    for (Eigen::Index i = 0; i < en; ++i)
        midpoint_row(model, p, m.collocation[i], std::span<double>(m.entries.row(i).data(), n));
    return m;
}

/// Partition conventions for a system of size N:
///  - hat: N Chebyshev nodes (N - 1 intervals);
///  - midpoint: N equal intervals (N + 1 nodes).
inline Partition method_partition(Method method, double threshold, std::size_t n) {
    return method == Method::hat ? chebyshev_partition(threshold, n) : uniform_partition(threshold, n + 1);
}

inline KernelMatrix assemble(const LrModel& model, Method method, double threshold, std::size_t n) {
    const Partition p = method_partition(method, threshold, n);
    return method == Method::hat ? assemble_hat(model, p) : assemble_midpoint(model, p);
}

/// Tolerance above 1 accepted for ||K||_inf. Row sums are cdf values and
/// round to exactly 1 whenever P_inf(Lambda <= A/(1+z)) is within an ulp of 1.
inline constexpr double norm_rounding_slack = 1e-12;

/// ||K||_inf = max_i sum_j |K_ij|.
inline double operator_norm(const DenseMatrix& k) {
    if (k.size() == 0) return 0.0;
    const double norm = k.cwiseAbs().rowwise().sum().maxCoeff();
    if (!(norm <= 1.0 + norm_rounding_slack))
        throw InconsistentOperatorError("operator norm " + std::to_string(norm) +
                                            " exceeds 1: model and partition are inconsistent",
                                        norm);
    return norm;
}

inline double operator_norm(const KernelMatrix& m) { return operator_norm(m.entries); }

}  // namespace gsr
