#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gsr/collocation.hpp"
#include "gsr/metrics.hpp"
#include "gsr/solver.hpp"

namespace gsr {

enum class RateStatus {
    ok,
    converged,   ///< successive solutions identical: nothing left to measure
    undefined,   ///< ||u_N - u_{N/2}|| = 0 while ||u_2N - u_N|| > 0
};

struct RichardsonResult {
    RateStatus status = RateStatus::undefined;
    std::optional<double> rate;
    std::optional<double> error_estimate;
};

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Rate c from solutions at N/2, N, 2N sampled on a common set of points:
///   2^{-c} ~ ||u_2N - u_N|| / ||u_N - u_{N/2}||,
/// and the error of u_N estimated as 2^{-c} ||u_N - u_{N/2}||.
inline RichardsonResult richardson_rate(std::span<const double> u_half, std::span<const double> u_one,
                                        std::span<const double> u_two) {
    const double coarse = sup_distance(u_one, u_half);
    const double fine = sup_distance(u_two, u_one);
    RichardsonResult out;
    if (fine == 0.0) {
        out.status = RateStatus::converged;
        out.error_estimate = 0.0;
        return out;
    }
    if (coarse == 0.0) {
        out.status = RateStatus::undefined;
        return out;
    }
    out.status = RateStatus::ok;
    out.rate = -std::log2(fine / coarse);
    out.error_estimate = std::exp2(-*out.rate) * coarse;
    return out;
}

inline RichardsonResult richardson_rate(double u_half, double u_one, double u_two) {
    return richardson_rate(std::span<const double>(&u_half, 1), std::span<const double>(&u_one, 1),
                           std::span<const double>(&u_two, 1));
}

/// `count` equispaced points covering [0, A].
inline std::vector<double> evaluation_grid(double threshold, std::size_t count = 257) {
    if (count < 2) throw std::invalid_argument("evaluation_grid: need at least 2 points");
    std::vector<double> xs(count);
    for (std::size_t k = 0; k < count; ++k)
        xs[k] = threshold * static_cast<double>(k) / static_cast<double>(count - 1);
    xs.back() = threshold;
    return xs;
}

/// Sup-norm Richardson rate of ell or Xi as functions on [0, A]. The three
/// Chebyshev partitions share no interior nodes, so all solutions are
/// compared through the iterated solution on a common grid.
inline RichardsonResult function_rate(const LrModel& model, Method method, double threshold, std::size_t n,
                                      Unknown which, std::size_t grid_points = 257) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("function_rate: N must be even");
    const auto xs = evaluation_grid(threshold, grid_points);
    std::vector<std::vector<double>> sampled;
    for (std::size_t size : {n / 2, n, 2 * n}) {
        const SolutionPair s = solve_pair(assemble(model, method, threshold, size));
        sampled.push_back(iterated_eval(model, s, which, xs));
    }
    return richardson_rate(sampled[0], sampled[1], sampled[2]);
}

/// One line of a convergence table: STADD at the headstart for a given N.
struct ConvergenceRow {
    std::size_t n = 0;
    Method method = Method::hat;
    bool failed = false;             ///< solver broke down (rendered as NaN)
    std::optional<double> value;     ///< STADD(r)
    std::optional<double> arl;       ///< ARL(r)
    std::optional<double> rate;
    std::optional<double> error_estimate;
    std::optional<double> bound;     ///< a priori bound on Xi (hat method only)
};

inline void check_doubling(std::span<const std::size_t> ns) {
    if (ns.empty()) throw std::invalid_argument("convergence table: empty N list");
    for (std::size_t k = 0; k < ns.size(); ++k) {
        if (ns[k] < 2) throw std::invalid_argument("convergence table: N must be >= 2");
        if (k > 0 && ns[k] != 2 * ns[k - 1])
            throw std::invalid_argument("convergence table: N list must double at every step");
    }
}

/// Rows for every N in ns (each twice the previous). The rate in row k is
/// computed from the scalar STADD values of rows k-1, k, k+1, so the first
/// and last rows have none, as do rows next to a failure.
inline std::vector<ConvergenceRow> convergence_table(const LrModel& model, double threshold, double headstart,
                                                     std::span<const std::size_t> ns, Method method) {
    check_doubling(ns);
    std::vector<ConvergenceRow> rows;
    for (std::size_t n : ns) {
        ConvergenceRow row;
        row.n = n;
        row.method = method;
        try {
            const SolutionPair s = solve_pair(assemble(model, method, threshold, n));
            row.value = stadd_at(model, s, headstart);
            row.arl = arl_at(model, s, headstart);
            if (!std::isfinite(*row.value) || !std::isfinite(*row.arl)) throw SingularSystemError("non-finite", 0);
            if (method == Method::hat && n >= 3) row.bound = apriori_bound(s, Unknown::xi);
        } catch (const SingularSystemError&) {
            row = ConvergenceRow{};
            row.n = n;
            row.method = method;
            row.failed = true;
        }
        rows.push_back(row);
    }
    for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
        if (rows[k - 1].failed || rows[k].failed || rows[k + 1].failed) continue;
        const RichardsonResult r = richardson_rate(*rows[k - 1].value, *rows[k].value, *rows[k + 1].value);
        rows[k].rate = r.rate;
        rows[k].error_estimate = r.error_estimate;
    }
    return rows;
}

}  // namespace gsr
