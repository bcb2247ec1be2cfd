#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsr/accuracy.hpp"
#include "gsr/metrics.hpp"

namespace gsr {

struct CalibrationSpec {
    double gamma = 100.0;              ///< target ARL to false alarm, > 1
    double headstart = 0.0;
    std::size_t n = 2048;
    double rel_tol = 1e-4;
    std::size_t max_iters = 60;
    Method method = Method::hat;
    /// Limiting exponential overshoot, if known; only seeds the first
    /// trial threshold A_0 = overshoot (gamma + r).
    std::optional<double> overshoot_hint;
};

class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, double arl_lo, double arl_hi)
        : std::runtime_error(what), arl_lo_(arl_lo), arl_hi_(arl_hi) {}
    double arl_lo() const { return arl_lo_; }
    double arl_hi() const { return arl_hi_; }

private:
    double arl_lo_;
    double arl_hi_;
};

struct CalibrationResult {
    double threshold = 0.0;
    PerformanceReport report;
    std::size_t iterations = 0;
    std::vector<std::string> warnings;
};

inline void validate(const CalibrationSpec& spec) {
    if (!(spec.gamma > 1.0) || !std::isfinite(spec.gamma))
        throw std::invalid_argument("calibration: gamma must exceed 1");
    if (!(spec.headstart >= 0.0)) throw std::invalid_argument("calibration: headstart must be nonnegative");
    if (spec.n < 2) throw std::invalid_argument("calibration: N must be at least 2");
    if (!(spec.rel_tol > 0.0)) throw std::invalid_argument("calibration: rel_tol must be positive");
    if (spec.max_iters == 0) throw std::invalid_argument("calibration: max_iters must be positive");
}

/// Threshold A with ARL(S_A^r) = gamma to relative tolerance rel_tol.
///
/// The bracket starts at [max(1, r), gamma + r]: ARL = E_inf[R_S] - r >= A - r
/// makes the upper end valid. The lower end is halved while its ARL is
/// still >= gamma (gamma close to 1). Bisection runs until the bracket has
/// shrunk 8x, then safeguarded secant steps finish the job. N stays fixed.
inline CalibrationResult calibrate(const LrModel& model, const CalibrationSpec& spec) {
    validate(spec);
    const double r = spec.headstart;
    CalibrationResult result;

    auto arl_for = [&](double threshold) {
        ++result.iterations;
        const SolutionPair s = solve_pair(assemble(model, spec.method, threshold, spec.n));
        return arl_at(model, s, r);
    };

    double lo = std::max(1.0, r);
    double hi = spec.gamma + r;
    double f_lo = arl_for(lo);
    while (f_lo >= spec.gamma) {
        if (lo / 2.0 < r || lo < 1e-12)
            throw CalibrationError("calibration: no threshold >= headstart gives ARL below gamma", f_lo, f_lo);
        lo /= 2.0;
        f_lo = arl_for(lo);
    }
    double f_hi = arl_for(hi);
    if (f_hi < spec.gamma)
        throw CalibrationError("calibration: ARL at A = gamma + r is " + std::to_string(f_hi) +
                                   " < gamma (ARL at lower end " + std::to_string(f_lo) + ")",
                               f_lo, f_hi);

    auto close_enough = [&](double f) { return std::abs(f / spec.gamma - 1.0) <= spec.rel_tol; };
    auto accept = [&](double a, double f) {
        if (!(f > f_lo && f < f_hi) && !close_enough(f))
            result.warnings.push_back("non-monotone ARL at A = " + std::to_string(a));
        if (f < spec.gamma) {
            lo = a;
            f_lo = f;
        } else {
            hi = a;
            f_hi = f;
        }
    };

    double a = 0.5 * (lo + hi);
    if (spec.overshoot_hint && *spec.overshoot_hint > 0.0) {
        const double seeded = *spec.overshoot_hint * (spec.gamma + r);
        if (seeded > lo && seeded < hi) a = seeded;
    }

    const double initial_width = hi - lo;
    double prev_a = std::numeric_limits<double>::quiet_NaN(), prev_f = prev_a;
    for (std::size_t it = 0; it < spec.max_iters; ++it) {
        const double f = arl_for(a);
        if (close_enough(f)) {
            result.threshold = a;
            break;
        }
        accept(a, f);
        double next = 0.5 * (lo + hi);
        if (hi - lo <= initial_width / 8.0 && std::isfinite(prev_a) && f != prev_f) {
            const double secant = a - (f - spec.gamma) * (a - prev_a) / (f - prev_f);
            if (secant > lo && secant < hi) next = secant;
        }
        prev_a = a;
        prev_f = f;
        a = next;
        if (it + 1 == spec.max_iters)
            throw CalibrationError("calibration: no convergence within max_iters", f_lo, f_hi);
    }

    result.report = evaluate(model, spec.method, result.threshold, r, spec.n);

    // Richardson estimate of the ARL error at the final threshold from N/4, N/2, N.
    if (spec.n >= 8 && spec.n % 4 == 0) {
        const double a_final = result.threshold;
        const double quarter = evaluate(model, spec.method, a_final, r, spec.n / 4).arl;
        const double half = evaluate(model, spec.method, a_final, r, spec.n / 2).arl;
        const RichardsonResult rich = richardson_rate(quarter, half, result.report.arl);
        result.report.rate = rich.rate;
        // error of the N solution ~ 2^{-c} |u_N - u_{N/2}|
        if (rich.rate) result.report.error_estimate = std::exp2(-*rich.rate) * std::abs(result.report.arl - half);
        else if (rich.status == RateStatus::converged) result.report.error_estimate = 0.0;
        if (result.report.error_estimate && *result.report.error_estimate > spec.rel_tol * spec.gamma)
            result.warnings.push_back("ARL error estimate " + std::to_string(*result.report.error_estimate) +
                                      " exceeds rel_tol * gamma; increase N");
    }
    return result;
}

}  // namespace gsr
