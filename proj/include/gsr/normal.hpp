#pragma once

#include <cmath>
#include <numbers>

namespace gsr {

/// Standard normal cdf Phi(x) = erfc(-x/sqrt 2)/2.
///
/// erfc keeps full relative precision in the lower tail, so Phi(x) is
/// accurate to a few ulps for every |x| <= 40 (beyond that it underflows
/// to 0 or rounds to 1, which is the correctly rounded result).
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(x), without cancellation for large positive x.
inline double normal_ccdf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// A cdf value stored as whichever tail is the smaller one.
///
/// Differences of cdf values near 1 lose all their digits when taken
/// directly; keeping the small tail lets mass_between() return the
/// probability of an interval to full relative precision.
struct TailValue {
    double value = 0.0;   ///< cdf if !upper, 1 - cdf if upper
    bool upper = false;

    double cdf() const { return upper ? 1.0 - value : value; }
};

inline TailValue normal_tail(double x) {
    return x < 0.0 ? TailValue{normal_cdf(x), false} : TailValue{normal_ccdf(x), true};
}

/// P(a < X <= b) given the tails at a <= b.
inline double mass_between(const TailValue& a, const TailValue& b) {
    if (!a.upper && !b.upper) return b.value - a.value;
    if (a.upper && b.upper) return a.value - b.value;
    if (!a.upper && b.upper) return 1.0 - a.value - b.value;
    return b.cdf() - a.cdf();
}

}  // namespace gsr
