#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "gsr/normal.hpp"

namespace gsr {

/// Pre-change (P_inf) or post-change (P_0) data.
enum class Regime { pre, post };

using Rng = std::mt19937_64;

/// Both cdfs of the likelihood ratio at one point, as tails.
struct LrTails {
    TailValue inf;    ///< P_inf(Lambda <= t)
    TailValue zero;   ///< P_0(Lambda <= t)
};

/// Distribution of the one-observation likelihood ratio Lambda = g(X)/f(X)
/// under the pre-change (P_inf) and post-change (P_0) measures.
///
/// Implementations must satisfy dP_0(t) = t dP_inf(t); the collocation
/// matrix relies on it to integrate y K_inf(x,y) in closed form.
class LrModel {
public:
    virtual ~LrModel() = default;

    virtual double cdf_lr_inf(double t) const = 0;
    virtual double cdf_lr_0(double t) const = 0;

    /// Density of Lambda under P_inf.
    virtual double pdf_lr_inf(double t) const = 0;

    virtual double sample_lr(Regime regime, Rng& rng) const = 0;

    virtual std::string describe() const = 0;

    /// Both cdfs at t. Override when the two share work or when the
    /// small tail can be computed directly.
    virtual LrTails tails(double t) const {
        auto as_tail = [](double p) {
            return p <= 0.5 ? TailValue{p, false} : TailValue{1.0 - p, true};
        };
        return {as_tail(cdf_lr_inf(t)), as_tail(cdf_lr_0(t))};
    }
};

/// X ~ N(0,1) before the change and N(theta,1) after it, so that
/// Lambda = exp(theta X - theta^2/2) is log-normal(-theta^2/2, theta^2)
/// under P_inf and log-normal(theta^2/2, theta^2) under P_0.
class GaussianMeanShift final : public LrModel {
public:
    explicit GaussianMeanShift(double theta) : theta_(theta) {
        if (!(theta > 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("GaussianMeanShift: theta must be a positive finite number");
    }

    double theta() const { return theta_; }

    double cdf_lr_inf(double t) const override { return tails_at(t, +0.5 * theta_ * theta_).cdf(); }
    double cdf_lr_0(double t) const override { return tails_at(t, -0.5 * theta_ * theta_).cdf(); }

    double pdf_lr_inf(double t) const override {
        check_nonnegative(t);
        if (t == 0.0) return 0.0;
        const double z = (std::log(t) + 0.5 * theta_ * theta_) / theta_;
        const double exponent = -0.5 * z * z;
        // 1/t can overflow near 0 while the exponential has already underflowed.
        if (exponent < -745.0) return 0.0;
        return std::exp(exponent) / (t * theta_ * std::sqrt(2.0 * std::numbers::pi));
    }

    double sample_lr(Regime regime, Rng& rng) const override {
        std::normal_distribution<double> normal;
        const double shift = regime == Regime::pre ? -0.5 * theta_ * theta_ : 0.5 * theta_ * theta_;
        return std::exp(theta_ * normal(rng) + shift);
    }

    std::string describe() const override {
        return "gaussian_mean_shift(theta=" + std::to_string(theta_) + ")";
    }

    LrTails tails(double t) const override {
        check_nonnegative(t);
        if (t == 0.0) return {};
        if (std::isinf(t)) return {{0.0, true}, {0.0, true}};
        const double log_t = std::log(t);
        const double half = 0.5 * theta_ * theta_;
        return {normal_tail((log_t + half) / theta_), normal_tail((log_t - half) / theta_)};
    }

private:
    static void check_nonnegative(double t) {
        if (!(t >= 0.0)) throw std::domain_error("likelihood ratio argument must be nonnegative");
    }

    // Argument formed in log space so tiny t never underflows.
    TailValue tails_at(double t, double shift) const {
        check_nonnegative(t);
        if (t == 0.0) return {};
        if (std::isinf(t)) return {0.0, true};
        return normal_tail((std::log(t) + shift) / theta_);
    }

    double theta_;
};

/// Transition density of R_{n+1} given R_n = x under P_inf:
/// K_inf(x,y) = d/dy P_inf(Lambda <= y/(1+x)).
inline double kernel_inf(const LrModel& model, double x, double y) {
    if (!(x >= 0.0)) throw std::domain_error("kernel_inf: x must be nonnegative");
    if (y <= 0.0) return 0.0;
    return model.pdf_lr_inf(y / (1.0 + x)) / (1.0 + x);
}

/// Post-change transition density, from (1+x) K_0(x,y) = y K_inf(x,y).
inline double kernel_0(const LrModel& model, double x, double y) {
    if (!(x >= 0.0)) throw std::domain_error("kernel_0: x must be nonnegative");
    if (y <= 0.0) return 0.0;
    return y * kernel_inf(model, x, y) / (1.0 + x);
}

}  // namespace gsr
