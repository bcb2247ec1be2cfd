#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsr/model.hpp"

namespace gsr {

/// Simulation settings. Replication m draws from its own generator seeded
/// by (seed, m), so results do not depend on how replications are
/// scheduled.
struct McConfig {
    double threshold = 0.0;
    double headstart = 0.0;
    std::uint64_t change_point = 0;      ///< nu for multi-cyclic runs
    std::uint64_t replications = 100000;
    std::uint64_t seed = 1;
    std::uint64_t cap = 0;               ///< run-length cap; raised to >= 100 A
};

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::uint64_t replications = 0;
    std::uint64_t truncated = 0;
    std::vector<std::string> warnings;
};

struct RunLength {
    std::uint64_t steps = 0;
    bool truncated = false;
};

/// Statistic values are clamped here; R_n never gets close without a threshold.
inline constexpr double statistic_ceiling = 1e300;

inline Rng replication_rng(std::uint64_t seed, std::uint64_t replication) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32)};
    return Rng(seq);
}

inline std::uint64_t effective_cap(const McConfig& cfg) {
    const double floor_cap = std::ceil(100.0 * std::max(cfg.threshold, 1.0));
    return std::max<std::uint64_t>(cfg.cap, static_cast<std::uint64_t>(floor_cap));
}

inline void validate(const McConfig& cfg) {
    if (!(cfg.threshold > 0.0)) throw std::invalid_argument("simulation: threshold A must be positive");
    if (!(cfg.headstart >= 0.0)) throw std::invalid_argument("simulation: headstart must be nonnegative");
    if (cfg.replications < 1) throw std::invalid_argument("simulation: need at least one replication");
}

/// One GSR step: R_{n+1} = (1 + R_n) Lambda_{n+1}.
inline double gsr_step(double r, double lr) { return std::min((1.0 + r) * lr, statistic_ceiling); }

/// First n >= 1 with R_n >= A, starting from `start` and drawing every
/// observation from `regime`.
inline RunLength run_length(const LrModel& model, double threshold, double start, Regime regime, Rng& rng,
                            std::uint64_t cap) {
    double r = start;
    for (std::uint64_t n = 1; n <= cap; ++n) {
        r = gsr_step(r, model.sample_lr(regime, rng));
        if (r >= threshold) return {n, false};
    }
    return {cap, true};
}

/// Running mean and variance (Welford).
class Accumulator {
public:
    void add(double x) {
        ++count_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(count_);
        m2_ += d * (x - mean_);
    }
    double mean() const { return mean_; }
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    double standard_error() const { return std::sqrt(variance() / static_cast<double>(count_)); }
    std::uint64_t count() const { return count_; }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

namespace detail {

inline McEstimate finish(const Accumulator& acc, std::uint64_t truncated) {
    McEstimate e;
    e.mean = acc.mean();
    e.standard_error = acc.standard_error();
    e.replications = acc.count();
    e.truncated = truncated;
    if (truncated * 1000 > e.replications)
        e.warnings.push_back("run-length cap hit in more than 0.1% of replications");
    return e;
}

inline McEstimate mean_run_length(const LrModel& model, const McConfig& cfg, Regime regime) {
    validate(cfg);
    const std::uint64_t cap = effective_cap(cfg);
    Accumulator acc;
    std::uint64_t truncated = 0;
    for (std::uint64_t m = 0; m < cfg.replications; ++m) {
        Rng rng = replication_rng(cfg.seed, m);
        const RunLength t = run_length(model, cfg.threshold, cfg.headstart, regime, rng, cap);
        truncated += t.truncated;
        acc.add(static_cast<double>(t.steps));
    }
    return finish(acc, truncated);
}

}  // namespace detail

/// E_inf[S_A^r]: ARL to false alarm.
inline McEstimate estimate_arl(const LrModel& model, const McConfig& cfg) {
    return detail::mean_run_length(model, cfg, Regime::pre);
}

/// E_0[S_A^r]: delay when the change is in effect from the first observation.
inline McEstimate estimate_delay0(const LrModel& model, const McConfig& cfg) {
    return detail::mean_run_length(model, cfg, Regime::post);
}

/// Multi-cyclic detection delay: observations 1..nu are pre-change and the
/// rest post-change; after each false alarm the statistic restarts at r.
/// Each replication yields T_{I_nu} - nu, the delay of the first alarm
/// past nu.
inline McEstimate estimate_stadd_multicyclic(const LrModel& model, const McConfig& cfg) {
    validate(cfg);
    const std::uint64_t cap = effective_cap(cfg);
    const std::uint64_t nu = cfg.change_point;
    Accumulator acc;
    std::uint64_t truncated = 0;
    for (std::uint64_t m = 0; m < cfg.replications; ++m) {
        Rng rng = replication_rng(cfg.seed, m);
        double r = cfg.headstart;
        std::uint64_t n = 0;
        for (; n < nu; ++n) {
            r = gsr_step(r, model.sample_lr(Regime::pre, rng));
            if (r >= cfg.threshold) r = cfg.headstart;
        }
        // An alarm exactly at nu was a false one and already restarted r.
        const RunLength rest = run_length(model, cfg.threshold, r, Regime::post, rng, cap);
        truncated += rest.truncated;
        acc.add(static_cast<double>(rest.steps));
    }
    McEstimate e = detail::finish(acc, truncated);
    if (nu > 0 && static_cast<double>(nu) < 10.0 * cfg.threshold)
        e.warnings.push_back("change point nu < 10 A: stationary regime probably not reached");
    return e;
}

/// Result of the RIADD simulation. `riadd` is IADD/ARL; `generalized` is
/// (r E_0[T] + IADD)/(ARL + r), which coincides with it when r = 0.
struct RiaddEstimate {
    McEstimate riadd;
    McEstimate generalized;
    double arl = 0.0;
    double iadd = 0.0;
    double delay0 = 0.0;
    double tail_fraction = 0.0;   ///< share of pre-change runs longer than k_max + 1
};

/// IADD = sum_k E_k[(T - k)^+] estimated with common random numbers: each
/// replication draws one pre-change path up to its false alarm T_inf and,
/// for every k < min(T_inf, k_max + 1), continues with post-change data
/// from R_k until the alarm.
inline RiaddEstimate estimate_riadd_truncated(const LrModel& model, const McConfig& cfg, std::uint64_t k_max) {
    validate(cfg);
    const std::uint64_t cap = effective_cap(cfg);
    const double r0 = cfg.headstart;

    Accumulator t_acc, i_acc, d_acc;
    std::vector<double> t_samples, i_samples, d_samples;
    t_samples.reserve(cfg.replications);
    i_samples.reserve(cfg.replications);
    d_samples.reserve(cfg.replications);
    std::uint64_t truncated = 0, tail = 0;

    for (std::uint64_t m = 0; m < cfg.replications; ++m) {
        Rng pre_rng = replication_rng(cfg.seed, 2 * m);
        Rng post_rng = replication_rng(cfg.seed, 2 * m + 1);
        double r = r0;
        double iadd = 0.0, delay0 = 0.0;
        std::uint64_t k = 0;
        bool alarmed = false;
        for (; k <= cap; ++k) {
            // Change just after observation k: R_k = r, k < T_inf.
            if (k <= k_max) {
                const RunLength d = run_length(model, cfg.threshold, r, Regime::post, post_rng, cap);
                truncated += d.truncated;
                iadd += static_cast<double>(d.steps);
                if (k == 0) delay0 = static_cast<double>(d.steps);
            }
            r = gsr_step(r, model.sample_lr(Regime::pre, pre_rng));
            if (r >= cfg.threshold) {
                alarmed = true;
                break;
            }
        }
        const double t_inf = static_cast<double>(k + 1);
        if (!alarmed) ++truncated;
        if (k + 1 > k_max + 1) ++tail;
        t_acc.add(t_inf);
        i_acc.add(iadd);
        d_acc.add(delay0);
        t_samples.push_back(t_inf);
        i_samples.push_back(iadd);
        d_samples.push_back(delay0);
    }

    // Ratio estimators with delta-method standard errors.
    auto ratio = [&](auto numerator, auto denominator) {
        Accumulator num, den;
        for (std::size_t m = 0; m < t_samples.size(); ++m) {
            num.add(numerator(m));
            den.add(denominator(m));
        }
        const double q = num.mean() / den.mean();
        Accumulator lin;
        for (std::size_t m = 0; m < t_samples.size(); ++m) lin.add(numerator(m) - q * denominator(m));
        McEstimate e;
        e.mean = q;
        e.standard_error = lin.standard_error() / den.mean();
        e.replications = t_samples.size();
        e.truncated = truncated;
        return e;
    };

    RiaddEstimate out;
    out.riadd = ratio([&](std::size_t m) { return i_samples[m]; }, [&](std::size_t m) { return t_samples[m]; });
    out.generalized = ratio([&](std::size_t m) { return r0 * d_samples[m] + i_samples[m]; },
                            [&](std::size_t m) { return t_samples[m] + r0; });
    out.arl = t_acc.mean();
    out.iadd = i_acc.mean();
    out.delay0 = d_acc.mean();
    out.tail_fraction = static_cast<double>(tail) / static_cast<double>(cfg.replications);
    if (out.tail_fraction > 0.01) {
        out.riadd.warnings.push_back("more than 1% of pre-change runs exceed k_max; IADD is truncated");
        out.generalized.warnings = out.riadd.warnings;
    }
    if (truncated * 1000 > cfg.replications) {
        out.riadd.warnings.push_back("run-length cap hit in more than 0.1% of replications");
        out.generalized.warnings = out.riadd.warnings;
    }
    return out;
}

/// R_n^r - n - r under P_inf with no stopping; zero mean for every n, r.
inline McEstimate estimate_martingale(const LrModel& model, std::uint64_t steps, double start,
                                      std::uint64_t replications, std::uint64_t seed) {
    if (replications < 1) throw std::invalid_argument("simulation: need at least one replication");
    Accumulator acc;
    std::uint64_t clamped = 0;
    for (std::uint64_t m = 0; m < replications; ++m) {
        Rng rng = replication_rng(seed, m);
        double r = start;
        for (std::uint64_t n = 0; n < steps; ++n) r = gsr_step(r, model.sample_lr(Regime::pre, rng));
        clamped += r >= statistic_ceiling;
        acc.add(r - static_cast<double>(steps) - start);
    }
    McEstimate e = detail::finish(acc, clamped);
    e.warnings.clear();
    if (clamped > 0) e.warnings.push_back("statistic clamped at 1e300 in some replications");
    return e;
}

}  // namespace gsr
