#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "gsr/mc.hpp"
#include "gsr/model.hpp"
#include "oracle.hpp"

using namespace gsr;

TEST(Model, RejectsNonPositiveTheta) {
    EXPECT_THROW(GaussianMeanShift(0.0), std::invalid_argument);
    EXPECT_THROW(GaussianMeanShift(-1.0), std::invalid_argument);
}

TEST(Model, PreChangeCdfValues) {
    const GaussianMeanShift m(1.0);
    EXPECT_NEAR(m.cdf_lr_inf(std::exp(-0.5)), 0.5, 1e-15);
    EXPECT_EQ(m.cdf_lr_inf(0.0), 0.0);
    EXPECT_NEAR(m.cdf_lr_inf(1.0), 0.6914624612740131, 1e-14);
    EXPECT_EQ(m.cdf_lr_inf(std::numeric_limits<double>::infinity()), 1.0);
    EXPECT_THROW(m.cdf_lr_inf(-1e-3), std::domain_error);
}

TEST(Model, PostChangeCdfValues) {
    const GaussianMeanShift m(1.0);
    EXPECT_NEAR(m.cdf_lr_0(std::exp(0.5)), 0.5, 1e-15);
    EXPECT_NEAR(m.cdf_lr_0(1.0), 0.3085375387259869, 1e-14);
    EXPECT_EQ(m.cdf_lr_0(0.0), 0.0);
    EXPECT_THROW(m.cdf_lr_0(-2.0), std::domain_error);
}

TEST(Model, CdfsAreMonotoneAndOrdered) {
    for (double theta : {0.01, 0.1, 0.5, 1.0, 2.0}) {
        const GaussianMeanShift m(theta);
        double prev_inf = 0.0, prev_0 = 0.0;
        for (double lt = -20.0; lt <= 20.0; lt += 0.05) {
            const double t = std::exp(lt);
            const double fi = m.cdf_lr_inf(t), f0 = m.cdf_lr_0(t);
            EXPECT_GE(fi, prev_inf);
            EXPECT_GE(f0, prev_0);
            // P_0 is stochastically larger than P_inf
            EXPECT_LE(f0, fi + 1e-15);
            prev_inf = fi;
            prev_0 = f0;
        }
    }
}

TEST(Model, PostChangeCdfMatchesChangeOfMeasureQuadrature) {
    for (double theta : {0.1, 0.5, 1.0}) {
        const GaussianMeanShift m(theta);
        for (double t : {0.3, 0.9, 1.0, 1.2, 2.5}) {
            EXPECT_NEAR(m.cdf_lr_0(t), oracle::cdf_lr_0(theta, t), 1e-11) << "theta=" << theta << " t=" << t;
        }
    }
}

TEST(Model, DensityIntegratesToCdf) {
    const GaussianMeanShift m(0.5);
    auto f = [&](double t) { return m.pdf_lr_inf(t); };
    EXPECT_NEAR(oracle::integrate(f, 0.0, 1.0) + oracle::integrate(f, 1.0, 3.0), m.cdf_lr_inf(3.0), 1e-12);
}

TEST(Model, TailsAgreeWithCdf) {
    const GaussianMeanShift m(1.0);
    for (double t : {1e-6, 0.2, 1.0, 7.0, 1e4}) {
        const LrTails tl = m.tails(t);
        EXPECT_NEAR(tl.inf.cdf(), m.cdf_lr_inf(t), 1e-15);
        EXPECT_NEAR(tl.zero.cdf(), m.cdf_lr_0(t), 1e-15);
    }
}

TEST(Kernel, PreChangeValues) {
    const GaussianMeanShift m(1.0);
    EXPECT_EQ(kernel_inf(m, 0.0, 0.0), 0.0);
    EXPECT_EQ(kernel_inf(m, 0.0, -1.0), 0.0);
    EXPECT_NEAR(kernel_inf(m, 0.0, 1.0), std::exp(-0.125) / std::sqrt(2.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(kernel_inf(m, 1.0, 2.0), 0.1760326633821498, 1e-14);
    EXPECT_NEAR(kernel_inf(m, 1.0, 2.0), kernel_inf(m, 0.0, 1.0) / 2.0, 1e-16);
    EXPECT_THROW(kernel_inf(m, -0.5, 1.0), std::domain_error);
}

TEST(Kernel, PostChangeValues) {
    const GaussianMeanShift m(1.0);
    EXPECT_EQ(kernel_0(m, 3.0, 0.0), 0.0);
    EXPECT_NEAR(kernel_0(m, 0.0, 1.0), 0.3520653267642995, 1e-14);
    EXPECT_NEAR(kernel_0(m, 1.0, 1.0), 0.5 * kernel_inf(m, 1.0, 1.0), 1e-16);
}

TEST(Kernel, NoOverflowNearZero) {
    const GaussianMeanShift m(0.01);
    EXPECT_EQ(kernel_inf(m, 0.0, 1e-300), 0.0);
    EXPECT_TRUE(std::isfinite(kernel_inf(m, 0.0, std::numeric_limits<double>::denorm_min())));
}

TEST(Kernel, ChangeOfMeasureIdentityOnGrid) {
    // (1+x) K_0(x,y) = y K_inf(x,y) on a 100 x 100 grid.
    const GaussianMeanShift m(1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 100; ++j) {
            const double x = 0.6 * i, y = 0.05 + 0.6 * j;
            const double lhs = (1.0 + x) * kernel_0(m, x, y);
            const double rhs = y * kernel_inf(m, x, y);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Kernel, PreChangeKernelIntegratesToOne) {
    // int_0^inf K_inf(x,y) dy = 1 for every x.
    const GaussianMeanShift m(1.0);
    for (double x : {0.0, 1.0, 10.0}) {
        auto f = [&](double y) { return kernel_inf(m, x, y); };
        const double c = 1.0 + x;
        const double total = oracle::integrate(f, 0.0, c) + oracle::integrate(f, c, 10 * c) +
                             oracle::integrate(f, 10 * c, 400 * c);
        EXPECT_NEAR(total, 1.0, 1e-10) << "x=" << x;
    }
}

TEST(Sampling, PreChangeMeanIsOne) {
    const GaussianMeanShift m(1.0);
    Accumulator acc;
    Rng rng = replication_rng(11, 0);
    for (int i = 0; i < 1000000; ++i) acc.add(m.sample_lr(Regime::pre, rng));
    EXPECT_NEAR(acc.mean(), 1.0, 3.0 * acc.standard_error());
}

TEST(Sampling, PostChangeLogMean) {
    const GaussianMeanShift m(1.0);
    Accumulator acc;
    Rng rng = replication_rng(12, 0);
    for (int i = 0; i < 1000000; ++i) acc.add(std::log(m.sample_lr(Regime::post, rng)));
    EXPECT_NEAR(acc.mean(), 0.5, 3.0 * acc.standard_error());
}
