#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "gsr/grid.hpp"

using namespace gsr;

TEST(Chebyshev, EndpointsOnly) {
    const Partition p = chebyshev_partition(1.0, 2);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p.nodes[0], 0.0);
    EXPECT_EQ(p.nodes[1], 1.0);
}

TEST(Chebyshev, ThreeNodes) {
    const Partition p = chebyshev_partition(1.0, 3);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p.nodes[0], 0.0);
    EXPECT_NEAR(p.nodes[1], 0.5, 1e-15);
    EXPECT_EQ(p.nodes[2], 1.0);
    EXPECT_NEAR(p.widths[0], 0.5, 1e-15);
    EXPECT_NEAR(p.widths[1], 0.5, 1e-15);
}

TEST(Chebyshev, LargestWidth) {
    const Partition p = chebyshev_partition(56.0, 4096);
    EXPECT_NEAR(p.h_max, 56.0 * std::tan(std::numbers::pi / 8192.0), 1e-12);
    EXPECT_NEAR(p.h_max, 2.1475e-2, 5e-6);
}

TEST(Chebyshev, WidthsFollowSineLaw) {
    // h_j = A tan(pi/2N) sin(pi j/N)
    const double a = 10.0;
    const std::size_t n = 64;
    const Partition p = chebyshev_partition(a, n);
    for (std::size_t j = 1; j < n; ++j) {
        const double h = a * std::tan(std::numbers::pi / (2.0 * n)) * std::sin(std::numbers::pi * j / n);
        EXPECT_NEAR(p.widths[j - 1], h, 1e-12);
    }
}

TEST(Chebyshev, StrictlyIncreasingAndSymmetric) {
    const Partition p = chebyshev_partition(7.0, 257);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) EXPECT_LT(p.nodes[k], p.nodes[k + 1]);
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p.nodes[k] + p.nodes[p.size() - 1 - k], 7.0, 1e-12);
}

TEST(Partition, RejectsBadArguments) {
    EXPECT_THROW(chebyshev_partition(1.0, 1), std::invalid_argument);
    EXPECT_THROW(chebyshev_partition(0.0, 4), std::invalid_argument);
    EXPECT_THROW(chebyshev_partition(-3.0, 4), std::invalid_argument);
    EXPECT_THROW(uniform_partition(1.0, 1), std::invalid_argument);
}

TEST(Uniform, EqualWidths) {
    const Partition p = uniform_partition(4.0, 5);
    for (double h : p.widths) EXPECT_DOUBLE_EQ(h, 1.0);
    EXPECT_EQ(p.nodes.back(), 4.0);
}

TEST(Hat, CardinalProperty) {
    const Partition p = chebyshev_partition(3.0, 9);
    for (std::size_t j = 1; j <= p.size(); ++j)
        for (std::size_t i = 0; i < p.size(); ++i)
            EXPECT_DOUBLE_EQ(hat_eval(p, j, p.nodes[i]), i + 1 == j ? 1.0 : 0.0);
}

TEST(Hat, LinearRamp) {
    const Partition p = chebyshev_partition(1.0, 3);
    EXPECT_NEAR(hat_eval(p, 2, 0.25), 0.5, 1e-15);
}

TEST(Hat, Errors) {
    const Partition p = chebyshev_partition(1.0, 3);
    EXPECT_THROW(hat_eval(p, 0, 0.5), std::out_of_range);
    EXPECT_THROW(hat_eval(p, 4, 0.5), std::out_of_range);
    EXPECT_THROW(hat_eval(p, 1, -0.1), std::domain_error);
    EXPECT_THROW(hat_eval(p, 1, 1.1), std::domain_error);
}

TEST(Interpolate, PartitionOfUnity) {
    const Partition p = chebyshev_partition(5.0, 17);
    const std::vector<double> ones(p.size(), 1.0);
    for (double x = 0.0; x <= 5.0; x += 0.037) EXPECT_NEAR(interpolate(p, ones, x), 1.0, 1e-14);
}

TEST(Interpolate, ReproducesLinear) {
    const Partition p = chebyshev_partition(5.0, 17);
    const std::vector<double> c(p.nodes.begin(), p.nodes.end());
    for (double x = 0.0; x <= 5.0; x += 0.037) EXPECT_NEAR(interpolate(p, c, x), x, 1e-14);
}

TEST(Interpolate, ChordOfParabola) {
    const Partition p = chebyshev_partition(1.0, 3);
    std::vector<double> c;
    for (double x : p.nodes) c.push_back(x * x);
    EXPECT_NEAR(interpolate(p, c, 0.25), 0.125, 1e-15);
}

TEST(Interpolate, SizeMismatch) {
    const Partition p = chebyshev_partition(1.0, 3);
    const std::vector<double> c{1.0, 2.0};
    EXPECT_THROW(interpolate(p, c, 0.5), std::invalid_argument);
}
