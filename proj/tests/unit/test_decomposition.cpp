#include "wstokes/decomposition.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace wstokes;

namespace {

constexpr double pi = std::numbers::pi;

const Cube base_cube{Point(0.5, 0.5, 0.5), 0.4};

// sin of a full period across Q: zero mean, supported in Q
double inside(const Point& x) {
    if (!base_cube.contains(x)) return 0.0;
    return std::sin(2.0 * pi * (x[0] - 0.3) / 0.4) * (1.0 + x[1]);
}

double generic(const Point& x) { return std::cos(pi * x[0]) + std::sin(2.0 * pi * x[1]) * x[2] + x[2] - 0.5; }

}  // namespace

TEST(Cutoff, Profile) {
    const Cube q{Point(0.5, 0.5, 0.5), 0.2};
    EXPECT_EQ(cutoff(q, Point(0.5, 0.5, 0.5)), 1.0);
    EXPECT_EQ(cutoff(q, Point(0.6, 0.4, 0.6)), 1.0);
    EXPECT_EQ(cutoff(q, Point(0.65, 0.5, 0.5)), 0.0);
    EXPECT_EQ(cutoff(q, Point(0.5, 0.2, 0.5)), 0.0);
    const double mid = cutoff(q, Point(0.625, 0.5, 0.5));
    EXPECT_NEAR(mid, 0.5, 1e-15);
}

TEST(Decomposition, SupportedInsideQ) {
    const auto w = WeightField::power_point(base_cube.center, 1.0);
    const auto dcp = decompose_zero_mean(inside, base_cube, w, 2.0);
    EXPECT_NEAR(dcp.report.correction, 0.0, 1e-12);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const Point x(u(rng), u(rng), u(rng));
        EXPECT_NEAR(dcp.g1(x), inside(x), 1e-12);
        EXPECT_NEAR(dcp.g2(x), 0.0, 1e-12);
    }
}

TEST(Decomposition, SupportedOutsideD) {
    const Cube q{Point(0.5, 0.5, 0.5), 0.2};
    auto g = [](const Point& x) { return x[0] < 0.35 ? std::sin(2.0 * pi * x[0] / 0.35) : 0.0; };
    const auto dcp = decompose_zero_mean(g, q, WeightField::constant(), 2.0);
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const Point x(u(rng), u(rng), u(rng));
        EXPECT_EQ(dcp.g1(x), 0.0);
        EXPECT_EQ(dcp.g2(x), g(x));
    }
}

TEST(Decomposition, GenericZeroMean) {
    const Point c(0.45, 0.55, 0.5);
    const auto w = WeightField::power_point(c, 1.0);
    double ratio_max = 0.0;
    for (double side : {0.4, 0.2, 0.1}) {
        const Cube q{c, side};
        const auto dcp = decompose_zero_mean(generic, q, w, 2.0);
        const auto& r = dcp.report;
        EXPECT_LE(std::abs(r.mean_g1), 1e-10 * r.l1_norm_g);
        EXPECT_LE(std::abs(r.mean_g2), 1e-10 * r.l1_norm_g);
        ratio_max = std::max({ratio_max, r.ratio_g1, r.ratio_g2});
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 300; ++k) {
            const Point x(u(rng), u(rng), u(rng));
            EXPECT_NEAR(dcp.g1(x) + dcp.g2(x), generic(x), 1e-12);
            if (!dcp.d_cube.contains_open(x)) EXPECT_EQ(dcp.g1(x), 0.0);
            if (q.contains(x)) EXPECT_EQ(dcp.g2(x), 0.0);
        }
    }
    EXPECT_LT(ratio_max, 10.0);
}

TEST(Decomposition, Preconditions) {
    EXPECT_THROW(decompose_zero_mean(generic, Cube{Point(0.2, 0.5, 0.5), 0.4}, WeightField::constant(), 2.0),
                 InvalidArgument);
    auto shifted = [](const Point& x) { return generic(x) + 1.0; };
    EXPECT_THROW(decompose_zero_mean(shifted, base_cube, WeightField::constant(), 2.0), InvalidArgument);
}
