#include "wstokes/cases.hpp"
#include "wstokes/taylor_hood.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wstokes;

namespace {

std::vector<Point> random_points(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    return pts;
}

}  // namespace

TEST(Cases, SolenoidalZeroTraceMeanFree) {
    for (const std::string name : {"smooth_curl", "polynomial_bubble"}) {
        const auto c = builtin_case(name);
        ASSERT_TRUE(c.has_exact_solution);
        const auto grad = c.velocity_gradient();
        double div = 0.0;
        for (const auto& x : random_points(1000, 5)) div = std::max(div, std::abs(grad(x).trace()));
        EXPECT_LE(div, 1e-12) << name;

        double boundary = 0.0;
        for (auto x : random_points(1000, 6)) {
            for (int axis = 0; axis < 3; ++axis)
                for (double side : {0.0, 1.0}) {
                    Point y = x;
                    y[axis] = side;
                    boundary = std::max(boundary, c.velocity().value(y).norm());
                }
        }
        EXPECT_LE(boundary, 1e-12) << name;
        EXPECT_LE(std::abs(c.p.integral_unit_cube()), 1e-10) << name;
    }
}

TEST(Cases, SmoothCurlPressure) {
    const auto p = builtin_case("smooth_curl").pressure();
    EXPECT_NEAR(p(Point(1.0, 1.0, 1.0)), 2.25, 1e-14);
    EXPECT_NEAR(p(Point(0.0, 0.0, 0.0)), -0.75, 1e-14);
}

TEST(Cases, ForcingIsStrongResidual) {
    const auto c = builtin_case("smooth_curl");
    const double mu = 1.3;
    const auto f = c.stokes_forcing(mu);
    const Point x(0.31, 0.62, 0.47);
    // -mu Lap u + grad p by central differences of the gradient
    const double h = 1e-4;
    const auto grad = c.velocity_gradient();
    Point lap = Point::Zero();
    for (int k = 0; k < 3; ++k) {
        Point e = Point::Zero();
        e[k] = h;
        lap += ((grad(x + e) - grad(x - e)) / (2.0 * h)).col(k);
    }
    Point gp;
    for (int k = 0; k < 3; ++k) {
        Point e = Point::Zero();
        e[k] = h;
        gp[k] = (c.pressure()(x + e) - c.pressure()(x - e)) / (2.0 * h);
    }
    EXPECT_LT((f(x) - (-mu * lap + gp)).norm(), 1e-6);
}

TEST(Cases, DiracAndUnknown) {
    const auto d = builtin_case("dirac_point");
    EXPECT_FALSE(d.has_exact_solution);
    EXPECT_EQ(d.dirac_point, Point(0.52, 0.5, 0.5));
    try {
        (void)builtin_case("vortex");
        FAIL();
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        for (const auto& n : builtin_case_names()) EXPECT_NE(msg.find(n), std::string::npos);
    }
}

TEST(Cases, ScaledCase) {
    const auto c = builtin_case("polynomial_bubble");
    const auto s = c.scaled(3.0);
    const Point x(0.2, 0.3, 0.6);
    EXPECT_LT((s.velocity().value(x) - 3.0 * c.velocity().value(x)).norm(), 1e-15);
    EXPECT_NEAR(s.pressure()(x), 3.0 * c.pressure()(x), 1e-15);
}
