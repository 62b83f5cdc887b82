#include "wstokes/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace wstokes;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Closed form: int_T x^a y^b z^c = a! b! c! / (a+b+c+3)! on the unit reference tet.
double monomial_exact(int a, int b, int c) {
    return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}

double monomial_rule(const QuadratureRule& r, int a, int b, int c) {
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const auto& l = r.points[k];
        s += r.weights[k] * std::pow(l[1], a) * std::pow(l[2], b) * std::pow(l[3], c);
    }
    return s;
}

}  // namespace

TEST(Quadrature, CentroidRule) {
    const auto& r = quadrature(1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r.weights[0], 1.0 / 6.0, 1e-16);
    for (double l : r.points[0]) EXPECT_NEAR(l, 0.25, 1e-16);
}

TEST(Quadrature, IntegralOfX) {
    for (int order = 1; order <= 6; ++order)
        EXPECT_NEAR(monomial_rule(quadrature(order), 1, 0, 0), 1.0 / 24.0, 1e-15) << order;
}

TEST(Quadrature, XSquaredY) {
    const double exact = 2.0 / 720.0;
    EXPECT_NEAR(monomial_exact(2, 1, 0), exact, 1e-18);
    for (int order = 3; order <= 6; ++order)
        EXPECT_NEAR(monomial_rule(quadrature(order), 2, 1, 0) / exact, 1.0, 1e-13) << order;
}

TEST(Quadrature, AllMonomialsUpToOrder) {
    for (int order = 1; order <= 6; ++order) {
        const auto& r = quadrature(order);
        EXPECT_GE(r.order, order);
        double wsum = 0.0;
        for (double w : r.weights) {
            EXPECT_GT(w, 0.0);
            wsum += w;
        }
        EXPECT_NEAR(wsum, 1.0 / 6.0, 1e-15);
        for (const auto& l : r.points) EXPECT_NEAR(l[0] + l[1] + l[2] + l[3], 1.0, 1e-15);
        for (int a = 0; a <= order; ++a)
            for (int b = 0; a + b <= order; ++b)
                for (int c = 0; a + b + c <= order; ++c) {
                    const double e = monomial_exact(a, b, c);
                    EXPECT_NEAR(monomial_rule(r, a, b, c) / e, 1.0, 1e-13)
                        << "order " << order << " monomial " << a << b << c;
                }
    }
}

TEST(Quadrature, UnsupportedOrder) {
    EXPECT_THROW(quadrature(0), NotImplemented);
    EXPECT_THROW(quadrature(7), NotImplemented);
}

TEST(GaussLegendre, IntegratesPolynomials) {
    for (int n = 1; n <= 8; ++n) {
        const auto g = gauss_legendre(n);
        for (int k = 0; k < 2 * n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
            EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << n << " " << k;
        }
    }
}
