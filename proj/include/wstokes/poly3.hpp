#pragma once

#include "wstokes/common.hpp"

#include <array>
#include <map>
#include <utility>
#include <vector>

namespace wstokes {

/// Polynomial in (x, y, z) with exact arithmetic on its exponent structure.
class Poly3 {
public:
    using Exponent = std::array<int, 3>;

    Poly3() = default;
    Poly3(double c);  // NOLINT: constants convert implicitly
    static Poly3 var(int axis);
    static Poly3 monomial(double c, int a, int b, int d);

    [[nodiscard]] double operator()(const Point& x) const;
    [[nodiscard]] Poly3 derivative(int axis) const;
    /// Largest exponent of any single variable.
    [[nodiscard]] int degree() const;
    [[nodiscard]] const std::map<Exponent, double>& terms() const { return terms_; }

    Poly3& operator+=(const Poly3& o);
    Poly3& operator-=(const Poly3& o);
    Poly3& operator*=(const Poly3& o);
    friend Poly3 operator+(Poly3 a, const Poly3& b) { return a += b; }
    friend Poly3 operator-(Poly3 a, const Poly3& b) { return a -= b; }
    friend Poly3 operator*(Poly3 a, const Poly3& b) { return a *= b; }
    friend Poly3 operator-(const Poly3& a) { return Poly3(-1.0) * a; }

    /// Exact integral over the unit cube.
    [[nodiscard]] double integral_unit_cube() const;

private:
    void prune();
    std::map<Exponent, double> terms_;
    std::vector<std::pair<Exponent, double>> flat_;
    int degree_ = 0;
};

}  // namespace wstokes
