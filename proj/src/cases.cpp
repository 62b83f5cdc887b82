#include "wstokes/cases.hpp"

namespace wstokes {

namespace {

Poly3 bubble1d(int axis, int power) {
    const Poly3 x = Poly3::var(axis);
    Poly3 b = x * (Poly3(1.0) - x);
    Poly3 out(1.0);
    for (int i = 0; i < power; ++i) out *= b;
    return out;
}

}  // namespace

VelocityField ManufacturedCase::velocity() const {
    const auto u0 = u;
    return {[u0](const Point& x) { return Point(u0[0](x), u0[1](x), u0[2](x)); }, velocity_gradient()};
}

TensorFunction ManufacturedCase::velocity_gradient() const {
    std::array<Poly3, 9> g;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g[3 * i + j] = u[i].derivative(j);
    return [g](const Point& x) {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = g[3 * i + j](x);
        return m;
    };
}

ScalarFunction ManufacturedCase::pressure() const {
    const Poly3 p0 = p;
    return [p0](const Point& x) { return p0(x); };
}

VectorFunction ManufacturedCase::stokes_forcing(double mu) const {
    std::array<Poly3, 3> f;
    for (int i = 0; i < 3; ++i) {
        Poly3 lap;
        for (int j = 0; j < 3; ++j) lap += u[i].derivative(j).derivative(j);
        f[i] = Poly3(-mu) * lap + p.derivative(i);
    }
    return [f](const Point& x) { return Point(f[0](x), f[1](x), f[2](x)); };
}

ManufacturedCase ManufacturedCase::scaled(double a) const {
    ManufacturedCase c = *this;
    for (auto& ui : c.u) ui *= Poly3(a);
    c.p *= Poly3(a);
    c.dirac_amplitude *= a;
    return c;
}

std::vector<std::string> builtin_case_names() { return {"smooth_curl", "polynomial_bubble", "dirac_point"}; }

ManufacturedCase builtin_case(const std::string& name) {
    ManufacturedCase c;
    c.name = name;
    const Poly3 x = Poly3::var(0), y = Poly3::var(1), z = Poly3::var(2);
    if (name == "smooth_curl") {
        const Poly3 psi = bubble1d(0, 2) * bubble1d(1, 2) * bubble1d(2, 2);
        // curl (psi, psi, psi)
        c.u[0] = psi.derivative(1) - psi.derivative(2);
        c.u[1] = psi.derivative(2) - psi.derivative(0);
        c.u[2] = psi.derivative(0) - psi.derivative(1);
        c.p = x * x * x + y * y * y + z * z * z - Poly3(0.75);
        return c;
    }
    if (name == "polynomial_bubble") {
        const Poly3 psi = bubble1d(0, 2) * bubble1d(1, 2) * bubble1d(2, 1);
        c.u[0] = psi.derivative(1);
        c.u[1] = -psi.derivative(0);
        c.u[2] = Poly3(0.0);
        c.p = x - Poly3(0.5);
        return c;
    }
    if (name == "dirac_point") {
        c.has_exact_solution = false;
        c.dirac_point = Point(0.52, 0.5, 0.5);
        c.dirac_amplitude = Point(1.0, 0.0, 0.0);
        return c;
    }
    std::string valid;
    for (const auto& n : builtin_case_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown case '" + name + "'; valid cases: " + valid);
}

}  // namespace wstokes
