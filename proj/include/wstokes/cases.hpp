#pragma once

#include "wstokes/norms.hpp"
#include "wstokes/poly3.hpp"

#include <array>
#include <string>
#include <vector>

namespace wstokes {

/// Polynomial manufactured solution on the unit cube, or a point-forced case
/// without exact solution.
struct ManufacturedCase {
    std::string name;
    bool has_exact_solution = true;
    std::array<Poly3, 3> u;
    Poly3 p;
    Point dirac_point = Point::Zero();
    Point dirac_amplitude = Point::Zero();

    [[nodiscard]] VelocityField velocity() const;
    [[nodiscard]] ScalarFunction pressure() const;
    [[nodiscard]] TensorFunction velocity_gradient() const;
    /// Strong-form load -div(2 mu eps(u)) + grad p = -mu Lap u + grad p.
    [[nodiscard]] VectorFunction stokes_forcing(double mu) const;
    /// Same case with u and p multiplied by a.
    [[nodiscard]] ManufacturedCase scaled(double a) const;
};

std::vector<std::string> builtin_case_names();
/// smooth_curl, polynomial_bubble, or dirac_point.
ManufacturedCase builtin_case(const std::string& name);

}  // namespace wstokes
