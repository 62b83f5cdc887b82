#pragma once

#include "wstokes/weights.hpp"

#include <functional>

namespace wstokes {

using ScalarField = std::function<double(const Point&)>;

/// Axis-aligned cube given by its center and side length.
struct Cube {
    Point center = Point::Constant(0.5);
    double side = 1.0;

    [[nodiscard]] Cube dilated(double factor) const { return {center, side * factor}; }
    [[nodiscard]] bool contains(const Point& x) const;           // closed
    [[nodiscard]] bool contains_open(const Point& x) const;      // open
};

struct DecompositionReport {
    double mean_g = 0.0;
    double mean_g1 = 0.0;
    double mean_g2 = 0.0;
    double l1_norm_g = 0.0;
    double correction = 0.0;     // (1/|A|) * int_D phi g
    double annulus_volume = 0.0;  // |A|, A = D \ Q
    double norm_g = 0.0;          // ||g||_{L^q(w)}
    double ratio_g1 = 0.0;        // ||g1|| / ||g||
    double ratio_g2 = 0.0;
};

struct Decomposition {
    ScalarField g1;  // supported in D = (3/2)Q
    ScalarField g2;  // vanishes on Q
    Cube q_cube;
    Cube d_cube;
    DecompositionReport report;
};

/// Tensor-product quintic bump: 1 on Q, 0 off (3/2)Q.
double cutoff(const Cube& q, const Point& x);

/// g = g1 + g2 with g1 = phi g - chi_A (1/|A|) int_D phi g and g2 = g - g1.
/// Integrals use composite Gauss rules whose breakpoints include the faces of
/// Q and (3/2)Q, so both parts integrate to zero up to rounding.
Decomposition decompose_zero_mean(const ScalarField& g, const Cube& q, const WeightField& w, double exponent,
                                  int gauss_points = 6, int subdivisions = 4);

/// Composite tensor Gauss integration over [0,1]^3 with extra breakpoints.
double integrate_unit_cube(const ScalarField& f, const std::vector<double>& breakpoints, int gauss_points,
                           int subdivisions);

}  // namespace wstokes
