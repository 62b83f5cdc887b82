#pragma once

#include "wstokes/common.hpp"

#include <array>
#include <vector>

namespace wstokes {

/// Symmetric Gaussian rule on the reference tetrahedron (0,e1,e2,e3).
/// Points are barycentric (lambda0..lambda3); weights sum to 1/6.
struct QuadratureRule {
    int order = 0;
    std::vector<std::array<double, 4>> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Rule exact for polynomials of total degree <= order, 1 <= order <= 6.
/// Throws NotImplemented for other orders.
const QuadratureRule& quadrature(int order);

/// Gauss-Legendre nodes and weights on [0,1].
struct GaussLine {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLine gauss_legendre(int n);

}  // namespace wstokes
