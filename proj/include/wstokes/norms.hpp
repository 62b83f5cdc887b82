#pragma once

#include "wstokes/taylor_hood.hpp"
#include "wstokes/weights.hpp"

namespace wstokes {

enum class Derivative { none, gradient, symmetric_gradient };

std::string to_string(Derivative d);
Derivative derivative_from_string(const std::string& s);

/// Smooth velocity with its gradient, (grad u)_{ij} = d u_i / d x_j.
struct VelocityField {
    VectorFunction value;
    TensorFunction gradient;
};

/// Called at every quadrature point with (tet, barycentric, x, weight).
using QuadratureVisitor = std::function<void(int, const Barycentric&, const Point&, double)>;
void for_each_quadrature_point(const TetMesh& mesh, int order, const QuadratureVisitor& f);

/// (sum_T sum_k w_k omega(x_k) |g(t, l, x)|^q)^(1/q); g returns a magnitude.
double weighted_lq(const TetMesh& mesh, const WeightField& w, double q, int order,
                   const std::function<double(int, const Barycentric&, const Point&)>& g);

/// Norm of an FE function; |.| is the Frobenius norm for tensors.
double weighted_norm(const FEFunction& u, const WeightField& w, double q, Derivative d, int quad_order = 5);

/// Norm of u_h - u for a velocity, or p_h - p for a pressure.
double weighted_error(const FEFunction& uh, const VelocityField& u, const WeightField& w, double q, Derivative d,
                      int quad_order = 5);
double weighted_error(const FEFunction& ph, const ScalarFunction& p, const WeightField& w, double q,
                      int quad_order = 5);

/// Norm of a smooth field on the mesh, by the same quadrature.
double weighted_norm(const TetMesh& mesh, const VelocityField& u, const WeightField& w, double q, Derivative d,
                     int quad_order = 5);
double weighted_norm(const TetMesh& mesh, const ScalarFunction& p, const WeightField& w, double q,
                     int quad_order = 5);

double integrate(const FEFunction& p);
/// p - (1/|Omega|) int p.
FEFunction zero_mean_project(const FEFunction& p);

}  // namespace wstokes
