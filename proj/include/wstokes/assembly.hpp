#pragma once

#include "wstokes/norms.hpp"
#include "wstokes/taylor_hood.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace wstokes {

/// Node adjacency of the P2 space; velocity matrices use 3x3 blocks of it.
/// Each node's neighbor list is sorted, so vertices (indices < V) come first.
struct NodePattern {
    std::vector<int> start;      // size num_nodes + 1
    std::vector<int> neighbors;  // sorted per node, includes the node itself
    std::vector<int> vertex_count;  // number of vertex neighbors per node

    [[nodiscard]] int degree(int node) const { return start[node + 1] - start[node]; }
    [[nodiscard]] int rank(int node, int other) const;  // position of `other` in node's list
};

NodePattern build_node_pattern(const TaylorHoodSpace& space);

/// Integrand terms of a velocity operator at one quadrature point:
///   sym   * eps(u):eps(v)
/// + grad  * grad u : grad v
/// + rank1 * (E:eps(u)) (E:eps(v))
/// + 1/2 [((beta.grad) u).v - ((beta.grad) v).u]
struct VelocityTerms {
    double sym = 0.0;
    double grad = 0.0;
    double rank1 = 0.0;
    Mat3 e = Mat3::Zero();
    Point beta = Point::Zero();
    bool convection = false;
};

/// Callback (tet, quadrature index, barycentric, x, terms).
using VelocityTermsAt = std::function<void(int, int, const Barycentric&, const Point&, VelocityTerms&)>;

/// Velocity operator on the full P2 pattern, no boundary conditions.
SparseMatrix assemble_velocity_operator(const TaylorHoodSpace& space, const NodePattern& pattern,
                                        const VelocityTermsAt& terms, int quad_order = 4);

/// B_{r,(a,i)} = -int psi_r d_i phi_a (pressure rows, velocity columns).
SparseMatrix assemble_divergence(const TaylorHoodSpace& space, const NodePattern& pattern);

/// P1 mass matrix, optionally weighted.
SparseMatrix assemble_pressure_mass(const TaylorHoodSpace& space, const ScalarFunction& weight = nullptr);

/// Vector of int psi_i over the domain.
Vector pressure_mass_vector(const TaylorHoodSpace& space);

/// Symmetric elimination: boundary rows and columns cleared, unit diagonal.
void apply_velocity_bc(const TaylorHoodSpace& space, SparseMatrix& a);
/// Clears boundary velocity columns of a pressure-velocity matrix.
void apply_divergence_bc(const TaylorHoodSpace& space, SparseMatrix& b);
/// Sets boundary velocity entries to zero.
void apply_rhs_bc(const TaylorHoodSpace& space, Vector& f);

/// F_(a,i) = int f . phi_a e_i.
Vector assemble_rhs_body(const TaylorHoodSpace& space, const VectorFunction& f, int quad_order = 5);
/// F_(a,i) = int f : grad(phi_a e_i).
Vector assemble_rhs_divergence_form(const TaylorHoodSpace& space, const TensorFunction& f, int quad_order = 5);
/// F_(a,i) = amplitude_i phi_a(z).
Vector assemble_rhs_measure(const TaylorHoodSpace& space, const Point& z, const Point& amplitude);
/// G_r = -int psi_r g.
Vector assemble_pressure_rhs(const TaylorHoodSpace& space, const ScalarFunction& g, int quad_order = 5);

/// Coordinate text format, one `row col value` triple per line.
void write_coo(std::ostream& os, const SparseMatrix& m);

}  // namespace wstokes
