#pragma once

#include "wstokes/taylor_hood.hpp"

#include <Eigen/Core>

namespace wstokes {

/// Quadratic on the host tet T_z whose integral against any P2 function on
/// T_z equals that function's value at z.
struct RegularizedDelta {
    Point z = Point::Zero();
    int tet = -1;
    Barycentric z_barycentric{};
    Eigen::Matrix<double, 10, 1> coeffs;  // in the local P2 basis of tet
    double norm_l1 = 0.0;
    double norm_l2 = 0.0;
    double norm_linf = 0.0;  // sampled on a barycentric lattice

    [[nodiscard]] double value(const Barycentric& l) const;
};

/// Local P2 mass matrix of tet t.
Eigen::Matrix<double, 10, 10> p2_local_mass(const TetMesh& mesh, int t);

/// Throws InvalidArgument when z is on a face, edge, or vertex of its host tet.
RegularizedDelta build_regularized_delta(const TaylorHoodSpace& space, const Point& z);

}  // namespace wstokes
