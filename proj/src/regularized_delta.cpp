#include "wstokes/regularized_delta.hpp"

#include "wstokes/quadrature.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace wstokes {

double RegularizedDelta::value(const Barycentric& l) const {
    const auto phi = p2_values(l);
    double s = 0.0;
    for (int k = 0; k < 10; ++k) s += coeffs[k] * phi[k];
    return s;
}

Eigen::Matrix<double, 10, 10> p2_local_mass(const TetMesh& mesh, int t) {
    const auto& rule = quadrature(4);
    const double det = 6.0 * mesh.volume(t);
    Eigen::Matrix<double, 10, 10> m = Eigen::Matrix<double, 10, 10>::Zero();
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const auto phi = p2_values(rule.points[k]);
        const Eigen::Map<const Eigen::Matrix<double, 10, 1>> v(phi.data());
        m.noalias() += rule.weights[k] * det * v * v.transpose();
    }
    return m;
}

RegularizedDelta build_regularized_delta(const TaylorHoodSpace& space, const Point& z) {
    const auto& mesh = space.mesh();
    const auto loc = locate_point(mesh, z);
    if (*std::min_element(loc.barycentric.begin(), loc.barycentric.end()) <= 1e-8)
        throw InvalidArgument("build_regularized_delta: anchor lies on a face, edge, or vertex");

    RegularizedDelta d;
    d.z = z;
    d.tet = loc.tet;
    d.z_barycentric = loc.barycentric;
    const auto phi = p2_values(loc.barycentric);
    const Eigen::Map<const Eigen::Matrix<double, 10, 1>> rhs(phi.data());
    d.coeffs = p2_local_mass(mesh, loc.tet).ldlt().solve(rhs);

    const auto& rule = quadrature(6);
    const double det = 6.0 * mesh.volume(loc.tet);
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double v = d.value(rule.points[k]);
        d.norm_l1 += rule.weights[k] * det * std::abs(v);
        d.norm_l2 += rule.weights[k] * det * v * v;
        d.norm_linf = std::max(d.norm_linf, std::abs(v));
    }
    d.norm_l2 = std::sqrt(d.norm_l2);
    constexpr int m = 16;
    for (int a = 0; a <= m; ++a)
        for (int b = 0; a + b <= m; ++b)
            for (int c = 0; a + b + c <= m; ++c) {
                const Barycentric l{static_cast<double>(m - a - b - c) / m, static_cast<double>(a) / m,
                                    static_cast<double>(b) / m, static_cast<double>(c) / m};
                d.norm_linf = std::max(d.norm_linf, std::abs(d.value(l)));
            }
    return d;
}

}  // namespace wstokes
