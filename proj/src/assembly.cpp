#include "wstokes/assembly.hpp"

#include "wstokes/quadrature.hpp"

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <ostream>

namespace wstokes {

int NodePattern::rank(int node, int other) const {
    const auto first = neighbors.begin() + start[node];
    const auto last = neighbors.begin() + start[node + 1];
    const auto it = std::lower_bound(first, last, other);
    if (it == last || *it != other) throw InvalidArgument("node pair is not in the pattern");
    return static_cast<int>(it - first);
}

NodePattern build_node_pattern(const TaylorHoodSpace& space) {
    const int nn = space.num_nodes();
    std::vector<std::uint64_t> pairs;
    pairs.reserve(space.mesh().num_tets() * 100);
    for (int t = 0; t < static_cast<int>(space.mesh().num_tets()); ++t) {
        const auto& en = space.element_nodes(t);
        for (int a : en)
            for (int b : en) pairs.push_back((static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b));
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    NodePattern p;
    p.start.assign(nn + 1, 0);
    p.neighbors.resize(pairs.size());
    p.vertex_count.assign(nn, 0);
    const int nv = space.num_vertices();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const int a = static_cast<int>(pairs[k] >> 32);
        const int b = static_cast<int>(pairs[k] & 0xffffffffu);
        ++p.start[a + 1];
        p.neighbors[k] = b;
        if (b < nv) ++p.vertex_count[a];
    }
    for (int a = 0; a < nn; ++a) p.start[a + 1] += p.start[a];
    return p;
}

namespace {

// Column-major storage for the 3x3-blocked velocity pattern: column 3b+j
// lists rows 3a+i for every neighbor a of b. Written in place to avoid
// holding a second copy of the largest matrix.
SparseMatrix velocity_matrix(const NodePattern& p) {
    const int nn = static_cast<int>(p.start.size()) - 1;
    SparseMatrix m(3 * nn, 3 * nn);
    m.resizeNonZeros(static_cast<Eigen::Index>(9 * p.neighbors.size()));
    int* outer = m.outerIndexPtr();
    int* inner = m.innerIndexPtr();
    outer[0] = 0;
    for (int b = 0; b < nn; ++b) {
        const int deg = p.degree(b);
        for (int j = 0; j < 3; ++j) {
            const std::size_t col = 3 * static_cast<std::size_t>(b) + j;
            const int s = 9 * p.start[b] + 3 * deg * j;
            outer[col + 1] = s + 3 * deg;
            for (int r = 0; r < deg; ++r)
                for (int i = 0; i < 3; ++i) inner[s + 3 * r + i] = 3 * p.neighbors[p.start[b] + r] + i;
        }
    }
    std::fill(m.valuePtr(), m.valuePtr() + m.nonZeros(), 0.0);
    return m;
}

SparseMatrix from_arrays(int rows, int cols, std::vector<int>& outer, std::vector<int>& inner,
                         std::vector<double>& values) {
    const Eigen::Map<SparseMatrix> m(rows, cols, static_cast<Eigen::Index>(values.size()), outer.data(),
                                     inner.data(), values.data());
    return SparseMatrix(m);
}

}  // namespace

SparseMatrix assemble_velocity_operator(const TaylorHoodSpace& space, const NodePattern& pattern,
                                        const VelocityTermsAt& terms, int quad_order) {
    SparseMatrix out = velocity_matrix(pattern);
    double* values = out.valuePtr();
    const auto& rule = quadrature(quad_order);
    const auto& mesh = space.mesh();

    Eigen::Matrix<double, 30, 30> local;
    std::array<std::array<int, 10>, 10> rank{};
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        const auto geo = element_geometry(mesh, t);
        const double det = 6.0 * geo.volume;
        const auto& en = space.element_nodes(t);
        local.setZero();
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const auto& l = rule.points[k];
            VelocityTerms c;
            terms(t, static_cast<int>(k), l, mesh.from_barycentric(t, l), c);
            const double w = rule.weights[k] * det;
            const auto g = p2_gradients(l, geo.grad_lambda);
            std::array<double, 10> phi{};
            std::array<double, 10> bg{};
            std::array<Point, 10> eg;
            if (c.convection) {
                phi = p2_values(l);
                for (int a = 0; a < 10; ++a) bg[a] = c.beta.dot(g[a]);
            }
            if (c.rank1 != 0.0)
                for (int a = 0; a < 10; ++a) eg[a] = c.e * g[a];
            for (int b = 0; b < 10; ++b)
                for (int a = 0; a < 10; ++a) {
                    const double gg = g[a].dot(g[b]);
                    Mat3 blk = (0.5 * c.sym * gg + c.grad * gg) * Mat3::Identity();
                    if (c.sym != 0.0) blk.noalias() += 0.5 * c.sym * g[b] * g[a].transpose();
                    if (c.rank1 != 0.0) blk.noalias() += c.rank1 * eg[a] * eg[b].transpose();
                    if (c.convection) blk.diagonal().array() += 0.5 * (bg[b] * phi[a] - bg[a] * phi[b]);
                    local.block<3, 3>(3 * a, 3 * b) += w * blk;
                }
        }
        for (int b = 0; b < 10; ++b)
            for (int a = 0; a < 10; ++a) rank[b][a] = pattern.rank(en[b], en[a]);
        for (int b = 0; b < 10; ++b) {
            const int deg = pattern.degree(en[b]);
            for (int j = 0; j < 3; ++j) {
                const int s = 9 * pattern.start[en[b]] + 3 * deg * j;
                for (int a = 0; a < 10; ++a)
                    for (int i = 0; i < 3; ++i) values[s + 3 * rank[b][a] + i] += local(3 * a + i, 3 * b + j);
            }
        }
    }
    return out;
}

SparseMatrix assemble_divergence(const TaylorHoodSpace& space, const NodePattern& pattern) {
    const int nn = space.num_nodes();
    std::vector<int> outer(3 * static_cast<std::size_t>(nn) + 1, 0);
    for (int b = 0; b < nn; ++b)
        for (int j = 0; j < 3; ++j) outer[3 * b + j + 1] = outer[3 * b + j] + pattern.vertex_count[b];
    std::vector<int> inner(outer.back());
    for (int b = 0; b < nn; ++b)
        for (int j = 0; j < 3; ++j)
            for (int r = 0; r < pattern.vertex_count[b]; ++r) inner[outer[3 * b + j] + r] = pattern.neighbors[pattern.start[b] + r];
    std::vector<double> values(inner.size(), 0.0);

    const auto& rule = quadrature(2);
    const auto& mesh = space.mesh();
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        const auto geo = element_geometry(mesh, t);
        const double det = 6.0 * geo.volume;
        const auto& en = space.element_nodes(t);
        const auto& tet = mesh.tets()[t];
        Eigen::Matrix<double, 4, 30> local = Eigen::Matrix<double, 4, 30>::Zero();
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const auto& l = rule.points[k];
            const auto g = p2_gradients(l, geo.grad_lambda);
            const double w = rule.weights[k] * det;
            for (int r = 0; r < 4; ++r)
                for (int a = 0; a < 10; ++a) local.block<1, 3>(r, 3 * a) -= w * l[r] * g[a].transpose();
        }
        for (int a = 0; a < 10; ++a)
            for (int r = 0; r < 4; ++r) {
                const int rk = pattern.rank(en[a], tet[r]);
                for (int j = 0; j < 3; ++j) values[outer[3 * en[a] + j] + rk] += local(r, 3 * a + j);
            }
    }
    return from_arrays(space.pressure_dofs(), space.velocity_dofs(), outer, inner, values);
}

SparseMatrix assemble_pressure_mass(const TaylorHoodSpace& space, const ScalarFunction& weight) {
    const auto& mesh = space.mesh();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.num_tets() * 16);
    const auto& rule = quadrature(weight ? 4 : 2);
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        const double det = 6.0 * mesh.volume(t);
        const auto& tet = mesh.tets()[t];
        Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const auto& l = rule.points[k];
            const double w = rule.weights[k] * det * (weight ? weight(mesh.from_barycentric(t, l)) : 1.0);
            const Eigen::Map<const Eigen::Vector4d> v(l.data());
            m.noalias() += w * v * v.transpose();
        }
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) trip.emplace_back(tet[i], tet[j], m(i, j));
    }
    SparseMatrix out(space.pressure_dofs(), space.pressure_dofs());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

Vector pressure_mass_vector(const TaylorHoodSpace& space) {
    const auto& mesh = space.mesh();
    Vector m = Vector::Zero(space.pressure_dofs());
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t)
        for (int v : mesh.tets()[t]) m[v] += 0.25 * mesh.volume(t);
    return m;
}

void apply_velocity_bc(const TaylorHoodSpace& space, SparseMatrix& a) {
    for (int col = 0; col < a.outerSize(); ++col) {
        const bool bc = space.is_boundary_dof(col);
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            if (bc || space.is_boundary_dof(static_cast<int>(it.row()))) it.valueRef() = (it.row() == col) ? 1.0 : 0.0;
        }
    }
    a.prune(0.0);
}

void apply_divergence_bc(const TaylorHoodSpace& space, SparseMatrix& b) {
    for (int col = 0; col < b.outerSize(); ++col)
        if (space.is_boundary_dof(col))
            for (SparseMatrix::InnerIterator it(b, col); it; ++it) it.valueRef() = 0.0;
    b.prune(0.0);
}

void apply_rhs_bc(const TaylorHoodSpace& space, Vector& f) {
    for (int i = 0; i < f.size(); ++i)
        if (space.is_boundary_dof(i)) f[i] = 0.0;
}

Vector assemble_rhs_body(const TaylorHoodSpace& space, const VectorFunction& f, int quad_order) {
    Vector out = Vector::Zero(space.velocity_dofs());
    const auto& rule = quadrature(quad_order);
    const auto& mesh = space.mesh();
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        const double det = 6.0 * mesh.volume(t);
        const auto& en = space.element_nodes(t);
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const auto& l = rule.points[k];
            const Point fx = f(mesh.from_barycentric(t, l)) * (rule.weights[k] * det);
            const auto phi = p2_values(l);
            for (int a = 0; a < 10; ++a) out.segment<3>(3 * en[a]) += phi[a] * fx;
        }
    }
    return out;
}

Vector assemble_rhs_divergence_form(const TaylorHoodSpace& space, const TensorFunction& f, int quad_order) {
    Vector out = Vector::Zero(space.velocity_dofs());
    const auto& rule = quadrature(quad_order);
    const auto& mesh = space.mesh();
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        const auto geo = element_geometry(mesh, t);
        const double det = 6.0 * geo.volume;
        const auto& en = space.element_nodes(t);
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const auto& l = rule.points[k];
            const Mat3 fx = f(mesh.from_barycentric(t, l)) * (rule.weights[k] * det);
            const auto g = p2_gradients(l, geo.grad_lambda);
            for (int a = 0; a < 10; ++a) out.segment<3>(3 * en[a]) += fx * g[a];
        }
    }
    return out;
}

Vector assemble_rhs_measure(const TaylorHoodSpace& space, const Point& z, const Point& amplitude) {
    const auto loc = locate_point(space.mesh(), z);
    Vector out = Vector::Zero(space.velocity_dofs());
    const auto phi = p2_values(loc.barycentric);
    const auto& en = space.element_nodes(loc.tet);
    for (int a = 0; a < 10; ++a) out.segment<3>(3 * en[a]) += phi[a] * amplitude;
    return out;
}

Vector assemble_pressure_rhs(const TaylorHoodSpace& space, const ScalarFunction& g, int quad_order) {
    Vector out = Vector::Zero(space.pressure_dofs());
    const auto& rule = quadrature(quad_order);
    const auto& mesh = space.mesh();
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        const double det = 6.0 * mesh.volume(t);
        const auto& tet = mesh.tets()[t];
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const auto& l = rule.points[k];
            const double gx = g(mesh.from_barycentric(t, l)) * rule.weights[k] * det;
            for (int r = 0; r < 4; ++r) out[tet[r]] -= l[r] * gx;
        }
    }
    return out;
}

void write_coo(std::ostream& os, const SparseMatrix& m) {
    os << std::setprecision(17);
    for (int col = 0; col < m.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace wstokes
