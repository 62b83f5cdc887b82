#include "wstokes/taylor_hood.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>

namespace wstokes {

std::array<double, 10> p2_values(const Barycentric& l) {
    std::array<double, 10> v{};
    for (int i = 0; i < 4; ++i) v[i] = l[i] * (2.0 * l[i] - 1.0);
    for (int e = 0; e < 6; ++e) v[4 + e] = 4.0 * l[local_edges[e][0]] * l[local_edges[e][1]];
    return v;
}

std::array<Point, 10> p2_gradients(const Barycentric& l, const std::array<Point, 4>& g) {
    std::array<Point, 10> d;
    for (int i = 0; i < 4; ++i) d[i] = (4.0 * l[i] - 1.0) * g[i];
    for (int e = 0; e < 6; ++e) {
        const int a = local_edges[e][0], b = local_edges[e][1];
        d[4 + e] = 4.0 * (l[b] * g[a] + l[a] * g[b]);
    }
    return d;
}

ElementGeometry element_geometry(const TetMesh& mesh, int t) {
    const Mat3 j = mesh.jacobian(t);
    const Mat3 jinv = j.inverse();
    ElementGeometry g;
    g.volume = j.determinant() / 6.0;
    g.grad_lambda[1] = jinv.row(0).transpose();
    g.grad_lambda[2] = jinv.row(1).transpose();
    g.grad_lambda[3] = jinv.row(2).transpose();
    g.grad_lambda[0] = -(g.grad_lambda[1] + g.grad_lambda[2] + g.grad_lambda[3]);
    return g;
}

TaylorHoodSpace::TaylorHoodSpace(MeshPtr mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw InvalidArgument("TaylorHoodSpace: null mesh");
    const auto& tets = mesh_->tets();
    edges_.reserve(tets.size() * 6);
    for (const auto& t : tets)
        for (const auto& e : local_edges) {
            const int a = t[e[0]], b = t[e[1]];
            edges_.push_back({std::min(a, b), std::max(a, b)});
        }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    edges_.shrink_to_fit();

    const int nv = num_vertices();
    element_nodes_.resize(tets.size());
    for (std::size_t t = 0; t < tets.size(); ++t) {
        auto& en = element_nodes_[t];
        for (int i = 0; i < 4; ++i) en[i] = tets[t][i];
        for (int e = 0; e < 6; ++e) en[4 + e] = nv + find_edge(tets[t][local_edges[e][0]], tets[t][local_edges[e][1]]);
    }

    boundary_node_.assign(num_nodes(), 0);
    for (int v = 0; v < nv; ++v) boundary_node_[v] = mesh_->boundary_vertex()[v];
    for (const auto& bf : mesh_->boundary_faces()) {
        const auto& f = bf.vertices;
        boundary_node_[nv + find_edge(f[0], f[1])] = 1;
        boundary_node_[nv + find_edge(f[0], f[2])] = 1;
        boundary_node_[nv + find_edge(f[1], f[2])] = 1;
    }
}

int TaylorHoodSpace::find_edge(int a, int b) const {
    const Edge key{std::min(a, b), std::max(a, b)};
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return -1;
    return static_cast<int>(it - edges_.begin());
}

Point TaylorHoodSpace::node_coordinate(int node) const {
    const auto& v = mesh_->vertices();
    if (node < num_vertices()) return v[node];
    const auto& e = edges_[node - num_vertices()];
    return 0.5 * (v[e[0]] + v[e[1]]);
}

std::vector<int> TaylorHoodSpace::boundary_velocity_dofs() const {
    std::vector<int> out;
    for (int n = 0; n < num_nodes(); ++n)
        if (boundary_node_[n])
            for (int c = 0; c < 3; ++c) out.push_back(vdof(n, c));
    return out;
}

SpacePtr make_space(MeshPtr mesh) { return std::make_shared<const TaylorHoodSpace>(std::move(mesh)); }

std::string to_string(FieldRole role) { return role == FieldRole::velocity ? "velocity" : "pressure"; }

FEFunction::FEFunction(SpacePtr s, FieldRole r) : space(std::move(s)), role(r) {
    if (!space) throw InvalidArgument("FEFunction: null space");
    coeffs = Vector::Zero(role == FieldRole::velocity ? space->velocity_dofs() : space->pressure_dofs());
}

FEFunction::FEFunction(SpacePtr s, FieldRole r, Vector c) : space(std::move(s)), role(r), coeffs(std::move(c)) {
    if (!space) throw InvalidArgument("FEFunction: null space");
    const int n = role == FieldRole::velocity ? space->velocity_dofs() : space->pressure_dofs();
    if (coeffs.size() != n) throw InvalidArgument("FEFunction: coefficient length does not match the space");
}

Point FEFunction::velocity(int t, const Barycentric& l) const {
    const auto phi = p2_values(l);
    const auto& en = space->element_nodes(t);
    Point u = Point::Zero();
    for (int k = 0; k < 10; ++k) u += phi[k] * coeffs.segment<3>(3 * en[k]);
    return u;
}

Mat3 FEFunction::velocity_gradient(int t, const Barycentric& l) const {
    const auto geo = element_geometry(space->mesh(), t);
    const auto dphi = p2_gradients(l, geo.grad_lambda);
    const auto& en = space->element_nodes(t);
    Mat3 g = Mat3::Zero();
    for (int k = 0; k < 10; ++k) g += coeffs.segment<3>(3 * en[k]) * dphi[k].transpose();
    return g;
}

double FEFunction::pressure(int t, const Barycentric& l) const {
    const auto& tet = space->mesh().tets()[t];
    double p = 0.0;
    for (int i = 0; i < 4; ++i) p += l[i] * coeffs[tet[i]];
    return p;
}

Point FEFunction::velocity_at(const Point& x) const {
    const auto loc = locate_point(space->mesh(), x);
    return velocity(loc.tet, loc.barycentric);
}

double FEFunction::pressure_at(const Point& x) const {
    const auto loc = locate_point(space->mesh(), x);
    return pressure(loc.tet, loc.barycentric);
}

FEFunction interpolate(const SpacePtr& space, const VectorFunction& u) {
    FEFunction f(space, FieldRole::velocity);
    for (int n = 0; n < space->num_nodes(); ++n) f.coeffs.segment<3>(3 * n) = u(space->node_coordinate(n));
    return f;
}

FEFunction interpolate(const SpacePtr& space, const ScalarFunction& p) {
    FEFunction f(space, FieldRole::pressure);
    for (int v = 0; v < space->num_vertices(); ++v) f.coeffs[v] = p(space->mesh().vertices()[v]);
    return f;
}

void write_fef(std::ostream& os, const FEFunction& f) {
    os << "fef " << to_string(f.role) << ' ' << f.coeffs.size() << ' ' << mesh_content_hash(f.space->mesh()) << '\n';
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < f.coeffs.size(); ++i) os << f.coeffs[i] << '\n';
}

FEFunction read_fef(std::istream& is, const SpacePtr& space) {
    std::string tag, role, hash;
    long long n = -1;
    if (!(is >> tag >> role >> n >> hash) || tag != "fef")
        throw InvalidArgument("read_fef: expected header 'fef <role> <n_dofs> <mesh_hash>'");
    if (role != "velocity" && role != "pressure") throw InvalidArgument("read_fef: unknown role " + role);
    if (hash != mesh_content_hash(space->mesh())) throw InvalidArgument("read_fef: mesh hash mismatch");
    Vector c(n);
    for (long long i = 0; i < n; ++i)
        if (!(is >> c[i])) throw InvalidArgument("read_fef: truncated coefficient list");
    return {space, role == "velocity" ? FieldRole::velocity : FieldRole::pressure, std::move(c)};
}

}  // namespace wstokes
