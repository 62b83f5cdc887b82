#pragma once

#include "wstokes/mesh.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace wstokes {

using Barycentric = std::array<double, 4>;
using Edge = std::array<int, 2>;

/// Local P2 node order: the 4 vertices of tets()[t], then the edges
/// (0,1) (0,2) (0,3) (1,2) (1,3) (2,3).
inline constexpr std::array<Edge, 6> local_edges{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

std::array<double, 10> p2_values(const Barycentric& l);
/// Gradients given the (constant) barycentric gradients of the tet.
std::array<Point, 10> p2_gradients(const Barycentric& l, const std::array<Point, 4>& grad_lambda);

/// Per-tet constants needed by assembly.
struct ElementGeometry {
    std::array<Point, 4> grad_lambda;
    double volume = 0.0;
};
ElementGeometry element_geometry(const TetMesh& mesh, int t);

/// Continuous P2 vector velocity and P1 pressure on a tetrahedral mesh.
/// Velocity dofs are interleaved: dof = 3 * node + component, with nodes
/// numbered vertices first, then edges (sorted by vertex pair).
class TaylorHoodSpace {
public:
    explicit TaylorHoodSpace(MeshPtr mesh);

    [[nodiscard]] const TetMesh& mesh() const { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const { return mesh_; }

    [[nodiscard]] int num_vertices() const { return static_cast<int>(mesh_->num_vertices()); }
    [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }
    [[nodiscard]] int num_nodes() const { return num_vertices() + num_edges(); }
    [[nodiscard]] int velocity_dofs() const { return 3 * num_nodes(); }
    [[nodiscard]] int pressure_dofs() const { return num_vertices(); }

    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
    /// Global P2 node of each local node, per tet.
    [[nodiscard]] const std::array<int, 10>& element_nodes(int t) const { return element_nodes_[t]; }
    [[nodiscard]] Point node_coordinate(int node) const;
    [[nodiscard]] bool is_boundary_node(int node) const { return boundary_node_[node] != 0; }
    [[nodiscard]] bool is_boundary_dof(int dof) const { return boundary_node_[dof / 3] != 0; }
    [[nodiscard]] std::vector<int> boundary_velocity_dofs() const;
    /// Index of the edge (a,b), or -1.
    [[nodiscard]] int find_edge(int a, int b) const;

    static constexpr int vdof(int node, int component) { return 3 * node + component; }

private:
    MeshPtr mesh_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 10>> element_nodes_;
    std::vector<char> boundary_node_;
};

using SpacePtr = std::shared_ptr<const TaylorHoodSpace>;

SpacePtr make_space(MeshPtr mesh);

enum class FieldRole { velocity, pressure };

std::string to_string(FieldRole role);

using VectorFunction = std::function<Point(const Point&)>;
using TensorFunction = std::function<Mat3(const Point&)>;
using ScalarFunction = std::function<double(const Point&)>;

/// Velocity (P2, 3 components) or pressure (P1) coefficient vector.
struct FEFunction {
    SpacePtr space;
    FieldRole role = FieldRole::velocity;
    Vector coeffs;

    FEFunction() = default;
    FEFunction(SpacePtr s, FieldRole r);
    FEFunction(SpacePtr s, FieldRole r, Vector c);

    [[nodiscard]] Point velocity(int t, const Barycentric& l) const;
    /// (grad u)_{ij} = d u_i / d x_j.
    [[nodiscard]] Mat3 velocity_gradient(int t, const Barycentric& l) const;
    [[nodiscard]] double pressure(int t, const Barycentric& l) const;

    /// Point evaluation via locate_point.
    [[nodiscard]] Point velocity_at(const Point& x) const;
    [[nodiscard]] double pressure_at(const Point& x) const;
};

FEFunction interpolate(const SpacePtr& space, const VectorFunction& u);
FEFunction interpolate(const SpacePtr& space, const ScalarFunction& p);

/// Coefficient file: `fef <role> <n_dofs> <mesh_hash>` then one value per line.
void write_fef(std::ostream& os, const FEFunction& f);
FEFunction read_fef(std::istream& is, const SpacePtr& space);

}  // namespace wstokes
