#pragma once

#include "wstokes/common.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace wstokes {

using Tet = std::array<int, 4>;
using Face = std::array<int, 3>;

struct BoundaryFace {
    Face vertices;  // sorted ascending
    int tet = -1;   // owning tetrahedron
};

/// Tetrahedral partition of a convex polyhedron. Immutable once built.
///
/// `tets` are positively oriented. `refinement_order` stores the same vertices
/// in the order used by red refinement; for Kuhn meshes this is the path order
/// x0 -> x0+e_a -> x0+e_a+e_b -> x0+1, which keeps every descendant a Kuhn
/// simplex so that h_max halves exactly per level.
class TetMesh {
public:
    TetMesh(std::vector<Point> vertices, std::vector<Tet> refinement_order, int level = 0,
            std::shared_ptr<const TetMesh> coarse = nullptr, std::vector<int> parent = {});

    [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
    [[nodiscard]] const std::vector<Tet>& tets() const { return tets_; }
    [[nodiscard]] const std::vector<Tet>& refinement_order() const { return order_; }
    [[nodiscard]] const std::vector<BoundaryFace>& boundary_faces() const { return boundary_faces_; }
    [[nodiscard]] const std::vector<char>& boundary_vertex() const { return boundary_vertex_; }

    [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
    [[nodiscard]] std::size_t num_tets() const { return tets_.size(); }
    [[nodiscard]] double h_max() const { return h_max_; }
    [[nodiscard]] int level() const { return level_; }

    /// Mesh this one was refined from, or null.
    [[nodiscard]] const std::shared_ptr<const TetMesh>& coarse() const { return coarse_; }
    /// Parent tet index in coarse() for every tet (empty if unrefined).
    [[nodiscard]] const std::vector<int>& parent() const { return parent_; }

    [[nodiscard]] double volume(int t) const;
    [[nodiscard]] double total_volume() const;
    [[nodiscard]] Point centroid(int t) const;
    /// Columns are x1-x0, x2-x0, x3-x0.
    [[nodiscard]] Mat3 jacobian(int t) const;
    /// Barycentric coordinates of x with respect to tet t.
    [[nodiscard]] std::array<double, 4> barycentric(int t, const Point& x) const;
    [[nodiscard]] Point from_barycentric(int t, const std::array<double, 4>& lambda) const;

private:
    std::vector<Point> vertices_;
    std::vector<Tet> tets_;
    std::vector<Tet> order_;
    std::vector<BoundaryFace> boundary_faces_;
    std::vector<char> boundary_vertex_;
    double h_max_ = 0.0;
    int level_ = 0;
    std::shared_ptr<const TetMesh> coarse_;
    std::vector<int> parent_;
};

using MeshPtr = std::shared_ptr<const TetMesh>;

/// Unit cube split into n^3 subcubes of 6 Kuhn tetrahedra each.
MeshPtr build_cube_mesh(int n);

/// Regular red refinement: 8 children per tet, child 8t+k has parent t.
MeshPtr refine_uniform(const MeshPtr& mesh);

/// build_cube_mesh(n0) refined `refinements` times; keeps the lineage.
MeshPtr build_cube_hierarchy(int n0, int refinements);

struct PointLocation {
    int tet = -1;
    std::array<double, 4> barycentric{};
};

/// Linear scan; ties resolve to the lowest tet index. Throws NotFound when x
/// has a barycentric coordinate below -1e-10 in every tet.
PointLocation locate_point(const TetMesh& mesh, const Point& x);

struct MeshAudit {
    bool positive_orientation = true;
    bool conforming = true;
    bool boundary_closed = true;
    double volume_error = 0.0;  // relative, against the expected volume
    std::string message;
    [[nodiscard]] bool ok() const { return positive_orientation && conforming && boundary_closed; }
};

/// Orientation, face conformity (every interior face shared by exactly two
/// tets), and boundary closure (boundary area equals the expected surface).
MeshAudit audit_mesh(const TetMesh& mesh, double expected_volume, double expected_area);

/// ASCII format: `tetmesh <n_vertices> <n_tets>`, vertex lines, tet lines.
void write_mesh(std::ostream& os, const TetMesh& mesh);
std::string mesh_to_string(const TetMesh& mesh);
MeshPtr read_mesh(std::istream& is);
MeshPtr read_mesh_file(const std::string& path);
void write_mesh_file(const std::string& path, const TetMesh& mesh);

/// FNV-1a hash of the serialized mesh, used to pair coefficient files with meshes.
std::string mesh_content_hash(const TetMesh& mesh);

}  // namespace wstokes
