#include "wstokes/mesh.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace wstokes {

namespace {

double signed_volume(const std::vector<Point>& v, const Tet& t) {
    Mat3 j;
    j.col(0) = v[t[1]] - v[t[0]];
    j.col(1) = v[t[2]] - v[t[0]];
    j.col(2) = v[t[3]] - v[t[0]];
    return j.determinant() / 6.0;
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct FaceRecord {
    Face f;
    int tet;
};

std::vector<FaceRecord> collect_faces(const std::vector<Tet>& tets) {
    std::vector<FaceRecord> faces;
    faces.reserve(tets.size() * 4);
    for (int t = 0; t < static_cast<int>(tets.size()); ++t) {
        const auto& k = tets[t];
        for (int skip = 0; skip < 4; ++skip) {
            Face f{};
            int m = 0;
            for (int i = 0; i < 4; ++i)
                if (i != skip) f[m++] = k[i];
            std::sort(f.begin(), f.end());
            faces.push_back({f, t});
        }
    }
    std::sort(faces.begin(), faces.end(), [](const FaceRecord& a, const FaceRecord& b) {
        return a.f != b.f ? a.f < b.f : a.tet < b.tet;
    });
    return faces;
}

double face_area(const std::vector<Point>& v, const Face& f) {
    return 0.5 * (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]).norm();
}

}  // namespace

TetMesh::TetMesh(std::vector<Point> vertices, std::vector<Tet> refinement_order, int level,
                 std::shared_ptr<const TetMesh> coarse, std::vector<int> parent)
    : vertices_(std::move(vertices)),
      order_(std::move(refinement_order)),
      level_(level),
      coarse_(std::move(coarse)),
      parent_(std::move(parent)) {
    const int nv = static_cast<int>(vertices_.size());
    tets_.reserve(order_.size());
    for (const auto& t : order_) {
        for (int i : t)
            if (i < 0 || i >= nv) throw InvalidArgument("TetMesh: vertex index out of range");
        Tet oriented = t;
        const double vol = signed_volume(vertices_, t);
        if (!(std::abs(vol) > 0.0)) throw InvalidArgument("TetMesh: degenerate tetrahedron");
        if (vol < 0.0) std::swap(oriented[2], oriented[3]);
        tets_.push_back(oriented);
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                h_max_ = std::max(h_max_, (vertices_[t[a]] - vertices_[t[b]]).norm());
    }

    boundary_vertex_.assign(vertices_.size(), 0);
    const auto faces = collect_faces(tets_);
    for (std::size_t i = 0; i < faces.size();) {
        std::size_t j = i;
        while (j < faces.size() && faces[j].f == faces[i].f) ++j;
        if (j - i == 1) {
            boundary_faces_.push_back({faces[i].f, faces[i].tet});
            for (int v : faces[i].f) boundary_vertex_[v] = 1;
        }
        i = j;
    }
}

double TetMesh::volume(int t) const { return signed_volume(vertices_, tets_[t]); }

double TetMesh::total_volume() const {
    double s = 0.0;
    for (int t = 0; t < static_cast<int>(tets_.size()); ++t) s += volume(t);
    return s;
}

Point TetMesh::centroid(int t) const {
    const auto& k = tets_[t];
    return 0.25 * (vertices_[k[0]] + vertices_[k[1]] + vertices_[k[2]] + vertices_[k[3]]);
}

Mat3 TetMesh::jacobian(int t) const {
    const auto& k = tets_[t];
    Mat3 j;
    j.col(0) = vertices_[k[1]] - vertices_[k[0]];
    j.col(1) = vertices_[k[2]] - vertices_[k[0]];
    j.col(2) = vertices_[k[3]] - vertices_[k[0]];
    return j;
}

std::array<double, 4> TetMesh::barycentric(int t, const Point& x) const {
    const Eigen::Vector3d l = jacobian(t).partialPivLu().solve(x - vertices_[tets_[t][0]]);
    return {1.0 - l.sum(), l[0], l[1], l[2]};
}

Point TetMesh::from_barycentric(int t, const std::array<double, 4>& lambda) const {
    const auto& k = tets_[t];
    Point x = Point::Zero();
    for (int i = 0; i < 4; ++i) x += lambda[i] * vertices_[k[i]];
    return x;
}

MeshPtr build_cube_mesh(int n) {
    if (n < 1) throw InvalidArgument("build_cube_mesh: n must be >= 1");
    const int m = n + 1;
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(m) * m * m);
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
                vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n,
                                      static_cast<double>(k) / n);
    auto id = [m](int i, int j, int k) { return i + m * (j + m * k); };

    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    std::vector<Tet> order;
    order.reserve(static_cast<std::size_t>(6) * n * n * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                for (const auto& p : perms) {
                    std::array<int, 3> c{i, j, k};
                    Tet t{};
                    t[0] = id(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[p[s]];
                        t[s + 1] = id(c[0], c[1], c[2]);
                    }
                    order.push_back(t);
                }
    return std::make_shared<const TetMesh>(std::move(vertices), std::move(order));
}

MeshPtr refine_uniform(const MeshPtr& mesh) {
    if (!mesh) throw InvalidArgument("refine_uniform: null mesh");
    std::vector<Point> vertices = mesh->vertices();
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(mesh->num_tets() * 2);
    auto mid = [&](int a, int b) {
        const auto key = edge_key(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int idx = static_cast<int>(vertices.size());
        vertices.push_back(0.5 * (vertices[a] + vertices[b]));
        midpoint.emplace(key, idx);
        return idx;
    };

    std::vector<Tet> order;
    std::vector<int> parent;
    order.reserve(mesh->num_tets() * 8);
    parent.reserve(mesh->num_tets() * 8);
    for (int t = 0; t < static_cast<int>(mesh->num_tets()); ++t) {
        const auto& x = mesh->refinement_order()[t];
        const int x01 = mid(x[0], x[1]), x02 = mid(x[0], x[2]), x03 = mid(x[0], x[3]);
        const int x12 = mid(x[1], x[2]), x13 = mid(x[1], x[3]), x23 = mid(x[2], x[3]);
        // Interior octahedron split along the x02-x13 diagonal.
        const std::array<Tet, 8> children{{{x[0], x01, x02, x03},
                                           {x01, x[1], x12, x13},
                                           {x02, x12, x[2], x23},
                                           {x03, x13, x23, x[3]},
                                           {x01, x02, x03, x13},
                                           {x01, x02, x12, x13},
                                           {x02, x03, x13, x23},
                                           {x02, x12, x13, x23}}};
        for (const auto& c : children) {
            order.push_back(c);
            parent.push_back(t);
        }
    }
    return std::make_shared<const TetMesh>(std::move(vertices), std::move(order), mesh->level() + 1, mesh,
                                           std::move(parent));
}

MeshPtr build_cube_hierarchy(int n0, int refinements) {
    if (refinements < 0) throw InvalidArgument("build_cube_hierarchy: negative refinement count");
    MeshPtr m = build_cube_mesh(n0);
    for (int r = 0; r < refinements; ++r) m = refine_uniform(m);
    return m;
}

PointLocation locate_point(const TetMesh& mesh, const Point& x) {
    constexpr double tol = 1e-10;
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        auto l = mesh.barycentric(t, x);
        if (*std::min_element(l.begin(), l.end()) >= -tol) {
            double s = 0.0;
            for (double& v : l) {
                v = std::clamp(v, 0.0, 1.0);
                s += v;
            }
            for (double& v : l) v /= s;
            return {t, l};
        }
    }
    std::ostringstream msg;
    msg << "locate_point: (" << x.transpose() << ") is outside the mesh";
    throw NotFound(msg.str());
}

MeshAudit audit_mesh(const TetMesh& mesh, double expected_volume, double expected_area) {
    MeshAudit audit;
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        if (!(mesh.volume(t) > 0.0)) {
            audit.positive_orientation = false;
            audit.message += "tet " + std::to_string(t) + " not positively oriented; ";
            break;
        }
    }
    const auto faces = collect_faces(mesh.tets());
    for (std::size_t i = 0; i < faces.size();) {
        std::size_t j = i;
        while (j < faces.size() && faces[j].f == faces[i].f) ++j;
        if (j - i > 2) {
            audit.conforming = false;
            audit.message += "face shared by more than two tets; ";
            break;
        }
        i = j;
    }
    double area = 0.0;
    for (const auto& bf : mesh.boundary_faces()) area += face_area(mesh.vertices(), bf.vertices);
    if (std::abs(area - expected_area) > 1e-10 * expected_area) {
        // Hanging or missing faces show up as extra boundary area.
        audit.boundary_closed = false;
        audit.conforming = false;
        audit.message += "boundary area " + std::to_string(area) + " differs from expected; ";
    }
    audit.volume_error = std::abs(mesh.total_volume() - expected_volume) / expected_volume;
    return audit;
}

void write_mesh(std::ostream& os, const TetMesh& mesh) {
    os << "tetmesh " << mesh.num_vertices() << ' ' << mesh.num_tets() << '\n';
    os << std::setprecision(17);
    for (const auto& v : mesh.vertices()) os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    for (const auto& t : mesh.refinement_order()) os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

std::string mesh_to_string(const TetMesh& mesh) {
    std::ostringstream os;
    write_mesh(os, mesh);
    return os.str();
}

MeshPtr read_mesh(std::istream& is) {
    std::string tag;
    long long nv = -1, nt = -1;
    if (!(is >> tag >> nv >> nt) || tag != "tetmesh" || nv < 4 || nt < 1)
        throw InvalidArgument("read_mesh: expected header 'tetmesh <n_vertices> <n_tets>'");
    std::vector<Point> vertices(static_cast<std::size_t>(nv));
    for (auto& v : vertices)
        if (!(is >> v[0] >> v[1] >> v[2])) throw InvalidArgument("read_mesh: truncated vertex block");
    std::vector<Tet> tets(static_cast<std::size_t>(nt));
    for (auto& t : tets)
        if (!(is >> t[0] >> t[1] >> t[2] >> t[3])) throw InvalidArgument("read_mesh: truncated tet block");
    return std::make_shared<const TetMesh>(std::move(vertices), std::move(tets));
}

MeshPtr read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open mesh file " + path);
    return read_mesh(in);
}

void write_mesh_file(const std::string& path, const TetMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write mesh file " + path);
    write_mesh(out, mesh);
}

std::string mesh_content_hash(const TetMesh& mesh) {
    const std::string s = mesh_to_string(mesh);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace wstokes
