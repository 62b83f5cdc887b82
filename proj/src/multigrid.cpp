#include "wstokes/multigrid.hpp"

#include <cmath>

namespace wstokes {

SparseMatrix p2_prolongation(const TaylorHoodSpace& fine, const TaylorHoodSpace& coarse) {
    const auto& fm = fine.mesh();
    if (fm.coarse().get() != &coarse.mesh()) throw InvalidArgument("p2_prolongation: spaces are not nested");
    const auto& cm = coarse.mesh();
    std::vector<char> done(fine.num_nodes(), 0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(fine.num_nodes()) * 3 * 10);
    for (int t = 0; t < static_cast<int>(fm.num_tets()); ++t) {
        const int parent = fm.parent()[t];
        const auto& cn = coarse.element_nodes(parent);
        for (int node : fine.element_nodes(t)) {
            if (done[node]) continue;
            done[node] = 1;
            if (fine.is_boundary_node(node)) continue;
            const auto phi = p2_values(cm.barycentric(parent, fine.node_coordinate(node)));
            for (int a = 0; a < 10; ++a) {
                if (std::abs(phi[a]) < 1e-14 || coarse.is_boundary_node(cn[a])) continue;
                for (int c = 0; c < 3; ++c) trip.emplace_back(3 * node + c, 3 * cn[a] + c, phi[a]);
            }
        }
    }
    SparseMatrix p(fine.velocity_dofs(), coarse.velocity_dofs());
    p.setFromTriplets(trip.begin(), trip.end());
    return p;
}

MultigridHierarchy build_hierarchy(const SpacePtr& finest) {
    MultigridHierarchy h;
    h.spaces.push_back(finest);
    while (h.spaces.back()->mesh().coarse()) {
        auto coarse = make_space(h.spaces.back()->mesh().coarse());
        h.prolongations.push_back(p2_prolongation(*h.spaces.back(), *coarse));
        h.spaces.push_back(coarse);
    }
    return h;
}

VelocityMultigrid::VelocityMultigrid(std::shared_ptr<const MultigridHierarchy> hierarchy, const SparseMatrix& a)
    : VelocityMultigrid(std::move(hierarchy), a, Options{}) {}

VelocityMultigrid::VelocityMultigrid(std::shared_ptr<const MultigridHierarchy> hierarchy, const SparseMatrix& a,
                                     Options opts)
    : hierarchy_(std::move(hierarchy)), opts_(opts), fine_(&a) {
    if (!hierarchy_ || hierarchy_->spaces.empty()) throw InvalidArgument("VelocityMultigrid: empty hierarchy");
    if (a.rows() != hierarchy_->spaces.front()->velocity_dofs())
        throw InvalidArgument("VelocityMultigrid: matrix does not match the finest space");
    ops_.emplace_back();
    for (std::size_t l = 0; l < hierarchy_->prolongations.size(); ++l) {
        const auto& p = hierarchy_->prolongations[l];
        const SparseMatrix ap = matrix(static_cast<int>(l)) * p;
        const SparseMatrix ac = SparseMatrix(p.transpose()) * ap;
        std::vector<Eigen::Triplet<double>> unit;
        for (int d : hierarchy_->spaces[l + 1]->boundary_velocity_dofs()) unit.emplace_back(d, d, 1.0);
        SparseMatrix id(ac.rows(), ac.cols());
        id.setFromTriplets(unit.begin(), unit.end());
        ops_.push_back(ac + id);
    }
    for (int l = 0; l < num_levels(); ++l) inv_diag_.push_back(matrix(l).diagonal().cwiseInverse());
    coarse_.compute(matrix(num_levels() - 1));
    if (coarse_.info() != Eigen::Success) throw SolverError("VelocityMultigrid: coarse factorization failed");
}

namespace {

void gauss_seidel(const SparseMatrix& a, const Vector& inv_diag, const Vector& b, Vector& x, bool forward) {
    const Eigen::Index n = a.outerSize();
    const int* outer = a.outerIndexPtr();
    const int* inner = a.innerIndexPtr();
    const double* val = a.valuePtr();
    for (Eigen::Index s = 0; s < n; ++s) {
        const Eigen::Index i = forward ? s : n - 1 - s;
        double acc = 0.0;
        for (int k = outer[i]; k < outer[i + 1]; ++k) acc += val[k] * x[inner[k]];
        x[i] += (b[i] - acc) * inv_diag[i];
    }
}

}  // namespace

void VelocityMultigrid::cycle(int level, const Vector& b, Vector& x) const {
    if (level == num_levels() - 1) {
        x = coarse_.solve(b);
        return;
    }
    const auto& a = matrix(level);
    for (int s = 0; s < opts_.pre_smooth; ++s) gauss_seidel(a, inv_diag_[level], b, x, true);
    const auto& p = hierarchy_->prolongations[level];
    const Vector r = b - a * x;
    const Vector rc = p.transpose() * r;
    Vector xc = Vector::Zero(rc.size());
    cycle(level + 1, rc, xc);
    x += p * xc;
    for (int s = 0; s < opts_.post_smooth; ++s) gauss_seidel(a, inv_diag_[level], b, x, false);
}

void VelocityMultigrid::vcycle(const Vector& b, Vector& x) const { cycle(0, b, x); }

Vector VelocityMultigrid::apply(const Vector& r) const {
    Vector x = Vector::Zero(r.size());
    cycle(0, r, x);
    return x;
}

int pcg_multigrid(const SparseMatrix& a, const VelocityMultigrid& mg, const Vector& b, Vector& x, double rel_tol,
                  int max_iter) {
    Vector r = b - a * x;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        return 0;
    }
    Vector z = mg.apply(r);
    Vector p = z;
    double rz = r.dot(z);
    for (int it = 1; it <= max_iter; ++it) {
        const Vector ap = a * p;
        const double alpha = rz / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        if (r.norm() <= rel_tol * bnorm) return it;
        z = mg.apply(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw ConvergenceError("pcg_multigrid: no convergence in " + std::to_string(max_iter) + " iterations");
}

}  // namespace wstokes
