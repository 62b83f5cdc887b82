#pragma once

#include "wstokes/taylor_hood.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace wstokes {

/// Nested P2 interpolation from the space on fine.mesh().coarse() to fine.
/// Rows of fine boundary dofs and columns of coarse boundary dofs are zero.
SparseMatrix p2_prolongation(const TaylorHoodSpace& fine, const TaylorHoodSpace& coarse);

/// Spaces and prolongations along a mesh lineage, finest first.
struct MultigridHierarchy {
    std::vector<SpacePtr> spaces;
    std::vector<SparseMatrix> prolongations;  // prolongations[l]: level l+1 -> level l
};

MultigridHierarchy build_hierarchy(const SpacePtr& finest);

/// Geometric V-cycle for symmetric positive definite velocity operators with
/// eliminated boundary dofs. Galerkin coarse operators; forward Gauss-Seidel
/// before and backward after the coarse correction, so the cycle is symmetric.
class VelocityMultigrid {
public:
    struct Options {
        int pre_smooth = 2;
        int post_smooth = 2;
    };

    /// `a` is referenced, not copied, and must outlive the multigrid object.
    VelocityMultigrid(std::shared_ptr<const MultigridHierarchy> hierarchy, const SparseMatrix& a);
    VelocityMultigrid(std::shared_ptr<const MultigridHierarchy> hierarchy, const SparseMatrix& a, Options opts);

    /// One V-cycle applied to a zero initial guess.
    [[nodiscard]] Vector apply(const Vector& r) const;
    void vcycle(const Vector& b, Vector& x) const;
    [[nodiscard]] int num_levels() const { return static_cast<int>(ops_.size()); }
    [[nodiscard]] const SparseMatrix& matrix(int level) const { return level == 0 ? *fine_ : ops_[level]; }

private:
    void cycle(int level, const Vector& b, Vector& x) const;

    std::shared_ptr<const MultigridHierarchy> hierarchy_;
    Options opts_;
    const SparseMatrix* fine_;
    std::vector<SparseMatrix> ops_;  // ops_[0] unused
    std::vector<Vector> inv_diag_;
    Eigen::SimplicialLDLT<SparseMatrix> coarse_;
};

/// Preconditioned conjugate gradients with a V-cycle; returns iterations.
int pcg_multigrid(const SparseMatrix& a, const VelocityMultigrid& mg, const Vector& b, Vector& x, double rel_tol,
                  int max_iter);

}  // namespace wstokes
