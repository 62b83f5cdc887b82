#pragma once

#include "wstokes/assembly.hpp"
#include "wstokes/multigrid.hpp"

#include <memory>
#include <string>

namespace wstokes {

enum class SolverBackend { automatic, direct, minres };

std::string to_string(SolverBackend b);
SolverBackend backend_from_string(const std::string& s);

struct SolverOptions {
    SolverBackend backend = SolverBackend::automatic;
    double rel_tol = 1e-12;  // MINRES, preconditioned residual
    int max_iter = 3000;
    int direct_max_dofs = 6000;  // automatic: direct up to this size
};

struct SolverStats {
    std::string backend;
    int iterations = 0;
    double residual = 0.0;  // true relative residual of the saddle system
    double seconds = 0.0;
};

/// [A B^T; B 0] [u; p] = [F; G]. A, B carry eliminated boundary dofs when
/// bc_applied; the pressure is fixed to zero mean.
struct StokesSystem {
    SpacePtr space;
    double mu = 1.0;
    SparseMatrix A;
    SparseMatrix B;
    Vector F;
    Vector G;
    bool bc_applied = true;
    bool symmetric = true;
    /// Optional diagonal approximation of the Schur complement for MINRES;
    /// defaults to the lumped pressure mass divided by 2 mu.
    Vector schur_diagonal;
    std::shared_ptr<const MultigridHierarchy> hierarchy;
};

/// A from 2 mu int eps(u):eps(v), B from -int p div v; F and G are zero.
StokesSystem assemble_stokes(const SpacePtr& space, double mu, bool apply_bc = true);
StokesSystem assemble_stokes(const SpacePtr& space, const NodePattern& pattern, double mu, bool apply_bc = true);

struct StokesSolution {
    FEFunction velocity;
    FEFunction pressure;
    SolverStats stats;
};

/// Factorization (direct) or multigrid setup (MINRES) reused across right sides.
class SaddleSolver {
public:
    SaddleSolver(const StokesSystem& system, const SolverOptions& opts = {});
    ~SaddleSolver();
    SaddleSolver(const SaddleSolver&) = delete;
    SaddleSolver& operator=(const SaddleSolver&) = delete;

    [[nodiscard]] StokesSolution solve(const Vector& f, const Vector& g) const;
    [[nodiscard]] SolverBackend backend() const { return backend_; }

private:
    struct Direct;
    const StokesSystem* sys_;
    SolverOptions opts_;
    SolverBackend backend_;
    std::unique_ptr<Direct> direct_;
    std::unique_ptr<VelocityMultigrid> mg_;
    Vector schur_inv_;
    Vector mass_;
};

StokesSolution solve_saddle(const StokesSystem& system, const SolverOptions& opts = {});

/// Relative residual of [A B^T; B 0][u; p] - [f; g].
double saddle_residual(const StokesSystem& system, const Vector& u, const Vector& p, const Vector& f, const Vector& g);

}  // namespace wstokes
