#include "wstokes/saddle.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>

namespace wstokes {

std::string to_string(SolverBackend b) {
    switch (b) {
        case SolverBackend::automatic: return "auto";
        case SolverBackend::direct: return "direct";
        case SolverBackend::minres: return "minres";
    }
    return "auto";
}

SolverBackend backend_from_string(const std::string& s) {
    if (s == "auto" || s.empty()) return SolverBackend::automatic;
    if (s == "direct") return SolverBackend::direct;
    if (s == "minres") return SolverBackend::minres;
    throw InvalidArgument("unknown solver backend '" + s + "' (auto | direct | minres)");
}

StokesSystem assemble_stokes(const SpacePtr& space, double mu, bool apply_bc) {
    return assemble_stokes(space, build_node_pattern(*space), mu, apply_bc);
}

StokesSystem assemble_stokes(const SpacePtr& space, const NodePattern& pattern, double mu, bool apply_bc) {
    if (!(mu > 0.0)) throw InvalidArgument("assemble_stokes: viscosity must be positive");
    StokesSystem s;
    s.space = space;
    s.mu = mu;
    s.A = assemble_velocity_operator(*space, pattern,
                                     [mu](int, int, const Barycentric&, const Point&, VelocityTerms& c) { c.sym = 2.0 * mu; });
    s.B = assemble_divergence(*space, pattern);
    if (apply_bc) {
        apply_velocity_bc(*space, s.A);
        apply_divergence_bc(*space, s.B);
    }
    s.bc_applied = apply_bc;
    s.F = Vector::Zero(space->velocity_dofs());
    s.G = Vector::Zero(space->pressure_dofs());
    return s;
}

double saddle_residual(const StokesSystem& sys, const Vector& u, const Vector& p, const Vector& f, const Vector& g) {
    const Vector r1 = sys.A * u + sys.B.transpose() * p - f;
    const Vector r2 = sys.B * u - g;
    const double rhs = std::sqrt(f.squaredNorm() + g.squaredNorm());
    const double res = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
    return rhs > 0.0 ? res / rhs : res;
}

struct SaddleSolver::Direct {
    SparseMatrix kkt;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

SaddleSolver::~SaddleSolver() = default;

SaddleSolver::SaddleSolver(const StokesSystem& system, const SolverOptions& opts) : sys_(&system), opts_(opts) {
    const auto& space = *system.space;
    const int nu = space.velocity_dofs(), np = space.pressure_dofs();
    if (system.A.rows() != nu || system.B.rows() != np || system.B.cols() != nu)
        throw InvalidArgument("SaddleSolver: matrix sizes do not match the space");
    if (!system.bc_applied) throw SolverError("SaddleSolver: system without boundary conditions is singular");
    backend_ = opts.backend;
    if (backend_ == SolverBackend::automatic)
        backend_ = (nu + np <= opts.direct_max_dofs || !system.symmetric) ? SolverBackend::direct : SolverBackend::minres;
    if (backend_ == SolverBackend::minres && !system.symmetric)
        throw InvalidArgument("SaddleSolver: MINRES needs a symmetric velocity block");
    mass_ = pressure_mass_vector(space);

    if (backend_ == SolverBackend::direct) {
        direct_ = std::make_unique<Direct>();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(system.A.nonZeros() + 2 * system.B.nonZeros() + 2 * np);
        for (int c = 0; c < system.A.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(system.A, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
        for (int c = 0; c < system.B.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(system.B, c); it; ++it) {
                trip.emplace_back(nu + it.row(), it.col(), it.value());
                trip.emplace_back(it.col(), nu + it.row(), it.value());
            }
        // zero-mean pressure via one multiplier row
        for (int i = 0; i < np; ++i) {
            trip.emplace_back(nu + np, nu + i, mass_[i]);
            trip.emplace_back(nu + i, nu + np, mass_[i]);
        }
        direct_->kkt.resize(nu + np + 1, nu + np + 1);
        direct_->kkt.setFromTriplets(trip.begin(), trip.end());
        direct_->lu.compute(direct_->kkt);
        if (direct_->lu.info() != Eigen::Success)
            throw SolverError("SaddleSolver: sparse LU failed (singular saddle system, " + std::to_string(nu + np + 1) +
                              " unknowns)");
    } else {
        auto hierarchy = system.hierarchy ? system.hierarchy
                                          : std::make_shared<const MultigridHierarchy>(build_hierarchy(system.space));
        mg_ = std::make_unique<VelocityMultigrid>(hierarchy, system.A);
        if (system.schur_diagonal.size() == np)
            schur_inv_ = system.schur_diagonal.cwiseInverse();
        else
            schur_inv_ = (mass_ / (2.0 * system.mu)).cwiseInverse();
    }
}

StokesSolution SaddleSolver::solve(const Vector& f, const Vector& g_in) const {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& space = sys_->space;
    const int nu = space->velocity_dofs(), np = space->pressure_dofs();
    StokesSolution out{FEFunction(space, FieldRole::velocity), FEFunction(space, FieldRole::pressure), {}};
    out.stats.backend = to_string(backend_);
    Vector rhs_f = f;
    apply_rhs_bc(*space, rhs_f);
    // B^T 1 = 0, so only the part of g orthogonal to constants is attainable.
    Vector g = g_in;
    g.array() -= g.mean();
    if (rhs_f.squaredNorm() + g.squaredNorm() == 0.0) return out;

    Vector u, p;
    if (backend_ == SolverBackend::direct) {
        Vector rhs = Vector::Zero(nu + np + 1);
        rhs.head(nu) = rhs_f;
        rhs.segment(nu, np) = g;
        const Vector x = direct_->lu.solve(rhs);
        if (direct_->lu.info() != Eigen::Success) throw SolverError("SaddleSolver: LU solve failed");
        u = x.head(nu);
        p = x.segment(nu, np);
    } else {
        const auto& a = sys_->A;
        const auto& b = sys_->B;
        auto op = [&](const Vector& x) {
            Vector y(nu + np);
            y.head(nu) = a * x.head(nu) + b.transpose() * x.tail(np);
            y.tail(np) = b * x.head(nu);
            return y;
        };
        auto prec = [&](const Vector& r) {
            Vector z(nu + np);
            z.head(nu) = mg_->apply(r.head(nu));
            z.tail(np) = schur_inv_.cwiseProduct(r.tail(np));
            return z;
        };
        Vector rhs(nu + np);
        rhs.head(nu) = rhs_f;
        rhs.tail(np) = g;
        Vector x = Vector::Zero(nu + np);

        // Preconditioned MINRES (Lanczos three-term recurrence with Givens QR).
        Vector v_prev = Vector::Zero(nu + np), v = rhs;
        Vector z = prec(v);
        double gamma = std::sqrt(std::max(z.dot(v), 0.0));
        const double gamma1 = gamma;
        double gamma_prev = 1.0, eta = gamma;
        double s_prev = 0.0, s = 0.0, c_prev = 1.0, c = 1.0;
        Vector w_prev = Vector::Zero(nu + np), w = Vector::Zero(nu + np);
        int it = 0;
        while (it < opts_.max_iter && std::abs(eta) > opts_.rel_tol * gamma1) {
            ++it;
            z /= gamma;
            const Vector az = op(z);
            const double delta = az.dot(z);
            Vector v_next = az - (delta / gamma) * v - (gamma / gamma_prev) * v_prev;
            Vector z_next = prec(v_next);
            const double gamma_next = std::sqrt(std::max(z_next.dot(v_next), 0.0));
            const double a0 = c * delta - c_prev * s * gamma;
            const double a1 = std::sqrt(a0 * a0 + gamma_next * gamma_next);
            const double a2 = s * delta + c_prev * c * gamma;
            const double a3 = s_prev * gamma;
            const double c_next = a0 / a1, s_next = gamma_next / a1;
            Vector w_next = (z - a3 * w_prev - a2 * w) / a1;
            x += c_next * eta * w_next;
            eta = -s_next * eta;
            v_prev.swap(v);
            v.swap(v_next);
            z.swap(z_next);
            w_prev.swap(w);
            w.swap(w_next);
            gamma_prev = gamma;
            gamma = gamma_next;
            s_prev = s;
            s = s_next;
            c_prev = c;
            c = c_next;
            if (gamma == 0.0) break;
        }
        out.stats.iterations = it;
        if (std::abs(eta) > opts_.rel_tol * gamma1)
            throw ConvergenceError("MINRES: no convergence in " + std::to_string(it) + " iterations (residual ratio " +
                                   std::to_string(std::abs(eta) / gamma1) + ")");
        u = x.head(nu);
        p = x.tail(np);
        p.array() -= p.dot(mass_) / mass_.sum();
    }
    out.velocity.coeffs = u;
    out.pressure.coeffs = p;
    out.stats.residual = saddle_residual(*sys_, u, p, rhs_f, g);
    out.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

StokesSolution solve_saddle(const StokesSystem& system, const SolverOptions& opts) {
    SaddleSolver solver(system, opts);
    return solver.solve(system.F, system.G);
}

}  // namespace wstokes
