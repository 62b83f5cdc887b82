#include "wstokes/stokes.hpp"

#include "wstokes/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>

namespace wstokes {

StokesSolution stokes_projection(const SpacePtr& space, const VelocityField& u, const ScalarFunction& p, double mu,
                                 const SolverOptions& opts) {
    StokesSystem sys = assemble_stokes(space, mu);
    const auto& grad = u.gradient;
    sys.F = assemble_rhs_divergence_form(
        *space,
        [&](const Point& x) -> Mat3 {
            return 2.0 * mu * symmetric_part(grad(x)) - p(x) * Mat3::Identity();
        },
        6);
    sys.G = assemble_pressure_rhs(*space, [&](const Point& x) { return grad(x).trace(); }, 6);
    return solve_saddle(sys, opts);
}

namespace {

/// Vector Laplacian (optionally weighted) with eliminated boundary dofs.
SparseMatrix gradient_operator(const TaylorHoodSpace& space, const NodePattern& pattern, const WeightField* w) {
    SparseMatrix a = assemble_velocity_operator(space, pattern, [w](int, int, const Barycentric&, const Point& x, VelocityTerms& c) {
        c.grad = w ? (*w)(x) : 1.0;
    });
    apply_velocity_bc(space, a);
    return a;
}

struct SchurApply {
    const SparseMatrix& a;
    const SparseMatrix& b;
    const VelocityMultigrid& mg;
    double tol;
    int* inner_iterations;

    Vector velocity(const Vector& p) const {
        Vector v = Vector::Zero(a.rows());
        *inner_iterations += pcg_multigrid(a, mg, b.transpose() * p, v, tol, 500);
        return v;
    }
};

double infsup_lanczos(const TaylorHoodSpace& space, const SchurApply& schur, const InfSupOptions& opts, int& steps) {
    const SparseMatrix mass = assemble_pressure_mass(space);
    Eigen::SimplicialLLT<SparseMatrix> mass_chol(mass);
    if (mass_chol.info() != Eigen::Success) throw SolverError("inf-sup: pressure mass factorization failed");
    const int np = space.pressure_dofs();
    const Vector ones = Vector::Ones(np);
    const Vector m_ones = mass * ones;
    const double ones_norm2 = ones.dot(m_ones);
    auto deflate = [&](Vector& x) { x -= (m_ones.dot(x) / ones_norm2) * ones; };

    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vector v(np);
    for (int i = 0; i < np; ++i) v[i] = uni(rng);
    deflate(v);
    v /= std::sqrt(v.dot(mass * v));

    const int max_steps = std::min(opts.max_steps, np - 1);
    Eigen::MatrixXd basis(np, max_steps + 1);
    std::vector<double> alpha, beta;
    double theta = 0.0, theta_prev = -1.0;
    for (int k = 0; k < max_steps; ++k) {
        basis.col(k) = v;
        const Vector s = schur.b * schur.velocity(v);
        Vector w = mass_chol.solve(s);
        alpha.push_back(v.dot(s));
        w -= alpha.back() * v;
        if (k > 0) w -= beta.back() * basis.col(k - 1);
        // full reorthogonalization in the mass inner product
        for (int pass = 0; pass < 2; ++pass) {
            const Vector mw = mass * w;
            for (int j = 0; j <= k; ++j) w -= basis.col(j).dot(mw) * basis.col(j);
            deflate(w);
        }
        const double b = std::sqrt(std::max(w.dot(mass * w), 0.0));
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (int j = 0; j <= k; ++j) {
            t(j, j) = alpha[j];
            if (j < k) t(j, j + 1) = t(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        theta = es.eigenvalues()[0];
        const double residual = std::abs(b * es.eigenvectors()(k, 0));
        steps = k + 1;
        if (k >= 4 && residual <= opts.tol * std::abs(theta) && std::abs(theta - theta_prev) <= opts.tol * std::abs(theta))
            return theta;
        if (b <= 1e-14 * std::abs(alpha.back())) return theta;  // invariant subspace
        theta_prev = theta;
        beta.push_back(b);
        v = w / b;
    }
    if (steps >= np - 1) return theta;
    throw ConvergenceError("inf-sup: Lanczos did not converge in " + std::to_string(steps) +
                           " steps (smallest Ritz value " + std::to_string(theta) + ")");
}

std::vector<Vector> probe_pressures(const TaylorHoodSpace& space, const InfSupOptions& opts) {
    std::vector<Vector> probes;
    const int np = space.pressure_dofs();
    const auto& mesh = space.mesh();
    constexpr double pi = 3.14159265358979323846;
    for (int kx = 1; kx <= 2; ++kx)
        for (int ky = 0; ky <= 1; ++ky) {
            Vector p(np);
            for (int i = 0; i < np; ++i) {
                const Point& x = mesh.vertices()[i];
                p[i] = std::cos(kx * pi * x[0]) * std::cos(ky * pi * x[1]) + 0.3 * std::cos(pi * x[2]);
            }
            probes.push_back(p);
        }
    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    while (static_cast<int>(probes.size()) < opts.probes) {
        Vector p(np);
        for (int i = 0; i < np; ++i) p[i] = uni(rng);
        probes.push_back(p);
    }
    const Vector m = pressure_mass_vector(space);
    for (auto& p : probes) p.array() -= p.dot(m) / m.sum();
    return probes;
}

}  // namespace

InfSupResult discrete_infsup(const SpacePtr& space, const WeightField& w, double q, const InfSupOptions& opts) {
    if (!(q > 1.0)) throw InvalidArgument("discrete_infsup: q must exceed 1");
    const bool eigen_path = w.kind() == WeightKind::constant && w.scale() == 1.0 && q == 2.0;
    const NodePattern pattern = build_node_pattern(*space);
    const SparseMatrix a = gradient_operator(*space, pattern, eigen_path ? nullptr : &w);
    SparseMatrix b = assemble_divergence(*space, pattern);
    apply_divergence_bc(*space, b);
    auto hierarchy = std::make_shared<const MultigridHierarchy>(build_hierarchy(space));
    VelocityMultigrid mg(hierarchy, a);
    int inner = 0;
    SchurApply schur{a, b, mg, opts.inner_tol, &inner};

    InfSupResult out;
    {
        const Vector ones = Vector::Ones(space->pressure_dofs());
        const Vector v = schur.velocity(ones);
        out.constant_quotient = std::sqrt(std::max(ones.dot(b * v), 0.0));
    }
    if (eigen_path) {
        out.method = "eigen";
        const double theta = infsup_lanczos(*space, schur, opts, out.iterations);
        out.beta = std::sqrt(std::max(theta, 0.0));
        return out;
    }
    out.method = "probe";
    const WeightField dual = dual_weight(w, q);
    const double q_dual = q / (q - 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& p : probe_pressures(*space, opts)) {
        FEFunction v(space, FieldRole::velocity, schur.velocity(p));
        const double num = std::abs(p.dot(b * v.coeffs));
        const double den = weighted_norm(v, w, q, Derivative::gradient) *
                           weighted_norm(FEFunction(space, FieldRole::pressure, p), dual, q_dual, Derivative::none);
        if (den > 0.0) best = std::min(best, num / den);
        ++out.iterations;
    }
    out.beta = best;
    return out;
}

bool GreenFunction::monotone_decay() const {
    for (std::size_t k = 1; k < distance_bands.size(); ++k)
        if (!(distance_bands[k].mean_strain < distance_bands[k - 1].mean_strain)) return false;
    for (const auto& b : distance_bands)
        if (b.elements == 0) return false;
    return !distance_bands.empty();
}

Vector green_rhs(const TaylorHoodSpace& space, const RegularizedDelta& delta, int i, int j) {
    if (i < 0 || i > 2 || j < 0 || j > 2) throw InvalidArgument("green_rhs: component indices must be in 0..2");
    Vector f = Vector::Zero(space.velocity_dofs());
    const int t = delta.tet;
    const auto geo = element_geometry(space.mesh(), t);
    const auto& nodes = space.element_nodes(t);
    const auto& rule = quadrature(4);
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const auto& l = rule.points[k];
        const double wd = rule.weights[k] * 6.0 * geo.volume * delta.value(l);
        const auto g = p2_gradients(l, geo.grad_lambda);
        for (int a = 0; a < 10; ++a) {
            // eps(phi e_c)_ij = (delta_ic d_j phi + delta_jc d_i phi) / 2
            f[TaylorHoodSpace::vdof(nodes[a], i)] += 0.5 * wd * g[a][j];
            f[TaylorHoodSpace::vdof(nodes[a], j)] += 0.5 * wd * g[a][i];
        }
    }
    return f;
}

GreenFunction approximate_green(const SpacePtr& space, const Point& z, int i, int j, double mu, double kappa,
                                const SolverOptions& opts) {
    GreenFunction out;
    out.delta = build_regularized_delta(*space, z);
    out.i = i;
    out.j = j;
    out.kappa = kappa;
    StokesSystem sys = assemble_stokes(space, mu);
    sys.F = green_rhs(*space, out.delta, i, j);
    out.solution = solve_saddle(sys, opts);

    const auto& mesh = space->mesh();
    const int nt = static_cast<int>(mesh.num_tets());
    out.h = std::cbrt(6.0 * mesh.total_volume() / nt);
    const std::array<double, 4> edges{2 * out.h, 4 * out.h, 8 * out.h, 16 * out.h};
    std::vector<double> dist_sum(3, 0.0), dist_vol(3, 0.0), sig_sum(3, 0.0), sig_vol(3, 0.0);
    std::vector<int> dist_count(3, 0), sig_count(3, 0);
    const auto& rule = quadrature(2);
    for (int t = 0; t < nt; ++t) {
        double mean = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k)
            mean += rule.weights[k] * 6.0 * symmetric_part(out.solution.velocity.velocity_gradient(t, rule.points[k])).norm();
        const double vol = mesh.volume(t);
        const double d = (mesh.centroid(t) - z).norm();
        const double sigma = std::sqrt(d * d + kappa * kappa * out.h * out.h);
        out.scaled_strain_max = std::max(out.scaled_strain_max, mean * sigma * sigma * sigma);
        for (int band = 0; band < 3; ++band) {
            if (d >= edges[band] && d < edges[band + 1]) {
                dist_sum[band] += mean * vol;
                dist_vol[band] += vol;
                ++dist_count[band];
            }
            if (sigma >= edges[band] && sigma < edges[band + 1]) {
                sig_sum[band] += mean * vol;
                sig_vol[band] += vol;
                ++sig_count[band];
            }
        }
    }
    for (int band = 0; band < 3; ++band) {
        out.distance_bands.push_back({edges[band], edges[band + 1], dist_count[band],
                                      dist_vol[band] > 0 ? dist_sum[band] / dist_vol[band] : 0.0});
        out.sigma_bands.push_back({edges[band], edges[band + 1], sig_count[band],
                                   sig_vol[band] > 0 ? sig_sum[band] / sig_vol[band] : 0.0});
    }
    return out;
}

}  // namespace wstokes
