#pragma once

#include "wstokes/regularized_delta.hpp"
#include "wstokes/saddle.hpp"

#include <string>
#include <vector>

namespace wstokes {

/// Discrete pair (u_h, p_h) with a(u - u_h, v) - (p - p_h, div v) = 0 and
/// (q, div(u - u_h)) = 0 for all discrete v, q.
StokesSolution stokes_projection(const SpacePtr& space, const VelocityField& u, const ScalarFunction& p, double mu,
                                 const SolverOptions& opts = {});

struct InfSupOptions {
    double tol = 1e-8;       // relative change of the smallest Ritz value
    int max_steps = 300;
    double inner_tol = 1e-11;
    int probes = 24;         // probe path only
    unsigned seed = 7;
};

struct InfSupResult {
    double beta = 0.0;
    /// "eigen" (smallest nonzero generalized eigenvalue) or "probe" (minimum
    /// quotient over a finite pressure set).
    std::string method;
    int iterations = 0;
    double constant_quotient = 0.0;  // sup quotient of the constant pressure
};

/// Inf-sup constant of b(v, q) = -(q, div v) with the gradient seminorm on
/// velocities. Unweighted q = 2 uses Lanczos on B A^-1 B^T p = beta^2 M p over
/// zero-mean pressures; any other weight or index evaluates probe pressures.
InfSupResult discrete_infsup(const SpacePtr& space, const WeightField& w = WeightField::constant(1.0), double q = 2.0,
                             const InfSupOptions& opts = {});

struct StrainBand {
    double r_min = 0.0;
    double r_max = 0.0;
    int elements = 0;
    double mean_strain = 0.0;  // volume-weighted mean of |eps(G_h)|
};

struct GreenFunction {
    StokesSolution solution;
    RegularizedDelta delta;
    int i = 0;
    int j = 0;
    double h = 0.0;      // (6 |Omega| / #tets)^(1/3)
    double kappa = 2.0;
    std::vector<StrainBand> distance_bands;
    std::vector<StrainBand> sigma_bands;  // same edges, sigma_z = sqrt(|x - z|^2 + kappa^2 h^2)
    /// max over elements of the mean |eps(G_h)| times sigma_z^3
    double scaled_strain_max = 0.0;
    /// True when every band is populated and band means decrease strictly.
    [[nodiscard]] bool monotone_decay() const;
};

/// Load F_(a,k) = int delta_z eps(phi_a e_k)_ij.
Vector green_rhs(const TaylorHoodSpace& space, const RegularizedDelta& delta, int i, int j);

/// Discrete solution of a(G, v) + b(v, q) = int delta_z eps(v)_ij, b(G, r) = 0.
/// Bands are [2h,4h), [4h,8h), [8h,16h) around z, by element centroid.
GreenFunction approximate_green(const SpacePtr& space, const Point& z, int i, int j, double mu = 1.0,
                                double kappa = 2.0, const SolverOptions& opts = {});

}  // namespace wstokes
