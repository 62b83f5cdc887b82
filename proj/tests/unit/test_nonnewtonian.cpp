#include "wstokes/assembly.hpp"
#include "wstokes/nonnewtonian.hpp"
#include "wstokes/norms.hpp"
#include "wstokes/saddle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wstokes;

namespace {

SpacePtr cube(int n) { return std::make_shared<TaylorHoodSpace>(build_cube_mesh(n)); }

Mat3 forcing_tensor(const Point& x) {
    Mat3 m;
    m << 0.0, std::sin(3.0 * x[2]), x[1] * x[1], x[2] * x[0], 0.0, std::cos(2.0 * x[0]), x[1], x[0] * x[0], 0.0;
    return m;
}

TensorFunction scaled_forcing(double a) {
    return [a](const Point& x) -> Mat3 { return a * forcing_tensor(x); };
}

Mat3 random_matrix(std::mt19937& rng) {
    std::normal_distribution<double> g;
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = g(rng);
    return m;
}

StokesSolution linear_stokes(const SpacePtr& s, double viscosity, const TensorFunction& f) {
    // S = viscosity * eps corresponds to the 2 mu eps:eps form with mu = viscosity / 2
    auto sys = assemble_stokes(s, 0.5 * viscosity);
    sys.F = assemble_rhs_divergence_form(*s, f, 5);
    apply_rhs_bc(*s, sys.F);
    return solve_saddle(sys);
}

}  // namespace

TEST(Stress, Examples) {
    const Point x(0.3, 0.4, 0.5);
    Mat3 e11 = Mat3::Zero();
    e11(0, 0) = 1.0;
    EXPECT_LT((eval_stress(StressModel::linear(2.0), x, e11) - 2.0 * e11).norm(), 1e-15);

    Mat3 q = Mat3::Zero();
    q(0, 1) = q(1, 0) = std::sqrt(2.0);  // |Q^s| = 2
    const auto smag = StressModel::smagorinski_generalized(1.0, 3.0, WeightField::constant(1.0));
    EXPECT_LT((eval_stress(smag, x, q) - 3.0 * q).norm(), 1e-14);

    Mat3 unit = Mat3::Zero();
    unit(2, 2) = 1.0;
    const Point near_wall(0.1, 0.5, 0.5);
    const auto dist = StressModel::smagorinski_distance(1.0, 1.0, 1.0);
    EXPECT_LT((eval_stress(dist, near_wall, unit) - 1.1 * unit).norm(), 1e-14);
}

TEST(Stress, SymmetricAndZeroAtZero) {
    std::mt19937 rng(3);
    const std::vector<StressModel> models = {
        StressModel::linear(1.5),
        StressModel::bounded_perturbation(1.0, 0.8, WeightField::constant(1.0)),
        StressModel::smagorinski_generalized(1.0, 3.0, WeightField::power_boundary(0.25)),
        StressModel::smagorinski_generalized(1.0, 1.5, WeightField::constant(2.0)),
        StressModel::smagorinski_distance(1.0, 0.5, 1.0),
    };
    const Point x(0.2, 0.7, 0.4);
    for (const auto& m : models) {
        EXPECT_EQ(eval_stress(m, x, Mat3::Zero()).norm(), 0.0) << m.describe();
        for (int r = 0; r < 20; ++r) {
            const Mat3 q = random_matrix(rng);
            const Mat3 s = eval_stress(m, x, q);
            EXPECT_LT((s - s.transpose()).norm(), 1e-14);
            EXPECT_LT((s - eval_stress(m, x, q.transpose())).norm(), 1e-13 * (1.0 + s.norm()));
        }
    }
}

TEST(Stress, KindNamesRoundTrip) {
    for (auto k : {StressKind::linear, StressKind::bounded_perturbation, StressKind::smagorinski_generalized,
                   StressKind::smagorinski_distance})
        EXPECT_EQ(stress_kind_from_string(to_string(k)), k);
    EXPECT_THROW(stress_kind_from_string("newtonian"), InvalidArgument);
    EXPECT_THROW(StressModel::smagorinski_generalized(1.0, 1.0, WeightField::constant(1.0)), InvalidArgument);
}

TEST(Assumptions, Verdicts) {
    const auto lin = check_assumptions(StressModel::linear(1.0), {});
    EXPECT_TRUE(lin.all_pass());
    for (double v : lin.linearity_at_infinity.ladder) EXPECT_EQ(v, 0.0);

    const auto bounded = check_assumptions(StressModel::bounded_perturbation(1.0, 0.5, WeightField::constant(1.0)), {});
    EXPECT_TRUE(bounded.all_pass());
    const auto& ladder = bounded.linearity_at_infinity.ladder;
    for (std::size_t i = 1; i < ladder.size(); ++i) EXPECT_LT(ladder[i], ladder[i - 1]);
    // the quotient behaves like chi / |Q|
    EXPECT_NEAR(ladder.back() * 1e4, 0.5, 1e-3);

    const auto smag = check_assumptions(StressModel::smagorinski_generalized(1.0, 3.0, WeightField::constant(1.0)), {});
    const auto& lin_inf = smag.linearity_at_infinity;
    EXPECT_EQ(lin_inf.verdict, Verdict::fail);
    ASSERT_TRUE(lin_inf.witness_x.has_value());
    ASSERT_TRUE(lin_inf.witness_q.has_value());
    // |S - mu Q^s| / |Q^s| = omega |Q^s| at the witness
    EXPECT_NEAR(lin_inf.witness_quotient, symmetric_part(*lin_inf.witness_q).norm(), 1e-8 * lin_inf.witness_quotient);
    for (const auto* c : smag.checks())
        if (c->verdict == Verdict::fail) EXPECT_TRUE(c->witness_q.has_value()) << c->name;
}

TEST(Bulicek, LinearModelIsOneStokesSolve) {
    const auto s = cube(3);
    const auto f = scaled_forcing(5.0);
    const auto sol = solve_bulicek(s, StressModel::linear(1.4), f);
    EXPECT_EQ(sol.trace.iterations, 1);
    EXPECT_TRUE(sol.trace.converged);
    const auto ref = linear_stokes(s, 1.4, f);
    EXPECT_LT((sol.velocity.coeffs - ref.velocity.coeffs).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LT(sol.trace.divergence_residual, 1e-10);
}

TEST(Bulicek, ZeroForcing) {
    const auto sol = solve_bulicek(cube(2), StressModel::bounded_perturbation(1.0, 0.5, WeightField::constant(1.0)),
                                   [](const Point&) -> Mat3 { return Mat3::Zero(); });
    EXPECT_EQ(sol.trace.iterations, 1);
    EXPECT_EQ(sol.velocity.coeffs.norm(), 0.0);
}

TEST(Bulicek, FixedPointAndAprioriBound) {
    const auto model = StressModel::bounded_perturbation(1.0, 0.5, WeightField::constant(1.0));
    const auto f = scaled_forcing(10.0);
    const WeightField w = WeightField::power_boundary(0.5);
    std::vector<double> bounds;
    for (int n : {2, 3, 4}) {
        NonlinearOptions opts;
        opts.tol = 1e-10;
        const auto sol = solve_bulicek(cube(n), model, f, opts);
        EXPECT_TRUE(sol.trace.converged);
        EXPECT_LE(sol.trace.increments.back(), opts.tol);
        EXPECT_LT(sol.trace.final_residual, 1e-8);
        EXPECT_LT(sol.trace.divergence_residual, 1e-10);
        bounds.push_back(weighted_norm(sol.velocity, w, 2.0, Derivative::gradient) +
                         weighted_norm(sol.pressure, w, 2.0, Derivative::none));
    }
    const auto [lo, hi] = std::minmax_element(bounds.begin(), bounds.end());
    EXPECT_LT(*hi / *lo, 1.5);
}

TEST(Bulicek, NonConvergenceCarriesTrace) {
    NonlinearOptions opts;
    opts.max_iter = 2;
    opts.tol = 1e-14;
    try {
        (void)solve_bulicek(cube(2), StressModel::bounded_perturbation(1.0, 0.9, WeightField::constant(1.0)),
                            scaled_forcing(10.0), opts);
        FAIL() << "expected non-convergence";
    } catch (const NonlinearConvergenceError& e) {
        EXPECT_EQ(e.trace().increments.size(), 2u);
        EXPECT_FALSE(e.trace().converged);
    }
}

TEST(Smagorinski, VanishingNonlinearityIsLinearStokes) {
    const auto s = cube(3);
    const auto f = scaled_forcing(5.0);
    const auto sol = solve_smagorinski(s, StressModel::smagorinski_distance(1.0, 0.0, 0.25), f);
    EXPECT_EQ(sol.trace.iterations, 1);
    const auto ref = linear_stokes(s, 1.0, f);
    EXPECT_LT((sol.velocity.coeffs - ref.velocity.coeffs).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Smagorinski, QuadraticMatchesShiftedViscosity) {
    const auto s = cube(3);
    const auto f = scaled_forcing(20.0);
    const auto sol = solve_smagorinski(s, StressModel::smagorinski_generalized(1.0, 2.0, WeightField::constant(0.7)), f);
    const auto ref = linear_stokes(s, 1.7, f);
    EXPECT_LT((sol.velocity.coeffs - ref.velocity.coeffs).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Smagorinski, EnergyDecreasesAndConstraintHolds) {
    const auto s = cube(3);
    const auto f = scaled_forcing(20.0);
    for (double q : {3.0, 1.5}) {
        const auto model = StressModel::smagorinski_generalized(1.0, q, WeightField::power_boundary(0.25));
        const auto sol = solve_smagorinski(s, model, f);
        ASSERT_TRUE(sol.trace.converged);
        EXPECT_GT(sol.trace.iterations, 2);
        const auto& e = sol.trace.energies;
        for (std::size_t i = 1; i < e.size(); ++i) EXPECT_LE(e[i], e[i - 1]);
        EXPECT_LT(sol.trace.divergence_residual, 1e-10);
        EXPECT_LT(sol.trace.final_residual, 1e-7);
        EXPECT_NEAR(e.back(), smagorinski_energy(model, sol.velocity, f), 1e-12 * std::abs(e.back()));
    }
}

TEST(Smagorinski, EnergyGradientMatchesFiniteDifferences) {
    const auto s = cube(2);
    const auto model = StressModel::smagorinski_generalized(1.0, 3.0, WeightField::power_boundary(0.25));
    const auto f = scaled_forcing(3.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    FEFunction u(s, FieldRole::velocity);
    for (int i = 0; i < u.coeffs.size(); ++i) u.coeffs[i] = s->is_boundary_dof(i) ? 0.0 : uni(rng);
    const FEFunction zero_p(s, FieldRole::pressure);
    const Vector grad = nonlinear_residual(model, u, zero_p, f);
    for (int r = 0; r < 10; ++r) {
        FEFunction v(s, FieldRole::velocity);
        for (int i = 0; i < v.coeffs.size(); ++i) v.coeffs[i] = s->is_boundary_dof(i) ? 0.0 : uni(rng);
        const double h = 1e-6;
        FEFunction up = u, um = u;
        up.coeffs += h * v.coeffs;
        um.coeffs -= h * v.coeffs;
        const double fd = (smagorinski_energy(model, up, f) - smagorinski_energy(model, um, f)) / (2.0 * h);
        EXPECT_NEAR(fd, grad.dot(v.coeffs), 1e-5 * std::abs(fd));
    }
}

TEST(Smagorinski, RejectsBoundedModel) {
    EXPECT_THROW(solve_smagorinski(cube(1), StressModel::bounded_perturbation(1.0, 0.5, WeightField::constant(1.0)),
                                   scaled_forcing(1.0)),
                 InvalidArgument);
}

TEST(Convection, ZeroForcingAndSkewSelfTerm) {
    const auto s = cube(2);
    const auto model = StressModel::smagorinski_generalized(1.0, 3.0, WeightField::power_boundary(0.25));
    const auto zero = solve_smagorinski_convection(s, model, scaled_forcing(0.0));
    EXPECT_EQ(zero.solution.velocity.coeffs.norm(), 0.0);

    std::vector<double> lhs;
    for (double a : {20.0, 10.0, 5.0}) {
        const auto r = solve_smagorinski_convection(s, model, scaled_forcing(a));
        EXPECT_GT(r.solution.velocity.coeffs.norm(), 0.0);
        EXPECT_LE(std::abs(r.trilinear_self), 1e-10);
        EXPECT_LT(r.solution.trace.divergence_residual, 1e-10);
        lhs.push_back(r.stability_lhs);
    }
    EXPECT_GT(lhs[0], lhs[1]);
    EXPECT_GT(lhs[1], lhs[2]);
}

TEST(Convection, DivergingOuterLoopIsReported) {
    NonlinearOptions opts;
    opts.max_iter = 4;
    EXPECT_THROW(solve_smagorinski_convection(cube(2), StressModel::linear(1e-3), scaled_forcing(1e3), opts),
                 NonlinearConvergenceError);
}
