#pragma once

#include "wstokes/saddle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wstokes {

enum class StressKind { linear, bounded_perturbation, smagorinski_generalized, smagorinski_distance };

std::string to_string(StressKind k);
StressKind stress_kind_from_string(const std::string& s);

/// Constitutive law S(x, Q), a function of the symmetric part Q^s only.
///   linear                   mu Q^s
///   bounded_perturbation     mu Q^s + mu_nl w(x) Q^s / (1 + |Q^s|)
///   smagorinski_generalized  (mu + w(x) |Q^s|^(q-2)) Q^s
///   smagorinski_distance     (mu + mu_nl dist(x)^alpha |Q^s|) Q^s
struct StressModel {
    StressKind kind = StressKind::linear;
    double mu = 1.0;
    double mu_nl = 0.0;
    double q = 2.0;
    double alpha = 0.0;
    WeightField weight = WeightField::constant(1.0);

    static StressModel linear(double mu);
    static StressModel bounded_perturbation(double mu, double chi_max, WeightField profile = WeightField::constant(1.0));
    static StressModel smagorinski_generalized(double mu, double q, WeightField w);
    static StressModel smagorinski_distance(double mu, double mu_nl, double alpha);

    /// Power-law kinds: exponent q and coefficient w(x) of |Q^s|^(q-2) Q^s.
    [[nodiscard]] bool is_power_law() const;
    [[nodiscard]] double power_index() const;
    [[nodiscard]] double power_coefficient(const Point& x) const;
    /// True when S(x, Q) = mu Q^s for all x and Q.
    [[nodiscard]] bool is_linear() const;
    [[nodiscard]] std::string describe() const;
};

Mat3 eval_stress(const StressModel& model, const Point& x, const Mat3& q);

/// Regularization of |Q|^(q-2) for q < 2 inside the solvers.
inline constexpr double stress_regularization = 1e-8;

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct AssumptionCheck {
    std::string name;
    Verdict verdict = Verdict::inconclusive;
    /// Per ladder norm: the extreme quotient observed at that norm.
    std::vector<double> ladder;
    std::optional<Point> witness_x;
    std::optional<Mat3> witness_q;
    double witness_quotient = 0.0;
    std::string detail;
};

struct AssumptionReport {
    AssumptionCheck coercivity;
    AssumptionCheck growth;
    AssumptionCheck linearity_at_infinity;
    AssumptionCheck strict_monotonicity;
    AssumptionCheck asymptotic_uhlenbeck;

    [[nodiscard]] std::vector<const AssumptionCheck*> checks() const;
    [[nodiscard]] bool all_pass() const;
};

struct SamplePlan {
    int points_per_axis = 3;  // interior grid of x samples
    std::vector<double> norms{1e-2, 1.0, 1e2, 1e4};
    int matrices_per_norm = 6;
    unsigned seed = 1;
};

AssumptionReport check_assumptions(const StressModel& model, const SamplePlan& plan = {});

struct NonlinearOptions {
    double tol = 1e-8;  // on ||eps(u_{k+1} - u_k)||_L2
    int max_iter = 100;
    bool line_search = true;
    /// Kacanov steps switch to Newton once the increment is below this
    /// times max(1, ||eps(u)||_L2).
    double newton_switch = 1e-3;
    SolverOptions linear;
};

struct NonlinearTrace {
    std::vector<double> increments;
    std::vector<double> energies;   // J after each accepted step (power-law solver)
    std::vector<double> residuals;  // max nonlinear residual over test functions
    std::vector<std::string> steps;  // "picard", "kacanov", "newton"
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;
    double divergence_residual = 0.0;  // max_r |int r div u_h|
};

struct NonlinearSolution {
    FEFunction velocity;
    FEFunction pressure;
    NonlinearTrace trace;
};

/// Thrown when an iteration runs out of steps; carries the trace so far.
class NonlinearConvergenceError : public ConvergenceError {
public:
    NonlinearConvergenceError(const std::string& what, NonlinearTrace trace)
        : ConvergenceError(what), trace_(std::move(trace)) {}
    [[nodiscard]] const NonlinearTrace& trace() const { return trace_; }

private:
    NonlinearTrace trace_;
};

/// Residual of int S(eps(u)):eps(v) - int p div v - int f:grad v for every
/// velocity basis function (boundary entries zero).
Vector nonlinear_residual(const StressModel& model, const FEFunction& u, const FEFunction& p, const TensorFunction& f);

/// Discrete energy J(v) = int (mu/2)|eps v|^2 + (1/q) w |eps v|^q - int f:grad v.
double smagorinski_energy(const StressModel& model, const FEFunction& v, const TensorFunction& f);

/// Fixed point u_{k+1} = Stokes_mu^-1 (f + mu eps(u_k) - S(x, eps(u_k))).
NonlinearSolution solve_bulicek(const SpacePtr& space, const StressModel& model, const TensorFunction& f,
                                const NonlinearOptions& opts = {});

/// Minimizes J over discretely divergence-free velocities by frozen-viscosity
/// steps with energy line search, then Newton steps near the solution.
NonlinearSolution solve_smagorinski(const SpacePtr& space, const StressModel& model, const TensorFunction& f,
                                    const NonlinearOptions& opts = {});

struct ConvectionResult {
    NonlinearSolution solution;
    int outer_iterations = 0;
    /// mu ||eps u||^2_L2 + ||eps u||^q_Lq(w)
    double stability_lhs = 0.0;
    /// 1/2 [((u.grad) u).u - ((u.grad) u).u] summed by quadrature
    double trilinear_self = 0.0;
};

/// Outer Picard on the skew-symmetric convection term around the power-law solve.
ConvectionResult solve_smagorinski_convection(const SpacePtr& space, const StressModel& model, const TensorFunction& f,
                                              const NonlinearOptions& opts = {});

struct ErrorStudyRow {
    double h = 0.0;
    int velocity_dofs = 0;
    int pressure_dofs = 0;
    double strain_l2 = 0.0;   // ||eps(u - u_h)||_L2
    double strain_lq = 0.0;   // ||eps(u - u_h)||_Lq(w)
    double interp_l2 = 0.0;   // same for the interpolant
    double interp_lq = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    int iterations = 0;
};

/// Errors of solve_smagorinski against a manufactured velocity u with forcing
/// f = S(x, eps u) - p I. For q >= 2: lhs = e2^2 + eq^q, rhs = i2^2 + iq^(q/(q-1));
/// for q < 2: lhs = e2^2, rhs = i2^2 + iq.
std::vector<ErrorStudyRow> smagorinski_error_study(const std::vector<SpacePtr>& spaces, const StressModel& model,
                                                   const VelocityField& u, const ScalarFunction& p,
                                                   const NonlinearOptions& opts = {});

}  // namespace wstokes
