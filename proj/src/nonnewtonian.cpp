#include "wstokes/nonnewtonian.hpp"

#include "wstokes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace wstokes {

std::string to_string(StressKind k) {
    switch (k) {
        case StressKind::linear: return "linear";
        case StressKind::bounded_perturbation: return "bounded_perturbation";
        case StressKind::smagorinski_generalized: return "smagorinski_generalized";
        case StressKind::smagorinski_distance: return "smagorinski_distance";
    }
    return "linear";
}

StressKind stress_kind_from_string(const std::string& s) {
    for (auto k : {StressKind::linear, StressKind::bounded_perturbation, StressKind::smagorinski_generalized,
                   StressKind::smagorinski_distance})
        if (to_string(k) == s) return k;
    throw InvalidArgument("unknown stress kind '" + s +
                          "' (linear | bounded_perturbation | smagorinski_generalized | smagorinski_distance)");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

StressModel StressModel::linear(double mu) {
    if (!(mu > 0.0)) throw InvalidArgument("stress model: mu must be positive");
    StressModel m;
    m.mu = mu;
    return m;
}

StressModel StressModel::bounded_perturbation(double mu, double chi_max, WeightField profile) {
    StressModel m = linear(mu);
    if (!(chi_max >= 0.0)) throw InvalidArgument("stress model: perturbation size must be nonnegative");
    m.kind = StressKind::bounded_perturbation;
    m.mu_nl = chi_max;
    m.weight = std::move(profile);
    return m;
}

StressModel StressModel::smagorinski_generalized(double mu, double q, WeightField w) {
    StressModel m = linear(mu);
    if (!(q > 1.0)) throw InvalidArgument("stress model: q must exceed 1");
    m.kind = StressKind::smagorinski_generalized;
    m.q = q;
    m.weight = std::move(w);
    return m;
}

StressModel StressModel::smagorinski_distance(double mu, double mu_nl, double alpha) {
    StressModel m = linear(mu);
    if (!(mu_nl >= 0.0)) throw InvalidArgument("stress model: mu_nl must be nonnegative");
    m.kind = StressKind::smagorinski_distance;
    m.mu_nl = mu_nl;
    m.q = 3.0;
    m.alpha = alpha;
    m.weight = WeightField::power_boundary(alpha);
    return m;
}

bool StressModel::is_power_law() const {
    return kind == StressKind::smagorinski_generalized || kind == StressKind::smagorinski_distance;
}

double StressModel::power_index() const { return kind == StressKind::smagorinski_distance ? 3.0 : q; }

double StressModel::power_coefficient(const Point& x) const {
    switch (kind) {
        case StressKind::smagorinski_generalized: return weight(x);
        case StressKind::smagorinski_distance: return mu_nl == 0.0 ? 0.0 : mu_nl * weight(x);
        default: return 0.0;
    }
}

bool StressModel::is_linear() const {
    switch (kind) {
        case StressKind::linear: return true;
        case StressKind::bounded_perturbation:
        case StressKind::smagorinski_distance: return mu_nl == 0.0;
        case StressKind::smagorinski_generalized: return false;
    }
    return false;
}

std::string StressModel::describe() const {
    std::ostringstream os;
    os << to_string(kind) << "(mu=" << mu;
    if (kind == StressKind::bounded_perturbation || kind == StressKind::smagorinski_distance) os << ", mu_nl=" << mu_nl;
    if (kind == StressKind::smagorinski_generalized) os << ", q=" << q;
    if (kind == StressKind::smagorinski_distance) os << ", alpha=" << alpha;
    if (kind != StressKind::linear && kind != StressKind::smagorinski_distance) os << ", w=" << weight.describe();
    os << ")";
    return os.str();
}

Mat3 eval_stress(const StressModel& m, const Point& x, const Mat3& q) {
    const Mat3 qs = symmetric_part(q);
    const double n = qs.norm();
    switch (m.kind) {
        case StressKind::linear: return m.mu * qs;
        case StressKind::bounded_perturbation: return (m.mu + m.mu_nl * m.weight(x) / (1.0 + n)) * qs;
        case StressKind::smagorinski_generalized:
        case StressKind::smagorinski_distance: {
            if (n == 0.0) return Mat3::Zero();
            const double w = m.power_coefficient(x);
            return (m.mu + (w == 0.0 ? 0.0 : w * std::pow(n, m.power_index() - 2.0))) * qs;
        }
    }
    return m.mu * qs;
}

// ---------------------------------------------------------------- assumptions

std::vector<const AssumptionCheck*> AssumptionReport::checks() const {
    return {&coercivity, &growth, &linearity_at_infinity, &strict_monotonicity, &asymptotic_uhlenbeck};
}

bool AssumptionReport::all_pass() const {
    for (const auto* c : checks())
        if (c->verdict != Verdict::pass) return false;
    return true;
}

namespace {

struct Sample {
    Point x;
    Mat3 q;
    int level;
};

Mat3 random_symmetric(std::mt19937& rng, double norm) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = g(rng);
    m = symmetric_part(m);
    return m * (norm / m.norm());
}

/// Orthonormal basis of symmetric 3x3 matrices under A:B.
std::array<Mat3, 6> symmetric_basis() {
    std::array<Mat3, 6> b;
    int k = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            Mat3 e = Mat3::Zero();
            if (i == j) {
                e(i, i) = 1.0;
            } else {
                e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
            }
            b[k++] = e;
        }
    return b;
}

void set_witness(AssumptionCheck& c, const Sample& s, double quotient) {
    c.witness_x = s.x;
    c.witness_q = s.q;
    c.witness_quotient = quotient;
}

/// Trend of a per-level sequence of magnitudes.
enum class Trend { vanishing, decreasing, bounded, increasing, irregular };

Trend trend_of(const std::vector<double>& v, double scale) {
    const double floor = 1e-9 * std::max(scale, 1e-300);
    bool all_small = true;
    for (double x : v) all_small = all_small && std::abs(x) <= floor;
    if (all_small) return Trend::vanishing;
    bool dec = true, inc = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        dec = dec && v[i] < v[i - 1];
        inc = inc && v[i] > v[i - 1];
    }
    if (dec) return Trend::decreasing;
    if (inc && v.back() > 2.0 * v.front()) return Trend::increasing;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*hi <= 4.0 * std::max(*lo, floor)) return Trend::bounded;
    return Trend::irregular;
}

}  // namespace

AssumptionReport check_assumptions(const StressModel& model, const SamplePlan& plan) {
    if (plan.points_per_axis < 1 || plan.norms.size() < 2 || plan.matrices_per_norm < 1)
        throw InvalidArgument("check_assumptions: sample plan needs points, >= 2 norms and matrices");
    std::vector<double> norms = plan.norms;
    std::sort(norms.begin(), norms.end());
    std::mt19937 rng(plan.seed);
    std::vector<Sample> samples;
    const int n = plan.points_per_axis;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const Point x((i + 0.5) / n, (j + 0.5) / n, (k + 0.5) / n);
                for (int l = 0; l < static_cast<int>(norms.size()); ++l)
                    for (int r = 0; r < plan.matrices_per_norm; ++r) {
                        Mat3 q = random_symmetric(rng, norms[l]);
                        // a skew part must not change anything
                        Mat3 skew = random_symmetric(rng, 1.0);
                        skew(0, 1) += 0.3 * norms[l];
                        skew(1, 0) -= 0.3 * norms[l];
                        samples.push_back({x, q + (skew - symmetric_part(skew)), l});
                    }
            }
    const int levels = static_cast<int>(norms.size());
    AssumptionReport rep;
    const double mu = model.mu;

    {  // coercivity: c (|Q^s|^2 - 1) <= S(x,Q^s):Q with some c > 0
        auto& c = rep.coercivity;
        c.name = "coercivity";
        c.ladder.assign(levels, std::numeric_limits<double>::infinity());
        double best = std::numeric_limits<double>::infinity();
        const Sample* worst = nullptr;
        for (const auto& s : samples) {
            const double sq = symmetric_part(s.q).squaredNorm();
            const double val = eval_stress(model, s.x, s.q).cwiseProduct(s.q).sum();
            // near |Q^s| = 1 the quotient is meaningless; only the sign matters there
            const double quotient = sq >= 2.0 ? val / (sq - 1.0) : (val < 0.0 ? -1.0 : best);
            if (sq >= 2.0) c.ladder[s.level] = std::min(c.ladder[s.level], quotient);
            if (quotient < best) {
                best = quotient;
                worst = &s;
            }
        }
        std::vector<double> tail;
        for (double v : c.ladder)
            if (std::isfinite(v)) tail.push_back(v);
        if (best <= 0.0) {
            c.verdict = Verdict::fail;
            if (worst) set_witness(c, *worst, best);
            c.detail = "S(x,Q^s):Q is not bounded below by a positive multiple of |Q^s|^2 - 1";
        } else if (tail.size() >= 2 && trend_of(tail, mu) == Trend::decreasing && tail.back() < 1e-3 * tail.front()) {
            c.verdict = Verdict::inconclusive;
            if (worst) set_witness(c, *worst, best);
            c.detail = "coercivity quotient decays along the norm ladder";
        } else {
            c.verdict = Verdict::pass;
            c.detail = "constant " + std::to_string(best);
        }
    }

    {  // growth: |S| <= C (|Q| + 1)
        auto& c = rep.growth;
        c.name = "growth";
        c.ladder.assign(levels, 0.0);
        std::vector<const Sample*> arg(levels, nullptr);
        for (const auto& s : samples) {
            const double quotient = eval_stress(model, s.x, s.q).norm() / (s.q.norm() + 1.0);
            if (quotient >= c.ladder[s.level]) {
                c.ladder[s.level] = quotient;
                arg[s.level] = &s;
            }
        }
        // log-slope of the quotient between the two largest norms
        const double slope = std::log(std::max(c.ladder[levels - 1], 1e-300) / std::max(c.ladder[levels - 2], 1e-300)) /
                             std::log(norms[levels - 1] / norms[levels - 2]);
        if (slope > 0.25) {
            c.verdict = Verdict::fail;
            set_witness(c, *arg.back(), c.ladder.back());
            c.detail = "|S|/(|Q|+1) grows like |Q|^" + std::to_string(slope);
        } else if (slope > 0.05) {
            c.verdict = Verdict::inconclusive;
            set_witness(c, *arg.back(), c.ladder.back());
        } else {
            c.verdict = Verdict::pass;
        }
    }

    {  // linearity at infinity: |S - mu Q^s| / |Q^s| -> 0
        auto& c = rep.linearity_at_infinity;
        c.name = "linearity_at_infinity";
        c.ladder.assign(levels, 0.0);
        std::vector<const Sample*> arg(levels, nullptr);
        for (const auto& s : samples) {
            const Mat3 qs = symmetric_part(s.q);
            const double quotient = (eval_stress(model, s.x, s.q) - mu * qs).norm() / qs.norm();
            if (quotient >= c.ladder[s.level]) {
                c.ladder[s.level] = quotient;
                arg[s.level] = &s;
            }
        }
        const Trend t = trend_of(c.ladder, mu);
        if (t == Trend::vanishing || (t == Trend::decreasing && c.ladder.back() < 1e-2 * c.ladder.front())) {
            c.verdict = Verdict::pass;
        } else if (t == Trend::increasing || t == Trend::bounded) {
            c.verdict = Verdict::fail;
            set_witness(c, *arg.back(), c.ladder.back());
            c.detail = t == Trend::increasing ? "perturbation quotient grows with |Q^s|"
                                              : "perturbation quotient does not decay with |Q^s|";
        } else {
            c.verdict = Verdict::inconclusive;
            set_witness(c, *arg.back(), c.ladder.back());
        }
    }

    {  // strict monotonicity on pairs at the same x
        auto& c = rep.strict_monotonicity;
        c.name = "strict_monotonicity";
        c.ladder.assign(levels, std::numeric_limits<double>::infinity());
        double worst_val = std::numeric_limits<double>::infinity();
        const Sample* worst = nullptr;
        for (std::size_t a = 0; a < samples.size(); ++a)
            for (std::size_t b = a + 1; b < samples.size(); ++b) {
                if ((samples[a].x - samples[b].x).squaredNorm() != 0.0) continue;
                const Mat3 dq = samples[a].q - samples[b].q;
                const double dn = symmetric_part(dq).squaredNorm();
                if (dn == 0.0) continue;
                const Mat3 ds = eval_stress(model, samples[a].x, samples[a].q) - eval_stress(model, samples[b].x, samples[b].q);
                const double quotient = ds.cwiseProduct(dq).sum() / dn;
                const int lvl = std::max(samples[a].level, samples[b].level);
                c.ladder[lvl] = std::min(c.ladder[lvl], quotient);
                if (quotient < worst_val) {
                    worst_val = quotient;
                    worst = &samples[a];
                }
            }
        if (worst_val > 0.0) {
            c.verdict = Verdict::pass;
        } else {
            c.verdict = Verdict::fail;
            if (worst) set_witness(c, *worst, worst_val);
            c.detail = "(S(Q)-S(P)):(Q-P) <= 0 for a sampled pair";
        }
    }

    {  // Uhlenbeck: |dS/dQ^s - mu I| -> 0, central differences
        auto& c = rep.asymptotic_uhlenbeck;
        c.name = "asymptotic_uhlenbeck";
        c.ladder.assign(levels, 0.0);
        std::vector<const Sample*> arg(levels, nullptr);
        const auto basis = symmetric_basis();
        for (const auto& s : samples) {
            const Mat3 qs = symmetric_part(s.q);
            const double step = 1e-5 * qs.norm();
            Eigen::Matrix<double, 6, 6> jac;
            for (int j = 0; j < 6; ++j) {
                const Mat3 d = (eval_stress(model, s.x, qs + step * basis[j]) - eval_stress(model, s.x, qs - step * basis[j])) /
                               (2.0 * step);
                for (int i = 0; i < 6; ++i) jac(i, j) = d.cwiseProduct(basis[i]).sum();
            }
            const double dev = (jac - mu * Eigen::Matrix<double, 6, 6>::Identity()).norm();
            if (dev >= c.ladder[s.level]) {
                c.ladder[s.level] = dev;
                arg[s.level] = &s;
            }
        }
        // finite differences of a linear map leave ~1e-10 relative noise
        const double noise = 1e-6 * mu;
        bool small = true;
        for (double v : c.ladder) small = small && v <= noise;
        const Trend t = trend_of(c.ladder, mu);
        if (small || (t == Trend::decreasing && c.ladder.back() < 1e-2 * c.ladder.front())) {
            c.verdict = Verdict::pass;
        } else if (t == Trend::increasing || t == Trend::bounded) {
            c.verdict = Verdict::fail;
            set_witness(c, *arg.back(), c.ladder.back());
            c.detail = "derivative does not approach mu I";
        } else {
            c.verdict = Verdict::inconclusive;
            set_witness(c, *arg.back(), c.ladder.back());
        }
    }
    return rep;
}

// -------------------------------------------------------------------- solvers

namespace {

constexpr int kOrder = 5;

/// Quadrature points of the whole mesh with cached geometry.
struct QuadratureCache {
    const TaylorHoodSpace* space = nullptr;
    int nq = 0;
    std::vector<Point> x;
    std::vector<double> w;                     // weight times |det|
    std::vector<std::array<Point, 10>> grads;  // basis gradients
    std::vector<std::array<double, 4>> bary;

    explicit QuadratureCache(const TaylorHoodSpace& s) : space(&s) {
        const auto& rule = quadrature(kOrder);
        nq = static_cast<int>(rule.size());
        const auto& mesh = s.mesh();
        const int nt = static_cast<int>(mesh.num_tets());
        x.reserve(nt * nq);
        w.reserve(nt * nq);
        grads.reserve(nt * nq);
        for (int t = 0; t < nt; ++t) {
            const auto geo = element_geometry(mesh, t);
            for (int k = 0; k < nq; ++k) {
                const auto& l = rule.points[k];
                x.push_back(mesh.from_barycentric(t, l));
                w.push_back(rule.weights[k] * 6.0 * geo.volume);
                grads.push_back(p2_gradients(l, geo.grad_lambda));
            }
        }
    }

    [[nodiscard]] std::size_t size() const { return x.size(); }
    [[nodiscard]] int tet(std::size_t i) const { return static_cast<int>(i) / nq; }

    [[nodiscard]] Mat3 gradient(const Vector& u, std::size_t i) const {
        const auto& en = space->element_nodes(tet(i));
        Mat3 g = Mat3::Zero();
        for (int a = 0; a < 10; ++a) g += u.segment<3>(3 * en[a]) * grads[i][a].transpose();
        return g;
    }

    [[nodiscard]] std::vector<Mat3> strains(const Vector& u) const {
        std::vector<Mat3> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = symmetric_part(gradient(u, i));
        return out;
    }

    /// F_(a,c) = sum_i w_i T_i : grad(phi_a e_c)
    [[nodiscard]] Vector load(const std::vector<Mat3>& tensors) const {
        Vector out = Vector::Zero(space->velocity_dofs());
        for (std::size_t i = 0; i < size(); ++i) {
            const auto& en = space->element_nodes(tet(i));
            const Mat3 ti = tensors[i] * w[i];
            for (int a = 0; a < 10; ++a) out.segment<3>(3 * en[a]) += ti * grads[i][a];
        }
        return out;
    }
};

/// Everything fixed across nonlinear iterations on one space.
struct Workspace {
    SpacePtr space;
    NodePattern pattern;
    QuadratureCache quad;
    SparseMatrix b;
    SparseMatrix strain_gram;  // int eps:eps with eliminated boundary
    std::shared_ptr<const MultigridHierarchy> hierarchy;
    std::vector<Mat3> f_values;
    std::vector<double> power_coeff;
    Vector f_load;

    Workspace(const SpacePtr& s, const StressModel& model, const TensorFunction& f)
        : space(s), pattern(build_node_pattern(*s)), quad(*s) {
        b = assemble_divergence(*s, pattern);
        apply_divergence_bc(*s, b);
        strain_gram = operator_from([](std::size_t) { return 1.0; });
        f_values.resize(quad.size());
        power_coeff.resize(quad.size());
        for (std::size_t i = 0; i < quad.size(); ++i) {
            f_values[i] = f ? f(quad.x[i]) : Mat3::Zero();
            power_coeff[i] = model.power_coefficient(quad.x[i]);
        }
        f_load = quad.load(f_values);
        apply_rhs_bc(*s, f_load);
    }

    template <class Sym>
    SparseMatrix operator_from(Sym sym, const std::vector<double>* rank1 = nullptr, const std::vector<Mat3>* e = nullptr,
                               const std::vector<Point>* beta = nullptr) const {
        const int nq = quad.nq;
        SparseMatrix a = assemble_velocity_operator(
            *space, pattern,
            [&](int t, int k, const Barycentric&, const Point&, VelocityTerms& c) {
                const std::size_t i = static_cast<std::size_t>(t) * nq + k;
                c.sym = sym(i);
                if (rank1) {
                    c.rank1 = (*rank1)[i];
                    c.e = (*e)[i];
                }
                if (beta) {
                    c.convection = true;
                    c.beta = (*beta)[i];
                }
            },
            kOrder);
        apply_velocity_bc(*space, a);
        return a;
    }

    [[nodiscard]] double strain_norm(const Vector& d) const { return std::sqrt(std::max(d.dot(strain_gram * d), 0.0)); }

    [[nodiscard]] StokesSystem system(SparseMatrix a, const std::vector<double>& viscosity, bool symmetric) const {
        StokesSystem sys;
        sys.space = space;
        sys.mu = 1.0;
        sys.A = std::move(a);
        sys.B = b;
        sys.bc_applied = true;
        sys.symmetric = symmetric;
        sys.hierarchy = hierarchy;
        // lumped int psi / nu
        Vector schur = Vector::Zero(space->pressure_dofs());
        const auto& rule = quadrature(kOrder);
        const auto& mesh = space->mesh();
        for (std::size_t i = 0; i < quad.size(); ++i) {
            const auto& tv = mesh.tets()[quad.tet(i)];
            const auto& l = rule.points[i % quad.nq];
            for (int r = 0; r < 4; ++r) schur[tv[r]] += quad.w[i] * l[r] / viscosity[i];
        }
        sys.schur_diagonal = schur;
        sys.F = Vector::Zero(space->velocity_dofs());
        sys.G = Vector::Zero(space->pressure_dofs());
        return sys;
    }

    void ensure_hierarchy(const SolverOptions& opts) {
        const int n = space->velocity_dofs() + space->pressure_dofs();
        const bool iterative = opts.backend == SolverBackend::minres ||
                               (opts.backend == SolverBackend::automatic && n > opts.direct_max_dofs);
        if (iterative && !hierarchy) hierarchy = std::make_shared<const MultigridHierarchy>(build_hierarchy(space));
    }
};

double regularized_power(double s2, double q, double eps) {
    return q < 2.0 ? std::pow(s2 + eps * eps, 0.5 * (q - 2.0)) : (s2 == 0.0 ? (q == 2.0 ? 1.0 : 0.0) : std::pow(s2, 0.5 * (q - 2.0)));
}

std::vector<Mat3> stresses(const StressModel& model, const Workspace& ws, const std::vector<Mat3>& strain) {
    std::vector<Mat3> out(strain.size());
    if (model.is_power_law()) {
        const double q = model.power_index();
        for (std::size_t i = 0; i < strain.size(); ++i) {
            const double s2 = strain[i].squaredNorm();
            const double c = ws.power_coeff[i];
            out[i] = (model.mu + (c == 0.0 ? 0.0 : c * regularized_power(s2, q, stress_regularization))) * strain[i];
        }
    } else {
        for (std::size_t i = 0; i < strain.size(); ++i) out[i] = eval_stress(model, ws.quad.x[i], strain[i]);
    }
    return out;
}

double energy(const StressModel& model, const Workspace& ws, const Vector& u) {
    const auto strain = ws.quad.strains(u);
    const double q = model.power_index();
    double j = 0.0;
    for (std::size_t i = 0; i < strain.size(); ++i) {
        const double s2 = strain[i].squaredNorm();
        double dens = 0.5 * model.mu * s2;
        const double c = ws.power_coeff[i];
        if (c != 0.0) {
            dens += c / q *
                    (q < 2.0 ? std::pow(s2 + stress_regularization * stress_regularization, 0.5 * q) : std::pow(s2, 0.5 * q));
        }
        j += ws.quad.w[i] * dens;
    }
    return j - ws.f_load.dot(u);
}

Vector residual_vector(const StressModel& model, const Workspace& ws, const Vector& u, const Vector& p) {
    Vector r = ws.quad.load(stresses(model, ws, ws.quad.strains(u))) + ws.b.transpose() * p - ws.f_load;
    apply_rhs_bc(*ws.space, r);
    return r;
}

void finish(const StressModel& model, const Workspace& ws, NonlinearSolution& sol) {
    sol.trace.final_residual = residual_vector(model, ws, sol.velocity.coeffs, sol.pressure.coeffs).lpNorm<Eigen::Infinity>();
    sol.trace.divergence_residual = (ws.b * sol.velocity.coeffs).lpNorm<Eigen::Infinity>();
}

Vector zero_mean(const TaylorHoodSpace& space, Vector p) {
    const Vector m = pressure_mass_vector(space);
    p.array() -= p.dot(m) / m.sum();
    return p;
}

/// Frozen-viscosity operator nu_i = mu + c_i |eps|^(q-2).
std::vector<double> viscosities(const StressModel& model, const Workspace& ws, const std::vector<Mat3>& strain) {
    std::vector<double> nu(strain.size(), model.mu);
    if (!model.is_power_law()) return nu;
    const double q = model.power_index();
    for (std::size_t i = 0; i < strain.size(); ++i) {
        const double c = ws.power_coeff[i];
        if (c != 0.0) nu[i] += c * regularized_power(strain[i].squaredNorm(), q, stress_regularization);
    }
    return nu;
}

}  // namespace

Vector nonlinear_residual(const StressModel& model, const FEFunction& u, const FEFunction& p, const TensorFunction& f) {
    Workspace ws(u.space, model, f);
    return residual_vector(model, ws, u.coeffs, p.coeffs);
}

double smagorinski_energy(const StressModel& model, const FEFunction& v, const TensorFunction& f) {
    Workspace ws(v.space, model, f);
    return energy(model, ws, v.coeffs);
}

NonlinearSolution solve_bulicek(const SpacePtr& space, const StressModel& model, const TensorFunction& f,
                                const NonlinearOptions& opts) {
    if (!(opts.tol > 0.0)) throw InvalidArgument("solve_bulicek: tol must be positive");
    Workspace ws(space, model, f);
    ws.ensure_hierarchy(opts.linear);
    const std::vector<double> nu(ws.quad.size(), model.mu);
    StokesSystem sys = ws.system(ws.operator_from([&](std::size_t) { return model.mu; }), nu, true);
    SaddleSolver solver(sys, opts.linear);
    NonlinearSolution sol{FEFunction(space, FieldRole::velocity), FEFunction(space, FieldRole::pressure), {}};
    const Vector g = Vector::Zero(space->pressure_dofs());
    for (int k = 1; k <= opts.max_iter; ++k) {
        const auto strain = ws.quad.strains(sol.velocity.coeffs);
        const auto s = stresses(model, ws, strain);
        std::vector<Mat3> lag(strain.size());
        for (std::size_t i = 0; i < strain.size(); ++i) lag[i] = model.mu * strain[i] - s[i];
        Vector rhs = ws.f_load + ws.quad.load(lag);
        const auto step = solver.solve(rhs, g);
        const double inc = ws.strain_norm(step.velocity.coeffs - sol.velocity.coeffs);
        sol.velocity.coeffs = step.velocity.coeffs;
        sol.pressure.coeffs = step.pressure.coeffs;
        sol.trace.increments.push_back(inc);
        sol.trace.steps.emplace_back("picard");
        sol.trace.iterations = k;
        if (inc <= opts.tol || model.is_linear()) {
            sol.trace.converged = true;
            finish(model, ws, sol);
            sol.trace.residuals.push_back(sol.trace.final_residual);
            return sol;
        }
    }
    finish(model, ws, sol);
    throw NonlinearConvergenceError("solve_bulicek: no convergence in " + std::to_string(opts.max_iter) +
                                        " Picard steps (last increment " + std::to_string(sol.trace.increments.back()) + ")",
                                    sol.trace);
}

namespace {

/// Shared power-law iteration; `beta` freezes a convection field when given.
NonlinearSolution power_law_iteration(Workspace& ws, const StressModel& model, const NonlinearOptions& opts,
                                      const std::vector<Point>* beta, const Vector* start_u, const Vector* start_p) {
    const auto& space = ws.space;
    NonlinearSolution sol{FEFunction(space, FieldRole::velocity), FEFunction(space, FieldRole::pressure), {}};
    if (start_u) sol.velocity.coeffs = *start_u;
    if (start_p) sol.pressure.coeffs = *start_p;
    const bool with_energy = beta == nullptr;
    const Vector g = Vector::Zero(space->pressure_dofs());
    const double q = model.power_index();
    double j_cur = with_energy ? energy(model, ws, sol.velocity.coeffs) : 0.0;
    bool newton = false;
    for (int k = 1; k <= opts.max_iter; ++k) {
        const auto strain = ws.quad.strains(sol.velocity.coeffs);
        const auto nu = viscosities(model, ws, strain);
        Vector du;
        Vector p_new;
        if (newton && with_energy && q != 2.0) {
            std::vector<double> rank1(strain.size(), 0.0);
            for (std::size_t i = 0; i < strain.size(); ++i) {
                const double c = ws.power_coeff[i];
                if (c == 0.0) continue;
                const double s2 = strain[i].squaredNorm();
                const double e2 = q < 2.0 ? stress_regularization * stress_regularization : 0.0;
                if (s2 + e2 > 0.0) rank1[i] = c * (q - 2.0) * std::pow(s2 + e2, 0.5 * (q - 4.0));
            }
            StokesSystem sys = ws.system(ws.operator_from([&](std::size_t i) { return nu[i]; }, &rank1, &strain), nu, true);
            // A du + B^T p_new = F - N(u)
            sys.F = ws.f_load - ws.quad.load(stresses(model, ws, strain));
            apply_rhs_bc(*space, sys.F);
            sys.G = -(ws.b * sol.velocity.coeffs);
            const auto step = solve_saddle(sys, opts.linear);
            du = step.velocity.coeffs;
            p_new = step.pressure.coeffs;
        } else {
            StokesSystem sys = ws.system(ws.operator_from([&](std::size_t i) { return nu[i]; }, nullptr, nullptr, beta), nu,
                                         beta == nullptr);
            SaddleSolver solver(sys, opts.linear);
            const auto full = solver.solve(ws.f_load, g);
            du = full.velocity.coeffs - sol.velocity.coeffs;
            p_new = full.pressure.coeffs;
        }

        double tau = 1.0;
        if (with_energy && opts.line_search) {
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls, tau *= 0.5) {
                const double j_try = energy(model, ws, sol.velocity.coeffs + tau * du);
                if (j_try <= j_cur) {
                    j_cur = j_try;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                const double inc = ws.strain_norm(du);
                if (inc <= 10.0 * opts.tol) {  // stagnation at round-off level
                    sol.trace.converged = true;
                    sol.trace.iterations = k - 1;
                    return sol;
                }
                throw NonlinearConvergenceError("solve_smagorinski: energy increases along the step after backtracking", sol.trace);
            }
        }
        sol.velocity.coeffs += tau * du;
        sol.pressure.coeffs += tau * (p_new - sol.pressure.coeffs);
        const double inc = ws.strain_norm(tau * du);
        sol.trace.increments.push_back(inc);
        if (with_energy) sol.trace.energies.push_back(j_cur);
        sol.trace.steps.emplace_back(newton ? "newton" : "kacanov");
        sol.trace.iterations = k;
        if (inc <= opts.tol || model.is_linear()) {
            sol.trace.converged = true;
            return sol;
        }
        if (!newton && opts.newton_switch > 0.0 && tau == 1.0 &&
            inc <= opts.newton_switch * std::max(1.0, ws.strain_norm(sol.velocity.coeffs)))
            newton = true;
    }
    throw NonlinearConvergenceError("power-law iteration: no convergence in " + std::to_string(opts.max_iter) +
                                        " steps (last increment " + std::to_string(sol.trace.increments.back()) + ")",
                                    sol.trace);
}

}  // namespace

NonlinearSolution solve_smagorinski(const SpacePtr& space, const StressModel& model, const TensorFunction& f,
                                    const NonlinearOptions& opts) {
    if (!model.is_power_law() && model.kind != StressKind::linear)
        throw InvalidArgument("solve_smagorinski: needs a power-law or linear stress model, got " + model.describe());
    if (!(opts.tol > 0.0)) throw InvalidArgument("solve_smagorinski: tol must be positive");
    Workspace ws(space, model, f);
    ws.ensure_hierarchy(opts.linear);
    auto sol = power_law_iteration(ws, model, opts, nullptr, nullptr, nullptr);
    sol.pressure.coeffs = zero_mean(*space, sol.pressure.coeffs);
    finish(model, ws, sol);
    sol.trace.residuals.push_back(sol.trace.final_residual);
    return sol;
}

ConvectionResult solve_smagorinski_convection(const SpacePtr& space, const StressModel& model, const TensorFunction& f,
                                              const NonlinearOptions& opts) {
    if (!model.is_power_law() && model.kind != StressKind::linear)
        throw InvalidArgument("solve_smagorinski_convection: needs a power-law or linear stress model");
    Workspace ws(space, model, f);
    NonlinearOptions inner = opts;
    inner.linear.backend = SolverBackend::direct;
    ConvectionResult out;
    Vector u = Vector::Zero(space->velocity_dofs());
    Vector p = Vector::Zero(space->pressure_dofs());
    std::vector<Point> beta(ws.quad.size(), Point::Zero());
    NonlinearTrace trace;
    for (int k = 1; k <= opts.max_iter; ++k) {
        for (std::size_t i = 0; i < ws.quad.size(); ++i) {
            const auto& en = space->element_nodes(ws.quad.tet(i));
            const auto& rule = quadrature(kOrder);
            const auto phi = p2_values(rule.points[i % ws.quad.nq]);
            Point b = Point::Zero();
            for (int a = 0; a < 10; ++a) b += phi[a] * u.segment<3>(3 * en[a]);
            beta[i] = b;
        }
        NonlinearSolution step;
        try {
            step = power_law_iteration(ws, model, inner, &beta, &u, &p);
        } catch (const NonlinearConvergenceError& e) {
            throw NonlinearConvergenceError(std::string(e.what()) +
                                                "; the convection fixed point needs a larger mu or a smaller forcing",
                                            trace);
        }
        const double inc = ws.strain_norm(step.velocity.coeffs - u);
        u = step.velocity.coeffs;
        p = step.pressure.coeffs;
        trace.increments.push_back(inc);
        trace.steps.emplace_back("convection");
        trace.iterations = k;
        out.outer_iterations = k;
        if (inc <= opts.tol) {
            trace.converged = true;
            break;
        }
        if (!std::isfinite(inc) || (k > 3 && inc > 1e3 * trace.increments.front()))
            throw NonlinearConvergenceError("solve_smagorinski_convection: outer iteration diverges; increase mu or "
                                            "decrease the forcing",
                                            trace);
        if (k == opts.max_iter)
            throw NonlinearConvergenceError("solve_smagorinski_convection: no convergence in " +
                                                std::to_string(opts.max_iter) + " outer steps; increase mu or decrease "
                                                                                "the forcing",
                                            trace);
    }
    out.solution = NonlinearSolution{FEFunction(space, FieldRole::velocity, u),
                                     FEFunction(space, FieldRole::pressure, zero_mean(*space, p)), trace};
    out.solution.trace.divergence_residual = (ws.b * u).lpNorm<Eigen::Infinity>();

    const auto strain = ws.quad.strains(u);
    const double q = model.power_index();
    double l2 = 0.0, lq = 0.0;
    for (std::size_t i = 0; i < strain.size(); ++i) {
        const double s2 = strain[i].squaredNorm();
        l2 += ws.quad.w[i] * s2;
        lq += ws.quad.w[i] * ws.power_coeff[i] * std::pow(s2, 0.5 * q);
    }
    out.stability_lhs = model.mu * l2 + lq;
    for (std::size_t i = 0; i < ws.quad.size(); ++i) {
        const auto& en = space->element_nodes(ws.quad.tet(i));
        const auto phi = p2_values(quadrature(kOrder).points[i % ws.quad.nq]);
        Point b = Point::Zero();
        for (int a = 0; a < 10; ++a) b += phi[a] * u.segment<3>(3 * en[a]);
        beta[i] = b;
    }
    const SparseMatrix c = ws.operator_from([](std::size_t) { return 0.0; }, nullptr, nullptr, &beta);
    out.trilinear_self = u.dot(c * u);
    return out;
}

std::vector<ErrorStudyRow> smagorinski_error_study(const std::vector<SpacePtr>& spaces, const StressModel& model,
                                                   const VelocityField& u, const ScalarFunction& p,
                                                   const NonlinearOptions& opts) {
    if (!model.is_power_law()) throw InvalidArgument("smagorinski_error_study: needs a power-law stress model");
    const double q = model.power_index();
    const auto grad = u.gradient;
    TensorFunction f = [&model, grad, p](const Point& x) -> Mat3 {
        return eval_stress(model, x, grad(x)) - p(x) * Mat3::Identity();
    };
    const WeightField one = WeightField::constant(1.0);
    const WeightField w = model.kind == StressKind::smagorinski_distance
                              ? WeightField::power_boundary(model.alpha).scaled(std::max(model.mu_nl, 1e-300))
                              : model.weight;
    std::vector<ErrorStudyRow> rows;
    for (const auto& space : spaces) {
        ErrorStudyRow r;
        const auto& mesh = space->mesh();
        r.h = std::cbrt(6.0 * mesh.total_volume() / static_cast<double>(mesh.num_tets()));
        r.velocity_dofs = space->velocity_dofs();
        r.pressure_dofs = space->pressure_dofs();
        const auto sol = solve_smagorinski(space, model, f, opts);
        r.iterations = sol.trace.iterations;
        const auto ui = interpolate(space, u.value);
        r.strain_l2 = weighted_error(sol.velocity, u, one, 2.0, Derivative::symmetric_gradient);
        r.strain_lq = weighted_error(sol.velocity, u, w, q, Derivative::symmetric_gradient);
        r.interp_l2 = weighted_error(ui, u, one, 2.0, Derivative::symmetric_gradient);
        r.interp_lq = weighted_error(ui, u, w, q, Derivative::symmetric_gradient);
        if (q >= 2.0) {
            r.lhs = r.strain_l2 * r.strain_l2 + std::pow(r.strain_lq, q);
            r.rhs = r.interp_l2 * r.interp_l2 + std::pow(r.interp_lq, q / (q - 1.0));
        } else {
            r.lhs = r.strain_l2 * r.strain_l2;
            r.rhs = r.interp_l2 * r.interp_l2 + r.interp_lq;
        }
        r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace wstokes
