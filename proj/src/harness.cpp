#include "wstokes/harness.hpp"

#include "wstokes/assembly.hpp"
#include "wstokes/stokes.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace wstokes {

std::vector<std::optional<double>> compute_eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
    if (errors.size() != hs.size() || errors.size() < 2)
        throw InvalidArgument("compute_eoc: need equal-length lists with at least 2 entries");
    for (std::size_t i = 0; i + 1 < hs.size(); ++i)
        if (!(hs[i + 1] > 0.0) || std::abs(hs[i] / hs[i + 1] - 2.0) > 1e-9)
            throw InvalidArgument("compute_eoc: mesh sizes must halve exactly between levels");
    std::vector<std::optional<double>> out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (errors[i] > 0.0 && errors[i + 1] > 0.0)
            out.emplace_back(std::log2(errors[i] / errors[i + 1]));
        else
            out.emplace_back(std::nullopt);
    }
    return out;
}

// ------------------------------------------------------------------- parsing

namespace {

Point parse_point(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw InvalidArgument("expected a 3-vector, got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string normalized(std::string s) {
    for (auto& c : s)
        if (c == '-') c = '_';
    return s;
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const std::string& what) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* key : keys) ok = ok || k == key;
        if (!ok) throw InvalidArgument(what + ": unknown key '" + k + "'");
    }
}

}  // namespace

WeightField parse_weight(const Json& j) {
    if (!j.is_object()) throw InvalidArgument("weight: expected an object, got " + j.dump());
    const std::string kind = normalized(j.value("kind", std::string("constant")));
    const double scale = j.value("scale", 1.0);
    const double eps = j.value("epsilon", 0.0);
    WeightField w;
    if (kind == "constant") {
        reject_unknown(j, {"kind", "value", "scale"}, "weight");
        w = WeightField::constant(j.value("value", 1.0));
    } else if (kind == "power_point") {
        reject_unknown(j, {"kind", "center", "alpha", "epsilon", "scale"}, "weight");
        if (!j.contains("center") || !j.contains("alpha")) throw InvalidArgument("weight power_point: needs center and alpha");
        w = WeightField::power_point(parse_point(j["center"]), j["alpha"].get<double>(), eps);
    } else if (kind == "power_boundary") {
        reject_unknown(j, {"kind", "alpha", "epsilon", "scale"}, "weight");
        if (!j.contains("alpha")) throw InvalidArgument("weight power_boundary: needs alpha");
        w = WeightField::power_boundary(j["alpha"].get<double>(), eps);
    } else if (kind == "product") {
        reject_unknown(j, {"kind", "factors", "scale"}, "weight");
        std::vector<WeightField> factors;
        for (const auto& f : j.at("factors")) factors.push_back(parse_weight(f));
        w = WeightField::product(std::move(factors));
    } else {
        throw InvalidArgument("weight: unknown kind '" + kind + "' (constant | power_point | power_boundary | product)");
    }
    return scale == 1.0 ? w : w.scaled(scale);
}

Json weight_to_json(const WeightField& w) {
    Json j;
    switch (w.kind()) {
        case WeightKind::constant:
            j["kind"] = "constant";
            j["value"] = w.scale();
            return j;
        case WeightKind::power_point:
            j["kind"] = "power_point";
            j["center"] = {w.center()[0], w.center()[1], w.center()[2]};
            j["alpha"] = w.alpha();
            break;
        case WeightKind::power_boundary:
            j["kind"] = "power_boundary";
            j["alpha"] = w.alpha();
            break;
        case WeightKind::product: {
            j["kind"] = "product";
            Json f = Json::array();
            for (const auto& x : w.factors()) f.push_back(weight_to_json(x));
            j["factors"] = f;
            break;
        }
        case WeightKind::custom:
            j["kind"] = "custom";
            j["description"] = w.describe();
            return j;
    }
    if (w.kind() != WeightKind::product && w.epsilon() != 0.0) j["epsilon"] = w.epsilon();
    if (w.scale() != 1.0) j["scale"] = w.scale();
    return j;
}

StressModel parse_stress_model(const Json& j) {
    if (!j.is_object()) throw InvalidArgument("model: expected an object");
    reject_unknown(j, {"kind", "mu", "mu_nl", "chi_max", "q", "alpha", "weight"}, "model");
    const auto kind = stress_kind_from_string(normalized(j.at("kind").get<std::string>()));
    const double mu = j.value("mu", 1.0);
    const WeightField w = j.contains("weight") ? parse_weight(j["weight"]) : WeightField::constant(1.0);
    switch (kind) {
        case StressKind::linear: return StressModel::linear(mu);
        case StressKind::bounded_perturbation:
            return StressModel::bounded_perturbation(mu, j.value("mu_nl", j.value("chi_max", 0.0)), w);
        case StressKind::smagorinski_generalized: return StressModel::smagorinski_generalized(mu, j.value("q", 2.0), w);
        case StressKind::smagorinski_distance:
            return StressModel::smagorinski_distance(mu, j.value("mu_nl", 0.0), j.value("alpha", 0.0));
    }
    return StressModel::linear(mu);
}

Json stress_model_to_json(const StressModel& m) {
    Json j;
    j["kind"] = to_string(m.kind);
    j["mu"] = m.mu;
    switch (m.kind) {
        case StressKind::linear: break;
        case StressKind::bounded_perturbation:
            j["mu_nl"] = m.mu_nl;
            j["weight"] = weight_to_json(m.weight);
            break;
        case StressKind::smagorinski_generalized:
            j["q"] = m.q;
            j["weight"] = weight_to_json(m.weight);
            break;
        case StressKind::smagorinski_distance:
            j["mu_nl"] = m.mu_nl;
            j["alpha"] = m.alpha;
            break;
    }
    return j;
}

StudyConfig parse_study_config(const Json& j) {
    if (!j.is_object()) throw InvalidArgument("study config: expected an object");
    reject_unknown(j, {"domain", "case", "amplitude", "model", "levels", "norms", "stability", "reference_levels", "solver"},
                   "study config");
    StudyConfig c;
    if (j.contains("domain")) {
        const auto& d = j["domain"];
        if (d.is_string()) {
            c.domain = d.get<std::string>();
        } else {
            reject_unknown(d, {"type", "n0", "file"}, "domain");
            c.domain = d.value("type", std::string("cube"));
            c.n0 = d.value("n0", 4);
            c.mesh_file = d.value("file", std::string());
        }
    }
    if (c.domain != "cube" && c.domain != "mesh") throw InvalidArgument("domain: type must be cube or mesh");
    if (c.domain == "mesh" && c.mesh_file.empty()) throw InvalidArgument("domain: mesh type needs a file");
    if (c.n0 < 1) throw InvalidArgument("domain: n0 must be positive");
    c.case_name = j.value("case", c.case_name);
    (void)builtin_case(c.case_name);
    c.amplitude = j.value("amplitude", 1.0);
    if (j.contains("model")) {
        const auto& m = j["model"];
        const std::string kind = normalized(m.value("kind", std::string("stokes")));
        if (kind == "stokes") {
            reject_unknown(m, {"kind", "mu"}, "model");
            c.mu = m.value("mu", 1.0);
            if (!(c.mu > 0.0)) throw InvalidArgument("model: mu must be positive");
        } else {
            c.stress = parse_stress_model(m);
        }
    }
    c.levels = j.value("levels", 3);
    if (c.levels < 3) throw InvalidArgument("study config: at least 3 levels are required");
    if (j.contains("norms")) {
        int k = 0;
        for (const auto& n : j["norms"]) {
            reject_unknown(n, {"name", "field", "weight", "q", "derivative"}, "norm");
            NormSpec s;
            const std::string field = n.value("field", std::string("velocity"));
            if (field == "velocity") {
                s.field = FieldRole::velocity;
            } else if (field == "pressure") {
                s.field = FieldRole::pressure;
            } else {
                throw InvalidArgument("norm: field must be velocity or pressure");
            }
            if (n.contains("weight")) s.weight = parse_weight(n["weight"]);
            s.q = n.value("q", 2.0);
            if (!(s.q >= 1.0)) throw InvalidArgument("norm: q must be at least 1");
            s.derivative = derivative_from_string(n.value("derivative", std::string("none")));
            if (s.field == FieldRole::pressure && s.derivative != Derivative::none)
                throw InvalidArgument("norm: pressure norms take no derivative");
            s.name = n.value("name", field + "_" + to_string(s.derivative) + "_" + std::to_string(k));
            c.norms.push_back(s);
            ++k;
        }
    }
    if (c.norms.empty()) {
        c.norms.push_back({"u_grad_l2", FieldRole::velocity, WeightField::constant(1.0), 2.0, Derivative::gradient});
        c.norms.push_back({"u_l2", FieldRole::velocity, WeightField::constant(1.0), 2.0, Derivative::none});
        c.norms.push_back({"p_l2", FieldRole::pressure, WeightField::constant(1.0), 2.0, Derivative::none});
    }
    if (j.contains("stability")) c.stability_weight = parse_weight(j["stability"].at("weight"));
    c.reference_levels = j.value("reference_levels", 1);
    if (c.reference_levels < 1) throw InvalidArgument("study config: reference_levels must be at least 1");
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        reject_unknown(s, {"backend", "tol", "max_iter", "line_search", "rel_tol", "newton_switch", "linear_max_iter"},
                       "solver");
        c.solver.tol = s.value("tol", c.solver.tol);
        c.solver.max_iter = s.value("max_iter", c.solver.max_iter);
        c.solver.line_search = s.value("line_search", c.solver.line_search);
        c.solver.newton_switch = s.value("newton_switch", c.solver.newton_switch);
        c.solver.linear.backend = backend_from_string(s.value("backend", std::string("auto")));
        c.solver.linear.rel_tol = s.value("rel_tol", c.solver.linear.rel_tol);
        c.solver.linear.max_iter = s.value("linear_max_iter", c.solver.linear.max_iter);
    }
    return c;
}

// --------------------------------------------------------------------- study

namespace {

struct LevelSolution {
    FEFunction u, p;
    int iterations = 1;
    std::optional<NonlinearTrace> trace;
};

/// Meshes coarsest first; the finest carries the whole lineage.
std::vector<MeshPtr> build_meshes(const StudyConfig& c, int count) {
    MeshPtr finest;
    if (c.domain == "cube") {
        finest = build_cube_hierarchy(c.n0, count - 1);
    } else {
        finest = read_mesh_file(c.mesh_file);
        for (int i = 1; i < count; ++i) finest = refine_uniform(finest);
    }
    std::vector<MeshPtr> out;
    for (MeshPtr m = finest; m && static_cast<int>(out.size()) < count; m = m->coarse()) out.push_back(m);
    std::reverse(out.begin(), out.end());
    return out;
}

LevelSolution solve_level(const StudyConfig& c, const ManufacturedCase& mc, const SpacePtr& space) {
    LevelSolution s;
    if (!mc.has_exact_solution) {
        if (c.stress) throw InvalidArgument("study: point forcing is only supported for the linear Stokes model");
        auto sys = assemble_stokes(space, c.mu);
        sys.F = assemble_rhs_measure(*space, mc.dirac_point, mc.dirac_amplitude * c.amplitude);
        const auto sol = solve_saddle(sys, c.solver.linear);
        s.u = sol.velocity;
        s.p = sol.pressure;
        return s;
    }
    const auto u = mc.velocity();
    const auto p = mc.pressure();
    if (!c.stress) {
        const auto sol = stokes_projection(space, u, p, c.mu, c.solver.linear);
        s.u = sol.velocity;
        s.p = sol.pressure;
        return s;
    }
    const StressModel model = *c.stress;
    const auto grad = u.gradient;
    TensorFunction f = [model, grad, p](const Point& x) -> Mat3 {
        return eval_stress(model, x, grad(x)) - p(x) * Mat3::Identity();
    };
    const auto sol = model.is_power_law() ? solve_smagorinski(space, model, f, c.solver)
                                          : solve_bulicek(space, model, f, c.solver);
    s.u = sol.velocity;
    s.p = sol.pressure;
    s.iterations = sol.trace.iterations;
    s.trace = sol.trace;
    return s;
}

/// Tet of `coarse_level` containing fine tet t, following parent links.
int ancestor(const TetMesh& fine, int t, int generations) {
    const TetMesh* m = &fine;
    for (int g = 0; g < generations; ++g) {
        t = m->parent()[t];
        m = m->coarse().get();
    }
    return t;
}

/// || coarse - fine || measured with the fine mesh quadrature.
double nested_difference(const FEFunction& coarse, const FEFunction& fine, const NormSpec& n) {
    const TetMesh& fm = fine.space->mesh();
    const TetMesh& cm = coarse.space->mesh();
    const int gens = fm.level() - cm.level();
    return weighted_lq(fm, n.weight, n.q, 5, [&](int t, const Barycentric& l, const Point& x) {
        const int a = ancestor(fm, t, gens);
        const auto lc = cm.barycentric(a, x);
        if (n.field == FieldRole::pressure) return std::abs(fine.pressure(t, l) - coarse.pressure(a, lc));
        switch (n.derivative) {
            case Derivative::none: return (fine.velocity(t, l) - coarse.velocity(a, lc)).norm();
            case Derivative::gradient: return (fine.velocity_gradient(t, l) - coarse.velocity_gradient(a, lc)).norm();
            case Derivative::symmetric_gradient:
                return symmetric_part(fine.velocity_gradient(t, l) - coarse.velocity_gradient(a, lc)).norm();
        }
        return 0.0;
    });
}

double exact_error(const LevelSolution& s, const ManufacturedCase& mc, const NormSpec& n) {
    if (n.field == FieldRole::pressure) return weighted_error(s.p, mc.pressure(), n.weight, n.q);
    return weighted_error(s.u, mc.velocity(), n.weight, n.q, n.derivative);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

Json trace_json(const NonlinearTrace& t) {
    Json j;
    j["converged"] = t.converged;
    j["iterations"] = t.iterations;
    j["increments"] = t.increments;
    j["energies"] = t.energies;
    j["residuals"] = t.residuals;
    j["steps"] = t.steps;
    j["final_residual"] = t.final_residual;
    j["divergence_residual"] = t.divergence_residual;
    return j;
}

Json config_json(const StudyConfig& c) {
    Json j;
    j["domain"] = c.domain == "cube" ? Json{{"type", "cube"}, {"n0", c.n0}} : Json{{"type", "mesh"}, {"file", c.mesh_file}};
    j["case"] = c.case_name;
    j["amplitude"] = c.amplitude;
    j["model"] = c.stress ? stress_model_to_json(*c.stress) : Json{{"kind", "stokes"}, {"mu", c.mu}};
    j["levels"] = c.levels;
    Json norms = Json::array();
    for (const auto& n : c.norms)
        norms.push_back({{"name", n.name},
                         {"field", to_string(n.field)},
                         {"weight", weight_to_json(n.weight)},
                         {"q", n.q},
                         {"derivative", to_string(n.derivative)}});
    j["norms"] = norms;
    if (c.stability_weight) j["stability"] = {{"weight", weight_to_json(*c.stability_weight)}};
    j["reference_levels"] = c.reference_levels;
    j["solver"] = {{"backend", to_string(c.solver.linear.backend)},
                   {"tol", c.solver.tol},
                   {"max_iter", c.solver.max_iter},
                   {"line_search", c.solver.line_search},
                   {"rel_tol", c.solver.linear.rel_tol}};
    return j;
}

}  // namespace

StudyReport run_study(const StudyConfig& c) {
    if (c.levels < 3) throw InvalidArgument("run_study: at least 3 levels are required");
    const ManufacturedCase mc = builtin_case(c.case_name).scaled(c.amplitude);
    StudyReport rep;
    rep.case_name = c.case_name;
    rep.model = c.stress ? c.stress->describe() : "stokes(mu=" + fmt(c.mu) + ")";
    for (const auto& n : c.norms) rep.norm_names.push_back(n.name);
    rep.config = config_json(c);
    rep.reference_solution = !mc.has_exact_solution;

    const int extra = rep.reference_solution ? c.reference_levels : 0;
    const auto meshes = build_meshes(c, c.levels + extra);
    std::vector<LevelSolution> sols;
    for (std::size_t l = 0; l < meshes.size(); ++l) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto space = make_space(meshes[l]);
        try {
            sols.push_back(solve_level(c, mc, space));
        } catch (const SolverError& e) {
            throw StudyError("run_study: level " + std::to_string(l) + ": " + e.what(), rep);
        }
        if (static_cast<int>(l) >= c.levels) break;
        StudyLevel row;
        row.index = static_cast<int>(l);
        row.h_max = meshes[l]->h_max();
        row.h = c.domain == "cube" ? 1.0 / (c.n0 * std::pow(2.0, static_cast<double>(l))) : row.h_max;
        row.velocity_dofs = space->velocity_dofs();
        row.pressure_dofs = space->pressure_dofs();
        row.iterations = sols.back().iterations;
        row.trace = sols.back().trace;
        if (c.stability_weight) {
            const auto& w = *c.stability_weight;
            const auto& s = sols.back();
            const double num = weighted_norm(s.u, w, 2.0, Derivative::symmetric_gradient) + weighted_norm(s.p, w, 2.0, Derivative::none);
            const double den = weighted_norm(*meshes[l], mc.velocity(), w, 2.0, Derivative::symmetric_gradient) +
                               weighted_norm(*meshes[l], mc.pressure(), w, 2.0);
            row.stability_ratio = num / den;
        }
        if (mc.has_exact_solution)
            for (const auto& n : c.norms) row.errors.push_back(exact_error(sols.back(), mc, n));
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.levels.push_back(row);
    }
    if (rep.reference_solution) {
        const auto& ref = sols.back();
        rep.reference_h = c.domain == "cube" ? 1.0 / (c.n0 * std::pow(2.0, c.levels + extra - 1.0)) : meshes.back()->h_max();
        for (int l = 0; l < c.levels; ++l)
            for (const auto& n : c.norms) {
                const bool pr = n.field == FieldRole::pressure;
                rep.levels[l].errors.push_back(nested_difference(pr ? sols[l].p : sols[l].u, pr ? ref.p : ref.u, n));
            }
        // the finest reported level as a cruder reference
        bool ok = true;
        const auto& mid = sols[c.levels - 1];
        rep.errors_vs_finest_reported.assign(c.norms.size(), {});
        for (std::size_t k = 0; k < c.norms.size(); ++k) {
            const auto& n = c.norms[k];
            for (int l = 0; l + 1 < c.levels; ++l) {
                const double e = nested_difference(n.field == FieldRole::pressure ? sols[l].p : sols[l].u,
                                                   n.field == FieldRole::pressure ? mid.p : mid.u, n);
                rep.errors_vs_finest_reported[k].push_back(e);
                ok = ok && e <= rep.levels[l].errors[k];
            }
        }
        rep.triangle_check = ok;
    }
    std::vector<double> hs;
    for (const auto& r : rep.levels) hs.push_back(r.h);
    for (std::size_t k = 0; k < c.norms.size(); ++k) {
        std::vector<double> e;
        for (const auto& r : rep.levels) e.push_back(r.errors[k]);
        rep.eoc.push_back(compute_eoc(e, hs));
    }
    return rep;
}

StudyReport run_study(const Json& config) { return run_study(parse_study_config(config)); }

std::string StudyReport::to_csv() const {
    std::ostringstream os;
    os << "level,h,velocity_dofs,pressure_dofs";
    for (const auto& n : norm_names) os << "," << n;
    for (const auto& n : norm_names) os << ",eoc_" << n;
    const bool stab = !levels.empty() && levels.front().stability_ratio.has_value();
    if (stab) os << ",stability_ratio";
    os << ",iterations\n";
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const auto& r = levels[l];
        os << r.index << "," << fmt(r.h) << "," << r.velocity_dofs << "," << r.pressure_dofs;
        for (double e : r.errors) os << "," << fmt(e);
        for (const auto& col : eoc) {
            os << ",";
            if (l == 0) continue;
            const auto& v = col[l - 1];
            os << (v ? fmt(*v) : std::string("undefined"));
        }
        if (stab) os << "," << fmt(*r.stability_ratio);
        os << "," << r.iterations << "\n";
    }
    return os.str();
}

Json StudyReport::to_json() const {
    Json j;
    j["case"] = case_name;
    j["model"] = model;
    j["config"] = config;
    j["norms"] = norm_names;
    Json rows = Json::array();
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const auto& r = levels[l];
        Json row;
        row["level"] = r.index;
        row["h"] = r.h;
        row["h_max"] = r.h_max;
        row["velocity_dofs"] = r.velocity_dofs;
        row["pressure_dofs"] = r.pressure_dofs;
        Json err, rates;
        for (std::size_t k = 0; k < norm_names.size(); ++k) {
            err[norm_names[k]] = r.errors[k];
            if (l > 0) rates[norm_names[k]] = eoc[k][l - 1] ? Json(*eoc[k][l - 1]) : Json("undefined");
        }
        row["errors"] = err;
        if (l > 0) row["eoc"] = rates;
        if (r.stability_ratio) row["stability_ratio"] = *r.stability_ratio;
        row["iterations"] = r.iterations;
        row["seconds"] = r.seconds;
        if (r.trace) row["trace"] = trace_json(*r.trace);
        rows.push_back(row);
    }
    j["levels"] = rows;
    if (reference_solution) {
        j["reference"] = {{"h", reference_h}, {"triangle_check", triangle_check.value_or(false)}};
        Json coarse;
        for (std::size_t k = 0; k < norm_names.size(); ++k) coarse[norm_names[k]] = errors_vs_finest_reported[k];
        j["reference"]["errors_vs_finest_reported"] = coarse;
    }
    j["environment"] = environment_stamp();
    return j;
}

Json environment_stamp() {
    Json j;
#if defined(__VERSION__)
    j["compiler"] = __VERSION__;
#endif
    j["cxx_standard"] = static_cast<long>(__cplusplus);
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
#ifdef NDEBUG
    j["build"] = "release";
#else
    j["build"] = "debug";
#endif
    return j;
}

}  // namespace wstokes
