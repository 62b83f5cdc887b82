#pragma once

#include "wstokes/cases.hpp"
#include "wstokes/nonnewtonian.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wstokes {

using Json = nlohmann::ordered_json;

/// log2(e[i]/e[i+1]); nullopt where an error is zero or negative.
/// hs must halve exactly between entries.
std::vector<std::optional<double>> compute_eoc(const std::vector<double>& errors, const std::vector<double>& hs);

/// {"kind": "constant", "value": c}
/// {"kind": "power_point", "center": [x,y,z], "alpha": a, "epsilon": e, "scale": s}
/// {"kind": "power_boundary", "alpha": a, "epsilon": e, "scale": s}
/// {"kind": "product", "factors": [...], "scale": s}
WeightField parse_weight(const Json& j);
Json weight_to_json(const WeightField& w);

/// {"kind", "mu", "mu_nl", "q", "alpha", "weight"}; "chi_max" is accepted for mu_nl.
StressModel parse_stress_model(const Json& j);
Json stress_model_to_json(const StressModel& m);

struct NormSpec {
    std::string name;
    FieldRole field = FieldRole::velocity;
    WeightField weight = WeightField::constant(1.0);
    double q = 2.0;
    Derivative derivative = Derivative::none;
};

struct StudyConfig {
    std::string domain = "cube";  // or "mesh"
    int n0 = 4;                   // cube cells per axis on the coarsest level
    std::string mesh_file;
    std::string case_name = "smooth_curl";
    double amplitude = 1.0;
    /// Linear Stokes (2 mu eps:eps) when unset, otherwise a stress model.
    std::optional<StressModel> stress;
    double mu = 1.0;
    int levels = 3;
    std::vector<NormSpec> norms;
    /// Weighted stability ratio of the discrete pair, when set.
    std::optional<WeightField> stability_weight;
    /// Extra levels above the reported ones for cases without exact solution.
    int reference_levels = 1;
    NonlinearOptions solver;
};

StudyConfig parse_study_config(const Json& j);

struct StudyLevel {
    int index = 0;
    double h = 0.0;
    double h_max = 0.0;
    int velocity_dofs = 0;
    int pressure_dofs = 0;
    std::vector<double> errors;  // one per norm
    std::optional<double> stability_ratio;
    int iterations = 1;
    double seconds = 0.0;
    std::optional<NonlinearTrace> trace;
};

struct StudyReport {
    std::string case_name;
    std::string model;
    std::vector<std::string> norm_names;
    std::vector<StudyLevel> levels;
    std::vector<std::vector<std::optional<double>>> eoc;  // [norm][pair]
    bool reference_solution = false;
    double reference_h = 0.0;
    /// Errors of the reported levels against the finest reported level
    /// (levels below it only); [norm][level].
    std::vector<std::vector<double>> errors_vs_finest_reported;
    std::optional<bool> triangle_check;
    Json config;

    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] Json to_json() const;
};

/// Solver failure inside a study; carries the levels finished so far.
class StudyError : public SolverError {
public:
    StudyError(const std::string& what, StudyReport partial) : SolverError(what), partial_(std::move(partial)) {}
    [[nodiscard]] const StudyReport& partial() const { return partial_; }

private:
    StudyReport partial_;
};

StudyReport run_study(const StudyConfig& config);
StudyReport run_study(const Json& config);

/// Compiler and library stamp recorded in JSON reports.
Json environment_stamp();

}  // namespace wstokes
