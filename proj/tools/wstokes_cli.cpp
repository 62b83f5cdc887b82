#include "wstokes/harness.hpp"
#include "wstokes/mesh.hpp"
#include "wstokes/stokes.hpp"
#include "wstokes/weights.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace wstokes;

namespace {

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path);
    out << text;
}

void write_report(const StudyReport& rep, const std::string& csv, const std::string& json) {
    if (csv.empty())
        std::cout << rep.to_csv();
    else
        write_text(csv, rep.to_csv());
    if (!json.empty()) write_text(json, rep.to_json().dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted Stokes finite element studies"};
    app.require_subcommand(1);

    auto* study = app.add_subcommand("study", "Convergence studies");
    study->require_subcommand(1);
    std::string config_path, csv_path, json_path;
    auto* run = study->add_subcommand("run", "Run a study from a JSON config");
    run->add_option("config", config_path, "Study config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", csv_path, "CSV report path (stdout if omitted)");
    run->add_option("--json", json_path, "JSON report path");
    auto* list = study->add_subcommand("list-cases", "List built-in manufactured cases");

    auto* mesh = app.add_subcommand("mesh", "Mesh utilities");
    mesh->require_subcommand(1);
    int n = 4;
    std::string mesh_out;
    auto* cube = mesh->add_subcommand("make-cube", "Write a structured unit-cube mesh");
    cube->add_option("--n", n, "Cells per axis")->required()->check(CLI::PositiveNumber);
    cube->add_option("--out", mesh_out, "Output path")->required();

    auto* weights = app.add_subcommand("weights", "Weight utilities");
    weights->require_subcommand(1);
    std::string spec_path;
    double q = 2.0;
    int depth = 4;
    auto* aq = weights->add_subcommand("aq", "Estimate the A_q characteristic of a weight");
    aq->add_option("--spec", spec_path, "Weight spec (JSON)")->required()->check(CLI::ExistingFile);
    aq->add_option("--q", q, "Exponent q > 1")->required();
    aq->add_option("--depth", depth, "Dyadic depth")->required()->check(CLI::PositiveNumber);

    std::string mesh_in;
    auto* infsup = app.add_subcommand("infsup", "Discrete inf-sup constant on a mesh");
    infsup->add_option("--mesh", mesh_in, "Mesh file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            try {
                write_report(run_study(read_json_file(config_path)), csv_path, json_path);
            } catch (const StudyError& e) {
                std::cerr << "error: " << e.what() << "\n";
                if (!e.partial().levels.empty()) write_report(e.partial(), csv_path, json_path);
                return 3;
            }
        } else if (list->parsed()) {
            for (const auto& name : builtin_case_names()) {
                const auto c = builtin_case(name);
                std::cout << name << (c.has_exact_solution ? "" : "  (point force, reference solution)") << "\n";
            }
        } else if (cube->parsed()) {
            const auto m = build_cube_mesh(n);
            write_mesh_file(mesh_out, *m);
            std::cout << "wrote " << m->num_vertices() << " vertices, " << m->num_tets() << " tets to " << mesh_out << "\n";
        } else if (aq->parsed()) {
            const auto w = parse_weight(read_json_file(spec_path));
            const auto est = estimate_aq(w, q, depth);
            std::printf("weight %s\nq %.6g depth %d\nA_q estimate %.10g\nargmax cube center (%.6g, %.6g, %.6g) side %.6g\n",
                        w.describe().c_str(), est.q, est.depth, est.value, est.argmax_center[0], est.argmax_center[1],
                        est.argmax_center[2], est.argmax_side);
        } else if (infsup->parsed()) {
            const auto space = make_space(read_mesh_file(mesh_in));
            const auto r = discrete_infsup(space);
            std::printf("beta %.10g\nmethod %s\niterations %d\nconstant pressure quotient %.3e\n", r.beta, r.method.c_str(),
                        r.iterations, r.constant_quotient);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
