#include "wstokes/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wstokes;

TEST(Eoc, Examples) {
    auto e = compute_eoc({4.0, 1.0}, {0.5, 0.25});
    ASSERT_EQ(e.size(), 1u);
    EXPECT_DOUBLE_EQ(*e[0], 2.0);
    e = compute_eoc({1.0, 1.0}, {0.5, 0.25});
    EXPECT_DOUBLE_EQ(*e[0], 0.0);
    e = compute_eoc({0.9, 0.32, 0.11}, {0.25, 0.125, 0.0625});
    EXPECT_NEAR(*e[0], std::log2(0.9 / 0.32), 1e-15);
    EXPECT_NEAR(*e[0], 1.49, 5e-3);
    EXPECT_NEAR(*e[1], 1.54, 5e-3);
}

TEST(Eoc, UndefinedAndInvalid) {
    const auto e = compute_eoc({1.0, 0.0, 0.5}, {1.0, 0.5, 0.25});
    EXPECT_FALSE(e[0].has_value());
    EXPECT_FALSE(e[1].has_value());
    EXPECT_FALSE(compute_eoc({-1.0, 1.0}, {1.0, 0.5})[0].has_value());
    EXPECT_THROW(compute_eoc({1.0}, {1.0}), InvalidArgument);
    EXPECT_THROW(compute_eoc({1.0, 2.0}, {1.0}), InvalidArgument);
    EXPECT_THROW(compute_eoc({1.0, 2.0}, {1.0, 0.4}), InvalidArgument);
}

TEST(ConfigParsing, WeightsRoundTrip) {
    const Json specs[] = {
        Json::parse(R"({"kind": "constant", "value": 2.5})"),
        Json::parse(R"({"kind": "power_point", "center": [0.3, 0.3, 0.3], "alpha": -1, "epsilon": 0.01})"),
        Json::parse(R"({"kind": "power-boundary", "alpha": 0.25, "scale": 1e-2})"),
        Json::parse(R"({"kind": "product", "factors": [{"kind": "power_boundary", "alpha": 1},
                        {"kind": "power_point", "center": [0.5, 0.5, 0.5], "alpha": 2}]})"),
    };
    const Point x(0.2, 0.45, 0.7);
    for (const auto& j : specs) {
        const auto w = parse_weight(j);
        const auto back = parse_weight(weight_to_json(w));
        EXPECT_DOUBLE_EQ(w(x), back(x)) << j.dump();
    }
    EXPECT_NEAR(parse_weight(specs[2])(x), 1e-2 * std::pow(0.2, 0.25), 1e-15);
    EXPECT_THROW(parse_weight(Json::parse(R"({"kind": "gaussian"})")), InvalidArgument);
    EXPECT_THROW(parse_weight(Json::parse(R"({"kind": "power_point", "alpha": 1})")), InvalidArgument);
    EXPECT_THROW(parse_weight(Json::parse(R"({"kind": "constant", "valu": 1})")), InvalidArgument);
}

TEST(ConfigParsing, StressModels) {
    const auto m = parse_stress_model(Json::parse(
        R"({"kind": "smagorinski-generalized", "mu": 2, "q": 3, "weight": {"kind": "power_boundary", "alpha": 0.25}})"));
    EXPECT_EQ(m.kind, StressKind::smagorinski_generalized);
    EXPECT_EQ(m.q, 3.0);
    EXPECT_EQ(m.mu, 2.0);
    const auto d = parse_stress_model(Json::parse(R"({"kind": "smagorinski_distance", "mu_nl": 0.5, "alpha": 1})"));
    EXPECT_EQ(d.mu_nl, 0.5);
    const auto again = parse_stress_model(stress_model_to_json(d));
    EXPECT_EQ(again.describe(), d.describe());
    EXPECT_THROW(parse_stress_model(Json::parse(R"({"kind": "bingham"})")), InvalidArgument);
}

TEST(ConfigParsing, StudyConfig) {
    const auto c = parse_study_config(Json::parse(R"({
        "domain": {"type": "cube", "n0": 2}, "case": "polynomial_bubble", "levels": 3,
        "norms": [{"name": "e", "weight": {"kind": "constant"}, "q": 2, "derivative": "gradient"},
                  {"field": "pressure"}],
        "solver": {"backend": "direct", "tol": 1e-9}})"));
    EXPECT_EQ(c.n0, 2);
    EXPECT_EQ(c.norms.size(), 2u);
    EXPECT_EQ(c.norms[0].derivative, Derivative::gradient);
    EXPECT_EQ(c.norms[1].field, FieldRole::pressure);
    EXPECT_EQ(c.solver.linear.backend, SolverBackend::direct);
    EXPECT_FALSE(c.stress.has_value());
    EXPECT_THROW(parse_study_config(Json::parse(R"({"levels": 2})")), InvalidArgument);
    EXPECT_THROW(parse_study_config(Json::parse(R"({"case": "vortex"})")), InvalidArgument);
    EXPECT_THROW(parse_study_config(Json::parse(R"({"norms": [{"field": "pressure", "derivative": "gradient"}]})")),
                 InvalidArgument);
    EXPECT_THROW(parse_study_config(Json::parse(R"({"domains": "cube"})")), InvalidArgument);
}

TEST(Study, SmoothCaseIsDeterministic) {
    const Json cfg = Json::parse(R"({"domain": {"type": "cube", "n0": 1}, "case": "polynomial_bubble", "levels": 3,
        "stability": {"weight": {"kind": "power_point", "center": [0.3, 0.3, 0.3], "alpha": 1}}})");
    const auto a = run_study(cfg);
    const auto b = run_study(cfg);
    EXPECT_EQ(a.to_csv(), b.to_csv());
    ASSERT_EQ(a.levels.size(), 3u);
    for (std::size_t l = 0; l < 3; ++l) {
        const auto& r = a.levels[l];
        const int n = 1 << l;
        const int v = (n + 1) * (n + 1) * (n + 1);
        // vertices plus edges of the 6-tet Kuhn cube mesh
        const int e = 3 * n * (n + 1) * (n + 1) + 3 * n * n * (n + 1) + n * n * n;
        EXPECT_EQ(r.pressure_dofs, v);
        EXPECT_EQ(r.velocity_dofs, 3 * (v + e));
        EXPECT_DOUBLE_EQ(r.h, 1.0 / n);
        ASSERT_TRUE(r.stability_ratio.has_value());
        EXPECT_GT(*r.stability_ratio, 0.0);
    }
    for (std::size_t k = 0; k < a.eoc.size(); ++k)
        for (std::size_t i = 0; i < a.eoc[k].size(); ++i)
            EXPECT_DOUBLE_EQ(*a.eoc[k][i], std::log2(a.levels[i].errors[k] / a.levels[i + 1].errors[k]));
    const std::string csv = a.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "level,h,velocity_dofs,pressure_dofs,u_grad_l2,u_l2,p_l2,eoc_u_grad_l2,eoc_u_l2,eoc_p_l2,"
              "stability_ratio,iterations");
    const Json j = a.to_json();
    EXPECT_EQ(j["levels"].size(), 3u);
    EXPECT_TRUE(j.contains("environment"));
}

TEST(Study, PointForceUsesReference) {
    const Json cfg = Json::parse(R"({"domain": {"type": "cube", "n0": 1}, "case": "dirac_point", "levels": 3,
        "norms": [{"name": "u_l2"}]})");
    const auto r = run_study(cfg);
    EXPECT_TRUE(r.reference_solution);
    EXPECT_DOUBLE_EQ(r.reference_h, 0.125);
    ASSERT_TRUE(r.triangle_check.has_value());
    for (const auto& l : r.levels) EXPECT_GT(l.errors[0], 0.0);
    EXPECT_EQ(r.errors_vs_finest_reported[0].size(), 2u);
}

TEST(Study, NonlinearModelRecordsTrace) {
    const Json cfg = Json::parse(R"({"domain": {"type": "cube", "n0": 1}, "case": "polynomial_bubble", "levels": 3,
        "amplitude": 100,
        "model": {"kind": "smagorinski_generalized", "q": 3, "weight": {"kind": "power_boundary", "alpha": 0.25}},
        "norms": [{"name": "eps", "derivative": "symmetric_gradient"}]})");
    const auto r = run_study(cfg);
    for (const auto& l : r.levels) {
        ASSERT_TRUE(l.trace.has_value());
        EXPECT_TRUE(l.trace->converged);
    }
    EXPECT_TRUE(r.to_json()["levels"][0].contains("trace"));
}
