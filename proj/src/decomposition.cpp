#include "wstokes/decomposition.hpp"

#include "wstokes/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace wstokes {

bool Cube::contains(const Point& x) const {
    return ((x - center).cwiseAbs().array() <= 0.5 * side).all();
}

bool Cube::contains_open(const Point& x) const {
    return ((x - center).cwiseAbs().array() < 0.5 * side).all();
}

namespace {

double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

struct AxisRule {
    std::vector<double> x, w;
};

AxisRule axis_rule(std::vector<double> bp, int gauss_points, int subdivisions) {
    bp.push_back(0.0);
    bp.push_back(1.0);
    for (double& b : bp) b = std::clamp(b, 0.0, 1.0);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    const auto g = gauss_legendre(gauss_points);
    AxisRule r;
    for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
        const double len = (bp[s + 1] - bp[s]) / subdivisions;
        for (int m = 0; m < subdivisions; ++m) {
            const double a = bp[s] + m * len;
            for (int k = 0; k < gauss_points; ++k) {
                r.x.push_back(a + g.nodes[k] * len);
                r.w.push_back(g.weights[k] * len);
            }
        }
    }
    return r;
}

using TensorRule = std::array<AxisRule, 3>;

template <class F>
void for_points(const TensorRule& r, F&& f) {
    for (std::size_t k = 0; k < r[2].x.size(); ++k)
        for (std::size_t j = 0; j < r[1].x.size(); ++j)
            for (std::size_t i = 0; i < r[0].x.size(); ++i)
                f(Point(r[0].x[i], r[1].x[j], r[2].x[k]), r[0].w[i] * r[1].w[j] * r[2].w[k]);
}

}  // namespace

double cutoff(const Cube& q, const Point& x) {
    const double a = 0.5 * q.side;
    double phi = 1.0;
    for (int k = 0; k < 3; ++k) {
        const double d = std::abs(x[k] - q.center[k]);
        phi *= 1.0 - smoothstep5((d - a) / (0.5 * a));
    }
    return phi;
}

double integrate_unit_cube(const ScalarField& f, const std::vector<double>& breakpoints, int gauss_points,
                           int subdivisions) {
    const auto a = axis_rule(breakpoints, gauss_points, subdivisions);
    const TensorRule r{a, a, a};
    double s = 0.0;
    for_points(r, [&](const Point& x, double w) { s += w * f(x); });
    return s;
}

Decomposition decompose_zero_mean(const ScalarField& g, const Cube& q, const WeightField& w, double exponent,
                                  int gauss_points, int subdivisions) {
    if (!(q.side > 0.0)) throw InvalidArgument("decompose_zero_mean: cube side must be positive");
    if (!(exponent >= 1.0)) throw InvalidArgument("decompose_zero_mean: exponent must be >= 1");
    const Cube d = q.dilated(1.5);
    for (int k = 0; k < 3; ++k)
        if (d.center[k] - 0.5 * d.side < 0.0 || d.center[k] + 0.5 * d.side > 1.0)
            throw InvalidArgument("decompose_zero_mean: (3/2)Q is not contained in the unit cube");

    TensorRule rule;
    for (int k = 0; k < 3; ++k) {
        std::vector<double> bp;
        for (const Cube* c : {&q, &d}) {
            bp.push_back(c->center[k] - 0.5 * c->side);
            bp.push_back(c->center[k] + 0.5 * c->side);
        }
        rule[k] = axis_rule(bp, gauss_points, subdivisions);
    }

    double mean = 0.0, l1 = 0.0, phig = 0.0, area = 0.0;
    for_points(rule, [&](const Point& x, double wt) {
        const double v = g(x);
        mean += wt * v;
        l1 += wt * std::abs(v);
        if (d.contains_open(x)) {
            phig += wt * cutoff(q, x) * v;
            if (!q.contains(x)) area += wt;
        }
    });
    if (std::abs(mean) > 1e-10 * std::max(l1, 1e-300))
        throw InvalidArgument("decompose_zero_mean: input does not have zero mean");

    Decomposition out;
    out.q_cube = q;
    out.d_cube = d;
    const double c = phig / area;
    out.g1 = [g, q, d, c](const Point& x) {
        if (!d.contains_open(x)) return 0.0;
        const double v = cutoff(q, x) * g(x);
        return q.contains(x) ? v : v - c;
    };
    const ScalarField g1 = out.g1;
    out.g2 = [g, g1](const Point& x) { return g(x) - g1(x); };

    auto& rep = out.report;
    rep.mean_g = mean;
    rep.l1_norm_g = l1;
    rep.correction = c;
    rep.annulus_volume = area;
    double m1 = 0.0, m2 = 0.0, n0 = 0.0, n1 = 0.0, n2 = 0.0;
    for_points(rule, [&](const Point& x, double wt) {
        const double v = g(x), v1 = out.g1(x), v2 = out.g2(x);
        const double ww = wt * w(x);
        m1 += wt * v1;
        m2 += wt * v2;
        n0 += ww * std::pow(std::abs(v), exponent);
        n1 += ww * std::pow(std::abs(v1), exponent);
        n2 += ww * std::pow(std::abs(v2), exponent);
    });
    rep.mean_g1 = m1;
    rep.mean_g2 = m2;
    rep.norm_g = std::pow(n0, 1.0 / exponent);
    rep.ratio_g1 = std::pow(n1 / n0, 1.0 / exponent);
    rep.ratio_g2 = std::pow(n2 / n0, 1.0 / exponent);
    return out;
}

}  // namespace wstokes
