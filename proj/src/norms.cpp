#include "wstokes/norms.hpp"

#include "wstokes/quadrature.hpp"

#include <cmath>

namespace wstokes {

std::string to_string(Derivative d) {
    switch (d) {
        case Derivative::none: return "none";
        case Derivative::gradient: return "gradient";
        case Derivative::symmetric_gradient: return "symmetric_gradient";
    }
    return "none";
}

Derivative derivative_from_string(const std::string& s) {
    if (s == "none" || s.empty()) return Derivative::none;
    if (s == "gradient") return Derivative::gradient;
    if (s == "symmetric_gradient") return Derivative::symmetric_gradient;
    throw InvalidArgument("unknown derivative '" + s + "' (none | gradient | symmetric_gradient)");
}

void for_each_quadrature_point(const TetMesh& mesh, int order, const QuadratureVisitor& f) {
    const auto& rule = quadrature(order);
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        const double det = 6.0 * mesh.volume(t);
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const auto& l = rule.points[k];
            f(t, l, mesh.from_barycentric(t, l), rule.weights[k] * det);
        }
    }
}

double weighted_lq(const TetMesh& mesh, const WeightField& w, double q, int order,
                   const std::function<double(int, const Barycentric&, const Point&)>& g) {
    if (!(q >= 1.0)) throw InvalidArgument("weighted norm: q must be >= 1");
    double s = 0.0;
    for_each_quadrature_point(mesh, order, [&](int t, const Barycentric& l, const Point& x, double wt) {
        const double v = g(t, l, x);
        s += wt * w(x) * (q == 2.0 ? v * v : std::pow(std::abs(v), q));
    });
    return std::pow(s, 1.0 / q);
}

namespace {

double tensor_magnitude(const Mat3& g, Derivative d) {
    return d == Derivative::symmetric_gradient ? symmetric_part(g).norm() : g.norm();
}

void require_role(const FEFunction& f, FieldRole r) {
    if (f.role != r) throw InvalidArgument("FE function has role " + to_string(f.role) + ", expected " + to_string(r));
}

}  // namespace

double weighted_norm(const FEFunction& u, const WeightField& w, double q, Derivative d, int quad_order) {
    const auto& mesh = u.space->mesh();
    if (u.role == FieldRole::pressure) {
        if (d != Derivative::none) throw InvalidArgument("weighted_norm: derivatives of pressures are not offered");
        return weighted_lq(mesh, w, q, quad_order,
                           [&](int t, const Barycentric& l, const Point&) { return u.pressure(t, l); });
    }
    if (d == Derivative::none)
        return weighted_lq(mesh, w, q, quad_order,
                           [&](int t, const Barycentric& l, const Point&) { return u.velocity(t, l).norm(); });
    return weighted_lq(mesh, w, q, quad_order, [&](int t, const Barycentric& l, const Point&) {
        return tensor_magnitude(u.velocity_gradient(t, l), d);
    });
}

double weighted_error(const FEFunction& uh, const VelocityField& u, const WeightField& w, double q, Derivative d,
                      int quad_order) {
    require_role(uh, FieldRole::velocity);
    const auto& mesh = uh.space->mesh();
    if (d == Derivative::none)
        return weighted_lq(mesh, w, q, quad_order, [&](int t, const Barycentric& l, const Point& x) {
            return (uh.velocity(t, l) - u.value(x)).norm();
        });
    return weighted_lq(mesh, w, q, quad_order, [&](int t, const Barycentric& l, const Point& x) {
        return tensor_magnitude(uh.velocity_gradient(t, l) - u.gradient(x), d);
    });
}

double weighted_error(const FEFunction& ph, const ScalarFunction& p, const WeightField& w, double q,
                      int quad_order) {
    require_role(ph, FieldRole::pressure);
    return weighted_lq(ph.space->mesh(), w, q, quad_order,
                       [&](int t, const Barycentric& l, const Point& x) { return ph.pressure(t, l) - p(x); });
}

double weighted_norm(const TetMesh& mesh, const VelocityField& u, const WeightField& w, double q, Derivative d,
                     int quad_order) {
    if (d == Derivative::none)
        return weighted_lq(mesh, w, q, quad_order,
                           [&](int, const Barycentric&, const Point& x) { return u.value(x).norm(); });
    return weighted_lq(mesh, w, q, quad_order,
                       [&](int, const Barycentric&, const Point& x) { return tensor_magnitude(u.gradient(x), d); });
}

double weighted_norm(const TetMesh& mesh, const ScalarFunction& p, const WeightField& w, double q, int quad_order) {
    return weighted_lq(mesh, w, q, quad_order, [&](int, const Barycentric&, const Point& x) { return p(x); });
}

double integrate(const FEFunction& p) {
    require_role(p, FieldRole::pressure);
    const auto& mesh = p.space->mesh();
    double s = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
        const auto& k = mesh.tets()[t];
        s += mesh.volume(t) * 0.25 * (p.coeffs[k[0]] + p.coeffs[k[1]] + p.coeffs[k[2]] + p.coeffs[k[3]]);
    }
    return s;
}

FEFunction zero_mean_project(const FEFunction& p) {
    FEFunction out = p;
    out.coeffs.array() -= integrate(p) / p.space->mesh().total_volume();
    return out;
}

}  // namespace wstokes
