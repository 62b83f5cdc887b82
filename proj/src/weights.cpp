#include "wstokes/weights.hpp"

#include "wstokes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wstokes {

std::string to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::constant: return "constant";
        case WeightKind::power_point: return "power_point";
        case WeightKind::power_boundary: return "power_boundary";
        case WeightKind::product: return "product";
        case WeightKind::custom: return "custom";
    }
    return "unknown";
}

WeightField WeightField::constant(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument("constant weight must be positive");
    WeightField w;
    w.scale_ = value;
    return w;
}

WeightField WeightField::power_point(const Point& center, double alpha, double epsilon) {
    if (epsilon < 0.0) throw InvalidArgument("weight regularization must be >= 0");
    WeightField w;
    w.kind_ = WeightKind::power_point;
    w.center_ = center;
    w.alpha_ = alpha;
    w.epsilon_ = epsilon;
    return w;
}

WeightField WeightField::power_boundary(double alpha, double epsilon) {
    if (epsilon < 0.0) throw InvalidArgument("weight regularization must be >= 0");
    WeightField w;
    w.kind_ = WeightKind::power_boundary;
    w.alpha_ = alpha;
    w.epsilon_ = epsilon;
    return w;
}

WeightField WeightField::product(std::vector<WeightField> factors) {
    WeightField w;
    w.kind_ = WeightKind::product;
    w.factors_ = std::move(factors);
    return w;
}

WeightField WeightField::custom(Function f, std::string name) {
    if (!f) throw InvalidArgument("custom weight needs a callable");
    WeightField w;
    w.kind_ = WeightKind::custom;
    w.fn_ = std::make_shared<const Function>(std::move(f));
    w.name_ = std::move(name);
    return w;
}

double cube_boundary_distance(const Point& x) {
    const double d = std::min({x[0], x[1], x[2], 1.0 - x[0], 1.0 - x[1], 1.0 - x[2]});
    return std::max(d, 0.0);
}

namespace {

double power_eval(double rho, double eps, double alpha, double scale) {
    const double r2 = rho * rho + eps * eps;
    if (alpha == 0.0) return scale;
    if (r2 == 0.0) {
        if (alpha < 0.0) throw SingularEvaluation("weight evaluated on its singular set; use epsilon > 0");
        return 0.0;
    }
    return scale * std::pow(r2, 0.5 * alpha);
}

}  // namespace

double WeightField::operator()(const Point& x) const {
    switch (kind_) {
        case WeightKind::constant: return scale_;
        case WeightKind::power_point: return power_eval((x - center_).norm(), epsilon_, alpha_, scale_);
        case WeightKind::power_boundary: return power_eval(cube_boundary_distance(x), epsilon_, alpha_, scale_);
        case WeightKind::product: {
            double v = scale_;
            for (const auto& f : factors_) v *= f(x);
            return v;
        }
        case WeightKind::custom: return scale_ * (*fn_)(x);
    }
    return 0.0;
}

WeightField WeightField::scaled(double s) const {
    if (!(s > 0.0)) throw InvalidArgument("weight scale must be positive");
    WeightField w = *this;
    w.scale_ *= s;
    return w;
}

WeightField WeightField::regularized(double eps) const {
    WeightField w = *this;
    if (kind_ == WeightKind::power_point || kind_ == WeightKind::power_boundary) w.epsilon_ = eps;
    for (auto& f : w.factors_) f = f.regularized(eps);
    return w;
}

bool WeightField::has_singularity() const {
    switch (kind_) {
        case WeightKind::power_point:
        case WeightKind::power_boundary: return epsilon_ == 0.0 && alpha_ < 0.0;
        case WeightKind::product:
            return std::any_of(factors_.begin(), factors_.end(), [](const auto& f) { return f.has_singularity(); });
        default: return false;
    }
}

std::string WeightField::describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    switch (kind_) {
        case WeightKind::power_point:
            os << "(z=" << center_[0] << "," << center_[1] << "," << center_[2] << ";alpha=" << alpha_
               << ";eps=" << epsilon_ << ")";
            break;
        case WeightKind::power_boundary: os << "(alpha=" << alpha_ << ";eps=" << epsilon_ << ")"; break;
        case WeightKind::product:
            os << "(";
            for (std::size_t i = 0; i < factors_.size(); ++i) os << (i ? "*" : "") << factors_[i].describe();
            os << ")";
            break;
        case WeightKind::custom: os << "(" << name_ << ")"; break;
        default: break;
    }
    if (scale_ != 1.0) os << "*" << scale_;
    return os.str();
}

double eval_weight(const WeightField& w, const Point& x) { return w(x); }

WeightField dual_weight(const WeightField& w, double q) {
    if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("dual_weight: q must lie in (1, inf)");
    const double e = 1.0 / (1.0 - q);
    switch (w.kind()) {
        case WeightKind::constant: return WeightField::constant(std::pow(w.scale(), e));
        case WeightKind::power_point: {
            auto d = WeightField::power_point(w.center(), w.alpha() * e, w.epsilon());
            return w.scale() == 1.0 ? d : d.scaled(std::pow(w.scale(), e));
        }
        case WeightKind::power_boundary: {
            auto d = WeightField::power_boundary(w.alpha() * e, w.epsilon());
            return w.scale() == 1.0 ? d : d.scaled(std::pow(w.scale(), e));
        }
        case WeightKind::product: {
            std::vector<WeightField> f;
            for (const auto& g : w.factors()) f.push_back(dual_weight(g, q));
            auto d = WeightField::product(std::move(f));
            return w.scale() == 1.0 ? d : d.scaled(std::pow(w.scale(), e));
        }
        case WeightKind::custom:
            return WeightField::custom([w, e](const Point& x) { return std::pow(w(x), e); },
                                       "dual[" + w.describe() + "]");
    }
    return w;
}

AqEstimate estimate_aq(const WeightField& w, double q, int depth) {
    if (!(q > 1.0)) throw InvalidArgument("estimate_aq: q must be > 1");
    if (depth < 1) throw InvalidArgument("estimate_aq: depth must be >= 1");
    const auto g = gauss_legendre(4);
    const double e = 1.0 / (1.0 - q);
    AqEstimate best;
    best.q = q;
    best.depth = depth;
    best.value = 0.0;

    for (int res = 1; res <= depth; ++res) {
        const int n = 1 << res;
        const double s = 1.0 / n;
        std::vector<double> xs(static_cast<std::size_t>(n) * 4), ws(xs.size());
        for (int c = 0; c < n; ++c)
            for (int k = 0; k < 4; ++k) {
                xs[c * 4 + k] = (c + g.nodes[k]) * s;
                ws[c * 4 + k] = g.weights[k] * s;
            }
        const std::size_t cells = static_cast<std::size_t>(n) * n * n;
        std::vector<double> i1(cells, 0.0), i2(cells, 0.0), vol(cells, 0.0);
        for (int a = 0; a < n * 4; ++a)
            for (int b = 0; b < n * 4; ++b)
                for (int c = 0; c < n * 4; ++c) {
                    const double wt = ws[a] * ws[b] * ws[c];
                    const double v = w(Point(xs[a], xs[b], xs[c]));
                    const double vd = std::pow(v, e);
                    if (!std::isfinite(v) || !std::isfinite(vd) || !(v > 0.0))
                        throw SingularEvaluation("estimate_aq: non-integrable sample; use epsilon > 0");
                    const std::size_t cell = static_cast<std::size_t>(a / 4) + n * (b / 4 + static_cast<std::size_t>(n) * (c / 4));
                    i1[cell] += wt * v;
                    i2[cell] += wt * vd;
                    vol[cell] += wt;
                }

        for (int m = n; m >= 2; m /= 2) {
            const double side = 1.0 / m;
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < m; ++i) {
                        const std::size_t id = i + m * (j + static_cast<std::size_t>(m) * k);
                        const double val = (i1[id] / vol[id]) * std::pow(i2[id] / vol[id], q - 1.0);
                        if (!std::isfinite(val))
                            throw SingularEvaluation("estimate_aq: non-finite quotient; use epsilon > 0");
                        if (val > best.value) {
                            best.value = val;
                            best.argmax_center = Point((i + 0.5) * side, (j + 0.5) * side, (k + 0.5) * side);
                            best.argmax_side = side;
                        }
                    }
            if (m == 2) break;
            const int h = m / 2;
            std::vector<double> c1(static_cast<std::size_t>(h) * h * h, 0.0), c2(c1.size(), 0.0), cv(c1.size(), 0.0);
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < m; ++i) {
                        const std::size_t src = i + m * (j + static_cast<std::size_t>(m) * k);
                        const std::size_t dst = i / 2 + h * (j / 2 + static_cast<std::size_t>(h) * (k / 2));
                        c1[dst] += i1[src];
                        c2[dst] += i2[src];
                        cv[dst] += vol[src];
                    }
            i1.swap(c1);
            i2.swap(c2);
            vol.swap(cv);
        }
    }
    return best;
}

namespace {

void collect_centers(const WeightField& w, std::vector<Point>& out) {
    if (w.kind() == WeightKind::power_point) out.push_back(w.center());
    for (const auto& f : w.factors()) collect_centers(f, out);
}

}  // namespace

RestrictedClassCheck is_in_restricted_class(const WeightField& w, double boundary_margin) {
    if (!(boundary_margin > 0.0) || boundary_margin >= 0.5)
        throw InvalidArgument("is_in_restricted_class: margin must lie in (0, 1/2)");
    std::vector<Point> samples;
    constexpr int n = 40;
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                const Point x(static_cast<double>(i) / n, static_cast<double>(j) / n, static_cast<double>(k) / n);
                if (cube_boundary_distance(x) <= boundary_margin) samples.push_back(x);
            }
    std::vector<Point> centers;
    collect_centers(w, centers);
    for (const auto& c : centers)
        if (cube_boundary_distance(c) <= boundary_margin) samples.push_back(c);

    RestrictedClassCheck out;
    out.in_class = true;
    out.lower_bound = std::numeric_limits<double>::infinity();
    for (const auto& x : samples) {
        double v = 0.0;
        try {
            v = w(x);
        } catch (const SingularEvaluation&) {
            v = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(v) || !(v > 0.0)) {
            out.in_class = false;
            out.lower_bound = std::isfinite(v) ? v : 0.0;
            out.witness = x;
            return out;
        }
        if (v < out.lower_bound) {
            out.lower_bound = v;
            out.witness = x;
        }
    }
    return out;
}

}  // namespace wstokes
