#include "wstokes/poly3.hpp"

#include <algorithm>

namespace wstokes {

Poly3::Poly3(double c) {
    if (c != 0.0) terms_[{0, 0, 0}] = c;
    prune();
}

Poly3 Poly3::var(int axis) {
    Exponent e{0, 0, 0};
    e[axis] = 1;
    Poly3 p;
    p.terms_[e] = 1.0;
    p.prune();
    return p;
}

Poly3 Poly3::monomial(double c, int a, int b, int d) {
    Poly3 p;
    if (c != 0.0) p.terms_[{a, b, d}] = c;
    p.prune();
    return p;
}

double Poly3::operator()(const Point& x) const {
    const int n = degree_;
    std::array<std::array<double, 32>, 3> pw{};
    if (n >= 32) throw NotImplemented("Poly3: degree above 31");
    for (int k = 0; k < 3; ++k) {
        pw[k][0] = 1.0;
        for (int i = 1; i <= n; ++i) pw[k][i] = pw[k][i - 1] * x[k];
    }
    double s = 0.0;
    for (const auto& [e, c] : flat_) s += c * pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]];
    return s;
}

Poly3 Poly3::derivative(int axis) const {
    Poly3 p;
    for (const auto& [e, c] : terms_) {
        if (e[axis] == 0) continue;
        Exponent f = e;
        --f[axis];
        p.terms_[f] += c * e[axis];
    }
    p.prune();
    return p;
}

int Poly3::degree() const { return degree_; }

Poly3& Poly3::operator+=(const Poly3& o) {
    for (const auto& [e, c] : o.terms_) terms_[e] += c;
    prune();
    return *this;
}

Poly3& Poly3::operator-=(const Poly3& o) {
    for (const auto& [e, c] : o.terms_) terms_[e] -= c;
    prune();
    return *this;
}

Poly3& Poly3::operator*=(const Poly3& o) {
    std::map<Exponent, double> r;
    for (const auto& [e, c] : terms_)
        for (const auto& [f, d] : o.terms_) r[{e[0] + f[0], e[1] + f[1], e[2] + f[2]}] += c * d;
    terms_.swap(r);
    prune();
    return *this;
}

double Poly3::integral_unit_cube() const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c / ((e[0] + 1.0) * (e[1] + 1.0) * (e[2] + 1.0));
    return s;
}

void Poly3::prune() {
    std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
    flat_.assign(terms_.begin(), terms_.end());
    degree_ = 0;
    for (const auto& [e, c] : terms_) degree_ = std::max(degree_, std::max({e[0], e[1], e[2]}));
}

}  // namespace wstokes
