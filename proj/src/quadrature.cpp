#include "wstokes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wstokes {

namespace {

using Bary = std::array<double, 4>;

void add_center(QuadratureRule& r, double w) {
    r.points.push_back({0.25, 0.25, 0.25, 0.25});
    r.weights.push_back(w);
}

// Orbit of (a,b,b,b): 4 points.
void add_s31(QuadratureRule& r, double b, double w) {
    const double a = 1.0 - 3.0 * b;
    for (int k = 0; k < 4; ++k) {
        Bary p{b, b, b, b};
        p[k] = a;
        r.points.push_back(p);
        r.weights.push_back(w);
    }
}

// Orbit of (a,a,b,b): 6 points.
void add_s22(QuadratureRule& r, double a, double w) {
    const double b = 0.5 * (1.0 - 2.0 * a);
    static constexpr std::array<std::array<int, 2>, 6> pairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    for (const auto& pr : pairs) {
        Bary p{b, b, b, b};
        p[pr[0]] = a;
        p[pr[1]] = a;
        r.points.push_back(p);
        r.weights.push_back(w);
    }
}

// Orbit of (a,b,c,c): 12 points.
void add_s211(QuadratureRule& r, double a, double b, double w) {
    const double c = 0.5 * (1.0 - a - b);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            Bary p{c, c, c, c};
            p[i] = a;
            p[j] = b;
            r.points.push_back(p);
            r.weights.push_back(w);
        }
    }
}

QuadratureRule make_rule(int order) {
    QuadratureRule r;
    r.order = order;
    switch (order) {
    case 1:
        add_center(r, 1.0 / 6.0);
        break;
    case 2:
        add_s31(r, 0.13819660112501051518, 1.0 / 24.0);
        break;
    case 3:
    case 4:
    case 5:
        add_s31(r, 0.092735250310891226402, 0.012248840519393658257);
        add_s31(r, 0.31088591926330060980, 0.018781320953002641800);
        add_s22(r, 0.45449629587435035051, 0.0070910034628469110730);
        break;
    case 6:
        add_s31(r, 0.21460287125915202929, 0.0066537917096945820166);
        add_s31(r, 0.040673958534611353116, 0.0016795351758867738247);
        add_s31(r, 0.32233789014227551034, 0.0092261969239424536825);
        add_s211(r, 0.26967233145831580803, 0.60300566479164914137, 0.0080357142857142857143);
        break;
    default:
        throw NotImplemented("quadrature order " + std::to_string(order) +
                             " is not available; supported orders are 1, 2, 3, 4, 5, 6");
    }
    return r;
}

}  // namespace

const QuadratureRule& quadrature(int order) {
    static const std::array<QuadratureRule, 6> rules{make_rule(1), make_rule(2), make_rule(3),
                                                     make_rule(4), make_rule(5), make_rule(6)};
    if (order < 1 || order > 6) make_rule(order);  // throws
    return rules[static_cast<std::size_t>(order - 1)];
}

GaussLine gauss_legendre(int n) {
    if (n < 1) throw InvalidArgument("gauss_legendre: n must be >= 1");
    GaussLine g;
    g.nodes.resize(n);
    g.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        g.nodes[i] = 0.5 * (1.0 - x);
        g.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return g.nodes[a] < g.nodes[b]; });
    GaussLine sorted;
    for (int i : idx) {
        sorted.nodes.push_back(g.nodes[i]);
        sorted.weights.push_back(g.weights[i]);
    }
    return sorted;
}

}  // namespace wstokes
