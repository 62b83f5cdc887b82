#include "wstokes/maximal.hpp"

#include <cmath>

namespace wstokes {

Point ScalarGrid::cell_center(int i, int j, int k) const {
    const double h = 1.0 / n();
    return {(i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h};
}

ScalarGrid sample_grid(const std::function<double(const Point&)>& f, int level) {
    if (level < 0 || level > 9) throw InvalidArgument("sample_grid: level must lie in [0, 9]");
    ScalarGrid g;
    g.level = level;
    const int n = g.n();
    g.values.resize(static_cast<std::size_t>(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) g.at(i, j, k) = f(g.cell_center(i, j, k));
    return g;
}

namespace {

void check_index(const ScalarGrid& g, const GridIndex& x) {
    if (g.values.size() != static_cast<std::size_t>(g.n()) * g.n() * g.n())
        throw InvalidArgument("grid size does not match its level");
    for (int c : x)
        if (c < 0 || c >= g.n()) throw InvalidArgument("grid index out of range");
}

template <class F>
void for_cube(const ScalarGrid& g, const GridIndex& x, int cube_level, F&& f) {
    const int w = 1 << (g.level - cube_level);
    const int i0 = x[0] / w * w, j0 = x[1] / w * w, k0 = x[2] / w * w;
    for (int k = k0; k < k0 + w; ++k)
        for (int j = j0; j < j0 + w; ++j)
            for (int i = i0; i < i0 + w; ++i) f(g.at(i, j, k));
}

// Averages of the samples over every dyadic cube, finest level first.
std::vector<std::vector<double>> pyramid(const ScalarGrid& g, bool absolute) {
    std::vector<std::vector<double>> levels;
    std::vector<double> cur = g.values;
    if (absolute)
        for (double& v : cur) v = std::abs(v);
    levels.push_back(cur);
    for (int m = g.n(); m > 1; m /= 2) {
        const int h = m / 2;
        std::vector<double> next(static_cast<std::size_t>(h) * h * h, 0.0);
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i)
                    next[i / 2 + h * (j / 2 + static_cast<std::size_t>(h) * (k / 2))] +=
                        cur[i + m * (j + static_cast<std::size_t>(m) * k)] / 8.0;
        levels.push_back(next);
        cur.swap(next);
    }
    return levels;
}

}  // namespace

double maximal_hl(const ScalarGrid& samples, const GridIndex& x) {
    check_index(samples, x);
    double best = 0.0;
    for (int l = samples.level; l >= 0; --l) {
        double s = 0.0;
        std::size_t cnt = 0;
        for_cube(samples, x, l, [&](double v) {
            s += std::abs(v);
            ++cnt;
        });
        best = std::max(best, s / static_cast<double>(cnt));
    }
    return best;
}

double maximal_sharp(const ScalarGrid& samples, const GridIndex& x) {
    check_index(samples, x);
    double best = 0.0;
    for (int l = samples.level; l >= 0; --l) {
        double s = 0.0;
        std::size_t cnt = 0;
        for_cube(samples, x, l, [&](double v) {
            s += v;
            ++cnt;
        });
        const double avg = s / static_cast<double>(cnt);
        double dev = 0.0;
        for_cube(samples, x, l, [&](double v) { dev += std::abs(v - avg); });
        best = std::max(best, dev / static_cast<double>(cnt));
    }
    return best;
}

ScalarGrid maximal_hl_map(const ScalarGrid& samples) {
    check_index(samples, {0, 0, 0});
    const auto pyr = pyramid(samples, true);
    ScalarGrid out{samples.level, std::vector<double>(samples.values.size(), 0.0)};
    const int n = samples.n();
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double best = 0.0;
                for (int d = 0; d <= samples.level; ++d) {
                    const int m = n >> d;
                    best = std::max(best, pyr[d][(i >> d) + m * ((j >> d) + static_cast<std::size_t>(m) * (k >> d))]);
                }
                out.at(i, j, k) = best;
            }
    return out;
}

ScalarGrid maximal_sharp_map(const ScalarGrid& samples) {
    check_index(samples, {0, 0, 0});
    const auto avg = pyramid(samples, false);
    const int n = samples.n();
    // Mean deviation per cube, accumulated from the fine cells.
    std::vector<std::vector<double>> dev(avg.size());
    for (std::size_t d = 0; d < avg.size(); ++d) dev[d].assign(avg[d].size(), 0.0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double v = samples.at(i, j, k);
                for (int d = 0; d <= samples.level; ++d) {
                    const int m = n >> d;
                    const std::size_t id = (i >> d) + m * ((j >> d) + static_cast<std::size_t>(m) * (k >> d));
                    dev[d][id] += std::abs(v - avg[d][id]) / static_cast<double>(1u << (3 * d));
                }
            }
    ScalarGrid out{samples.level, std::vector<double>(samples.values.size(), 0.0)};
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double best = 0.0;
                for (int d = 0; d <= samples.level; ++d) {
                    const int m = n >> d;
                    best = std::max(best, dev[d][(i >> d) + m * ((j >> d) + static_cast<std::size_t>(m) * (k >> d))]);
                }
                out.at(i, j, k) = best;
            }
    return out;
}

}  // namespace wstokes
