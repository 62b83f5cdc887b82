#pragma once

#include "wstokes/common.hpp"

#include <array>
#include <functional>
#include <vector>

namespace wstokes {

/// Cell-centered samples on a uniform 2^level grid of the unit cube.
struct ScalarGrid {
    int level = 0;
    std::vector<double> values;  // index i + n*(j + n*k)

    [[nodiscard]] int n() const { return 1 << level; }
    [[nodiscard]] double& at(int i, int j, int k) { return values[index(i, j, k)]; }
    [[nodiscard]] double at(int i, int j, int k) const { return values[index(i, j, k)]; }
    [[nodiscard]] std::size_t index(int i, int j, int k) const {
        const std::size_t m = static_cast<std::size_t>(n());
        return static_cast<std::size_t>(i) + m * (static_cast<std::size_t>(j) + m * static_cast<std::size_t>(k));
    }
    [[nodiscard]] Point cell_center(int i, int j, int k) const;
};

ScalarGrid sample_grid(const std::function<double(const Point&)>& f, int level);

using GridIndex = std::array<int, 3>;

/// Max over dyadic cubes containing the cell of the average of |w|.
double maximal_hl(const ScalarGrid& samples, const GridIndex& x);
/// Max over dyadic cubes containing the cell of the average of |w - w_Q|.
double maximal_sharp(const ScalarGrid& samples, const GridIndex& x);

/// Both operators at every cell, via a pyramid of cube averages.
ScalarGrid maximal_hl_map(const ScalarGrid& samples);
ScalarGrid maximal_sharp_map(const ScalarGrid& samples);

}  // namespace wstokes
