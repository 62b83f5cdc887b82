#pragma once

#include "wstokes/common.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace wstokes {

enum class WeightKind { constant, power_point, power_boundary, product, custom };

std::string to_string(WeightKind kind);

/// Evaluable weight on the unit cube.
///
/// Power kinds evaluate scale * (rho^2 + eps^2)^(alpha/2), with rho the
/// distance to `center` (power_point) or to the cube boundary (power_boundary).
class WeightField {
public:
    using Function = std::function<double(const Point&)>;

    WeightField() = default;

    static WeightField constant(double value = 1.0);
    static WeightField power_point(const Point& center, double alpha, double epsilon = 0.0);
    static WeightField power_boundary(double alpha, double epsilon = 0.0);
    static WeightField product(std::vector<WeightField> factors);
    static WeightField custom(Function f, std::string name = "custom");

    [[nodiscard]] double operator()(const Point& x) const;

    [[nodiscard]] WeightKind kind() const { return kind_; }
    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] const Point& center() const { return center_; }
    [[nodiscard]] double epsilon() const { return epsilon_; }
    [[nodiscard]] double scale() const { return scale_; }
    [[nodiscard]] const std::vector<WeightField>& factors() const { return factors_; }

    /// Same weight multiplied by s > 0.
    [[nodiscard]] WeightField scaled(double s) const;
    /// Same weight with regularization eps (power kinds and product factors).
    [[nodiscard]] WeightField regularized(double eps) const;
    /// True if evaluation can fail at some point of the closed cube.
    [[nodiscard]] bool has_singularity() const;
    [[nodiscard]] std::string describe() const;

private:
    WeightKind kind_ = WeightKind::constant;
    double alpha_ = 0.0;
    Point center_ = Point::Zero();
    double epsilon_ = 0.0;
    double scale_ = 1.0;
    std::vector<WeightField> factors_;
    std::shared_ptr<const Function> fn_;
    std::string name_;
};

/// Distance from x to the boundary of the unit cube (0 outside).
double cube_boundary_distance(const Point& x);

/// Throws SingularEvaluation at the singular set of an unregularized weight.
double eval_weight(const WeightField& w, const Point& x);

/// w^(1/(1-q)); power exponents transform as alpha -> alpha/(1-q).
WeightField dual_weight(const WeightField& w, double q);

struct AqEstimate {
    double q = 2.0;
    double value = 1.0;  // lower bound on the A_q characteristic
    Point argmax_center = Point::Constant(0.5);
    double argmax_side = 1.0;
    int depth = 0;
};

/// Max of (avg w)(avg w')^(q-1) over dyadic subcubes of levels 1..depth.
/// Cube averages are sums of 4^3 Gauss rules over the cube's descendants at
/// every resolution up to `depth`; the result is the running max, so it is
/// nondecreasing in depth.
AqEstimate estimate_aq(const WeightField& w, double q, int depth);

struct RestrictedClassCheck {
    bool in_class = false;
    double lower_bound = 0.0;  // min sampled value on the collar
    Point witness = Point::Zero();
};

/// Continuity and positive lower bound on the boundary collar {dist(x, dOmega) <= margin}.
RestrictedClassCheck is_in_restricted_class(const WeightField& w, double boundary_margin);

}  // namespace wstokes
