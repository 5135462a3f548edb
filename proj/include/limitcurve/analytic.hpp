#pragma once

#include "limitcurve/core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace limitcurve {

/// Closed-form safety-factor data carried by an analytic family, used as the
/// oracle side of tests and cross-checks.
struct ReferenceFos {
    std::optional<double> t_star;        // limit load factor; absent when infinite
    bool t_star_infinite = false;
    std::optional<double> lambda_star;   // strength-reduction factor (param families)
    std::optional<double> omega0;        // smallest admissible work level b'u at lambda0
    std::function<double(double)> ell;   // ell(lambda); +inf where undefined
    std::function<double(double)> psi;   // psi(omega) for the load-factor path
    std::string notes;
};

/// A potential (or potential family) with exact reference values attached.
struct AnalyticFamily {
    std::string name;
    std::shared_ptr<const PotentialModel> model;  // the lambda = 1 member for families
    std::shared_ptr<const ParamFamily> family;    // null for non-parametric models
    LoadVector load;
    ReferenceFos reference;
};

enum class ScalarKind { quadratic, capped_quadratic, exp };

/// One-dimensional examples with unit load:
///   quadratic          I(v) = v^2/2                        t* infinite
///   capped_quadratic   I(v) = v^2/2 capped to |v| - 1/2    t* = 1
///   exp                I(v) = e^(-v) + v - 1               t* = 1, unattained
AnalyticFamily make_scalar_example(ScalarKind kind);
AnalyticFamily make_scalar_example(const std::string& kind);

/// I(v) = v'Av/2 with symmetric positive semidefinite A. The associated
/// system Au = b is solvable iff b is orthogonal to the kernel of A, which
/// the reference records as t_inf = +inf (orthogonal) or 0.
AnalyticFamily make_psd_quadratic(const Eigen::MatrixXd& A, const Vector& b);

/// Moreau-type family over the ball of radius 1/lambda. Requires
/// 0 < ||b|| < 1/lambda0. Reference: lambda* = 1/||b||, ell(lambda) = 1/(lambda*||b||).
AnalyticFamily make_ball_family(double lambda0, const Vector& b);

/// Moreau-type family over the planar wedge {x : x1 - lambda*|x2| + 1 >= 0}.
/// Requires b2 != 0 and b1 - lambda0*|b2| + 1 > 0. Reference:
/// lambda* = (1 + b1)/|b2|, ell(lambda) = 1/(lambda*|b2| - b1).
AnalyticFamily make_wedge_family(double lambda0, const Eigen::Vector2d& b);

/// Exact reference values for oracle comparison.
const ReferenceFos& reference_fos(const AnalyticFamily& family);

}  // namespace limitcurve
