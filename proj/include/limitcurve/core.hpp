#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <optional>
#include <span>
#include <string>

namespace limitcurve {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Linear-growth envelope I(v) >= c1*||v|| - c2, when known analytically.
struct GrowthHint {
    double c1 = 0.0;  // > 0
    double c2 = 0.0;  // >= 0
};

/// A convex, continuously differentiable potential I on R^n together with
/// its gradient F and one Newton-usable element of the generalized Hessian.
///
/// Contract: value(0) == 0 and gradient(0) == 0; value is convex; the
/// Hessian element is symmetric and positive semidefinite. At kinks the
/// implementation returns the Hessian of the smooth branch whose closed
/// region contains the point, preferring the elastic (curved) branch.
class PotentialModel {
public:
    virtual ~PotentialModel() = default;

    virtual Eigen::Index dim() const = 0;
    virtual double value(const Vector& v) const = 0;
    virtual Vector gradient(const Vector& v) const = 0;
    virtual SparseMatrix hessian(const Vector& v) const = 0;

    /// Analytic growth constants, if the family knows them.
    virtual std::optional<GrowthHint> growth_hint() const { return std::nullopt; }
};

/// Right-hand-side vector of the governing system F(u) = t*b. Must be nonzero.
class LoadVector {
public:
    LoadVector(Vector b, std::string description = {});

    const Vector& vec() const { return b_; }
    const std::string& description() const { return description_; }
    double norm() const { return b_.norm(); }
    double dot(const Vector& u) const { return b_.dot(u); }

private:
    Vector b_;
    std::string description_;
};

/// A lambda-indexed family of potentials I_lambda, defined for lambda >= lambda0
/// (implementations accept any lambda > 0 so solvers may probe slightly below).
/// The family is nonincreasing in lambda: I_lt(v) >= I_lam(v) for lt <= lam.
class ParamFamily {
public:
    virtual ~ParamFamily() = default;

    virtual Eigen::Index dim() const = 0;
    virtual double lambda0() const = 0;
    virtual std::shared_ptr<const PotentialModel> model_at(double lambda) const = 0;

    /// d/dlambda of the gradient F_lambda(v), when available in closed form.
    /// Solvers fall back to a one-sided finite difference otherwise.
    virtual std::optional<Vector> parameter_gradient(double /*lambda*/, const Vector& /*v*/) const {
        return std::nullopt;
    }
};

/// value(omega * v) / omega. Nondecreasing in omega for fixed v.
double scaled_value(const PotentialModel& model, double omega, const Vector& v);

/// Max componentwise relative mismatch between central finite differences of
/// value() and gradient() at v, with step h. The caller thresholds the result.
double check_gradient(const PotentialModel& model, const Vector& v, double h);

/// True iff value_lambda(v) is nonincreasing along `lambdas` for every sample
/// point, within tol * (1 + |value|). `lambdas` must be strictly increasing
/// and start at or above lambda0.
bool check_monotone_family(const ParamFamily& family,
                           std::span<const double> lambdas,
                           std::span<const Vector> points,
                           double tol = 1e-10);

/// Violation of the convexity inequality at (v, w, alpha):
///   value(alpha*v + (1-alpha)*w) - alpha*value(v) - (1-alpha)*value(w),
/// positive values mean nonconvex behavior. Sampling helper for diagnostics.
double convexity_violation(const PotentialModel& model,
                           const Vector& v, const Vector& w, double alpha);

/// Violation of the growth bound c1*||v|| - c2 <= value(v); positive means
/// the hint is not honored at v.
double growth_violation(const PotentialModel& model, const GrowthHint& hint, const Vector& v);

}  // namespace limitcurve
