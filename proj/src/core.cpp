#include "limitcurve/core.hpp"

#include <cmath>
#include <stdexcept>

namespace limitcurve {

LoadVector::LoadVector(Vector b, std::string description)
    : b_(std::move(b)), description_(std::move(description)) {
    if (b_.size() == 0) {
        throw std::invalid_argument("LoadVector: empty vector");
    }
    if (!b_.allFinite()) {
        throw std::invalid_argument("LoadVector: non-finite entries");
    }
    if (b_.norm() == 0.0) {
        throw std::invalid_argument("LoadVector: b must be nonzero");
    }
}

double scaled_value(const PotentialModel& model, double omega, const Vector& v) {
    if (!(omega > 0.0)) {
        throw std::invalid_argument("scaled_value: omega must be positive");
    }
    return model.value(omega * v) / omega;
}

double check_gradient(const PotentialModel& model, const Vector& v, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("check_gradient: step h must be positive");
    }
    if (!v.allFinite()) {
        throw std::invalid_argument("check_gradient: v must be finite");
    }
    const Vector grad = model.gradient(v);
    double worst = 0.0;
    Vector probe = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        probe(i) = v(i) + h;
        const double fp = model.value(probe);
        probe(i) = v(i) - h;
        const double fm = model.value(probe);
        probe(i) = v(i);
        const double fd = (fp - fm) / (2.0 * h);
        const double err = std::abs(fd - grad(i)) / (1.0 + std::abs(grad(i)));
        worst = std::max(worst, err);
    }
    return worst;
}

bool check_monotone_family(const ParamFamily& family,
                           std::span<const double> lambdas,
                           std::span<const Vector> points,
                           double tol) {
    if (lambdas.empty() || points.empty()) {
        throw std::invalid_argument("check_monotone_family: empty sample lists");
    }
    for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
        if (!(lambdas[k] < lambdas[k + 1])) {
            throw std::invalid_argument("check_monotone_family: lambdas must be strictly increasing");
        }
    }
    if (lambdas.front() < family.lambda0() - 1e-14) {
        throw std::invalid_argument("check_monotone_family: lambdas must start at or above lambda0");
    }

    std::vector<std::shared_ptr<const PotentialModel>> models;
    models.reserve(lambdas.size());
    for (double lam : lambdas) {
        models.push_back(family.model_at(lam));
    }
    for (const Vector& v : points) {
        double prev = models.front()->value(v);
        for (std::size_t k = 1; k < models.size(); ++k) {
            const double cur = models[k]->value(v);
            if (cur > prev + tol * (1.0 + std::abs(prev))) {
                return false;
            }
            prev = cur;
        }
    }
    return true;
}

double convexity_violation(const PotentialModel& model,
                           const Vector& v, const Vector& w, double alpha) {
    const double lhs = model.value(alpha * v + (1.0 - alpha) * w);
    const double rhs = alpha * model.value(v) + (1.0 - alpha) * model.value(w);
    return lhs - rhs;
}

double growth_violation(const PotentialModel& model, const GrowthHint& hint, const Vector& v) {
    return hint.c1 * v.norm() - hint.c2 - model.value(v);
}

}  // namespace limitcurve
