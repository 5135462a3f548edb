#include "limitcurve/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace limitcurve {

namespace {

double diag_scale(const SparseMatrix& H) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
        s = std::max(s, std::abs(H.coeff(i, i)));
    }
    return s > 0.0 ? s : 1.0;
}

SparseMatrix identity_like(Eigen::Index n) {
    SparseMatrix id(n, n);
    id.setIdentity();
    return id;
}

/// H (possibly regularized) behind a single factorization, so a Schur
/// complement can reuse it for several right-hand sides.
class TangentFactor {
public:
    /// Factors H + eps*scale*I, walking eps up the ladder until the
    /// factorization holds together. Returns false when even the strongest
    /// regularization fails.
    bool factor(const SparseMatrix& H, const NewtonOptions& opts, double eps_start = 0.0) {
        const Eigen::Index n = H.rows();
        const double scale = diag_scale(H);
        double eps = eps_start;
        while (true) {
            SparseMatrix Hreg = H;
            if (eps > 0.0) {
                Hreg = H + (eps * scale) * identity_like(n);
            }
            ldlt_.compute(Hreg);
            if (ldlt_.info() == Eigen::Success && pivots_ok()) {
                matrix_ = std::move(Hreg);
                regularized_ = eps > 0.0;
                eps_used_ = eps;
                return true;
            }
            if (eps == 0.0) {
                eps = opts.reg_epsilon;
            } else if (eps < opts.reg_epsilon_max) {
                eps = std::min(2.0 * eps, opts.reg_epsilon_max);
            } else {
                return false;
            }
        }
    }

    Vector solve(const Vector& rhs) const {
        Vector x = ldlt_.solve(rhs);
        // one refinement sweep keeps the residual near machine level
        Vector r = rhs - matrix_ * x;
        if (r.allFinite() && x.allFinite()) {
            x += ldlt_.solve(r);
        }
        return x;
    }

    bool regularized() const { return regularized_; }
    double eps_used() const { return eps_used_; }

private:
    // rank check on the factorization pivots; a semidefinite tangent with a
    // flat direction shows up as a (relatively) vanishing pivot and must go
    // through the regularization ladder instead
    bool pivots_ok() const {
        const auto& d = ldlt_.vectorD();
        double dmax = 0.0;
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            if (!std::isfinite(d(i))) {
                return false;
            }
            dmax = std::max(dmax, std::abs(d(i)));
        }
        if (dmax == 0.0) {
            return false;
        }
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            if (!(d(i) > 1e-12 * dmax)) {
                return false;
            }
        }
        return true;
    }

    Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
    SparseMatrix matrix_;
    bool regularized_ = false;
    double eps_used_ = 0.0;
};

struct GeneralBorderedResult {
    Vector x;
    double y = 0.0;
    bool ok = false;
    bool regularized = false;
    bool degenerate_border = false;
};

/// Solves [[H, col],[row', 0]] (x, y) = (r1, r2) via a Schur complement on H.
GeneralBorderedResult solve_bordered_general(const SparseMatrix& H, const Vector& col,
                                             const Vector& row, const Vector& r1, double r2,
                                             const NewtonOptions& opts,
                                             double denom_floor_abs = 0.0) {
    GeneralBorderedResult out;
    TangentFactor factor;
    double eps = 0.0;
    while (true) {
        if (!factor.factor(H, opts, eps)) {
            out.ok = false;
            return out;
        }
        const Vector v1 = factor.solve(r1);
        const Vector v2 = factor.solve(col);
        if (v1.allFinite() && v2.allFinite()) {
            const double denom = row.dot(v2);
            const double denom_floor =
                std::max(denom_floor_abs, 1e-14 * row.norm() * (v2.norm() + 1e-300));
            if (std::abs(denom) > denom_floor) {
                out.y = (row.dot(v1) - r2) / denom;
                out.x = v1 - out.y * v2;
                out.ok = out.x.allFinite() && std::isfinite(out.y);
                out.regularized = factor.regularized();
                if (out.ok) {
                    return out;
                }
            }
        }
        // escalate and retry; a degenerate border may open up once H is shifted
        if (factor.eps_used() >= opts.reg_epsilon_max) {
            out.ok = false;
            out.degenerate_border = true;
            return out;
        }
        eps = factor.eps_used() == 0.0 ? opts.reg_epsilon
                                       : std::min(2.0 * factor.eps_used(), opts.reg_epsilon_max);
    }
}

double next_epsilon(double eps, const NewtonOptions& opts) {
    if (eps == 0.0) {
        return opts.reg_epsilon;
    }
    return std::min(2.0 * eps, opts.reg_epsilon_max);
}

}  // namespace

const char* to_string(FailureReason reason) {
    switch (reason) {
        case FailureReason::none: return "none";
        case FailureReason::max_iter: return "max_iter";
        case FailureReason::singular_tangent: return "singular_tangent";
        case FailureReason::line_search_stall: return "line_search_stall";
        case FailureReason::diverged: return "diverged";
        case FailureReason::constraint_violation: return "constraint_violation";
    }
    return "unknown";
}

LinearSolveResult linear_solve(const SparseMatrix& K, const Vector& rhs) {
    LinearSolveResult out;
    const double target = 1e-10 * (1.0 + rhs.norm());

    Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
    if (ldlt.info() == Eigen::Success) {
        Vector x = ldlt.solve(rhs);
        if (x.allFinite()) {
            for (int sweep = 0; sweep < 2; ++sweep) {
                const Vector r = rhs - K * x;
                if (r.norm() <= target) {
                    out.x = std::move(x);
                    out.ok = true;
                    return out;
                }
                x += ldlt.solve(r);
            }
            if ((rhs - K * x).norm() <= target) {
                out.x = std::move(x);
                out.ok = true;
                return out;
            }
        }
    }

    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setMaxIterations(10 * K.rows());
    cg.setTolerance(1e-14);
    cg.compute(K);
    Vector x = cg.solve(rhs);
    if (x.allFinite() && (rhs - K * x).norm() <= target) {
        out.x = std::move(x);
        out.ok = true;
    }
    return out;
}

BorderedSolveResult solve_bordered(const SparseMatrix& H, const Vector& g,
                                   const Vector& r1, double r2, const NewtonOptions& opts) {
    BorderedSolveResult out;
    if (g.norm() == 0.0) {
        return out;
    }
    // [[H, -g],[g', 0]]: column border is -g, row border is g.
    auto res = solve_bordered_general(H, -g, g, r1, r2, opts, 1e-14 * g.squaredNorm());
    out.du = std::move(res.x);
    out.ds = res.y;
    out.ok = res.ok;
    out.regularized = res.regularized;
    return out;
}

SolveOutcome newton_solve(const PotentialModel& model, const LoadVector& b, double t,
                          Vector u0, const NewtonOptions& opts) {
    SolveOutcome out;
    out.u = std::move(u0);
    if (out.u.size() != model.dim()) {
        out.u = Vector::Zero(model.dim());
    }

    const Vector rhs = t * b.vec();
    const double scale = rhs.norm();
    const double target = opts.tol_abs + opts.tol_rel * scale;

    Vector r = model.gradient(out.u) - rhs;
    double res = r.norm();
    const double res0 = res;
    double eps = 0.0;

    for (int it = 0; it < opts.max_iter; ++it) {
        if (!std::isfinite(res) || res > 1e8 * (res0 + 1.0)) {
            out.residual = res;
            out.failure_reason = FailureReason::diverged;
            return out;
        }
        if (res <= target) {
            out.iterations = it;
            out.residual = res;
            out.converged = true;
            return out;
        }

        TangentFactor factor;
        if (!factor.factor(model.hessian(out.u), opts, eps)) {
            out.iterations = it;
            out.residual = res;
            out.failure_reason = FailureReason::singular_tangent;
            return out;
        }
        const Vector delta = factor.solve(-r);
        if (!delta.allFinite()) {
            out.iterations = it;
            out.residual = res;
            out.failure_reason = FailureReason::singular_tangent;
            return out;
        }

        double step = 1.0;
        bool accepted = false;
        while (step >= opts.min_step) {
            const Vector trial = out.u + step * delta;
            const Vector r_trial = model.gradient(trial) - rhs;
            const double res_trial = r_trial.norm();
            if (std::isfinite(res_trial) && res_trial <= (1.0 - opts.armijo_slope * step) * res) {
                out.u = trial;
                r = r_trial;
                res = res_trial;
                accepted = true;
                break;
            }
            step *= opts.backtrack_factor;
        }
        if (accepted) {
            eps = 0.0;
            continue;
        }
        if (factor.eps_used() >= opts.reg_epsilon_max) {
            out.iterations = it + 1;
            out.residual = res;
            out.failure_reason = FailureReason::line_search_stall;
            return out;
        }
        eps = next_epsilon(factor.eps_used(), opts);
    }
    out.iterations = opts.max_iter;
    out.residual = res;
    out.failure_reason = FailureReason::max_iter;
    return out;
}

SolveOutcome saddle_solve_ll(const PotentialModel& model, const LoadVector& b, double omega,
                             Vector u0, double t0, const NewtonOptions& opts) {
    SolveOutcome out;
    out.u = std::move(u0);
    if (out.u.size() != model.dim()) {
        out.u = Vector::Zero(model.dim());
    }
    out.extra = t0;

    const double scale = b.norm() + std::abs(omega);
    const double target = opts.tol_abs + opts.tol_rel * scale;

    auto residual_sum = [&](const Vector& u, double t, Vector& r1, double& r2) {
        r1 = model.gradient(u) - t * b.vec();
        r2 = b.dot(u) - omega;
        return r1.norm() + std::abs(r2);
    };

    Vector r1;
    double r2 = 0.0;
    double res = residual_sum(out.u, out.extra, r1, r2);
    const double res0 = res;
    double eps = 0.0;

    for (int it = 0; it < opts.max_iter; ++it) {
        if (!std::isfinite(res) || res > 1e8 * (res0 + 1.0)) {
            out.residual = res;
            out.failure_reason = FailureReason::diverged;
            return out;
        }
        if (res <= target) {
            out.iterations = it;
            out.residual = res;
            out.converged = true;
            return out;
        }

        auto step_res = solve_bordered_general(model.hessian(out.u), -b.vec(), b.vec(),
                                               -r1, -r2, opts);
        if (!step_res.ok) {
            out.iterations = it;
            out.residual = res;
            out.failure_reason = FailureReason::singular_tangent;
            return out;
        }

        double step = 1.0;
        bool accepted = false;
        while (step >= opts.min_step) {
            const Vector u_trial = out.u + step * step_res.x;
            const double t_trial = out.extra + step * step_res.y;
            Vector r1_t;
            double r2_t = 0.0;
            const double res_trial = residual_sum(u_trial, t_trial, r1_t, r2_t);
            if (std::isfinite(res_trial) && res_trial <= (1.0 - opts.armijo_slope * step) * res) {
                out.u = u_trial;
                out.extra = t_trial;
                r1 = std::move(r1_t);
                r2 = r2_t;
                res = res_trial;
                accepted = true;
                break;
            }
            step *= opts.backtrack_factor;
        }
        if (!accepted) {
            if (eps >= opts.reg_epsilon_max) {
                out.iterations = it + 1;
                out.residual = res;
                out.failure_reason = FailureReason::line_search_stall;
                return out;
            }
            eps = next_epsilon(eps, opts);
        } else {
            eps = 0.0;
        }
    }
    out.iterations = opts.max_iter;
    out.residual = res;
    out.failure_reason = FailureReason::max_iter;
    return out;
}

SolveOutcome saddle_solve_ssr(const ParamFamily& family, const LoadVector& b, double omega,
                              Vector u0, double lambda_init, const NewtonOptions& opts) {
    SolveOutcome out;
    out.u = std::move(u0);
    if (out.u.size() != family.dim()) {
        out.u = Vector::Zero(family.dim());
    }
    const double lambda0 = family.lambda0();
    const double lambda_floor = std::max(1e-3 * lambda0, 1e-8);
    double lambda = std::max(lambda_init, lambda0);

    const double scale = b.norm() + std::abs(omega);
    const double target = opts.tol_abs + opts.tol_rel * scale;

    auto param_grad = [&](double lam, const Vector& u,
                          const PotentialModel& at_lam) -> Vector {
        if (auto d = family.parameter_gradient(lam, u)) {
            return *d;
        }
        const double h = 1e-6 * (1.0 + lam);
        return (family.model_at(lam + h)->gradient(u) - at_lam.gradient(u)) / h;
    };

    std::shared_ptr<const PotentialModel> model = family.model_at(lambda);
    Vector r1 = model->gradient(out.u) - b.vec();
    double r2 = b.dot(out.u) - omega;
    double res = r1.norm() + std::abs(r2);
    const double res0 = res;

    for (int it = 0; it < opts.max_iter; ++it) {
        if (!std::isfinite(res) || res > 1e8 * (res0 + 1.0)) {
            out.extra = lambda;
            out.residual = res;
            out.failure_reason = FailureReason::diverged;
            return out;
        }
        if (res <= target) {
            out.extra = lambda;
            out.iterations = it;
            out.residual = res;
            out.converged = true;
            if (lambda < lambda0 - 1e-8 * (1.0 + lambda0)) {
                out.converged = false;
                out.failure_reason = FailureReason::constraint_violation;
            }
            return out;
        }

        const SparseMatrix H = model->hessian(out.u);
        const Vector d = param_grad(lambda, out.u, *model);

        bool stepped = false;
        if (d.norm() > 1e-14 * (1.0 + b.norm())) {
            auto step_res = solve_bordered_general(H, d, b.vec(), -r1, -r2, opts);
            if (step_res.ok) {
                double step = 1.0;
                while (step >= opts.min_step) {
                    const Vector u_trial = out.u + step * step_res.x;
                    const double lam_trial = std::max(lambda_floor, lambda + step * step_res.y);
                    auto m_trial = family.model_at(lam_trial);
                    const Vector r1_t = m_trial->gradient(u_trial) - b.vec();
                    const double r2_t = b.dot(u_trial) - omega;
                    const double res_trial = r1_t.norm() + std::abs(r2_t);
                    if (std::isfinite(res_trial) &&
                        res_trial <= (1.0 - opts.armijo_slope * step) * res) {
                        out.u = u_trial;
                        lambda = lam_trial;
                        model = std::move(m_trial);
                        r1 = r1_t;
                        r2 = r2_t;
                        res = res_trial;
                        stepped = true;
                        break;
                    }
                    step *= opts.backtrack_factor;
                }
            }
        }

        if (!stepped) {
            // The strength parameter has no local effect (typically an elastic
            // state). Project u onto the work plane through an auxiliary load
            // multiplier, then push lambda up until it becomes active.
            auto repair = solve_bordered_general(H, -b.vec(), b.vec(), -r1, -r2, opts);
            if (repair.ok && repair.x.allFinite()) {
                const double cap = 10.0 * (1.0 + out.u.norm());
                const double len = repair.x.norm();
                out.u += (len > cap ? cap / len : 1.0) * repair.x;
            }
            lambda += std::max(0.25 * (lambda - lambda0), 0.25 * lambda0);
            model = family.model_at(lambda);
            r1 = model->gradient(out.u) - b.vec();
            r2 = b.dot(out.u) - omega;
            res = r1.norm() + std::abs(r2);
        }
    }
    out.extra = lambda;
    out.iterations = opts.max_iter;
    out.residual = res;
    out.failure_reason = FailureReason::max_iter;
    return out;
}

}  // namespace limitcurve
