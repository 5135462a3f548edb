#include "limitcurve/analytic.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace limitcurve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& m) {
    SparseMatrix s = m.sparseView(1.0, 0.0);
    s.makeCompressed();
    return s;
}

SparseMatrix scalar_hessian(double h) {
    SparseMatrix s(1, 1);
    if (h != 0.0) {
        s.insert(0, 0) = h;
    }
    s.makeCompressed();
    return s;
}

void require_dim(const PotentialModel& m, const Vector& v) {
    if (v.size() != m.dim()) {
        throw std::invalid_argument("potential model: dimension mismatch");
    }
}

class Quadratic1d final : public PotentialModel {
public:
    Eigen::Index dim() const override { return 1; }
    double value(const Vector& v) const override {
        require_dim(*this, v);
        return 0.5 * v(0) * v(0);
    }
    Vector gradient(const Vector& v) const override {
        require_dim(*this, v);
        return v;
    }
    SparseMatrix hessian(const Vector& v) const override {
        require_dim(*this, v);
        return scalar_hessian(1.0);
    }
    std::optional<GrowthHint> growth_hint() const override { return GrowthHint{1.0, 0.5}; }
};

class CappedQuadratic1d final : public PotentialModel {
public:
    Eigen::Index dim() const override { return 1; }
    double value(const Vector& v) const override {
        require_dim(*this, v);
        const double x = v(0);
        return std::abs(x) <= 1.0 ? 0.5 * x * x : std::abs(x) - 0.5;
    }
    Vector gradient(const Vector& v) const override {
        require_dim(*this, v);
        const double x = v(0);
        Vector g(1);
        g(0) = std::abs(x) <= 1.0 ? x : (x > 0.0 ? 1.0 : -1.0);
        return g;
    }
    SparseMatrix hessian(const Vector& v) const override {
        require_dim(*this, v);
        // elastic branch wins the tie at |v| == 1
        return scalar_hessian(std::abs(v(0)) <= 1.0 ? 1.0 : 0.0);
    }
    std::optional<GrowthHint> growth_hint() const override { return GrowthHint{1.0, 0.5}; }
};

class Exp1d final : public PotentialModel {
public:
    Eigen::Index dim() const override { return 1; }
    double value(const Vector& v) const override {
        require_dim(*this, v);
        const double x = v(0);
        return std::exp(-x) + x - 1.0;
    }
    Vector gradient(const Vector& v) const override {
        require_dim(*this, v);
        Vector g(1);
        g(0) = 1.0 - std::exp(-v(0));
        return g;
    }
    SparseMatrix hessian(const Vector& v) const override {
        require_dim(*this, v);
        return scalar_hessian(std::exp(-v(0)));
    }
    std::optional<GrowthHint> growth_hint() const override { return GrowthHint{1.0, 2.0}; }
};

class PsdQuadratic final : public PotentialModel {
public:
    explicit PsdQuadratic(Eigen::MatrixXd a) : a_(std::move(a)) {}
    Eigen::Index dim() const override { return a_.rows(); }
    double value(const Vector& v) const override {
        require_dim(*this, v);
        return 0.5 * v.dot(a_ * v);
    }
    Vector gradient(const Vector& v) const override {
        require_dim(*this, v);
        return a_ * v;
    }
    SparseMatrix hessian(const Vector& v) const override {
        require_dim(*this, v);
        return dense_to_sparse(a_);
    }

private:
    Eigen::MatrixXd a_;
};

// Ball-of-radius-1/lambda Moreau model:
//   I_lam(v) = ||v||^2/2            for ||v|| <= 1/lam
//            = ||v||/lam - 1/(2 lam^2) otherwise
class BallModel final : public PotentialModel {
public:
    BallModel(double lambda, Eigen::Index n) : lambda_(lambda), n_(n) {}

    Eigen::Index dim() const override { return n_; }

    double value(const Vector& v) const override {
        require_dim(*this, v);
        const double r = v.norm();
        if (r <= 1.0 / lambda_) {
            return 0.5 * r * r;
        }
        return r / lambda_ - 0.5 / (lambda_ * lambda_);
    }

    Vector gradient(const Vector& v) const override {
        require_dim(*this, v);
        const double r = v.norm();
        if (r <= 1.0 / lambda_) {
            return v;
        }
        return v / (lambda_ * r);
    }

    SparseMatrix hessian(const Vector& v) const override {
        require_dim(*this, v);
        const double r = v.norm();
        if (r <= 1.0 / lambda_) {
            Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n_, n_);
            return dense_to_sparse(id);
        }
        Eigen::MatrixXd h =
            (Eigen::MatrixXd::Identity(n_, n_) / r - v * v.transpose() / (r * r * r)) / lambda_;
        return dense_to_sparse(h);
    }

    std::optional<GrowthHint> growth_hint() const override {
        return GrowthHint{1.0 / lambda_, 0.5 / (lambda_ * lambda_)};
    }

    Vector lambda_gradient(const Vector& v) const {
        const double r = v.norm();
        if (r <= 1.0 / lambda_) {
            return Vector::Zero(n_);
        }
        return -v / (lambda_ * lambda_ * r);
    }

private:
    double lambda_;
    Eigen::Index n_;
};

// Wedge Moreau model over M = {x in R^2 : x1 - lam*|x2| + 1 >= 0}. Regions:
//   A: v1 - lam*|v2| + 1 >= 0            identity (inside M)
//   B: between the two region boundaries  projection onto a wedge face
//   C: v1 + |v2|/lam + 1 <= 0             projection onto the apex (-1, 0)
class WedgeModel final : public PotentialModel {
public:
    explicit WedgeModel(double lambda) : lambda_(lambda) {}

    Eigen::Index dim() const override { return 2; }

    double value(const Vector& v) const override {
        require_dim(*this, v);
        const double v1 = v(0);
        const double a2 = std::abs(v(1));
        if (v1 - lambda_ * a2 + 1.0 >= 0.0) {
            return 0.5 * v.squaredNorm();
        }
        if (v1 + a2 / lambda_ + 1.0 >= 0.0) {
            const double q = lambda_ * v1 + a2 + lambda_;
            return -v1 - 0.5 + q * q / (2.0 * (lambda_ * lambda_ + 1.0));
        }
        return -v1 - 0.5;
    }

    Vector gradient(const Vector& v) const override {
        require_dim(*this, v);
        const double v1 = v(0);
        const double a2 = std::abs(v(1));
        const double s = sign2(v(1));
        Vector g(2);
        if (v1 - lambda_ * a2 + 1.0 >= 0.0) {
            g = v;
        } else if (v1 + a2 / lambda_ + 1.0 >= 0.0) {
            const double q = lambda_ * v1 + a2 + lambda_;
            const double den = lambda_ * lambda_ + 1.0;
            g(0) = -1.0 + lambda_ * q / den;
            g(1) = s * q / den;
        } else {
            g(0) = -1.0;
            g(1) = 0.0;
        }
        return g;
    }

    SparseMatrix hessian(const Vector& v) const override {
        require_dim(*this, v);
        const double v1 = v(0);
        const double a2 = std::abs(v(1));
        const double s = sign2(v(1));
        Eigen::Matrix2d h;
        if (v1 - lambda_ * a2 + 1.0 >= 0.0) {
            h = Eigen::Matrix2d::Identity();
        } else if (v1 + a2 / lambda_ + 1.0 >= 0.0) {
            const double den = lambda_ * lambda_ + 1.0;
            Eigen::Vector2d dir(lambda_, s);
            h = dir * dir.transpose() / den;
        } else {
            h = Eigen::Matrix2d::Zero();
        }
        return dense_to_sparse(h);
    }

    std::optional<GrowthHint> growth_hint() const override {
        // M contains the ball of radius 1/sqrt(1 + lam^2) around the origin.
        const double r = 1.0 / std::sqrt(1.0 + lambda_ * lambda_);
        return GrowthHint{r, 0.5 * r * r};
    }

    Vector lambda_gradient(const Vector& v) const {
        const double v1 = v(0);
        const double a2 = std::abs(v(1));
        const double s = sign2(v(1));
        Vector d = Vector::Zero(2);
        if (v1 - lambda_ * a2 + 1.0 >= 0.0 || v1 + a2 / lambda_ + 1.0 <= 0.0) {
            return d;
        }
        const double den = lambda_ * lambda_ + 1.0;
        const double q = lambda_ * v1 + a2 + lambda_;
        const double dq = v1 + 1.0;
        d(0) = ((q + lambda_ * dq) * den - 2.0 * lambda_ * lambda_ * q) / (den * den);
        d(1) = s * (dq * den - 2.0 * lambda_ * q) / (den * den);
        return d;
    }

private:
    static double sign2(double x) { return x < 0.0 ? -1.0 : 1.0; }

    double lambda_;
};

class BallFamily final : public ParamFamily {
public:
    BallFamily(double lambda0, Eigen::Index n) : lambda0_(lambda0), n_(n) {}

    Eigen::Index dim() const override { return n_; }
    double lambda0() const override { return lambda0_; }

    std::shared_ptr<const PotentialModel> model_at(double lambda) const override {
        if (!(lambda > 0.0)) {
            throw std::invalid_argument("ball family: lambda must be positive");
        }
        return std::make_shared<BallModel>(lambda, n_);
    }

    std::optional<Vector> parameter_gradient(double lambda, const Vector& v) const override {
        return BallModel(lambda, n_).lambda_gradient(v);
    }

private:
    double lambda0_;
    Eigen::Index n_;
};

class WedgeFamily final : public ParamFamily {
public:
    explicit WedgeFamily(double lambda0) : lambda0_(lambda0) {}

    Eigen::Index dim() const override { return 2; }
    double lambda0() const override { return lambda0_; }

    std::shared_ptr<const PotentialModel> model_at(double lambda) const override {
        if (!(lambda > 0.0)) {
            throw std::invalid_argument("wedge family: lambda must be positive");
        }
        return std::make_shared<WedgeModel>(lambda);
    }

    std::optional<Vector> parameter_gradient(double lambda, const Vector& v) const override {
        return WedgeModel(lambda).lambda_gradient(v);
    }

private:
    double lambda0_;
};

}  // namespace

AnalyticFamily make_scalar_example(ScalarKind kind) {
    Vector b(1);
    b(0) = 1.0;
    switch (kind) {
        case ScalarKind::quadratic: {
            ReferenceFos ref;
            ref.t_star_infinite = true;
            ref.psi = [](double omega) { return omega; };
            ref.notes = "t* is infinite; the continuation never saturates";
            return AnalyticFamily{"quadratic1d", std::make_shared<Quadratic1d>(), nullptr,
                                  LoadVector(b, "unit"), std::move(ref)};
        }
        case ScalarKind::capped_quadratic: {
            ReferenceFos ref;
            ref.t_star = 1.0;
            ref.psi = [](double omega) { return std::min(omega, 1.0); };
            return AnalyticFamily{"capped_quadratic1d", std::make_shared<CappedQuadratic1d>(), nullptr,
                                  LoadVector(b, "unit"), std::move(ref)};
        }
        case ScalarKind::exp: {
            ReferenceFos ref;
            ref.t_star = 1.0;
            ref.psi = [](double omega) { return 1.0 - std::exp(-omega); };
            ref.notes = "t* = 1 is not attained";
            return AnalyticFamily{"exp1d", std::make_shared<Exp1d>(), nullptr,
                                  LoadVector(b, "unit"), std::move(ref)};
        }
    }
    throw std::invalid_argument("make_scalar_example: unknown kind");
}

AnalyticFamily make_scalar_example(const std::string& kind) {
    if (kind == "quadratic" || kind == "quadratic1d") {
        return make_scalar_example(ScalarKind::quadratic);
    }
    if (kind == "capped_quadratic" || kind == "capped_quadratic1d") {
        return make_scalar_example(ScalarKind::capped_quadratic);
    }
    if (kind == "exp" || kind == "exp1d") {
        return make_scalar_example(ScalarKind::exp);
    }
    throw std::invalid_argument("make_scalar_example: unknown kind '" + kind + "'");
}

AnalyticFamily make_psd_quadratic(const Eigen::MatrixXd& A, const Vector& b) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        throw std::invalid_argument("make_psd_quadratic: A must be square");
    }
    if (b.size() != A.rows()) {
        throw std::invalid_argument("make_psd_quadratic: size mismatch between A and b");
    }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("make_psd_quadratic: A must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
        throw std::invalid_argument("make_psd_quadratic: A must be positive semidefinite");
    }

    // b orthogonal to Ker A  <=>  the system Au = b is solvable  <=>  t_inf infinite.
    bool orthogonal = true;
    for (Eigen::Index k = 0; k < A.rows(); ++k) {
        if (std::abs(eig.eigenvalues()(k)) <= 1e-12 * scale &&
            std::abs(eig.eigenvectors().col(k).dot(b)) > 1e-10 * b.norm()) {
            orthogonal = false;
        }
    }

    ReferenceFos ref;
    if (orthogonal) {
        ref.t_star_infinite = true;
        ref.notes = "b orthogonal to Ker A: solvable, t_inf infinite";
    } else {
        ref.t_star = 0.0;
        ref.notes = "b not orthogonal to Ker A: unsolvable, t_inf = 0";
    }
    return AnalyticFamily{"psd_quadratic", std::make_shared<PsdQuadratic>(A), nullptr,
                          LoadVector(b), std::move(ref)};
}

AnalyticFamily make_ball_family(double lambda0, const Vector& b) {
    if (!(lambda0 > 0.0 && lambda0 <= 1.0)) {
        throw std::invalid_argument("make_ball_family: lambda0 must lie in (0, 1]");
    }
    const double nb = b.norm();
    if (!(nb > 0.0 && nb < 1.0 / lambda0)) {
        throw std::invalid_argument("make_ball_family: need 0 < ||b|| < 1/lambda0");
    }
    auto family = std::make_shared<BallFamily>(lambda0, b.size());
    ReferenceFos ref;
    ref.lambda_star = 1.0 / nb;
    ref.t_star = 1.0 / nb;  // the lambda = 1 member
    ref.omega0 = nb * nb;
    ref.ell = [nb](double lam) { return lam > 0.0 ? 1.0 / (lam * nb) : kInf; };
    return AnalyticFamily{"ball", family->model_at(1.0), family, LoadVector(b), std::move(ref)};
}

AnalyticFamily make_wedge_family(double lambda0, const Eigen::Vector2d& b) {
    if (!(lambda0 > 0.0 && lambda0 <= 1.0)) {
        throw std::invalid_argument("make_wedge_family: lambda0 must lie in (0, 1]");
    }
    const double b1 = b(0);
    const double ab2 = std::abs(b(1));
    if (ab2 == 0.0) {
        throw std::invalid_argument("make_wedge_family: b2 must be nonzero");
    }
    if (!(b1 - lambda0 * ab2 + 1.0 > 0.0)) {
        throw std::invalid_argument("make_wedge_family: b must lie inside the wedge at lambda0");
    }
    auto family = std::make_shared<WedgeFamily>(lambda0);
    ReferenceFos ref;
    ref.lambda_star = (1.0 + b1) / ab2;
    ref.omega0 = b.squaredNorm();
    ref.ell = [b1, ab2](double lam) {
        const double den = lam * ab2 - b1;
        return den > 0.0 ? 1.0 / den : kInf;
    };
    if (ab2 - b1 > 0.0) {
        ref.t_star = 1.0 / (ab2 - b1);
    } else {
        ref.t_star_infinite = true;
    }
    Vector bv = b;
    return AnalyticFamily{"wedge", family->model_at(1.0), family, LoadVector(bv), std::move(ref)};
}

const ReferenceFos& reference_fos(const AnalyticFamily& family) { return family.reference; }

}  // namespace limitcurve
