#include "limitcurve/fem/model.hpp"

#include <cmath>
#include <stdexcept>

namespace limitcurve::fem {

namespace {

// quadratic shape functions on the reference triangle, area coordinates
// (l1, l2, l3) = (1 - xi - eta, xi, eta); corners first, then midsides
// on edges (1,2), (2,3), (3,1)
void shape_p2(double xi, double eta, std::array<double, 6>& n,
              std::array<Eigen::Vector2d, 6>& dn) {
    const double l1 = 1.0 - xi - eta;
    const double l2 = xi;
    const double l3 = eta;

    n = {l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0), l3 * (2.0 * l3 - 1.0),
         4.0 * l1 * l2, 4.0 * l2 * l3, 4.0 * l3 * l1};

    const Eigen::Vector2d d1(-1.0, -1.0);
    const Eigen::Vector2d d2(1.0, 0.0);
    const Eigen::Vector2d d3(0.0, 1.0);
    dn[0] = (4.0 * l1 - 1.0) * d1;
    dn[1] = (4.0 * l2 - 1.0) * d2;
    dn[2] = (4.0 * l3 - 1.0) * d3;
    dn[3] = 4.0 * (l2 * d1 + l1 * d2);
    dn[4] = 4.0 * (l3 * d2 + l2 * d3);
    dn[5] = 4.0 * (l1 * d3 + l3 * d1);
}

constexpr std::array<std::array<double, 2>, 3> kGaussPoints = {
    {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}}};
constexpr double kGaussWeight = 1.0 / 6.0;

class FemPotential final : public PotentialModel {
public:
    FemPotential(std::shared_ptr<const FemModel> model, double lambda)
        : model_(std::move(model)), lambda_(lambda) {}

    Eigen::Index dim() const override { return model_->dim(); }
    double value(const Vector& v) const override { return model_->assemble_value(v, lambda_); }
    Vector gradient(const Vector& v) const override {
        return model_->assemble_internal_force(v, lambda_);
    }
    SparseMatrix hessian(const Vector& v) const override {
        return model_->assemble_tangent(v, lambda_);
    }

private:
    std::shared_ptr<const FemModel> model_;
    double lambda_;
};

}  // namespace

FemModel::FemModel(Mesh mesh, Material material, double lambda0)
    : mesh_(std::move(mesh)), material_(material), lambda0_(lambda0) {
    material_.validate();
    if (!(lambda0_ > 0.0)) {
        throw std::invalid_argument("FemModel: lambda0 must be positive");
    }
    mesh_.validate();

    dof_.assign(2 * mesh_.n_nodes(), -1);
    for (int a = 0; a < mesh_.n_nodes(); ++a) {
        for (int comp = 0; comp < 2; ++comp) {
            if (!mesh_.fixed[a][comp]) {
                dof_[2 * a + comp] = n_free_++;
            }
        }
    }
    elements_.reserve(mesh_.elements.size());
    for (const auto& el : mesh_.elements) {
        ElementData ed;
        for (int a = 0; a < 6; ++a) {
            ed.dofs[2 * a] = dof_[2 * el.n[a]];
            ed.dofs[2 * a + 1] = dof_[2 * el.n[a] + 1];
        }
        const Eigen::Vector2d p0 = mesh_.nodes[el.n[0]];
        Eigen::Matrix2d jac;
        jac.col(0) = mesh_.nodes[el.n[1]] - p0;
        jac.col(1) = mesh_.nodes[el.n[2]] - p0;
        const double detj = jac.determinant();
        const Eigen::Matrix2d jinv_t = jac.inverse().transpose();

        for (int q = 0; q < 3; ++q) {
            std::array<double, 6> n;
            std::array<Eigen::Vector2d, 6> dn;
            shape_p2(kGaussPoints[q][0], kGaussPoints[q][1], n, dn);

            GaussPoint gp;
            gp.N = n;
            gp.weight = kGaussWeight * detj;
            gp.B.setZero();
            for (int a = 0; a < 6; ++a) {
                const Eigen::Vector2d grad = jinv_t * dn[a];
                gp.B(0, 2 * a) = grad.x();
                gp.B(1, 2 * a + 1) = grad.y();
                gp.B(2, 2 * a) = grad.y();
                gp.B(2, 2 * a + 1) = grad.x();
            }
            ed.gp[q] = gp;
        }
        elements_.push_back(ed);
    }
}

std::shared_ptr<FemModel> FemModel::create(Mesh mesh, Material material, double lambda0) {
    return std::shared_ptr<FemModel>(new FemModel(std::move(mesh), material, lambda0));
}

std::shared_ptr<const PotentialModel> FemModel::model_at(double lambda) const {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("FemModel: lambda must be positive");
    }
    auto self = std::static_pointer_cast<const FemModel>(shared_from_this());
    return std::make_shared<FemPotential>(std::move(self), lambda);
}

void FemModel::element_strain(const ElementData& el, const Vector& u, int q,
                              Eigen::Vector3d& eps) const {
    eps.setZero();
    const auto& gp = el.gp[q];
    for (int i = 0; i < 12; ++i) {
        const int d = el.dofs[i];
        if (d >= 0) {
            eps += gp.B.col(i) * u(d);
        }
    }
}

double FemModel::assemble_value(const Vector& u, double lambda) const {
    if (u.size() != n_free_) {
        throw std::invalid_argument("FemModel: displacement vector has wrong size");
    }
    double total = 0.0;
    Eigen::Vector3d eps;
    for (const auto& el : elements_) {
        for (int q = 0; q < 3; ++q) {
            element_strain(el, u, q, eps);
            total += el.gp[q].weight * mc_return_mapping(eps, material_, lambda).psi;
        }
    }
    return total;
}

Vector FemModel::assemble_internal_force(const Vector& u, double lambda) const {
    if (u.size() != n_free_) {
        throw std::invalid_argument("FemModel: displacement vector has wrong size");
    }
    Vector f = Vector::Zero(n_free_);
    Eigen::Vector3d eps;
    for (const auto& el : elements_) {
        for (int q = 0; q < 3; ++q) {
            element_strain(el, u, q, eps);
            const auto upd = mc_return_mapping(eps, material_, lambda);
            const Eigen::Matrix<double, 12, 1> fe =
                el.gp[q].weight * el.gp[q].B.transpose() * upd.sigma;
            for (int i = 0; i < 12; ++i) {
                const int d = el.dofs[i];
                if (d >= 0) {
                    f(d) += fe(i);
                }
            }
        }
    }
    return f;
}

SparseMatrix FemModel::assemble_tangent(const Vector& u, double lambda) const {
    if (u.size() != n_free_) {
        throw std::invalid_argument("FemModel: displacement vector has wrong size");
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(elements_.size() * 144);
    Eigen::Vector3d eps;
    for (const auto& el : elements_) {
        Eigen::Matrix<double, 12, 12> ke;
        ke.setZero();
        for (int q = 0; q < 3; ++q) {
            element_strain(el, u, q, eps);
            const auto upd = mc_return_mapping(eps, material_, lambda);
            const Eigen::Matrix<double, 3, 12> db = upd.tangent * el.gp[q].B;
            // fill the upper triangle and mirror, keeping ke exactly symmetric
            for (int i = 0; i < 12; ++i) {
                for (int j = i; j < 12; ++j) {
                    ke(i, j) += el.gp[q].weight * el.gp[q].B.col(i).dot(db.col(j));
                }
            }
        }
        for (int i = 0; i < 12; ++i) {
            for (int j = 0; j < i; ++j) {
                ke(i, j) = ke(j, i);
            }
        }
        for (int i = 0; i < 12; ++i) {
            const int di = el.dofs[i];
            if (di < 0) {
                continue;
            }
            for (int j = 0; j < 12; ++j) {
                const int dj = el.dofs[j];
                if (dj >= 0) {
                    triplets.emplace_back(di, dj, ke(i, j));
                }
            }
        }
    }
    SparseMatrix k(n_free_, n_free_);
    k.setFromTriplets(triplets.begin(), triplets.end());
    k.makeCompressed();
    return k;
}

LoadVector FemModel::assemble_gravity() const {
    Vector f = Vector::Zero(n_free_);
    for (const auto& el : elements_) {
        for (int q = 0; q < 3; ++q) {
            for (int a = 0; a < 6; ++a) {
                const int d = el.dofs[2 * a + 1];
                if (d >= 0) {
                    f(d) -= el.gp[q].weight * el.gp[q].N[a] * material_.gamma;
                }
            }
        }
    }
    return LoadVector(std::move(f), "gravity");
}

std::vector<double> FemModel::deviatoric_strain_field(const Vector& u) const {
    if (u.size() != n_free_) {
        throw std::invalid_argument("FemModel: displacement vector has wrong size");
    }
    std::vector<double> field(elements_.size(), 0.0);
    Eigen::Vector3d eps;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        double acc = 0.0;
        for (int q = 0; q < 3; ++q) {
            element_strain(elements_[e], u, q, eps);
            const double trace = eps(0) + eps(1);
            const double dxx = eps(0) - trace / 3.0;
            const double dyy = eps(1) - trace / 3.0;
            const double dzz = -trace / 3.0;
            const double exy = 0.5 * eps(2);
            acc += std::sqrt(dxx * dxx + dyy * dyy + dzz * dzz + 2.0 * exy * exy);
        }
        field[e] = acc / 3.0;
    }
    return field;
}

std::vector<std::vector<QuadPointState>> FemModel::quadrature_states(const Vector& u,
                                                                     double lambda) const {
    if (u.size() != n_free_) {
        throw std::invalid_argument("FemModel: displacement vector has wrong size");
    }
    std::vector<std::vector<QuadPointState>> states(elements_.size());
    Eigen::Vector3d eps;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        states[e].resize(3);
        for (int q = 0; q < 3; ++q) {
            element_strain(elements_[e], u, q, eps);
            const auto upd = mc_return_mapping(eps, material_, lambda);
            states[e][q] = QuadPointState{eps, upd.sigma, upd.sigma_zz, upd.regime};
        }
    }
    return states;
}

std::vector<Eigen::Vector2d> FemModel::nodal_displacements(const Vector& u) const {
    std::vector<Eigen::Vector2d> out(mesh_.n_nodes(), Eigen::Vector2d::Zero());
    for (int a = 0; a < mesh_.n_nodes(); ++a) {
        for (int comp = 0; comp < 2; ++comp) {
            const int d = dof_[2 * a + comp];
            if (d >= 0) {
                out[a](comp) = u(d);
            }
        }
    }
    return out;
}

Vector assemble_internal_force(const FemModel& model, const Vector& u, double lambda) {
    return model.assemble_internal_force(u, lambda);
}

SparseMatrix assemble_tangent(const FemModel& model, const Vector& u, double lambda) {
    return model.assemble_tangent(u, lambda);
}

LoadVector assemble_gravity(const FemModel& model) { return model.assemble_gravity(); }

std::vector<double> deviatoric_strain_field(const FemModel& model, const Vector& u) {
    return model.deviatoric_strain_field(u);
}

std::shared_ptr<FemModel> build_slope_fixture(const SlopeGeometry& geometry,
                                              const Material& material, double lambda0) {
    return FemModel::create(build_slope_mesh(geometry), material, lambda0);
}

}  // namespace limitcurve::fem
