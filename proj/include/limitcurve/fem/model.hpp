#pragma once

#include "limitcurve/core.hpp"
#include "limitcurve/fem/material.hpp"
#include "limitcurve/fem/mesh.hpp"
#include "limitcurve/fem/return_mapping.hpp"

#include <memory>
#include <vector>

namespace limitcurve::fem {

/// Per-quadrature-point state extracted from a displacement field.
struct QuadPointState {
    Eigen::Vector3d eps = Eigen::Vector3d::Zero();    // exx, eyy, gxy
    Eigen::Vector3d sigma = Eigen::Vector3d::Zero();  // sxx, syy, sxy
    double sigma_zz = 0.0;
    PlasticRegime regime = PlasticRegime::elastic;
};

/// Assembled plane-strain elastic-perfectly-plastic model. Exposes the
/// integrated potential as a strength-reduction family: model_at(lambda)
/// yields the potential with cohesion and friction reduced by lambda.
/// Immutable after construction; safe for concurrent reads.
class FemModel : public limitcurve::ParamFamily,
                 public std::enable_shared_from_this<FemModel> {
public:
    static std::shared_ptr<FemModel> create(Mesh mesh, Material material, double lambda0 = 1.0);

    Eigen::Index dim() const override { return n_free_; }
    double lambda0() const override { return lambda0_; }
    std::shared_ptr<const PotentialModel> model_at(double lambda) const override;

    const Mesh& mesh() const { return mesh_; }
    const Material& material() const { return material_; }
    int n_free_dofs() const { return n_free_; }

    /// Free-dof index of (node, component), or -1 when constrained.
    int dof(int node, int comp) const { return dof_[2 * node + comp]; }

    double assemble_value(const Vector& u, double lambda) const;
    Vector assemble_internal_force(const Vector& u, double lambda) const;
    SparseMatrix assemble_tangent(const Vector& u, double lambda) const;

    /// Consistent nodal load of the body force (0, -gamma) on the free dofs.
    LoadVector assemble_gravity() const;

    /// Quadrature-averaged Frobenius norm of the deviatoric strain, one value
    /// per element.
    std::vector<double> deviatoric_strain_field(const Vector& u) const;

    /// Per-element, per-quadrature-point states for diagnostics and output.
    std::vector<std::vector<QuadPointState>> quadrature_states(const Vector& u,
                                                               double lambda) const;

    /// Nodal displacement vectors with constrained components set to zero.
    std::vector<Eigen::Vector2d> nodal_displacements(const Vector& u) const;

private:
    FemModel(Mesh mesh, Material material, double lambda0);

    struct GaussPoint {
        Eigen::Matrix<double, 3, 12> B;
        std::array<double, 6> N;
        double weight;  // already includes the Jacobian determinant
    };
    struct ElementData {
        std::array<int, 12> dofs;
        std::array<GaussPoint, 3> gp;
    };

    void element_strain(const ElementData& el, const Vector& u, int q, Eigen::Vector3d& eps) const;

    Mesh mesh_;
    Material material_;
    double lambda0_;
    std::vector<int> dof_;
    int n_free_ = 0;
    std::vector<ElementData> elements_;
};

/// Thin wrappers matching the module-level operation names.
Vector assemble_internal_force(const FemModel& model, const Vector& u, double lambda);
SparseMatrix assemble_tangent(const FemModel& model, const Vector& u, double lambda);
LoadVector assemble_gravity(const FemModel& model);
std::vector<double> deviatoric_strain_field(const FemModel& model, const Vector& u);

/// Slope fixture with the default material (overridable).
std::shared_ptr<FemModel> build_slope_fixture(const SlopeGeometry& geometry,
                                              const Material& material = default_slope_material(),
                                              double lambda0 = 0.5);

}  // namespace limitcurve::fem
