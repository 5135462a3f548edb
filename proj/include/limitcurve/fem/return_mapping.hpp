#pragma once

#include "limitcurve/fem/material.hpp"

#include <Eigen/Dense>

namespace limitcurve::fem {

enum class PlasticRegime { elastic, face, edge_left, edge_right, apex };

const char* to_string(PlasticRegime regime);

/// Outcome of the stress update at one quadrature point. Stress components
/// use plane-strain Voigt order (xx, yy, xy) plus the out-of-plane normal
/// stress; the tangent maps engineering-strain increments (exx, eyy, gxy)
/// to stress increments and is exactly symmetric.
struct StressUpdate {
    Eigen::Vector3d sigma = Eigen::Vector3d::Zero();  // sxx, syy, sxy
    double sigma_zz = 0.0;
    double psi = 0.0;  // potential density at the updated stress
    Eigen::Matrix3d tangent = Eigen::Matrix3d::Zero();
    PlasticRegime regime = PlasticRegime::elastic;
    Eigen::Vector3d principal = Eigen::Vector3d::Zero();  // sorted descending
};

/// Mohr-Coulomb yield value (1+sin phi)*s1 - (1-sin phi)*s3 - 2c*cos phi for
/// principal stresses sorted descending, with strength reduced by lambda.
double mc_yield(const Eigen::Vector3d& principal_desc, const Material& mat, double lambda);

/// Closest-point return of the elastic trial stress onto the admissible set
/// in the compliance metric, carried out in principal-stress space with
/// face/edge/apex regime selection. eps is the plane-strain engineering
/// strain (exx, eyy, gxy); the out-of-plane normal strain is zero.
StressUpdate mc_return_mapping(const Eigen::Vector3d& eps, const Material& mat, double lambda);

}  // namespace limitcurve::fem
