#pragma once

namespace limitcurve::fem {

/// Isotropic elastic-perfectly-plastic material with Mohr-Coulomb strength.
/// Units: Pa for moduli and cohesion, radians for the friction angle,
/// N/m^3 for the specific weight.
struct Material {
    double E = 0.0;
    double nu = 0.0;
    double c = 0.0;
    double phi = 0.0;
    double gamma = 0.0;

    void validate() const;

    /// Strength reduced by the factor lambda: c/lambda and atan(tan(phi)/lambda).
    /// The elastic constants are untouched. The admissible stress set shrinks
    /// monotonically as lambda grows, with the apex c*cot(phi) held fixed.
    Material reduced(double lambda) const;

    double lame_lambda() const;
    double shear_modulus() const;
};

/// Material values used by the slope fixtures.
Material default_slope_material();

}  // namespace limitcurve::fem
