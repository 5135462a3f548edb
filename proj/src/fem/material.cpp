#include "limitcurve/fem/material.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace limitcurve::fem {

void Material::validate() const {
    if (!(E > 0.0)) {
        throw std::invalid_argument("Material: Young's modulus must be positive");
    }
    if (!(nu >= 0.0 && nu < 0.5)) {
        throw std::invalid_argument("Material: Poisson's ratio must lie in [0, 0.5)");
    }
    if (!(c > 0.0)) {
        throw std::invalid_argument("Material: cohesion must be positive");
    }
    if (!(phi > 0.0 && phi < std::numbers::pi / 2.0)) {
        throw std::invalid_argument("Material: friction angle must lie in (0, pi/2)");
    }
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("Material: specific weight must be positive");
    }
}

Material Material::reduced(double lambda) const {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("Material: reduction factor must be positive");
    }
    Material m = *this;
    m.c = c / lambda;
    m.phi = std::atan(std::tan(phi) / lambda);
    return m;
}

double Material::lame_lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }

double Material::shear_modulus() const { return E / (2.0 * (1.0 + nu)); }

Material default_slope_material() {
    Material m;
    m.E = 40e6;
    m.nu = 0.3;
    m.c = 15e3;
    m.phi = 20.0 * std::numbers::pi / 180.0;
    m.gamma = 20e3;
    return m;
}

}  // namespace limitcurve::fem
