#include "limitcurve/fem/return_mapping.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace limitcurve::fem {

namespace {

constexpr double kApexTangentScale = 1e-8;

// 3x3 restriction of the elastic tensor to (coaxial) principal components.
Eigen::Matrix3d principal_elastic(double lam, double g) {
    Eigen::Matrix3d d;
    d.setConstant(lam);
    d.diagonal().array() += 2.0 * g;
    return d;
}

struct Candidate {
    Eigen::Vector3d s;         // returned principal stresses, sorted slots
    Eigen::Matrix3d tangent;   // ds/de in sorted principal coordinates
    PlasticRegime regime = PlasticRegime::elastic;
    bool valid = false;
};

Candidate face_return(const Eigen::Vector3d& t, const Eigen::Matrix3d& d3,
                      const Eigen::Vector3d& g, double f_tr, double order_tol) {
    Candidate c;
    const Eigen::Vector3d dg = d3 * g;
    const double den = g.dot(dg);
    const double mu = f_tr / den;
    c.s = t - mu * dg;
    c.regime = PlasticRegime::face;
    c.tangent = d3 - dg * dg.transpose() / den;
    c.valid = mu >= 0.0 && c.s(0) >= c.s(1) - order_tol && c.s(1) >= c.s(2) - order_tol;
    return c;
}

Candidate edge_return(const Eigen::Vector3d& t, const Eigen::Matrix3d& d3,
                      const Eigen::Vector3d& g1, const Eigen::Vector3d& g2,
                      double f1, double f2, PlasticRegime regime, double order_tol) {
    Candidate c;
    Eigen::Matrix<double, 3, 2> u;
    u.col(0) = d3 * g1;
    u.col(1) = d3 * g2;
    Eigen::Matrix2d m;
    m(0, 0) = g1.dot(u.col(0));
    m(0, 1) = g1.dot(u.col(1));
    m(1, 0) = g2.dot(u.col(0));
    m(1, 1) = g2.dot(u.col(1));
    const Eigen::Vector2d mu = m.ldlt().solve(Eigen::Vector2d(f1, f2));
    c.s = t - u * mu;
    c.regime = regime;
    c.tangent = d3 - u * m.ldlt().solve(u.transpose());
    const double mu_tol = -1e-12 * (std::abs(f1) + std::abs(f2) + 1.0);
    c.valid = mu(0) >= mu_tol && mu(1) >= mu_tol && c.s(0) >= c.s(1) - order_tol &&
              c.s(1) >= c.s(2) - order_tol;
    return c;
}

}  // namespace

const char* to_string(PlasticRegime regime) {
    switch (regime) {
        case PlasticRegime::elastic: return "elastic";
        case PlasticRegime::face: return "face";
        case PlasticRegime::edge_left: return "edge_left";
        case PlasticRegime::edge_right: return "edge_right";
        case PlasticRegime::apex: return "apex";
    }
    return "unknown";
}

double mc_yield(const Eigen::Vector3d& p, const Material& mat, double lambda) {
    const Material red = mat.reduced(lambda);
    const double s = std::sin(red.phi);
    return (1.0 + s) * p(0) - (1.0 - s) * p(2) - 2.0 * red.c * std::cos(red.phi);
}

StressUpdate mc_return_mapping(const Eigen::Vector3d& eps, const Material& mat, double lambda) {
    if (!eps.allFinite()) {
        throw std::invalid_argument("mc_return_mapping: non-finite strain");
    }
    mat.validate();
    const Material red = mat.reduced(lambda);
    const double lam = mat.lame_lambda();
    const double g = mat.shear_modulus();
    const double sphi = std::sin(red.phi);
    const double coh = 2.0 * red.c * std::cos(red.phi);

    const double exx = eps(0);
    const double eyy = eps(1);
    const double gxy = eps(2);

    // in-plane principal strains and frame; the zz direction decouples
    const double em = 0.5 * (exx + eyy);
    const double er = std::hypot(0.5 * (exx - eyy), 0.5 * gxy);
    double c2 = 1.0;
    double s2 = 0.0;
    if (er > 1e-300) {
        c2 = 0.5 * (exx - eyy) / er;
        s2 = 0.5 * gxy / er;
    }
    const double e_plus = em + er;
    const double e_minus = em - er;

    const double tr = exx + eyy;
    // trial principal stresses: slots (in-plane max, in-plane min, zz)
    Eigen::Vector3d p;
    p(0) = lam * tr + 2.0 * g * e_plus;
    p(1) = lam * tr + 2.0 * g * e_minus;
    p(2) = lam * tr;

    std::array<int, 3> idx = {0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return p(a) > p(b); });
    Eigen::Vector3d t;
    for (int k = 0; k < 3; ++k) {
        t(k) = p(idx[k]);
    }
    std::array<int, 3> inv{};
    for (int k = 0; k < 3; ++k) {
        inv[idx[k]] = k;
    }

    const Eigen::Matrix3d d3 = principal_elastic(lam, g);
    const double f_tr = (1.0 + sphi) * t(0) - (1.0 - sphi) * t(2) - coh;

    Candidate chosen;
    if (f_tr <= 0.0) {
        chosen.s = t;
        chosen.tangent = d3;
        chosen.regime = PlasticRegime::elastic;
        chosen.valid = true;
    } else {
        const double order_tol = 1e-10 * (std::abs(t(0)) + std::abs(t(2)) + coh);
        const Eigen::Vector3d g13(1.0 + sphi, 0.0, -(1.0 - sphi));
        const Eigen::Vector3d g23(0.0, 1.0 + sphi, -(1.0 - sphi));
        const Eigen::Vector3d g12(1.0 + sphi, -(1.0 - sphi), 0.0);
        const double f23 = (1.0 + sphi) * t(1) - (1.0 - sphi) * t(2) - coh;
        const double f12 = (1.0 + sphi) * t(0) - (1.0 - sphi) * t(1) - coh;

        chosen = face_return(t, d3, g13, f_tr, order_tol);
        if (!chosen.valid) {
            auto left = edge_return(t, d3, g13, g23, f_tr, f23, PlasticRegime::edge_left, order_tol);
            auto right = edge_return(t, d3, g13, g12, f_tr, f12, PlasticRegime::edge_right, order_tol);
            if (left.valid) {
                chosen = left;
            } else if (right.valid) {
                chosen = right;
            } else {
                const double apex = coh / (2.0 * sphi);
                chosen.s = Eigen::Vector3d::Constant(apex);
                chosen.tangent = kApexTangentScale * d3;
                chosen.regime = PlasticRegime::apex;
                chosen.valid = true;
            }
        }
    }

    StressUpdate out;
    out.regime = chosen.regime;
    out.principal = chosen.s;

    // scatter back to the unsorted slots (in-plane max/min, zz)
    Eigen::Vector3d q;
    Eigen::Matrix3d a;  // ds/de in unsorted principal coordinates
    for (int i = 0; i < 3; ++i) {
        q(i) = chosen.s(inv[i]);
        for (int j = 0; j < 3; ++j) {
            a(i, j) = chosen.tangent(inv[i], inv[j]);
        }
    }

    const double qm = 0.5 * (q(0) + q(1));
    const double qr = 0.5 * (q(0) - q(1));
    out.sigma(0) = qm + qr * c2;
    out.sigma(1) = qm - qr * c2;
    out.sigma(2) = qr * s2;
    out.sigma_zz = q(2);

    // spectral part of the tangent: eigenprojections of the in-plane strain
    const Eigen::Vector3d vp(0.5 * (1.0 + c2), 0.5 * (1.0 - c2), 0.5 * s2);
    const Eigen::Vector3d vm(0.5 * (1.0 - c2), 0.5 * (1.0 + c2), -0.5 * s2);
    double rho;
    if (er > 1e-12 * (std::abs(e_plus) + std::abs(e_minus) + 1e-6)) {
        rho = (q(0) - q(1)) / (e_plus - e_minus);
    } else {
        rho = 0.5 * (a(0, 0) - a(0, 1) - a(1, 0) + a(1, 1));
    }
    Eigen::Matrix3d ident = Eigen::Matrix3d::Identity();
    ident(2, 2) = 0.5;
    Eigen::Matrix3d tang = a(0, 0) * vp * vp.transpose() + a(0, 1) * vp * vm.transpose() +
                           a(1, 0) * vm * vp.transpose() + a(1, 1) * vm * vm.transpose() +
                           rho * (ident - vp * vp.transpose() - vm * vm.transpose());
    out.tangent = 0.5 * (tang + tang.transpose());

    // psi = sigma:eps - sigma:C:sigma/2 with the full plane-strain tensors
    const double sig_colon_eps = out.sigma(0) * exx + out.sigma(1) * eyy + out.sigma(2) * gxy;
    const double ss = out.sigma(0) * out.sigma(0) + out.sigma(1) * out.sigma(1) +
                      2.0 * out.sigma(2) * out.sigma(2) + out.sigma_zz * out.sigma_zz;
    const double trs = out.sigma(0) + out.sigma(1) + out.sigma_zz;
    const double compliance = ((1.0 + mat.nu) * ss - mat.nu * trs * trs) / mat.E;
    out.psi = sig_colon_eps - 0.5 * compliance;
    return out;
}

}  // namespace limitcurve::fem
