#pragma once

// Test-only oracles, deliberately independent of the library's closed forms:
// projected gradient descent for Moreau-family gradients, Dykstra alternating
// projections for the Mohr-Coulomb stress return, and a dense solve for the
// bordered systems.

#include "limitcurve/core.hpp"
#include "limitcurve/fem/material.hpp"
#include "limitcurve/fem/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace limitcurve::testing {

using limitcurve::Vector;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

inline Vector random_vector(std::mt19937_64& gen, Eigen::Index n, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = dist(gen);
    }
    return v;
}

/// Euclidean projection onto the ball of radius r (feasibility restore step).
inline Vector clip_to_ball(const Vector& x, double r) {
    const double n = x.norm();
    return n <= r ? x : Vector(x * (r / n));
}

/// Euclidean projection onto the wedge {x : x1 - lam*|x2| + 1 >= 0} by
/// folding the symmetric half, projecting onto the half-plane, and snapping
/// to the apex when the fold constraint breaks.
inline Eigen::Vector2d clip_to_wedge(const Eigen::Vector2d& x, double lam) {
    if (x(0) - lam * std::abs(x(1)) + 1.0 >= 0.0) {
        return x;
    }
    const double s = x(1) < 0.0 ? -1.0 : 1.0;
    Eigen::Vector2d q(x(0), std::abs(x(1)));
    const Eigen::Vector2d a(1.0, -lam);  // half-plane a.x + 1 >= 0
    const double viol = a.dot(q) + 1.0;
    q -= (viol / a.squaredNorm()) * a;
    if (q(1) < 0.0) {
        q << -1.0, 0.0;
    }
    return {q(0), s * q(1)};
}

/// Projected gradient descent on |x - v|^2/2 over the feasible set given by
/// `restore`; converges to the Euclidean projection of v.
inline Vector pgd_projection(const Vector& v, const std::function<Vector(const Vector&)>& restore,
                             int iterations = 10000, double step = 0.5) {
    Vector x = restore(v);
    for (int k = 0; k < iterations; ++k) {
        x = restore(Vector(x - step * (x - v)));
    }
    return x;
}

/// Dense solve of [[H, -g],[g', 0]] (du, ds) = (r1, r2).
inline std::pair<Vector, double> dense_bordered_solve(const Eigen::MatrixXd& h, const Vector& g,
                                                      const Vector& r1, double r2) {
    const Eigen::Index n = h.rows();
    Eigen::MatrixXd full(n + 1, n + 1);
    full.setZero();
    full.topLeftCorner(n, n) = h;
    full.topRightCorner(n, 1) = -g;
    full.bottomLeftCorner(1, n) = g.transpose();
    Vector rhs(n + 1);
    rhs.head(n) = r1;
    rhs(n) = r2;
    const Vector sol = full.fullPivLu().solve(rhs);
    return {sol.head(n), sol(n)};
}

/// Mohr-Coulomb projection oracle: Dykstra alternating projections onto the
/// six yield half-planes, run in coordinates where the compliance metric is
/// Euclidean. Input and output are unsorted principal stresses.
inline Eigen::Vector3d dykstra_mc_projection(const Eigen::Vector3d& trial,
                                             const limitcurve::fem::Material& mat,
                                             double lambda, int max_cycles = 50000) {
    const limitcurve::fem::Material red = mat.reduced(lambda);
    const double s = std::sin(red.phi);
    const double k = 2.0 * red.c * std::cos(red.phi);

    Eigen::Matrix3d compliance;
    compliance.setConstant(-mat.nu / mat.E);
    compliance.diagonal().setConstant(1.0 / mat.E);
    const Eigen::Matrix3d l = compliance.llt().matrixL();

    // half-planes a_i' sigma <= k for every ordered pair of principal axes
    std::array<Eigen::Vector3d, 6> normals;
    int idx = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == j) {
                continue;
            }
            Eigen::Vector3d a = Eigen::Vector3d::Zero();
            a(i) = 1.0 + s;
            a(j) = -(1.0 - s);
            normals[idx++] = l.triangularView<Eigen::Lower>().solve(a);
        }
    }

    Eigen::Vector3d z = l.transpose() * trial;
    std::array<Eigen::Vector3d, 6> increments;
    increments.fill(Eigen::Vector3d::Zero());

    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        const Eigen::Vector3d z_before = z;
        for (int c = 0; c < 6; ++c) {
            const Eigen::Vector3d y = z + increments[c];
            const double viol = normals[c].dot(y) - k;
            Eigen::Vector3d proj = y;
            if (viol > 0.0) {
                proj = y - (viol / normals[c].squaredNorm()) * normals[c];
            }
            increments[c] = y - proj;
            z = proj;
        }
        if ((z - z_before).norm() <= 1e-14 * (1.0 + z.norm())) {
            break;
        }
    }
    return l.transpose().triangularView<Eigen::Upper>().solve(z);
}

/// Whether central differences of value() at step h are a trustworthy probe
/// of the gradient at u, given a target relative tolerance. The h^2
/// truncation term is estimated per component from a five-point third
/// difference of the value alone, so a wrong gradient cannot mask itself:
/// samples sitting on curvature kinks (regime changes, tied principal
/// strains) get rejected, everything else must pass the gradient check.
inline bool fd_trustworthy(const limitcurve::PotentialModel& pot, const Vector& u, double h,
                           double tol) {
    const Vector g = pot.gradient(u);
    Vector probe = u;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        probe(i) = u(i) + h;
        const double vp = pot.value(probe);
        probe(i) = u(i) - h;
        const double vm = pot.value(probe);
        probe(i) = u(i) + 2.0 * h;
        const double vp2 = pot.value(probe);
        probe(i) = u(i) - 2.0 * h;
        const double vm2 = pot.value(probe);
        probe(i) = u(i);
        const double third = (vp2 - 2.0 * vp + 2.0 * vm - vm2) / (2.0 * h * h * h);
        if (std::abs(third) * h * h / 6.0 > 0.3 * tol * (1.0 + std::abs(g(i)))) {
            return false;
        }
    }
    return true;
}

}  // namespace limitcurve::testing
