#include "limitcurve/analytic.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace limitcurve;
namespace lt = limitcurve::testing;

namespace {

Vector vec1(double x) {
    Vector v(1);
    v(0) = x;
    return v;
}

Vector vec2(double x, double y) {
    Vector v(2);
    v(0) = x;
    v(1) = y;
    return v;
}

}  // namespace

TEST_CASE("scalar example factories") {
    const auto capped = make_scalar_example(ScalarKind::capped_quadratic);
    CHECK(capped.model->value(vec1(2.0)) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(capped.reference.t_star == doctest::Approx(1.0));

    const auto exp_fam = make_scalar_example(ScalarKind::exp);
    CHECK(exp_fam.model->gradient(vec1(0.0))(0) == 0.0);
    CHECK(exp_fam.reference.t_star == doctest::Approx(1.0));

    const auto quad = make_scalar_example(ScalarKind::quadratic);
    CHECK(quad.reference.t_star_infinite);
    CHECK_FALSE(quad.reference.t_star.has_value());

    CHECK_THROWS_AS(make_scalar_example("unknown"), std::invalid_argument);
    CHECK(make_scalar_example("capped_quadratic").name == "capped_quadratic1d");
}

TEST_CASE("psd quadratic factory and solvability reference") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.0, 0.0, 0.0;

    const auto solvable = make_psd_quadratic(a, vec2(1.0, 0.0));
    CHECK(solvable.reference.t_star_infinite);

    const auto unsolvable = make_psd_quadratic(a, vec2(0.0, 1.0));
    CHECK_FALSE(unsolvable.reference.t_star_infinite);
    CHECK(unsolvable.reference.t_star == doctest::Approx(0.0));

    const auto identity = make_psd_quadratic(Eigen::MatrixXd::Identity(2, 2), vec2(1.0, 0.0));
    const Vector v = vec2(0.3, -0.4);
    CHECK((identity.model->gradient(v) - v).norm() == 0.0);
    CHECK(identity.model->value(v) == doctest::Approx(0.5 * v.squaredNorm()));

    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(make_psd_quadratic(asym, vec2(1.0, 0.0)), std::invalid_argument);

    Eigen::MatrixXd indef(2, 2);
    indef << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(make_psd_quadratic(indef, vec2(1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("ball family closed forms") {
    const auto ball = make_ball_family(0.5, vec2(0.6, 0.0));
    CHECK(*ball.reference.lambda_star == doctest::Approx(1.0 / 0.6).epsilon(1e-14));
    CHECK(*ball.reference.omega0 == doctest::Approx(0.36).epsilon(1e-14));

    const auto at1 = ball.family->model_at(1.0);
    CHECK(at1->value(vec2(0.5, 0.0)) == doctest::Approx(0.125).epsilon(1e-15));
    const Vector g = at1->gradient(vec2(2.0, 0.0));
    CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g(1) == 0.0);

    CHECK_THROWS_AS(make_ball_family(0.5, vec2(3.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(make_ball_family(0.0, vec2(0.6, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(make_ball_family(0.5, vec2(0.0, 0.0)), std::invalid_argument);
}

TEST_CASE("wedge family closed forms") {
    const auto wedge = make_wedge_family(0.5, Eigen::Vector2d(0.5, 1.0));
    CHECK(*wedge.reference.lambda_star == doctest::Approx(1.5).epsilon(1e-14));

    const auto at1 = wedge.family->model_at(1.0);
    // first branch: v1 - |v2| + 1 = 3 >= 0
    CHECK(at1->value(vec2(2.0, 0.0)) == doctest::Approx(2.0).epsilon(1e-15));
    // third branch: v1 + |v2| + 1 = -4 <= 0
    CHECK(at1->value(vec2(-5.0, 0.0)) == doctest::Approx(4.5).epsilon(1e-15));

    CHECK_THROWS_AS(make_wedge_family(0.5, Eigen::Vector2d(0.5, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(make_wedge_family(0.5, Eigen::Vector2d(-2.0, 1.0)), std::invalid_argument);
}

TEST_CASE("reference_fos values") {
    const auto ball = make_ball_family(0.5, vec2(0.6, 0.0));
    CHECK(reference_fos(ball).ell(1.0) == doctest::Approx(1.0 / 0.6).epsilon(1e-14));

    const auto wedge = make_wedge_family(0.5, Eigen::Vector2d(0.5, 1.0));
    CHECK(reference_fos(wedge).ell(1.5) == doctest::Approx(1.0).epsilon(1e-14));

    const auto capped = make_scalar_example(ScalarKind::capped_quadratic);
    CHECK(*reference_fos(capped).t_star == doctest::Approx(1.0));
}

TEST_CASE("reference ell is strictly decreasing with ell(lambda*) = 1") {
    for (const auto& fam : {make_ball_family(0.5, vec2(0.6, 0.0)),
                            make_wedge_family(0.5, Eigen::Vector2d(0.5, 1.0))}) {
        const auto& ref = fam.reference;
        REQUIRE(ref.lambda_star.has_value());
        CHECK(ref.ell(*ref.lambda_star) == doctest::Approx(1.0).epsilon(1e-14));
        double prev = ref.ell(fam.family->lambda0() + 0.3);
        for (double lam = fam.family->lambda0() + 0.45; lam < 4.0; lam += 0.15) {
            const double cur = ref.ell(lam);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("family gradients equal the projection onto the admissible set") {
    auto gen = lt::rng(21);

    const auto ball = make_ball_family(0.5, vec2(0.6, 0.0));
    for (double lambda : {0.5, 1.0, 1.7}) {
        const auto model = ball.family->model_at(lambda);
        const double radius = 1.0 / lambda;
        for (int trial = 0; trial < 250; ++trial) {
            const Vector v = lt::random_vector(gen, 2, 4.0);
            const Vector projected = lt::pgd_projection(
                v, [radius](const Vector& x) { return lt::clip_to_ball(x, radius); }, 10000, 0.5);
            CHECK((model->gradient(v) - projected).norm() <= 1e-8);
        }
    }

    const auto wedge = make_wedge_family(0.5, Eigen::Vector2d(0.5, 1.0));
    for (double lambda : {0.5, 1.0, 1.7}) {
        const auto model = wedge.family->model_at(lambda);
        for (int trial = 0; trial < 250; ++trial) {
            const Vector v = lt::random_vector(gen, 2, 4.0);
            const Vector projected = lt::pgd_projection(
                v,
                [lambda](const Vector& x) {
                    return Vector(lt::clip_to_wedge(Eigen::Vector2d(x(0), x(1)), lambda));
                },
                10000, 0.5);
            CHECK((model->gradient(v) - projected).norm() <= 1e-8);
        }
    }
}

TEST_CASE("wedge branch values agree at the region boundaries") {
    const double lambda = 1.3;
    auto branch_inner = [](const Eigen::Vector2d& v) { return 0.5 * v.squaredNorm(); };
    auto branch_middle = [lambda](const Eigen::Vector2d& v) {
        const double q = lambda * v(0) + std::abs(v(1)) + lambda;
        return -v(0) - 0.5 + q * q / (2.0 * (lambda * lambda + 1.0));
    };
    auto branch_outer = [](const Eigen::Vector2d& v) { return -v(0) - 0.5; };

    for (double a2 : {0.2, 0.9, 2.7, 6.0}) {
        for (double sgn : {1.0, -1.0}) {
            const Eigen::Vector2d on_first(lambda * a2 - 1.0, sgn * a2);
            CHECK(std::abs(branch_inner(on_first) - branch_middle(on_first)) <= 1e-12 *
                      (1.0 + std::abs(branch_inner(on_first))));
            const Eigen::Vector2d on_second(-a2 / lambda - 1.0, sgn * a2);
            CHECK(std::abs(branch_middle(on_second) - branch_outer(on_second)) <= 1e-12 *
                      (1.0 + std::abs(branch_outer(on_second))));
        }
    }
}

TEST_CASE("parameter gradients match finite differences at region-interior points") {
    const auto ball = make_ball_family(0.5, vec2(0.6, 0.0));
    const auto wedge = make_wedge_family(0.5, Eigen::Vector2d(0.5, 1.0));

    struct Probe {
        const ParamFamily* family;
        double lambda;
        Vector v;
    };
    const std::vector<Probe> probes = {
        {ball.family.get(), 1.0, vec2(0.3, 0.2)},    // inside the ball
        {ball.family.get(), 1.0, vec2(2.0, 1.0)},    // outside, radial branch
        {ball.family.get(), 1.4, vec2(-1.8, 0.4)},   // outside, radial branch
        {wedge.family.get(), 1.0, vec2(2.0, 0.5)},   // inside the wedge
        {wedge.family.get(), 1.0, vec2(-1.5, 1.0)},  // face-projection region
        {wedge.family.get(), 1.3, vec2(-1.6, -0.8)},
        {wedge.family.get(), 1.0, vec2(-5.0, 0.3)},  // apex-projection region
    };
    for (const auto& probe : probes) {
        const auto analytic = probe.family->parameter_gradient(probe.lambda, probe.v);
        REQUIRE(analytic.has_value());
        const double h = 1e-7;
        const Vector fd = (probe.family->model_at(probe.lambda + h)->gradient(probe.v) -
                           probe.family->model_at(probe.lambda - h)->gradient(probe.v)) /
                          (2.0 * h);
        CHECK((*analytic - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
    }
}
