#include <doctest.h>

#include <cmath>

#include "spiral/boundary.hpp"
#include "spiral/coeffs.hpp"
#include "spiral/errors.hpp"
#include "verify.hpp"

using namespace spiral;

TEST_CASE("density from the Bernoulli relation") {
    const BackgroundParams p = reference_params();
    CHECK(density_from_bernoulli(p.K0(), p.S0, p.U1_0, p.U2_0, 0.0, p.gamma) == doctest::Approx(0.5).epsilon(1e-15));
    // bracket K + Phi - |u|^2/2 = 0.375 with gamma = 3, S = 0
    CHECK(density_from_bernoulli(0.375, 0.0, 0.0, 0.0, 0.0, 3.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sound_speed_sq(0.375, 0.0, 0.0, 0.0, 3.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(density_from_bernoulli(0.5, 0.0, 1.0, 0.0, 0.0, 3.0), SolverError);
    CHECK_THROWS_AS(sound_speed_sq(0.5, 1.0, 0.0, 0.0, 3.0), SolverError);
}

TEST_CASE("barred coefficients at r0") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 65);
    const RadialCoeffs rc = linear_coeffs(f);
    CHECK(rc.A22[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(rc.A12[0] == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(rc.a1[0] == doctest::Approx(11.5).epsilon(1e-13));
    CHECK(rc.a2[0] == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(rc.a2t[0] == doctest::Approx(5.625).epsilon(1e-13));
    CHECK(rc.b3[0] == doctest::Approx(-7.0).epsilon(1e-13));
    CHECK(f.rho_p[0] == doctest::Approx(1.75).epsilon(1e-14));
    CHECK(f.U1_p[0] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(rc.theta_r1 > 0);
    CHECK(rc.dual_form_discrepancy < 1e-9);
    CHECK(rc.corrected_relation_residual < 1e-12);
    CHECK(rc.printed_relation_residual > 0.1);  // the printed relation does not hold
}

TEST_CASE("dual forms across admissible parameters") {
    for (const auto& p : spiralflow::admissible_sample(25, 3u)) {
        const AdmissibleRadius R = admissible_outer_radius(p, p.r0 + 0.5, 1e-8);
        const BackgroundFlow f = integrate_background(p, 0.5 * (p.r0 + R.R), 129, false);
        const RadialCoeffs rc = linear_coeffs(f);
        CHECK(rc.dual_form_discrepancy < 1e-9);
        // A22 changes sign with M2^2 - 1, which the admissible window does not fix
        for (int i = 0; i < rc.n(); ++i) CHECK((rc.A22[i] > 0) == (f.M2sq[i] > 1));
    }
}

TEST_CASE("frozen coefficients at the zero iterate are the barred ones") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 33);
    const RadialCoeffs rc = linear_coeffs(f);
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(f.n(), 12);
    const FrozenCoeffs fc = frozen_coeffs(f, rc, Z, Z, Z);
    // the frozen path recomputes c^2 from Bernoulli, so the gap is the O(h^4) Bernoulli defect
    CHECK(fc.dev_A22 < 1e-9);
    CHECK(fc.dev_A12 < 1e-9);
    const BackgroundFlow g = integrate_background(reference_params(), 2.05, 65);
    const Eigen::MatrixXd Zg = Eigen::MatrixXd::Zero(g.n(), 12);
    CHECK(fc.dev_A22 / frozen_coeffs(g, linear_coeffs(g), Zg, Zg, Zg).dev_A22 > 12.0);
    CHECK(fc.mu0 > 0);

    // deviation is linear in the iterate size
    const Eigen::MatrixXd V = Eigen::MatrixXd::Constant(f.n(), 12, 1e-4);
    const double d1 = frozen_coeffs(f, rc, V, V, V).dev_A22;
    const double d2 = frozen_coeffs(f, rc, 2 * V, 2 * V, 2 * V).dev_A22;
    CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(1e-3));

    // c^2 - U1^2 -> 0
    const Eigen::MatrixXd big = Eigen::MatrixXd::Constant(f.n(), 12, 0.35);
    CHECK_THROWS_AS(frozen_coeffs(f, rc, big, Z, Z), SolverError);
}

TEST_CASE("sources vanish at the origin and scale with the data") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 33);
    const RadialCoeffs rc = linear_coeffs(f);
    AnnulusDisc disc;
    disc.M = 4;
    const int nt = disc.samples();
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(f.n(), nt);
    const FrozenCoeffs fc = frozen_coeffs(f, rc, Z, Z, Z);

    const SourceBundle s0 = irrotational_sources(f, rc, fc, unperturbed_boundary(f, disc.M), disc, Z, Z, Z, Z, Z);
    CHECK(s0.F1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s0.F2.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(s0.F3.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(s0.F4.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(s0.d0 == 0.0);

    auto with = [&](double w) {
        AnnulusData d;
        d.U2en = {"eps_sin_k", w, 1};
        d.Een = {"eps_cos_k", w, 2};
        d.b = {"eps_bump_k", w, 1};
        return make_annulus_boundary(f, disc.M, d);
    };
    const AnnulusBoundary b1 = with(1e-4), b2 = with(2e-4);
    CHECK(std::abs(d0_of(f, b1)) < 1e-15);  // mean-zero U2en
    const SourceBundle s1 = irrotational_sources(f, rc, fc, b1, disc, Z, Z, Z, Z, Z);
    const SourceBundle s2 = irrotational_sources(f, rc, fc, b2, disc, Z, Z, Z, Z, Z);
    CHECK(s2.F3.norm() / s1.F3.norm() == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(s2.F4.norm() / s1.F4.norm() == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("d0 of a mean-shifted swirl") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 33);
    AnnulusData d;
    d.U2en = {"eps_cos_k", 1e-3, 0};  // constant shift 1e-3
    const AnnulusBoundary b = make_annulus_boundary(f, 4, d);
    CHECK(d0_of(f, b) == doctest::Approx(-f.r0 * 1e-3).epsilon(1e-12));
}

TEST_CASE("G1 agrees with the full nonlinear equation") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 65);
    const RadialCoeffs rc = linear_coeffs(f);
    const double e = 1e-3;
    for (int i : {7, 30, 52}) {
        const LocalBackground q = local_background(f, rc, i);
        const double W1 = e, W2 = -0.7 * e, W3 = 0.4 * e, N1 = 0.2 * e;
        const double W1r = 3 * e, W1t = -e, W2r = 2 * e, W2t = 0.5 * e, W3r = 0.3 * e, W3t = -0.2 * e;
        const double U1 = q.U1 + W1, U2 = q.U2 + W2;
        const double c2 = sound_speed_sq(q.K0 + N1, U1, U2, q.Phi + W3, q.gamma);
        const double D = c2 - U1 * U1;
        const double B22 = (U2 * U2 - c2) / (q.r * q.r * D), B12 = -U1 * U2 / (q.r * D);
        const double lhs = W1r - q.r * B22 * W2t + q.r * B12 * W2r + B12 * W1t + q.a1 * W1 + q.r * rc.a2t[i] * W2 +
                           q.b1 * W3r + q.b2 * W3t + q.b3 * W3 - source_G1(q, N1, W1, W2, W3, W3r, W3t);
        const FullState s{q.r, q.K0 + N1, U1, U2, q.Phi + W3, q.U1p + W1r, W1t, q.U2p + W2r, W2t, q.E + W3r, W3t};
        CHECK(std::abs(lhs - full_velocity_equation(s, q.gamma) / D) < 1e-9);  // background discretization residual
    }
}
