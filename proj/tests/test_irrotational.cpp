#include <doctest.h>

#include <cmath>

#include "spiral/boundary.hpp"
#include "spiral/irrotational.hpp"

using namespace spiral;

namespace {

AnnulusData data(double w) {
    AnnulusData d;
    d.U1en = {"eps_sin_k", w, 1};
    d.U2en = {"eps_cos_k", w, 2};
    d.Een = {"eps_sin_k", w, 1};
    d.Phiex = {"eps_cos_k", w, 1};
    d.b = {"eps_bump_k", w, 1};
    return d;
}

}  // namespace

TEST_CASE("unperturbed data returns the background") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.01, 33);
    AnnulusDisc disc;
    disc.M = 4;
    const IrrotationalSolution s = solve_irrotational(f, make_annulus_boundary(f, 4, AnnulusData{}), disc, {});
    CHECK(s.converged);
    CHECK(s.iterations == 1);
    CHECK(s.norm_h1 < 1e-13);
    CHECK(s.omega1 < 1e-12);
    CHECK(s.c1_empirical == 0.0);
    for (int i = 0; i < f.n(); ++i) CHECK(s.U1(i, 3) == doctest::Approx(f.U1[i]).epsilon(1e-12));
}

TEST_CASE("reference run at r1 = 2.01") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.01, 65);
    AnnulusDisc disc;
    disc.M = 8;
    IterationConfig cfg;
    cfg.tol_fp = 1e-11;
    const AnnulusBoundary bd = make_annulus_boundary(f, 8, data(1e-3));
    const IrrotationalSolution s = solve_irrotational(f, bd, disc, cfg);
    REQUIRE(s.converged);
    CHECK(s.iterations <= 4);
    CHECK(s.contraction_factor < 0.01);
    CHECK(s.norm_h1 == doctest::Approx(2.791085e-3).epsilon(1e-5));
    CHECK(s.omega1 == doctest::Approx(197.9).epsilon(1e-3));
    CHECK(s.min_supersonic_margin > 0);
    CHECK(s.min_U1 > 0);
    CHECK_FALSE(s.aliasing_risk);
    CHECK(s.residuals.bernoulli_defect < 1e-12);
    CHECK(s.residuals.continuity_max == doctest::Approx(6.48e-8).epsilon(0.02));
    CHECK(s.residuals.curl_max == doctest::Approx(3.42e-9).epsilon(0.02));
    CHECK(s.residuals.poisson_max == doctest::Approx(4.11e-7).epsilon(0.02));
    for (const auto& h : s.history) CHECK(h.h4_norm <= cfg.delta);

    // entrance data is reproduced
    for (int l = 0; l < disc.samples(); l += 5) {
        const double t = 2 * M_PI * l / disc.samples();
        CHECK(s.U1(0, l) == doctest::Approx(bd.U1en(t)).epsilon(1e-10));
        CHECK(s.U2(0, l) == doctest::Approx(bd.U2en(t)).epsilon(1e-10));
    }
}

TEST_CASE("solution size is linear in the data") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.01, 65);
    AnnulusDisc disc;
    disc.M = 8;
    const IrrotationalSolution a = solve_irrotational(f, make_annulus_boundary(f, 8, data(1e-3)), disc, {});
    const IrrotationalSolution b = solve_irrotational(f, make_annulus_boundary(f, 8, data(5e-4)), disc, {});
    CHECK(a.norm_h1 / b.norm_h1 == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("residuals converge at second order") {
    double prev = 0;
    for (int n : {33, 65}) {
        const BackgroundFlow f = integrate_background(reference_params(), 2.01, n);
        AnnulusDisc disc;
        disc.M = 8;
        const IrrotationalSolution s = solve_irrotational(f, make_annulus_boundary(f, 8, data(1e-3)), disc, {});
        if (prev > 0) CHECK(prev / s.residuals.continuity_max > 3.6);
        prev = s.residuals.continuity_max;
    }
}

TEST_CASE("sampled H1 norm") {
    const RadialGrid g(2.0, 2.05, 33);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(33, 20);
    CHECK(sampled_h1(v, 4, g) == 0.0);
    v.setConstant(1.0);
    CHECK(sampled_h1(v, 4, g) == doctest::Approx(std::sqrt(2 * M_PI * 0.05)).epsilon(1e-12));
}
