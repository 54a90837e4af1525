#include <doctest.h>

#include <cmath>

#include "spiral/boundary.hpp"
#include "spiral/rotational.hpp"

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

TEST_CASE("Poisson lift") {
    const RadialGrid g(2.0, 2.05, 33);
    const int M = 4, nt = 20;
    const Eigen::VectorXd th = basis::thetas(nt);
    Eigen::MatrixXd G(g.n, nt), ex(g.n, nt);
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r(i), p = (r - g.r0) * (r - g.r1);
        for (int l = 0; l < nt; ++l) {
            G(i, l) = (2 + (2 * r - g.r0 - g.r1) / r - p / (r * r)) * std::sin(th[l]);
            ex(i, l) = p * std::sin(th[l]);
        }
    }
    const PoissonLift pl = poisson_lift(G, M, g);
    CHECK((pl.phi.synthesize(nt) - ex).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(pl.residual_max < 1e-10);
    CHECK(poisson_lift(Eigen::MatrixXd::Zero(g.n, nt), M, g).phi.c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stream function of the background") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.01, 33);
    const int nt = 20;
    Eigen::MatrixXd rho(f.n(), nt), U1(f.n(), nt), U2(f.n(), nt);
    for (int i = 0; i < f.n(); ++i) {
        rho.row(i).setConstant(f.rho[i]);
        U1.row(i).setConstant(f.U1[i]);
        U2.row(i).setConstant(f.U2[i]);
    }
    const StreamFunction L = build_stream_function(rho, U1, U2, 4, RadialGrid(f.r0, f.r1, f.n()));
    CHECK(L.winding == doctest::Approx(2 * M_PI * f.J1).epsilon(1e-12));
    CHECK(L.min_entrance_flux == doctest::Approx(f.J1).epsilon(1e-12));
    for (double t : {0.3, 1.7, 4.2}) CHECK(L.entrance_inverse(L.at_entrance(t)) == doctest::Approx(t).epsilon(1e-12));
}

TEST_CASE("unperturbed Bernoulli data gives N = 0") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.01, 33);
    AnnulusDisc disc;
    disc.M = 4;
    AnnulusData d = data(1e-3);
    const RotationalState st = solve_rotational(f, make_annulus_boundary(f, 4, d), disc, {});
    CHECK(st.converged);
    CHECK(st.N1.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(st.N2.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(st.omega2 < 1e-12);
}

TEST_CASE("rotational solver reduces to the potential flow when K, S are uniform") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.01, 65);
    AnnulusDisc disc;
    disc.M = 8;
    const AnnulusBoundary bd = make_annulus_boundary(f, 8, data(1e-3));
    IterationConfig ic;
    ic.tol_fp = 1e-11;
    const IrrotationalSolution s = solve_irrotational(f, bd, disc, ic);
    RotationalConfig rc;
    rc.outer_tol = 1e-10;
    const RotationalState st = solve_rotational(f, bd, disc, rc);
    const RadialGrid g(f.r0, f.r1, f.n());
    CHECK(sampled_h1(st.U1 - s.U1, 8, g) < 1e-11);
    CHECK(sampled_h1(st.U2 - s.U2, 8, g) < 1e-11);
}

TEST_CASE("K and S are transported along streamlines") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.01, 65);
    AnnulusDisc disc;
    disc.M = 8;
    AnnulusData d = data(1e-3);
    d.Ken = {"eps_sin_k", 1e-3, 1};
    d.Sen = {"eps_cos_k", 5e-4, 1};
    RotationalConfig rc;
    rc.outer_tol = 1e-10;
    const RotationalState st = solve_rotational(f, make_annulus_boundary(f, 8, d), disc, rc);
    REQUIRE(st.converged);
    CHECK(st.outer_contraction < 0.1);
    CHECK(st.drift.max_drift_K < 1e-6);
    CHECK(st.drift.max_drift_S < 1e-6);
    CHECK(st.drift.seeds == 16);
    CHECK(st.sigma_p == doctest::Approx(st.omega1 + st.omega2));
    CHECK(st.min_supersonic_margin > 0);
    CHECK(st.norm_N_h1 > 0);
    CHECK(st.residuals.flow.bernoulli_defect < 1e-10);
}
