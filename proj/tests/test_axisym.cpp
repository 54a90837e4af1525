#include <doctest.h>

#include <cmath>

#include "spiral/axisym.hpp"

using namespace spiral;

namespace {

AxiData full_data(double eps) {
    AxiData d;
    d.U3en = {"eps_poly3", eps, 1};
    d.U2en = {"eps_cos_pi_k", eps, 1};
    d.Ken = {"eps_cos_pi_k", eps, 1};
    d.Sen = {"eps_cos_pi_k", eps, 2};
    d.Phien = {"eps_cos_pi_k", eps, 1};
    d.U1ex = {"eps_cos_pi_k", eps, 1};
    d.Phiex = {"eps_cos_pi_k", eps, 2};
    d.b = {"eps_bump_k", eps, 1};
    return d;
}

}  // namespace

TEST_CASE("slab nodes") {
    const Eigen::VectorXd z = slab_nodes(5);
    CHECK(z[0] == -1.0);
    CHECK(z[2] == doctest::Approx(0.0).scale(1.0));
    CHECK(z[4] == 1.0);
}

TEST_CASE("zero data gives the background") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 17);
    const AxiState st = solve_axisym(f, make_axi_boundary(f, AxiData{}), AxiConfig{17});
    CHECK(st.converged);
    for (const auto* T : {&st.T1, &st.T2, &st.T3, &st.T4, &st.T5, &st.T6}) CHECK(T->cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(st.sizes.sigma_v() == 0.0);
}

TEST_CASE("compatible data") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 17);
    CHECK(boundary_compatibility_defect(make_axi_boundary(f, full_data(1e-3))) < 1e-14);
    AxiData bad;
    bad.U3en = {"eps_cos_pi_k", 1e-3, 1};  // nonzero on the walls
    CHECK(boundary_compatibility_defect(make_axi_boundary(f, bad)) > 1e-4);
}

TEST_CASE("coercivity is positive and grid independent") {
    std::vector<double> lam;
    for (int n : {17, 33}) {
        const BackgroundFlow f = integrate_background(reference_params(), 2.05, n);
        const CoercivityReport c = coercivity(f, slab_nodes(n));
        CHECK(c.lambda_min > 0);
        CHECK(c.lambda_min == doctest::Approx(std::min(c.lambda_psi, c.lambda_Psi)));
        lam.push_back(c.lambda_min);
    }
    CHECK(std::abs(lam[0] - lam[1]) < 0.05 * lam[1]);
}

TEST_CASE("transport with no vertical velocity") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 17);
    const Eigen::VectorXd z = slab_nodes(9);
    AxiData d;
    d.U2en = {"eps_cos_pi_k", 1e-3, 1};
    d.Sen = {"eps_cos_pi_k", 1e-3, 1};
    const AxiBoundary bd = make_axi_boundary(f, d);
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(f.n(), z.size());
    const TransportResult tr = transport(f, bd, z, Z, Z, 1e-12, 1);
    for (int i = 0; i < f.n(); ++i)
        for (int j = 0; j < z.size(); ++j) {
            CHECK(tr.foot(i, j) == doctest::Approx(z[j]).scale(1.0).epsilon(1e-13));
            // r (U2-bar + T2) = r0 (U2_0 + U2en pert)
            CHECK(f.r[i] * (f.U2[i] + tr.T2(i, j)) == doctest::Approx(f.r0 * (f.params.U2_0 + bd.U2en.f(z[j]))).epsilon(1e-13));
            CHECK(tr.T4(i, j) == doctest::Approx(bd.Sen.f(z[j])).epsilon(1e-13));  // T4 is S, T5 is K
        }
    CHECK(tr.T5.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("full nonlinear solve") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 33);
    AxiConfig cfg;
    const AxiState a = solve_axisym(f, make_axi_boundary(f, full_data(1e-3)), cfg);
    const AxiState b = solve_axisym(f, make_axi_boundary(f, full_data(5e-4)), cfg);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(a.contraction < 0.05);
    CHECK(a.norm_c1 / b.norm_c1 == doctest::Approx(2.0).epsilon(0.01));
    CHECK(a.norm_c1 / a.sizes.sigma_v() < 10.0);
    CHECK(a.min_supersonic_margin > 0);
    CHECK(a.audit.wall_exact < 1e-13);
    CHECK(a.audit.drift_rU2 < 1e-8);
    CHECK(a.audit.drift_K < 1e-8);
    CHECK(a.audit.drift_S < 1e-8);
    CHECK(a.residuals.poisson < 1e-3);
}

TEST_CASE("C1 proxy") {
    Eigen::MatrixXd f(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) f(i, j) = 0.5 * i + 2.0 * j;
    // |f| max 10, d_r = 0.5 / 1, d_z = 2 / 1
    CHECK(c1_proxy(f, 1.0, 1.0) == doctest::Approx(12.5));
}
