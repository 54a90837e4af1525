#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spiral/background.hpp"
#include "spiral/errors.hpp"
#include "verify.hpp"

using namespace spiral;

namespace {

// Oracle values from an independent high-order integration of the reference problem.
struct Row {
    double r1, rho, E, Phi, M1sq, M2sq;
};
constexpr Row kOracle[] = {
    {2.01, 0.51652696723220791, 0.50009023838935112, 0.0050003035683534574, 0.28977081176076545, 2.7831918181571107},
    {2.05, 0.57024803989084751, 0.5020071088797915, 0.025034595751410006, 0.18752355483545915, 2.1952598288530649},
};

}  // namespace

TEST_CASE("reference background at r0") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 129);
    CHECK(f.c2[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(f.M1sq[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(f.M2sq[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(f.J1 == 0.5);
    CHECK(f.J2 == 3.0);
    CHECK(f.K0 == doctest::Approx(1.625).epsilon(1e-15));
    CHECK(f.Phi[0] == 0.0);
}

TEST_CASE("reference background at r1 matches the oracle") {
    for (const Row& o : kOracle) {
        const BackgroundFlow f = integrate_background(reference_params(), o.r1, 129);
        const int n = f.n() - 1;
        CHECK(std::abs(f.rho[n] - o.rho) < 1e-12);
        CHECK(std::abs(f.E[n] - o.E) < 1e-12);
        CHECK(std::abs(f.Phi[n] - o.Phi) < 1e-12);
        CHECK(std::abs(f.M1sq[n] - o.M1sq) < 1e-12);
        CHECK(std::abs(f.M2sq[n] - o.M2sq) < 1e-12 * o.M2sq);
    }
    const BackgroundFlow f = integrate_background(reference_params(), 2.2, 257);
    CHECK(std::abs(f.rho.back() - 0.70476303326946198) < 1e-11);
    CHECK(std::abs(f.M1sq.back() - 0.069791242148282463) < 1e-11);
    CHECK(std::abs(f.M2sq.back() - 1.2479283785616569) < 1e-11 * 1.25);
}

TEST_CASE("invariants hold on the reference flow") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.2, 513);
    for (const auto& c : spiralflow::background_invariants(f, 1e-10, "reference")) {
        INFO(c.name << " value=" << c.value);
        CHECK(c.pass);
    }
    for (int i = 0; i < f.n(); ++i) {
        CHECK(f.r[i] * f.U2[i] == doctest::Approx(f.J2).epsilon(1e-15));
    }
}

TEST_CASE("invalid parameters are rejected") {
    BackgroundParams p = reference_params();
    p.rho0 = p.b0;
    CHECK_THROWS_AS(p.validate(), SolverError);
    CHECK_THROWS_AS(integrate_background(p, 2.05, 65), SolverError);
    p = reference_params();
    p.gamma = 2.5;
    CHECK_THROWS_AS(p.validate(), SolverError);
    p = reference_params();
    CHECK_THROWS_AS(integrate_background(p, 2.05, 8), SolverError);
    CHECK_THROWS_AS(integrate_background(p, 1.9, 65), SolverError);
}

TEST_CASE("r1 beyond the admissible window fails") {
    CHECK_THROWS_AS(integrate_background(reference_params(), 2.4, 257), SolverError);
}

TEST_CASE("admissible outer radius") {
    const BackgroundParams p = reference_params();
    const double tol = 1e-8;
    const AdmissibleRadius R = admissible_outer_radius(p, 2.5, tol);
    CHECK_FALSE(R.flagged);
    CHECK(R.R > 2.0);
    CHECK(R.R <= 2.5);
    CHECK(std::abs(R.R - 2.3002304) < 1e-6);
    CHECK_NOTHROW(integrate_background(p, R.R - tol, 256, false));
    CHECK_THROWS_AS(integrate_background(p, R.R + 10 * tol, 256, false), SolverError);
    CHECK(admissible_outer_radius(p, 2.0, tol).R == 2.0);
    // monotone in r_max
    CHECK(admissible_outer_radius(p, 2.2, tol).R <= R.R);
}

TEST_CASE("window stays nonempty at the sonic edge") {
    BackgroundParams p = reference_params();
    p.U2_0 = std::sqrt(p.c2_0() * (1 + 1e-6));
    const AdmissibleRadius R = admissible_outer_radius(p, 2.5, 1e-10);
    CHECK_FALSE(R.flagged);
    CHECK(R.R > p.r0);
}

TEST_CASE("Mach profiles") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.2, 257);
    const MachProfiles m = mach_profiles(f);
    CHECK(m.M1sq[0] == doctest::Approx(1.0 / 3.0));
    CHECK(m.M2sq[0] == doctest::Approx(3.0));
    for (size_t i = 1; i < m.M2sq.size(); ++i) {
        CHECK(m.M2sq[i] < m.M2sq[i - 1]);
        CHECK(m.M1sq[i] <= m.M1sq[0]);
    }
    // O(h^2) residual of the Mach ODE identities
    const MachProfiles c = mach_profiles(integrate_background(reference_params(), 2.2, 65));
    CHECK(c.ode_residual_M1 / m.ode_residual_M1 > 12.0);
    CHECK(c.ode_residual_M2 / m.ode_residual_M2 > 12.0);
}

TEST_CASE("fourth-order convergence") {
    CHECK(richardson_order(reference_params(), 2.05, 33) == doctest::Approx(4.0).epsilon(0.05));
    // Bernoulli defect on a wide annulus: halving h cuts it by >= 12
    const BackgroundParams p = reference_params();
    const double d1 = bernoulli_defect(integrate_background(p, 2.25, 17, false));
    const double d2 = bernoulli_defect(integrate_background(p, 2.25, 33, false));
    CHECK(d1 / d2 >= 12.0);
}

TEST_CASE("randomized admissible parameters") {
    const auto sample = spiralflow::admissible_sample(20, 7u);
    CHECK(sample.size() == 20);
    for (const auto& p : sample) {
        CHECK_NOTHROW(p.validate());
        const AdmissibleRadius R = admissible_outer_radius(p, p.r0 + 0.5, 1e-8);
        CHECK_FALSE(R.flagged);
        const BackgroundFlow f = integrate_background(p, std::min(p.r0 + 0.05, 0.5 * (p.r0 + R.R)), 256);
        for (const auto& c : spiralflow::background_invariants(f, 1e-7, "sample")) CHECK(c.pass);
    }
}
