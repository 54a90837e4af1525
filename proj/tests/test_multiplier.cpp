#include <doctest.h>

#include <cmath>

#include "spiral/coeffs.hpp"
#include "spiral/errors.hpp"
#include "spiral/multiplier.hpp"

using namespace spiral;

TEST_CASE("Riccati fixed point stays constant") {
    std::vector<double> r;
    for (int i = 0; i <= 40; ++i) r.push_back(2.0 + 0.001 * i);
    const double a0 = 1.0, a1 = 3.0, a2 = 2.0, lam = 0.5;
    const double Q = (a1 + std::sqrt(a1 * a1 - (a0 + lam) * a2)) / a2;
    for (double q : riccati_solve(r, a0, a1, a2, lam, Q)) CHECK(q == doctest::Approx(Q).epsilon(1e-12));
}

TEST_CASE("huge margin blows up") {
    std::vector<double> r;
    for (int i = 0; i <= 40; ++i) r.push_back(2.0 + 0.01 * i);
    CHECK_THROWS_AS(riccati_solve(r, 1.0, 1.0, 1.0, 1e9, 1.0), SolverError);
}

TEST_CASE("short nozzle certifies") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.01, 129);
    const RadialCoeffs rc = linear_coeffs(f);
    const MultiplierCertificate c = certify(f, rc, nullptr, 0.0);
    REQUIRE(c.certified);
    CHECK(c.lambda0 == doctest::Approx(3.99373).epsilon(1e-4));
    CHECK(c.Q_end == doctest::Approx(0.00520143).epsilon(1e-4));
    CHECK(c.frak_a0 == doctest::Approx(39.9373).epsilon(1e-4));
    CHECK(c.frak_a2 == doctest::Approx(417.393).epsilon(1e-4));
    CHECK(c.frak_a1 == doctest::Approx(8.68416).epsilon(1e-4));
    CHECK(c.mu0 == doctest::Approx(0.621452).epsilon(1e-4));
    CHECK(c.theta_r1 > 0);
    for (double q : c.Q) CHECK(q > 0);
    CHECK(c.min_margin_psi_r >= c.lambda0);
    CHECK(c.min_margin_psi_t >= c.lambda0);
    CHECK(c.forward_mismatch < 1e-8);

    const SoundnessCheck s = soundness_recheck(f, c, 4);
    CHECK(s.ok);
    CHECK(std::min(s.min_margin_psi_r, s.min_margin_psi_t) >= 0.5 * c.lambda0);
}

TEST_CASE("longer nozzles do not certify") {
    for (double r1 : {2.02, 2.05}) {
        const BackgroundFlow f = integrate_background(reference_params(), r1, 129);
        const MultiplierCertificate c = certify(f, linear_coeffs(f), nullptr, 0.0);
        CHECK_FALSE(c.certified);
        CHECK_FALSE(c.diagnostics.empty());
    }
}

TEST_CASE("certified radius is nonincreasing in the demanded margin") {
    std::vector<double> cand;
    for (int k = 1; k <= 20; ++k) cand.push_back(2.0 + 0.001 * k);
    double prev = 1e300;
    for (double lam : {0.5, 2.0, 4.0, 8.0, 16.0}) {
        const double R = certified_radius(reference_params(), lam, cand, 129);
        CHECK(R <= prev);
        CHECK(R > 2.0);
        prev = R;
    }
}

TEST_CASE("delta shrinks the certified radius") {
    std::vector<double> cand;
    for (int k = 1; k <= 20; ++k) cand.push_back(2.0 + 0.001 * k);
    const double R0 = certified_radius(reference_params(), 1.0, cand, 129, 0.0);
    const double R1 = certified_radius(reference_params(), 1.0, cand, 129, 0.5);
    CHECK(R1 <= R0);
}
