#include <doctest.h>

#include <cmath>

#include "spiral/linbvp.hpp"

using namespace spiral;

namespace {

struct Mms {
    LinearCoefficients coef;
    Eigen::MatrixXd F3, F4, psi, Psi;
};

// psi = x^2 e^x sin t, Psi = (x^3 - L x^2) e^x cos t, x = r - r0; homogeneous data.
Mms manufactured(int n, int M) {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, n);
    const RadialCoeffs rc = linear_coeffs(f);
    const int nt = 4 * M + 4;
    Mms m{barred_coefficients(f, rc, nt), {}, {}, {}, {}};
    const Eigen::VectorXd th = basis::thetas(nt);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < nt; ++l) m.coef.A12(i, l) += 0.05 * std::cos(th[l]);
    m.F3.resize(n, nt);
    m.F4 = m.psi = m.Psi = m.F3;
    const double L = f.r1 - f.r0;
    const auto& c = m.coef;
    for (int i = 0; i < n; ++i) {
        const double r = f.r[i], x = r - f.r0, E = std::exp(x);
        const double P = x * x, P1 = 2 * x, P2 = 2, q = x * x * x - L * x * x, q1 = 3 * x * x - 2 * L * x, q2 = 6 * x - 2 * L;
        const double F = P * E, F1 = (P + P1) * E, F2 = (P + 2 * P1 + P2) * E;
        const double G = q * E, G1 = (q + q1) * E, G2 = (q + 2 * q1 + q2) * E;
        for (int l = 0; l < nt; ++l) {
            const double s = std::sin(th[l]), co = std::cos(th[l]);
            m.F3(i, l) = F2 * s + c.A22(i, l) * F * s + 2 * c.A12(i, l) * F1 * co + c.a1[i] * F1 * s + c.a2(i, l) * F * co +
                         c.b1[i] * G1 * co - c.b2[i] * G * s + c.b3[i] * G * co;
            m.F4(i, l) = G2 * co + G1 * co / r - G * co / (r * r) + c.a3[i] * F1 * s + c.a4[i] * F * co - c.b4[i] * G * co;
            m.psi(i, l) = F * s;
            m.Psi(i, l) = G * co;
        }
    }
    return m;
}

double error(const Mms& m, const LinearSolution& s) {
    const int nt = m.coef.ntheta();
    return std::max((s.psi.synthesize(nt) - m.psi).cwiseAbs().maxCoeff(), (s.Psi.synthesize(nt) - m.Psi).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("manufactured solution converges at second order") {
    std::vector<double> err;
    for (int n : {33, 65, 129}) {
        const Mms m = manufactured(n, 4);
        const LinearSolution s = solve_linear(m.coef, m.F3, m.F4, LinearBC::homogeneous(4), 4);
        err.push_back(error(m, s));
        CHECK(s.min_pivot_ratio > 0);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("zero data gives the zero solution") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 33);
    const LinearCoefficients c = barred_coefficients(f, linear_coeffs(f), 20);
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(33, 20);
    const LinearSolution s = solve_linear(c, Z, Z, LinearBC::homogeneous(4), 4);
    CHECK(s.psi.c.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.Psi.c.cwiseAbs().maxCoeff() == 0.0);
    for (double v : s.norm_psi) CHECK(v == 0.0);
}

TEST_CASE("mode coupling matrices") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 17);
    const LinearCoefficients c = barred_coefficients(f, linear_coeffs(f), 20);
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(17, 20);
    const ModeSystem sys = assemble(c, Z, Z, LinearBC::homogeneous(4), 4);
    CHECK(sys.n_modes() == 9);
    CHECK(sys.state_size() == 36);
    CHECK_FALSE(sys.aliasing_risk);
    // theta-independent coefficients: every block is diagonal or couples only the cos/sin pair
    for (const auto& Sk : sys.S)
        for (const auto& blk : Sk) {
            REQUIRE(blk.rows() == 9);
            for (int a = 0; a < 9; ++a)
                for (int b = 0; b < 9; ++b) {
                    const int ka = (a + 1) / 2, kb = (b + 1) / 2;
                    if (ka != kb) CHECK(blk(a, b) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
                }
        }
}

TEST_CASE("solution is linear in the sources") {
    const Mms m = manufactured(33, 4);
    const LinearBC bc = LinearBC::homogeneous(4);
    const LinearSolution a = solve_linear(m.coef, m.F3, m.F4, bc, 4, false);
    const LinearSolution b = solve_linear(m.coef, 2.5 * m.F3, 2.5 * m.F4, bc, 4, false);
    CHECK((b.psi.c - 2.5 * a.psi.c).cwiseAbs().maxCoeff() < 1e-12 * (1 + a.psi.c.cwiseAbs().maxCoeff()));
    CHECK((b.Psi.c - 2.5 * a.Psi.c).cwiseAbs().maxCoeff() < 1e-12 * (1 + a.Psi.c.cwiseAbs().maxCoeff()));
}

TEST_CASE("boundary data is honoured") {
    const BackgroundFlow f = integrate_background(reference_params(), 2.05, 33);
    const LinearCoefficients c = barred_coefficients(f, linear_coeffs(f), 20);
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(33, 20);
    LinearBC bc = LinearBC::homogeneous(4);
    bc.psi0.c[1] = 1e-3;
    bc.Psi1.c[2] = -2e-3;
    const LinearSolution s = solve_linear(c, Z, Z, bc, 4, false);
    CHECK(s.psi.c(0, 1) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(s.Psi.c(32, 2) == doctest::Approx(-2e-3).epsilon(1e-12));
    CHECK(std::abs(s.psi.c(0, 3)) < 1e-15);
}

TEST_CASE("extra modes leave a band-limited solution unchanged") {
    const Mms a = manufactured(65, 4);
    const Mms b = manufactured(65, 8);
    const LinearSolution sa = solve_linear(a.coef, a.F3, a.F4, LinearBC::homogeneous(4), 4, false);
    const LinearSolution sb = solve_linear(b.coef, b.F3, b.F4, LinearBC::homogeneous(8), 8, false);
    const double ea = error(a, sa), eb = error(b, sb);
    CHECK(std::abs(ea - eb) < 1e-2 * ea);
}
