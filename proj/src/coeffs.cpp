#include "spiral/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spiral/errors.hpp"

namespace spiral {

double sound_speed_sq(double K, double U1, double U2, double Phi, double gamma) {
    const double bracket = K + Phi - 0.5 * (U1 * U1 + U2 * U2);
    if (!(bracket > 0)) {
        std::ostringstream os;
        os << "K + Phi - |u|^2/2 = " << bracket;
        fail(ErrorKind::CavitationError, os.str());
    }
    return (gamma - 1) * bracket;
}

double density_from_bernoulli(double K, double S, double U1, double U2, double Phi, double gamma) {
    const double c2 = sound_speed_sq(K, U1, U2, Phi, gamma);
    return std::pow(c2 / (gamma * std::exp(S)), 1.0 / (gamma - 1));
}

RadialCoeffs linear_coeffs(const BackgroundFlow& flow) {
    const double g = flow.params.gamma;
    RadialCoeffs c;
    const int n = flow.n();
    auto resize = [n](std::vector<double>& v) { v.assign(n, 0.0); };
    for (auto* v : {&c.a1, &c.a2, &c.a2t, &c.a3, &c.a4, &c.b1, &c.b2, &c.b3, &c.b4, &c.A12, &c.A22,
                    &c.a1_alt, &c.a2_alt, &c.a2t_alt, &c.num_a1, &c.num_a2})
        resize(*v);
    c.r = flow.r;
    c.theta_r1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double r = flow.r[i], U1 = flow.U1[i], U2 = flow.U2[i], c2 = flow.c2[i];
        const double U1p = flow.U1_p[i], U2p = flow.U2_p[i], E = flow.E[i], rho = flow.rho[i];
        const double D = c2 - U1 * U1;
        const double m1 = flow.M1sq[i], m2 = flow.M2sq[i];

        c.num_a1[i] = -(g + 1) * U1 * U1p + c2 / r - U2 * U2p - (g - 1) * U1 * U1 / r + E;
        c.num_a2[i] = -(g - 1) * U2 * U1p / r - U1 * U2p / r - (g - 2) * U1 * U2 / (r * r);
        c.a1[i] = c.num_a1[i] / D;
        c.a2[i] = c.num_a2[i] / D;
        c.a2t[i] = (-(g - 1) * U2 * U1p / r - U1 * U2p / r - (g - 1) * U1 * U2 / (r * r)) / D;

        c.a1_alt[i] = ((g + 1) * (1 + m2) / (r * (1 - m1)) * U1 * U1 +
                       (g + 1) * E / ((1 - m1) * c2) * U1 * U1 + (c2 + U2 * U2) / r -
                       (g - 1) * U1 * U1 / r + E) /
                      D;
        c.a2_alt[i] = ((2 * (1 - m1) + (g - 1) * (m1 + m2)) / (1 - m1) +
                       (g - 1) * r * E / ((1 - m1) * c2)) *
                      U1 * U2 / (r * r) / D;
        c.a2t_alt[i] = ((1 - m1 + (g - 1) * (m1 + m2)) / (1 - m1) + (g - 1) * r * E / ((1 - m1) * c2)) *
                       U1 * U2 / (r * r) / D;

        c.b1[i] = U1 / D;
        c.b2[i] = U2 / (r * D);
        c.b3[i] = ((g - 1) * U1p + (g - 1) * U1 / r) / D;
        c.a3[i] = rho * U1 / c2;
        c.a4[i] = rho * U2 / (r * c2);
        c.b4[i] = rho / c2;
        c.A22[i] = (U2 * U2 - c2) / (r * r * D);
        c.A12[i] = -U1 * U2 / (r * D);

        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); };
        c.dual_form_discrepancy =
            std::max({c.dual_form_discrepancy, rel(c.a1[i], c.a1_alt[i]), rel(c.a2[i], c.a2_alt[i]),
                      rel(c.a2t[i], c.a2t_alt[i])});
        c.printed_relation_residual =
            std::max(c.printed_relation_residual, std::abs(c.a2t[i] - (c.a2[i] - U1 * U2)));
        c.corrected_relation_residual =
            std::max(c.corrected_relation_residual, std::abs(c.a2t[i] - (c.a2[i] + c.A12[i] / r)));
        c.theta_r1 = std::min(c.theta_r1, c.b4[i] - 0.5 / (r * r));
    }
    return c;
}

LocalBackground local_background(const BackgroundFlow& flow, const RadialCoeffs& rc, int i) {
    const auto& p = flow.params;
    return LocalBackground{p.gamma,    flow.r[i],    flow.U1[i],   flow.U2[i],   flow.U1_p[i],
                           flow.U2_p[i], flow.c2[i], flow.E[i],    flow.Phi[i],  flow.rho[i],
                           flow.K0,    p.S0,         p.b0,         rc.a1[i],     rc.a2[i],
                           rc.a3[i],   rc.a4[i],     rc.b1[i],     rc.b2[i],     rc.b3[i],
                           rc.b4[i],   rc.num_a1[i], rc.num_a2[i]};
}

FrozenCoeffs frozen_coeffs(const BackgroundFlow& flow, const RadialCoeffs& rc,
                           const Eigen::MatrixXd& V1, const Eigen::MatrixXd& V2,
                           const Eigen::MatrixXd& Psi, const Eigen::MatrixXd* N1) {
    const double g = flow.params.gamma;
    const int n = static_cast<int>(V1.rows()), nt = static_cast<int>(V1.cols());
    FrozenCoeffs fc;
    fc.A12.resize(n, nt);
    fc.A22.resize(n, nt);
    fc.min_A22 = std::numeric_limits<double>::infinity();
    fc.max_A22 = -fc.min_A22;
    for (int i = 0; i < n; ++i) {
        const double r = flow.r[i];
        for (int l = 0; l < nt; ++l) {
            const double U1 = flow.U1[i] + V1(i, l), U2 = flow.U2[i] + V2(i, l);
            const double K = flow.K0 + (N1 ? (*N1)(i, l) : 0.0);
            const double c2 = sound_speed_sq(K, U1, U2, flow.Phi[i] + Psi(i, l), g);
            const double D = c2 - U1 * U1;
            if (!(D > 0)) {
                std::ostringstream os;
                os << "c^2 - U1^2 = " << D << " at r=" << r;
                fail(ErrorKind::EllipticityLost, os.str());
            }
            const double a22 = (U2 * U2 - c2) / (r * r * D);
            if (!(a22 > 0)) {
                std::ostringstream os;
                os << "A22 = " << a22 << " at r=" << r;
                fail(ErrorKind::EllipticityLost, os.str());
            }
            fc.A22(i, l) = a22;
            fc.A12(i, l) = -U1 * U2 / (r * D);
            fc.min_A22 = std::min(fc.min_A22, a22);
            fc.max_A22 = std::max(fc.max_A22, a22);
            fc.dev_A22 = std::max(fc.dev_A22, std::abs(a22 - rc.A22[i]));
            fc.dev_A12 = std::max(fc.dev_A12, std::abs(fc.A12(i, l) - rc.A12[i]));
        }
    }
    fc.mu0 = std::min(fc.min_A22, 1.0 / fc.max_A22);
    return fc;
}

double source_F1(const LocalBackground& q, double d0, double V1, double V2, double Psi,
                 double Psi_r, double Psi_t) {
    const double g = q.gamma, r = q.r;
    const double U1 = q.U1 + V1, U2 = q.U2 + V2;
    const double Dt = sound_speed_sq(q.K0, U1, U2, q.Phi + Psi, g) - U1 * U1;
    const double D = q.c2 - q.U1 * q.U1;
    const double sq = V1 * V1 + V2 * V2;
    const double inner = D * q.a2 * d0 + q.U1p * ((g + 1) / 2 * V1 * V1 + (g - 1) / 2 * V2 * V2) +
                         q.U2p * V1 * V2 + q.U1 / r * (g - 1) / 2 * sq +
                         V1 / r * ((g - 1) * (-Psi + q.U1 * V1 + q.U2 * V2) + (g - 1) / 2 * sq) -
                         (U1 * U2 - q.U1 * q.U2) * V2 / r - V1 * Psi_r - V2 * Psi_t / r;
    const double lp = q.num_a1 * V1 + q.num_a2 * (r * V2 + d0) + q.U1 * Psi_r + q.U2 / r * Psi_t +
                      (g - 1) * (q.U1p + q.U1 / r) * Psi;
    return inner / Dt - (1 / Dt - 1 / D) * lp;
}

double source_F2(const LocalBackground& q, double d0, double V1, double V2, double Psi,
                 double b_minus_b0) {
    const double rho = density_from_bernoulli(q.K0, q.S0, q.U1 + V1, q.U2 + V2, q.Phi + Psi, q.gamma);
    const double rho_bar = density_from_bernoulli(q.K0, q.S0, q.U1, q.U2, q.Phi, q.gamma);
    return q.a4 * d0 + rho - rho_bar + q.a3 * V1 + q.r * q.a4 * V2 - q.b4 * Psi - b_minus_b0;
}

double source_G1(const LocalBackground& q, double N1, double W1, double W2, double W3,
                 double W3_r, double W3_t) {
    const double g = q.gamma, r = q.r;
    const double U1 = q.U1 + W1, U2 = q.U2 + W2;
    const double Dt = sound_speed_sq(q.K0 + N1, U1, U2, q.Phi + W3, g) - U1 * U1;
    const double D = q.c2 - q.U1 * q.U1;
    const double sq = W1 * W1 + W2 * W2;
    const double inner =
        q.U1p * (-(g - 1) * N1 + (g + 1) / 2 * W1 * W1 + (g - 1) / 2 * W2 * W2) + q.U2p * W1 * W2 +
        q.U1 / r * (-(g - 1) * N1 + (g - 1) / 2 * sq) +
        W1 / r * ((g - 1) * (-N1 - W3 + q.U1 * W1 + q.U2 * W2) + (g - 1) / 2 * sq) - W1 * W3_r -
        W2 * W3_t / r;
    const double lp = q.num_a1 * W1 +
                      (-(g - 1) * q.U2 * q.U1p - q.U1 * q.U2p - (g - 1) * q.U1 * q.U2 / r) * W2 +
                      q.U1 * W3_r + q.U2 / r * W3_t + (g - 1) * (q.U1p + q.U1 / r) * W3;
    return inner / Dt - (1 / Dt - 1 / D) * lp;
}

double source_G2(const LocalBackground& q, double N1, double N2, double N1_r, double N2_r,
                 double W1, double W2, double W3) {
    const double g = q.gamma;
    const double H = density_from_bernoulli(q.K0 + N1, q.S0 + N2, q.U1 + W1, q.U2 + W2, q.Phi + W3, g);
    return (std::exp(N2 + q.S0) * std::pow(H, g - 1) / (g - 1) * N2_r - N1_r) / (W2 + q.U2);
}

double source_G3(const LocalBackground& q, double N1, double N2, double W1, double W2, double W3,
                 double b_minus_b0) {
    const double g = q.gamma;
    const double H = density_from_bernoulli(q.K0 + N1, q.S0 + N2, q.U1 + W1, q.U2 + W2, q.Phi + W3, g);
    const double H0 = density_from_bernoulli(q.K0, q.S0, q.U1, q.U2, q.Phi, g);
    return H - H0 + q.a3 * W1 + q.r * q.a4 * W2 - q.b4 * W3 - b_minus_b0;
}

double full_velocity_equation(const FullState& s, double gamma) {
    const double c2 = sound_speed_sq(s.K, s.U1, s.U2, s.Phi, gamma);
    return (c2 - s.U1 * s.U1) * s.U1_r + (c2 - s.U2 * s.U2) * s.U2_t / s.r + c2 * s.U1 / s.r -
           s.U1 * s.U2 * (s.U2_r + s.U1_t / s.r) + s.U1 * s.Phi_r + s.U2 * s.Phi_t / s.r;
}

AnnulusBoundary unperturbed_boundary(const BackgroundFlow& flow, int M) {
    const double s = std::sqrt(2 * std::numbers::pi);
    auto constant = [&](double v) {
        ThetaSeries t(M);
        t.c[0] = v * s;
        return t;
    };
    const auto& p = flow.params;
    AnnulusBoundary b;
    b.U1en = constant(p.U1_0);
    b.U2en = constant(p.U2_0);
    b.Een = constant(p.E0);
    b.Phiex = constant(flow.Phi.back());
    b.Ken = constant(flow.K0);
    b.Sen = constant(p.S0);
    const double b0 = p.b0;
    b.b = [b0](double, double) { return b0; };
    return b;
}

double d0_of(const BackgroundFlow& flow, const AnnulusBoundary& bd) {
    return -flow.r0 * (bd.U2en.mean() - flow.params.U2_0);
}

SourceBundle irrotational_sources(const BackgroundFlow& flow, const RadialCoeffs& rc,
                                  const FrozenCoeffs& fc, const AnnulusBoundary& bd,
                                  const AnnulusDisc& disc, const Eigen::MatrixXd& V1,
                                  const Eigen::MatrixXd& V2, const Eigen::MatrixXd& Psi,
                                  const Eigen::MatrixXd& Psi_r, const Eigen::MatrixXd& Psi_t) {
    const int n = flow.n(), nt = disc.samples();
    const auto& p = flow.params;
    const Eigen::VectorXd th = basis::thetas(nt);
    SourceBundle s;
    s.d0 = d0_of(flow, bd);

    // lift data
    ThetaSeries gp = bd.U2en;
    gp.c *= flow.r0;
    gp.c[0] += (-flow.r0 * p.U2_0 + s.d0) * std::sqrt(2 * std::numbers::pi);
    s.g_prime = gp;
    s.e = bd.Een;
    s.e.c[0] -= p.E0 * std::sqrt(2 * std::numbers::pi);
    s.p = bd.Phiex;
    s.p.c[0] -= flow.Phi.back() * std::sqrt(2 * std::numbers::pi);
    s.F5 = bd.U1en;
    s.F5.c[0] -= p.U1_0 * std::sqrt(2 * std::numbers::pi);

    const Eigen::VectorXd g1 = gp.samples(nt), g2 = gp.derivative().samples(nt);
    const Eigen::VectorXd ev = s.e.samples(nt), et = s.e.derivative().samples(nt),
                          ett = s.e.derivative().derivative().samples(nt);
    const Eigen::VectorXd pv = s.p.samples(nt), pt = s.p.derivative().samples(nt),
                          ptt = s.p.derivative().derivative().samples(nt);

    s.F1.resize(n, nt);
    s.F2.resize(n, nt);
    s.F3.resize(n, nt);
    s.F4.resize(n, nt);
    for (int i = 0; i < n; ++i) {
        const LocalBackground q = local_background(flow, rc, i);
        const double r = q.r, dr1 = r - flow.r1;
        for (int l = 0; l < nt; ++l) {
            s.F1(i, l) = source_F1(q, s.d0, V1(i, l), V2(i, l), Psi(i, l), Psi_r(i, l), Psi_t(i, l));
            s.F2(i, l) = source_F2(q, s.d0, V1(i, l), V2(i, l), Psi(i, l), bd.b(r, th[l]) - p.b0);
            const double h = dr1 * ev[l] + pv[l], h_t = dr1 * et[l] + pt[l],
                         h_tt = dr1 * ett[l] + ptt[l];
            const double L1lift = -fc.A22(i, l) * g2[l] + q.a2 * g1[l] + q.b1 * ev[l] + q.b2 * h_t + q.b3 * h;
            const double L2lift = ev[l] / r + h_tt / (r * r) + q.a4 * g1[l] - q.b4 * h;
            s.F3(i, l) = s.F1(i, l) - L1lift;
            s.F4(i, l) = s.F2(i, l) - L2lift;
        }
    }
    return s;
}

}  // namespace spiral
