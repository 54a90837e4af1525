#include "spiral/irrotational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spiral/boundary.hpp"
#include "spiral/errors.hpp"

namespace spiral {

namespace {

// add a theta-only series to every radial row (scaled per row)
void add_rows(AnnulusField& f, const ThetaSeries& s, const Eigen::VectorXd& scale) {
    const int k = std::min<int>(static_cast<int>(s.c.size()), f.n_basis());
    for (int i = 0; i < f.grid.n; ++i) f.c.row(i).head(k) += scale[i] * s.c.head(k).transpose();
}

double pair_h1(const AnnulusField& a, const AnnulusField& b) {
    const double x = h_norm(a, 1), y = h_norm(b, 1);
    return std::sqrt(x * x + y * y);
}

}  // namespace

double sampled_h1(const Eigen::MatrixXd& v, int M, const RadialGrid& g) {
    return h_norm(analyze(v, M, g).field, 1);
}

FlowResiduals flow_residuals(const BackgroundFlow& flow, const AnnulusBoundary& bd,
                             const Eigen::MatrixXd& U1, const Eigen::MatrixXd& U2,
                             const Eigen::MatrixXd& rho, const AnnulusField& Psi,
                             const AnnulusField& Psi_r, const Eigen::MatrixXd& K,
                             const Eigen::MatrixXd& S) {
    const int nr = static_cast<int>(U1.rows()), nt = static_cast<int>(U1.cols());
    const RadialGrid& g = Psi.grid;
    const double h = g.h(), gm = flow.params.gamma;
    const Eigen::VectorXd th = basis::thetas(nt);

    Eigen::MatrixXd rrhoU1(nr, nt), rU2(nr, nt);
    for (int i = 0; i < nr; ++i) {
        rrhoU1.row(i) = g.r(i) * rho.row(i).cwiseProduct(U1.row(i));
        rU2.row(i) = g.r(i) * U2.row(i);
    }
    const Eigen::MatrixXd cont =
        radial_derivative(rrhoU1, h, 1) + theta_derivative_samples(rho.cwiseProduct(U2));
    const Eigen::MatrixXd curl = radial_derivative(rU2, h, 1) - theta_derivative_samples(U1);

    const Eigen::MatrixXd P_rr = Psi_r.dr().synthesize(nt), P_r = Psi_r.synthesize(nt),
                          P_tt = Psi.dthth().synthesize(nt), P = Psi.synthesize(nt);
    const Eigen::VectorXd wr = trapezoid_weights(nr, h);
    const double wt = 2 * std::numbers::pi / nt;
    FlowResiduals res;
    double sc = 0, sv = 0, sp = 0;
    for (int i = 0; i < nr; ++i) {
        const double r = g.r(i);
        for (int l = 0; l < nt; ++l) {
            const double pois = P_rr(i, l) + P_r(i, l) / r + P_tt(i, l) / (r * r) -
                                (rho(i, l) - flow.rho[i]) + (bd.b(r, th[l]) - flow.params.b0);
            res.continuity_max = std::max(res.continuity_max, std::abs(cont(i, l)));
            res.curl_max = std::max(res.curl_max, std::abs(curl(i, l)));
            res.poisson_max = std::max(res.poisson_max, std::abs(pois));
            sc += wr[i] * wt * cont(i, l) * cont(i, l);
            sv += wr[i] * wt * curl(i, l) * curl(i, l);
            sp += wr[i] * wt * pois * pois;
            const double u2 = U1(i, l) * U1(i, l) + U2(i, l) * U2(i, l);
            const double bern = 0.5 * u2 +
                                gm * std::exp(S(i, l)) * std::pow(rho(i, l), gm - 1) / (gm - 1) -
                                (flow.Phi[i] + P(i, l)) - K(i, l);
            res.bernoulli_defect = std::max(res.bernoulli_defect, std::abs(bern));
        }
    }
    res.continuity_l2 = std::sqrt(sc);
    res.curl_l2 = std::sqrt(sv);
    res.poisson_l2 = std::sqrt(sp);
    return res;
}

IrrotationalSolution solve_irrotational(const BackgroundFlow& flow, const AnnulusBoundary& bd,
                                        const AnnulusDisc& disc, const IterationConfig& cfg) {
    if (!(cfg.tol_fp > 0) || cfg.max_iters < 1 || !(cfg.relaxation > 0 && cfg.relaxation <= 1) ||
        !(cfg.delta > 0))
        fail(ErrorKind::InvalidParams, "solve_irrotational: bad iteration config");
    const int M = disc.M, nt = disc.samples(), nr = flow.n();
    const RadialGrid grid(flow.r0, flow.r1, nr);
    const RadialCoeffs rc = linear_coeffs(flow);
    const Eigen::VectorXd rv = grid.nodes();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(nr);
    const Eigen::VectorXd rm1 = rv.array() - flow.r1;

    IrrotationalSolution sol;
    sol.disc = disc;
    sol.psi = sol.psi_r = sol.Psi = sol.Psi_r = AnnulusField(M, grid);
    sol.d0 = d0_of(flow, bd);
    sol.omega1 = omega1(flow, bd);

    auto samples_of = [&](const IrrotationalSolution& s, Eigen::MatrixXd& V1, Eigen::MatrixXd& V2,
                          Eigen::MatrixXd& P, Eigen::MatrixXd& P_r, Eigen::MatrixXd& P_t) {
        V1 = s.psi_r.synthesize(nt);
        V2 = s.psi.dth().synthesize(nt);
        for (int i = 0; i < nr; ++i) V2.row(i) = (V2.row(i).array() - s.d0) / rv[i];
        P = s.Psi.synthesize(nt);
        P_r = s.Psi_r.synthesize(nt);
        P_t = s.Psi.dth().synthesize(nt);
    };

    Eigen::MatrixXd V1, V2, P, P_r, P_t;
    int stalled = 0;
    double prev_inc = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        samples_of(sol, V1, V2, P, P_r, P_t);
        const FrozenCoeffs fc = frozen_coeffs(flow, rc, V1, V2, P);
        const SourceBundle src = irrotational_sources(flow, rc, fc, bd, disc, V1, V2, P, P_r, P_t);
        const LinearCoefficients coef = frozen_coefficients(flow, rc, fc);
        LinearBC bc = LinearBC::homogeneous(M);
        bc.dpsi0 = src.F5;
        const LinearSolution lin = solve_linear(coef, src.F3, src.F4, bc, M, false);
        sol.aliasing_risk = sol.aliasing_risk || analyze(coef.A22, M, grid).aliasing_risk;

        // un-hat: psi = psi-hat + G, Psi = Psi-hat + (r - r1) e + p
        AnnulusField psi = lin.psi, psi_r = lin.psi_r, Psi = lin.Psi, Psi_r = lin.Psi_r;
        add_rows(psi, src.g_prime.antiderivative(), ones);
        add_rows(Psi, src.e, rm1);
        add_rows(Psi, src.p, ones);
        add_rows(Psi_r, src.e, ones);

        if (cfg.relaxation < 1) {
            const double w = cfg.relaxation;
            psi = w * psi + (1 - w) * sol.psi;
            psi_r = w * psi_r + (1 - w) * sol.psi_r;
            Psi = w * Psi + (1 - w) * sol.Psi;
            Psi_r = w * Psi_r + (1 - w) * sol.Psi_r;
        }
        IterationRecord rec;
        rec.increment = pair_h1(psi - sol.psi, Psi - sol.Psi);
        const double h4a = h_norm(psi, 4), h4b = h_norm(Psi, 4);
        rec.h4_norm = std::sqrt(h4a * h4a + h4b * h4b);
        rec.mu0 = fc.mu0;
        sol.history.push_back(rec);
        sol.psi = std::move(psi);
        sol.psi_r = std::move(psi_r);
        sol.Psi = std::move(Psi);
        sol.Psi_r = std::move(Psi_r);
        sol.iterations = it;

        if (rec.h4_norm > cfg.delta) {
            std::ostringstream os;
            os << "iterate " << it << " has H^4 norm " << rec.h4_norm << " > delta " << cfg.delta;
            fail(ErrorKind::LeftIterationSet, os.str());
        }
        if (it > 1 && prev_inc > 0) sol.contraction_factor = std::max(sol.contraction_factor, rec.increment / prev_inc);
        if (rec.increment < cfg.tol_fp) {
            sol.converged = true;
            break;
        }
        stalled = (it > 1 && rec.increment >= prev_inc) ? stalled + 1 : 0;
        if (stalled >= 5) {
            std::ostringstream os;
            os << "H^1 increments did not decrease for 5 consecutive steps (last " << rec.increment << ")";
            fail(ErrorKind::NoContraction, os.str());
        }
        prev_inc = rec.increment;
    }

    // reconstruction
    samples_of(sol, V1, V2, P, P_r, P_t);
    sol.V1 = V1;
    sol.V2 = V2;
    sol.U1.resize(nr, nt);
    sol.U2.resize(nr, nt);
    sol.Phi.resize(nr, nt);
    sol.rho.resize(nr, nt);
    const double gm = flow.params.gamma;
    sol.min_supersonic_margin = std::numeric_limits<double>::infinity();
    sol.min_U1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nr; ++i) {
        for (int l = 0; l < nt; ++l) {
            const double u1 = flow.U1[i] + V1(i, l), u2 = flow.U2[i] + V2(i, l), phi = flow.Phi[i] + P(i, l);
            sol.U1(i, l) = u1;
            sol.U2(i, l) = u2;
            sol.Phi(i, l) = phi;
            sol.rho(i, l) = density_from_bernoulli(flow.K0, flow.params.S0, u1, u2, phi, gm);
            const double c2 = sound_speed_sq(flow.K0, u1, u2, phi, gm);
            sol.min_supersonic_margin = std::min(sol.min_supersonic_margin, u1 * u1 + u2 * u2 - c2);
            sol.min_U1 = std::min(sol.min_U1, u1);
        }
    }
    const double h4a = h_norm(sol.psi, 4), h4b = h_norm(sol.Psi, 4);
    sol.c1_empirical = sol.omega1 > 1e-10 ? std::sqrt(h4a * h4a + h4b * h4b) / sol.omega1 : 0.0;
    const double n1 = sampled_h1(V1, M, grid), n2 = sampled_h1(V2, M, grid), n3 = h_norm(sol.Psi, 1);
    sol.norm_h1 = std::sqrt(n1 * n1 + n2 * n2 + n3 * n3);
    const Eigen::MatrixXd K = Eigen::MatrixXd::Constant(nr, nt, flow.K0);
    const Eigen::MatrixXd S = Eigen::MatrixXd::Constant(nr, nt, flow.params.S0);
    sol.residuals = flow_residuals(flow, bd, sol.U1, sol.U2, sol.rho, sol.Psi, sol.Psi_r, K, S);
    return sol;
}

}  // namespace spiral
