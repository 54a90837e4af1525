#include "spiral/rotational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spiral/boundary.hpp"
#include "spiral/errors.hpp"
#include "spiral/linbvp.hpp"

namespace spiral {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2Pi = std::sqrt(2 * kPi);

void add_rows(AnnulusField& f, const ThetaSeries& s, const Eigen::VectorXd& scale) {
    const int k = std::min<int>(static_cast<int>(s.c.size()), f.n_basis());
    for (int i = 0; i < f.grid.n; ++i) f.c.row(i).head(k) += scale[i] * s.c.head(k).transpose();
}

void scale_rows(AnnulusField& f, const Eigen::VectorXd& s) {
    for (int i = 0; i < f.grid.n; ++i) f.c.row(i) *= s[i];
}

ThetaSeries row_series(const AnnulusField& f, int i) {
    ThetaSeries s(f.M);
    s.c = f.c.row(i).transpose();
    return s;
}

ThetaSeries minus_const(ThetaSeries s, double v) {
    s.c[0] -= v * kSqrt2Pi;
    return s;
}

double h1_triple(const VelocityState& a, const VelocityState& b) {
    const double x = h_norm(a.W1 - b.W1, 1), y = h_norm(a.W2 - b.W2, 1), z = h_norm(a.W3 - b.W3, 1);
    return std::sqrt(x * x + y * y + z * z);
}

double sigma_norm(const VelocityState& a, const VelocityState& b) {
    const double x = h_norm(a.W1 - b.W1, 0), y = h_norm(a.W2 - b.W2, 0);
    return std::sqrt(x * x + y * y) + h_norm(a.W3 - b.W3, 1);
}

double delta_v_of(const VelocityState& w) {
    const double x = h_norm(w.W1, 3), y = h_norm(w.W2, 3);
    return std::sqrt(x * x + y * y) + h_norm(w.W3, 4);
}

VelocityState zero_state(int M, const RadialGrid& g) {
    VelocityState w;
    w.W1 = w.W2 = w.W3 = w.W3_r = AnnulusField(M, g);
    return w;
}

}  // namespace

PoissonLift poisson_lift(const Eigen::MatrixXd& G, int M, const RadialGrid& grid) {
    const int n = grid.n, nt = static_cast<int>(G.cols()), nb = basis::size(M);
    const double h = grid.h();
    const Eigen::MatrixXd Gk = (2 * kPi / nt) * G * basis::matrix(M, nt).transpose();
    PoissonLift out;
    out.phi = AnnulusField(M, grid);
    if (n < 3) return out;
    const int m = n - 2;
    std::vector<double> lo(m), di(m), up(m), rhs(m);
    for (int j = 0; j < nb; ++j) {
        const double k = basis::wavenumber(j);
        for (int a = 0; a < m; ++a) {
            const double r = grid.r(a + 1);
            lo[a] = 1 / (h * h) - 1 / (2 * h * r);
            up[a] = 1 / (h * h) + 1 / (2 * h * r);
            di[a] = -2 / (h * h) - k * k / (r * r);
            rhs[a] = Gk(a + 1, j);
        }
        // Thomas elimination; diagonally dominant for h < 2 r0
        for (int a = 1; a < m; ++a) {
            const double f = lo[a] / di[a - 1];
            di[a] -= f * up[a - 1];
            rhs[a] -= f * rhs[a - 1];
        }
        out.phi.c(m, j) = rhs[m - 1] / di[m - 1];
        for (int a = m - 2; a >= 0; --a) out.phi.c(a + 1, j) = (rhs[a] - up[a] * out.phi.c(a + 2, j)) / di[a];
        for (int a = 0; a < m; ++a) {
            const int i = a + 1;
            const double r = grid.r(i), k2 = k * k;
            const double res = (out.phi.c(i + 1, j) - 2 * out.phi.c(i, j) + out.phi.c(i - 1, j)) / (h * h) +
                               (out.phi.c(i + 1, j) - out.phi.c(i - 1, j)) / (2 * h * r) -
                               k2 * out.phi.c(i, j) / (r * r) - Gk(i, j);
            out.residual_max = std::max(out.residual_max, std::abs(res));
        }
    }
    return out;
}

double StreamFunction::value(int i, int l, int ntheta) const {
    return periodic(i, l) + winding * l / static_cast<double>(ntheta);
}

double StreamFunction::at_entrance(double t) const { return winding * t / (2 * kPi) + entrance(t); }

double StreamFunction::entrance_inverse(double v) const {
    double bound = 0;
    for (int j = 0; j < entrance.c.size(); ++j) bound += std::abs(entrance.c[j]);
    bound /= std::sqrt(kPi);
    double lo = (v - bound) * 2 * kPi / winding - 1e-12, hi = (v + bound) * 2 * kPi / winding + 1e-12;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (at_entrance(mid) < v)
            lo = mid;
        else
            hi = mid;
        if (mid == lo && mid == hi) break;
    }
    double b = 0.5 * (lo + hi);
    b -= (at_entrance(b) - v) / flux(b);
    return b;
}

StreamFunction build_stream_function(const Eigen::MatrixXd& rho, const Eigen::MatrixXd& U1,
                                     const Eigen::MatrixXd& U2, int M, const RadialGrid& grid) {
    const int nt = static_cast<int>(rho.cols());
    StreamFunction L;
    L.grid = grid;
    const Eigen::VectorXd f0 = grid.r0 * rho.row(0).cwiseProduct(U1.row(0)).transpose();
    L.min_entrance_flux = f0.minCoeff();
    if (!(L.min_entrance_flux > 0)) {
        std::ostringstream os;
        os << "entrance mass flux r0 rho U1 reaches " << L.min_entrance_flux;
        fail(ErrorKind::MonotonicityLost, os.str());
    }
    L.flux = ThetaSeries::from_samples(f0, M);
    L.winding = 2 * kPi * L.flux.mean();
    L.entrance = L.flux.antiderivative();
    const Eigen::VectorXd P0 = L.entrance.samples(nt);
    const Eigen::MatrixXd I = radial_cumulative_integral(rho.cwiseProduct(U2), grid.h());
    L.periodic = (-I).rowwise() + P0.transpose();
    return L;
}

void transport_boundary_data(const StreamFunction& L, const AnnulusBoundary& bd, double K0, double S0,
                             int ntheta, Eigen::MatrixXd& N1, Eigen::MatrixXd& N2) {
    const int n = L.grid.n;
    N1.resize(n, ntheta);
    N2.resize(n, ntheta);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < ntheta; ++l) {
            const double b = L.entrance_inverse(L.value(i, l, ntheta));
            N1(i, l) = bd.Ken(b) - K0;
            N2(i, l) = bd.Sen(b) - S0;
        }
}

InnerResult inner_solve(const BackgroundFlow& flow, const RadialCoeffs& rc, const AnnulusBoundary& bd,
                        const AnnulusDisc& disc, const Eigen::MatrixXd& N1, const Eigen::MatrixXd& N2,
                        const VelocityState& guess, const IterationConfig& cfg) {
    const int M = disc.M, nt = disc.samples(), nr = flow.n();
    const RadialGrid grid(flow.r0, flow.r1, nr);
    const auto& p = flow.params;
    const Eigen::VectorXd rv = grid.nodes();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(nr), inv_r = rv.cwiseInverse();
    const Eigen::VectorXd rm1 = rv.array() - flow.r1;
    const Eigen::VectorXd th = basis::thetas(nt);
    const Eigen::MatrixXd N1_r = radial_derivative(N1, grid.h(), 1), N2_r = radial_derivative(N2, grid.h(), 1);

    const ThetaSeries e = minus_const(bd.Een, p.E0), pex = minus_const(bd.Phiex, flow.Phi.back());
    const ThetaSeries G8 = minus_const(bd.U1en, p.U1_0);
    const ThetaSeries du2 = minus_const(bd.U2en, p.U2_0);
    const Eigen::VectorXd ev = e.samples(nt), et = e.derivative().samples(nt),
                          ett = e.derivative().derivative().samples(nt);
    const Eigen::VectorXd pv = pex.samples(nt), pt = pex.derivative().samples(nt),
                          ptt = pex.derivative().derivative().samples(nt);

    InnerResult out;
    VelocityState W = guess;
    double prev_inc = 0, prev_sigma = 0;
    int stalled = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Eigen::MatrixXd W1 = W.W1.synthesize(nt), W2 = W.W2.synthesize(nt), W3 = W.W3.synthesize(nt),
                              W3r = W.W3_r.synthesize(nt), W3t = W.W3.dth().synthesize(nt);
        const FrozenCoeffs fc = frozen_coeffs(flow, rc, W1, W2, W3, &N1);

        Eigen::MatrixXd G1(nr, nt), G2(nr, nt), G3(nr, nt);
        for (int i = 0; i < nr; ++i) {
            const LocalBackground q = local_background(flow, rc, i);
            for (int l = 0; l < nt; ++l) {
                G1(i, l) = source_G1(q, N1(i, l), W1(i, l), W2(i, l), W3(i, l), W3r(i, l), W3t(i, l));
                G2(i, l) = source_G2(q, N1(i, l), N2(i, l), N1_r(i, l), N2_r(i, l), W1(i, l), W2(i, l), W3(i, l));
                G3(i, l) = source_G3(q, N1(i, l), N2(i, l), W1(i, l), W2(i, l), W3(i, l),
                                     bd.b(q.r, th[l]) - p.b0);
            }
        }
        const PoissonLift lift = poisson_lift(G2, M, grid);
        out.lift_residual = lift.residual_max;
        const AnnulusField& phi1 = lift.phi;
        const AnnulusField p1r_f = phi1.dr(), p1t_f = phi1.dth();
        const Eigen::MatrixXd p1t = p1t_f.synthesize(nt), p1r = p1r_f.synthesize(nt),
                              p1rr = phi1.drr().synthesize(nt), p1rt = phi1.drth().synthesize(nt),
                              p1tt = phi1.dthth().synthesize(nt);

        // potential lift: d_theta phi2(r0, .) = r0 (U2en - U2_0 + d_r phi1(r0, .)) + d0~
        ThetaSeries w2en = du2;
        w2en.c += row_series(p1r_f, 0).c.head(w2en.c.size());
        const double d0t = -flow.r0 * w2en.mean();
        ThetaSeries gp = w2en;
        gp.c *= flow.r0;
        gp.c[0] += d0t * kSqrt2Pi;
        const Eigen::VectorXd g1 = gp.samples(nt), g2 = gp.derivative().samples(nt);
        out.d0_tilde = d0t;

        Eigen::MatrixXd G6(nr, nt), G7(nr, nt), a2f(nr, nt);
        for (int i = 0; i < nr; ++i) {
            const LocalBackground q = local_background(flow, rc, i);
            const double r = q.r, a2t = rc.a2t[i];
            for (int l = 0; l < nt; ++l) {
                const double B12 = fc.A12(i, l), B22 = fc.A22(i, l);
                const double af = a2t - B12 / r;
                a2f(i, l) = af;
                const double G4 = G1(i, l) - (p1rt(i, l) / r - p1t(i, l) / (r * r)) - r * B22 * p1rt(i, l) +
                                  r * B12 * p1rr(i, l) - B12 * p1tt(i, l) / r - q.a1 * p1t(i, l) / r +
                                  r * a2t * p1r(i, l);
                const double G5 = G3(i, l) - q.a3 * p1t(i, l) / r + r * q.a4 * p1r(i, l);
                const double h = rm1[i] * ev[l] + pv[l], h_t = rm1[i] * et[l] + pt[l],
                             h_tt = rm1[i] * ett[l] + ptt[l];
                const double L1lift = -B22 * g2[l] + af * g1[l] + q.b1 * ev[l] + q.b2 * h_t + q.b3 * h;
                const double L2lift = ev[l] / r + h_tt / (r * r) + q.a4 * g1[l] - q.b4 * h;
                G6(i, l) = G4 + af * d0t - L1lift;
                G7(i, l) = G5 + q.a4 * d0t - L2lift;
            }
        }

        LinearCoefficients coef = barred_coefficients(flow, rc, nt);
        coef.A12 = fc.A12;
        coef.A22 = fc.A22;
        coef.a2 = a2f;
        LinearBC bc = LinearBC::homogeneous(M);
        bc.dpsi0 = G8;
        const LinearSolution lin = solve_linear(coef, G6, G7, bc, M, false);

        VelocityState next;
        AnnulusField phi2 = lin.psi;
        add_rows(phi2, gp.antiderivative(), ones);
        next.W3 = lin.Psi;
        add_rows(next.W3, e, rm1);
        add_rows(next.W3, pex, ones);
        next.W3_r = lin.Psi_r;
        add_rows(next.W3_r, e, ones);
        AnnulusField t1 = p1t_f;
        scale_rows(t1, inv_r);
        next.W1 = lin.psi_r + t1;
        next.W2 = phi2.dth();
        next.W2.c.col(0).array() -= d0t * kSqrt2Pi;
        scale_rows(next.W2, inv_r);
        next.W2 -= p1r_f;

        if (cfg.relaxation < 1) {
            const double w = cfg.relaxation;
            next.W1 = w * next.W1 + (1 - w) * W.W1;
            next.W2 = w * next.W2 + (1 - w) * W.W2;
            next.W3 = w * next.W3 + (1 - w) * W.W3;
            next.W3_r = w * next.W3_r + (1 - w) * W.W3_r;
        }
        const double inc = h1_triple(next, W), sig = sigma_norm(next, W);
        out.increments.push_back(inc);
        if (it > 1 && prev_sigma > 0) out.sigma_contraction = std::max(out.sigma_contraction, sig / prev_sigma);
        W = std::move(next);
        out.iterations = it;
        const double dv = delta_v_of(W);
        if (dv > cfg.delta) {
            std::ostringstream os;
            os << "velocity iterate " << it << " has size " << dv << " > delta_v " << cfg.delta;
            fail(ErrorKind::LeftIterationSet, os.str());
        }
        if (inc < cfg.tol_fp) {
            out.converged = true;
            break;
        }
        stalled = (it > 1 && inc >= prev_inc) ? stalled + 1 : 0;
        if (stalled >= 5) {
            std::ostringstream os;
            os << "inner H^1 increments did not decrease for 5 consecutive steps (last " << inc << ")";
            fail(ErrorKind::NoContraction, os.str());
        }
        prev_inc = inc;
        prev_sigma = sig;
    }
    out.W = std::move(W);
    return out;
}

RotationalState solve_rotational(const BackgroundFlow& flow, const AnnulusBoundary& bd,
                                 const AnnulusDisc& disc, const RotationalConfig& cfg,
                                 const Eigen::MatrixXd* N1_init, const Eigen::MatrixXd* N2_init) {
    if (!(cfg.outer_tol > 0) || cfg.outer_max < 1 || !(cfg.delta_e > 0))
        fail(ErrorKind::InvalidParams, "solve_rotational: bad iteration config");
    const int M = disc.M, nt = disc.samples(), nr = flow.n();
    const RadialGrid grid(flow.r0, flow.r1, nr);
    const RadialCoeffs rc = linear_coeffs(flow);
    const auto& p = flow.params;
    const double gm = p.gamma;
    IterationConfig icfg = cfg.inner;
    icfg.tol_fp = 0.1 * cfg.outer_tol;

    RotationalState st;
    st.disc = disc;
    st.omega1 = omega1(flow, bd);
    st.omega2 = omega2(flow, bd);
    st.sigma_p = st.omega1 + st.omega2;
    st.N1 = N1_init ? *N1_init : Eigen::MatrixXd::Zero(nr, nt);
    st.N2 = N2_init ? *N2_init : Eigen::MatrixXd::Zero(nr, nt);
    VelocityState W = zero_state(M, grid);

    auto total_flow = [&](const VelocityState& w, const Eigen::MatrixXd& N1, const Eigen::MatrixXd& N2,
                          Eigen::MatrixXd& U1, Eigen::MatrixXd& U2, Eigen::MatrixXd& Phi,
                          Eigen::MatrixXd& rho) {
        U1 = w.W1.synthesize(nt);
        U2 = w.W2.synthesize(nt);
        Phi = w.W3.synthesize(nt);
        rho.resize(nr, nt);
        for (int i = 0; i < nr; ++i) {
            U1.row(i).array() += flow.U1[i];
            U2.row(i).array() += flow.U2[i];
            Phi.row(i).array() += flow.Phi[i];
            for (int l = 0; l < nt; ++l)
                rho(i, l) = density_from_bernoulli(flow.K0 + N1(i, l), p.S0 + N2(i, l), U1(i, l), U2(i, l),
                                                   Phi(i, l), gm);
        }
    };

    double prev_inc = 0;
    int stalled = 0;
    for (int k = 1; k <= cfg.outer_max; ++k) {
        const InnerResult in = inner_solve(flow, rc, bd, disc, st.N1, st.N2, W, icfg);
        W = in.W;
        st.inner_iterations_total += in.iterations;
        st.inner_contraction = std::max(st.inner_contraction, in.sigma_contraction);

        Eigen::MatrixXd U1, U2, Phi, rho, N1, N2;
        total_flow(W, st.N1, st.N2, U1, U2, Phi, rho);
        st.L = build_stream_function(rho, U1, U2, (nt - 1) / 2, grid);
        transport_boundary_data(st.L, bd, flow.K0, p.S0, nt, N1, N2);

        const double a = sampled_h1(N1 - st.N1, M, grid), b = sampled_h1(N2 - st.N2, M, grid);
        const double inc = std::sqrt(a * a + b * b);
        st.outer_increments.push_back(inc);
        if (k > 1 && prev_inc > 0) st.outer_contraction = std::max(st.outer_contraction, inc / prev_inc);
        st.N1 = std::move(N1);
        st.N2 = std::move(N2);
        st.outer_iterations = k;
        const double e4a = h_norm(analyze(st.N1, M, grid).field, 4), e4b = h_norm(analyze(st.N2, M, grid).field, 4);
        st.delta_e = std::sqrt(e4a * e4a + e4b * e4b);
        if (st.delta_e > cfg.delta_e) {
            std::ostringstream os;
            os << "transported data has H^4 size " << st.delta_e << " > delta_e " << cfg.delta_e;
            fail(ErrorKind::LeftIterationSet, os.str());
        }
        if (inc < cfg.outer_tol) {
            st.converged = true;
            break;
        }
        stalled = (k > 1 && inc >= prev_inc) ? stalled + 1 : 0;
        if (stalled >= 5) fail(ErrorKind::NoContraction, "outer increments did not decrease for 5 steps");
        prev_inc = inc;
    }
    // velocity consistent with the final transported data
    const InnerResult fin = inner_solve(flow, rc, bd, disc, st.N1, st.N2, W, icfg);
    st.inner_iterations_total += fin.iterations;
    st.W = fin.W;
    st.delta_v = delta_v_of(st.W);

    total_flow(st.W, st.N1, st.N2, st.U1, st.U2, st.Phi, st.rho);
    st.K = st.N1.array() + flow.K0;
    st.S = st.N2.array() + p.S0;
    st.min_supersonic_margin = std::numeric_limits<double>::infinity();
    st.min_U1 = st.U1.minCoeff();
    for (int i = 0; i < nr; ++i)
        for (int l = 0; l < nt; ++l) {
            const double c2 = sound_speed_sq(st.K(i, l), st.U1(i, l), st.U2(i, l), st.Phi(i, l), gm);
            st.min_supersonic_margin = std::min(
                st.min_supersonic_margin, st.U1(i, l) * st.U1(i, l) + st.U2(i, l) * st.U2(i, l) - c2);
        }
    {
        const double x = h_norm(st.W.W1, 1), y = h_norm(st.W.W2, 1), z = h_norm(st.W.W3, 1);
        st.norm_W_h1 = std::sqrt(x * x + y * y + z * z);
        const double a = sampled_h1(st.N1, M, grid), b = sampled_h1(st.N2, M, grid);
        st.norm_N_h1 = std::sqrt(a * a + b * b);
    }

    // residuals of the full system
    auto& R = st.residuals;
    R.flow = flow_residuals(flow, bd, st.U1, st.U2, st.rho, st.W.W3, st.W.W3_r, st.K, st.S);
    const double h = grid.h();
    Eigen::MatrixXd rU2(nr, nt);
    for (int i = 0; i < nr; ++i) rU2.row(i) = grid.r(i) * st.U2.row(i);
    const Eigen::MatrixXd U1_t = theta_derivative_samples(st.U1), rU2_r = radial_derivative(rU2, h, 1);
    const Eigen::MatrixXd K_r = radial_derivative(st.K, h, 1), S_r = radial_derivative(st.S, h, 1);
    const Eigen::MatrixXd K_t = theta_derivative_samples(st.K), S_t = theta_derivative_samples(st.S);
    const Eigen::VectorXd wr = trapezoid_weights(nr, h);
    double sv = 0;
    for (int i = 0; i < nr; ++i) {
        const double r = grid.r(i);
        for (int l = 0; l < nt; ++l) {
            const double v = st.U2(i, l) / r * (U1_t(i, l) - rU2_r(i, l)) -
                             (std::exp(st.S(i, l)) * std::pow(st.rho(i, l), gm - 1) / (gm - 1) * S_r(i, l) -
                              K_r(i, l));
            R.vorticity_max = std::max(R.vorticity_max, std::abs(v));
            sv += wr[i] * (2 * kPi / nt) * v * v;
            R.transport_K_max = std::max(R.transport_K_max,
                                         std::abs(st.U1(i, l) * K_r(i, l) + st.U2(i, l) / r * K_t(i, l)));
            R.transport_S_max = std::max(R.transport_S_max,
                                         std::abs(st.U1(i, l) * S_r(i, l) + st.U2(i, l) / r * S_t(i, l)));
        }
    }
    R.vorticity_l2 = std::sqrt(sv);
    st.drift = streamline_drift(flow, st, bd);
    return st;
}

DriftAudit streamline_drift(const BackgroundFlow& flow, const RotationalState& st,
                            const AnnulusBoundary& bd, int seeds, int substeps) {
    const int nr = flow.n(), nt = static_cast<int>(st.U1.cols());
    const RadialGrid grid(flow.r0, flow.r1, nr);
    // largest truncation analyze() accepts for these samples
    const int Mf = (nt / 2 - 1) / 2;
    const AnnulusField U1 = analyze(st.U1, Mf, grid).field, U2 = analyze(st.U2, Mf, grid).field;
    const AnnulusField K = analyze(st.K, Mf, grid).field, S = analyze(st.S, Mf, grid).field;
    DriftAudit d;
    d.seeds = seeds;
    auto slope = [&](double r, double t) { return interpolate(U2, r, t) / (r * interpolate(U1, r, t)); };
    const int steps = (nr - 1) * substeps;
    const double h = (flow.r1 - flow.r0) / steps;
    for (int s = 0; s < seeds; ++s) {
        const double t0 = 2 * kPi * s / seeds;
        const double K0 = bd.Ken(t0), S0 = bd.Sen(t0);
        double r = flow.r0, t = t0;
        for (int k = 0; k < steps; ++k) {
            const double k1 = slope(r, t), k2 = slope(r + h / 2, t + h / 2 * k1),
                         k3 = slope(r + h / 2, t + h / 2 * k2), k4 = slope(r + h, t + h * k3);
            t += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            r = flow.r0 + (k + 1) * h;
            d.max_drift_K = std::max(d.max_drift_K, std::abs(interpolate(K, r, t) - K0));
            d.max_drift_S = std::max(d.max_drift_S, std::abs(interpolate(S, r, t) - S0));
        }
    }
    // winding: the preimage of L + winding must be the preimage of L shifted by 2 pi
    for (int i = 0; i < nr; i += std::max(1, nr / 8))
        for (int l = 0; l < nt; l += std::max(1, nt / 8)) {
            const double v = st.L.value(i, l, nt);
            const double b0 = st.L.entrance_inverse(v), b1 = st.L.entrance_inverse(v + st.L.winding);
            d.max_theta_mismatch = std::max(d.max_theta_mismatch, std::abs(b1 - b0 - 2 * kPi));
        }
    return d;
}

}  // namespace spiral
