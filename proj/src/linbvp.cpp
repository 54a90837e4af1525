#include "spiral/linbvp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spiral/errors.hpp"

namespace spiral {

namespace {

constexpr double kPivotTol = 1e-10;

double pivot_ratio(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
    const Eigen::VectorXd d = lu.matrixLU().diagonal().cwiseAbs();
    const double mx = d.maxCoeff();
    return mx > 0 ? d.minCoeff() / mx : 0.0;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd mode_vector(const ThetaSeries& s, int m) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(basis::size(m));
    const int k = std::min<int>(static_cast<int>(s.c.size()), basis::size(m));
    v.head(k) = s.c.head(k);
    return v;
}

}  // namespace

LinearCoefficients barred_coefficients(const BackgroundFlow& flow, const RadialCoeffs& rc,
                                       int ntheta) {
    LinearCoefficients c;
    const int n = flow.n();
    c.grid = RadialGrid(flow.r0, flow.r1, n);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ntheta);
    c.A12 = to_vec(rc.A12) * ones.transpose();
    c.A22 = to_vec(rc.A22) * ones.transpose();
    c.a2 = to_vec(rc.a2) * ones.transpose();
    c.a1 = to_vec(rc.a1);
    c.b1 = to_vec(rc.b1);
    c.b2 = to_vec(rc.b2);
    c.b3 = to_vec(rc.b3);
    c.a3 = to_vec(rc.a3);
    c.a4 = to_vec(rc.a4);
    c.b4 = to_vec(rc.b4);
    return c;
}

LinearCoefficients frozen_coefficients(const BackgroundFlow& flow, const RadialCoeffs& rc,
                                       const FrozenCoeffs& fc) {
    LinearCoefficients c = barred_coefficients(flow, rc, static_cast<int>(fc.A22.cols()));
    c.A12 = fc.A12;
    c.A22 = fc.A22;
    return c;
}

LinearBC LinearBC::homogeneous(int m) {
    LinearBC bc;
    bc.psi0 = bc.dpsi0 = bc.dPsi0 = bc.Psi1 = ThetaSeries(m);
    return bc;
}

ModeSystem assemble(const LinearCoefficients& coef, const Eigen::MatrixXd& F3,
                    const Eigen::MatrixXd& F4, const LinearBC& bc, int m) {
    const int nr = coef.grid.n, nt = coef.ntheta(), n = basis::size(m);
    if (nt < 2 * n) fail(ErrorKind::InvalidParams, "assemble: too few theta samples for truncation");
    ModeSystem sys;
    sys.m = m;
    sys.grid = coef.grid;
    sys.b4 = coef.b4;

    const double w = 2 * std::numbers::pi / nt;
    const Eigen::MatrixXd B = basis::matrix(m, nt);
    const Eigen::MatrixXd Bd = basis::theta_derivative_matrix(m, 1) * B;
    const Eigen::MatrixXd Bdd = basis::theta_derivative_matrix(m, 2) * B;
    const Eigen::MatrixXd Iq = w * B * B.transpose();
    const Eigen::MatrixXd Dq = w * B * Bd.transpose();
    const Eigen::MatrixXd D2q = w * B * Bdd.transpose();

    for (auto& s : sys.S) s.resize(nr);
    for (int i = 0; i < nr; ++i) {
        const Eigen::RowVectorXd A12 = coef.A12.row(i), A22 = coef.A22.row(i), a2 = coef.a2.row(i);
        sys.S[0][i] = B * (2 * w * A12.transpose()).asDiagonal() * Bd.transpose() + coef.a1[i] * Iq;
        sys.S[1][i] = B * (-w * A22.transpose()).asDiagonal() * Bdd.transpose() +
                      B * (w * a2.transpose()).asDiagonal() * Bd.transpose();
        sys.S[2][i] = coef.b1[i] * Iq;
        sys.S[3][i] = coef.b2[i] * Dq + coef.b3[i] * Iq;
        sys.S[4][i] = D2q;
        sys.S[5][i] = coef.a3[i] * Iq;
        sys.S[6][i] = coef.a4[i] * Dq;
    }
    sys.F3k = w * F3 * B.transpose();
    sys.F4k = w * F4 * B.transpose();
    sys.psi0 = mode_vector(bc.psi0, m);
    sys.dpsi0 = mode_vector(bc.dpsi0, m);
    sys.dPsi0 = mode_vector(bc.dPsi0, m);
    sys.Psi1 = mode_vector(bc.Psi1, m);

    const RadialGrid& g = coef.grid;
    sys.aliasing_risk = analyze(coef.A12, m, g).aliasing_risk || analyze(coef.A22, m, g).aliasing_risk ||
                        analyze(coef.a2, m, g).aliasing_risk;
    return sys;
}

LinearSolution solve_modes(const ModeSystem& sys) {
    const int n = sys.n_modes(), N = sys.state_size(), nr = sys.grid.n;
    const double h = sys.grid.h();

    // Y' = S Y + F with Y = (U, U', V, V')
    auto system = [&](int i, Eigen::MatrixXd& S, Eigen::VectorXd& F) {
        const double r = sys.grid.r(i);
        S.setZero(N, N);
        F.setZero(N);
        S.block(0, n, n, n).setIdentity();
        S.block(n, 0, n, n) = -sys.S[1][i];
        S.block(n, n, n, n) = -sys.S[0][i];
        S.block(n, 2 * n, n, n) = -sys.S[3][i];
        S.block(n, 3 * n, n, n) = -sys.S[2][i];
        S.block(2 * n, 3 * n, n, n).setIdentity();
        S.block(3 * n, 0, n, n) = -sys.S[6][i];
        S.block(3 * n, n, n, n) = -sys.S[5][i];
        S.block(3 * n, 2 * n, n, n) = -sys.S[4][i] / (r * r);
        S.block(3 * n, 2 * n, n, n).diagonal().array() += sys.b4[i];
        S.block(3 * n, 3 * n, n, n).diagonal().array() -= 1.0 / r;
        F.segment(n, n) = sys.F3k.row(i).transpose();
        F.segment(3 * n, n) = sys.F4k.row(i).transpose();
    };

    // Y_i = a_i + B_i c with c = V(r0) unknown
    std::vector<Eigen::VectorXd> a(nr);
    std::vector<Eigen::MatrixXd> Bm(nr);
    a[0] = Eigen::VectorXd::Zero(N);
    a[0].segment(0, n) = sys.psi0;
    a[0].segment(n, n) = sys.dpsi0;
    a[0].segment(3 * n, n) = sys.dPsi0;
    Bm[0] = Eigen::MatrixXd::Zero(N, n);
    Bm[0].block(2 * n, 0, n, n).setIdentity();

    double min_ratio = 1.0;
    Eigen::MatrixXd S0, S1;
    Eigen::VectorXd F0, F1;
    system(0, S0, F0);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
    for (int i = 0; i + 1 < nr; ++i) {
        system(i + 1, S1, F1);
        const Eigen::MatrixXd Sm = 0.5 * (S0 + S1);
        const Eigen::VectorXd Fm = 0.5 * (F0 + F1);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - (h / 2) * Sm);
        min_ratio = std::min(min_ratio, pivot_ratio(lu));
        const Eigen::MatrixXd P = I + (h / 2) * Sm;
        a[i + 1] = lu.solve(P * a[i] + h * Fm);
        Bm[i + 1] = lu.solve(P * Bm[i]);
        std::swap(S0, S1);
        std::swap(F0, F1);
    }
    const Eigen::MatrixXd G = Bm[nr - 1].block(2 * n, 0, n, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> glu(G);
    min_ratio = std::min(min_ratio, pivot_ratio(glu));
    if (min_ratio < kPivotTol) {
        std::ostringstream os;
        os << "pivot ratio " << min_ratio << " below " << kPivotTol;
        fail(ErrorKind::SingularSystem, os.str());
    }
    const Eigen::VectorXd c = glu.solve(sys.Psi1 - a[nr - 1].segment(2 * n, n));

    LinearSolution sol;
    sol.min_pivot_ratio = min_ratio;
    sol.psi = sol.psi_r = sol.Psi = sol.Psi_r = AnnulusField(sys.m, sys.grid);
    for (int i = 0; i < nr; ++i) {
        const Eigen::VectorXd Y = a[i] + Bm[i] * c;
        sol.psi.c.row(i) = Y.segment(0, n).transpose();
        sol.psi_r.c.row(i) = Y.segment(n, n).transpose();
        sol.Psi.c.row(i) = Y.segment(2 * n, n).transpose();
        sol.Psi_r.c.row(i) = Y.segment(3 * n, n).transpose();
    }
    for (int k = 1; k <= 4; ++k) {
        sol.norm_psi[k - 1] = h_norm(sol.psi, k);
        sol.norm_Psi[k - 1] = h_norm(sol.Psi, k);
    }
    return sol;
}

ResidualReport linear_residual(const LinearCoefficients& coef, const LinearSolution& sol,
                               const Eigen::MatrixXd& F3, const Eigen::MatrixXd& F4) {
    const int nt = coef.ntheta(), nr = coef.grid.n;
    const Eigen::MatrixXd p_r = sol.psi_r.synthesize(nt), p_rr = sol.psi_r.dr().synthesize(nt),
                          p_t = sol.psi.dth().synthesize(nt), p_tt = sol.psi.dthth().synthesize(nt),
                          p_rt = sol.psi_r.dth().synthesize(nt);
    const Eigen::MatrixXd P = sol.Psi.synthesize(nt), P_r = sol.Psi_r.synthesize(nt),
                          P_rr = sol.Psi_r.dr().synthesize(nt), P_t = sol.Psi.dth().synthesize(nt),
                          P_tt = sol.Psi.dthth().synthesize(nt);
    const Eigen::VectorXd wr = trapezoid_weights(nr, coef.grid.h());
    const double wt = 2 * std::numbers::pi / nt;
    ResidualReport rep;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < nr; ++i) {
        const double r = coef.grid.r(i);
        for (int l = 0; l < nt; ++l) {
            const double e1 = p_rr(i, l) - coef.A22(i, l) * p_tt(i, l) + 2 * coef.A12(i, l) * p_rt(i, l) +
                              coef.a1[i] * p_r(i, l) + coef.a2(i, l) * p_t(i, l) + coef.b1[i] * P_r(i, l) +
                              coef.b2[i] * P_t(i, l) + coef.b3[i] * P(i, l) - F3(i, l);
            const double e2 = P_rr(i, l) + P_r(i, l) / r + P_tt(i, l) / (r * r) + coef.a3[i] * p_r(i, l) +
                              coef.a4[i] * p_t(i, l) - coef.b4[i] * P(i, l) - F4(i, l);
            rep.max_eq1 = std::max(rep.max_eq1, std::abs(e1));
            rep.max_eq2 = std::max(rep.max_eq2, std::abs(e2));
            s1 += wr[i] * wt * e1 * e1;
            s2 += wr[i] * wt * e2 * e2;
        }
    }
    rep.l2_eq1 = std::sqrt(s1);
    rep.l2_eq2 = std::sqrt(s2);
    return rep;
}

LinearSolution solve_linear(const LinearCoefficients& coef, const Eigen::MatrixXd& F3,
                            const Eigen::MatrixXd& F4, const LinearBC& bc, int m, bool with_report) {
    LinearSolution sol = solve_modes(assemble(coef, F3, F4, bc, m));
    if (with_report) sol.residual = linear_residual(coef, sol, F3, F4);
    return sol;
}

}  // namespace spiral
