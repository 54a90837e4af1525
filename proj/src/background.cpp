#include "spiral/background.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "spiral/errors.hpp"

namespace spiral {

namespace {

using State = std::array<double, 3>;  // rho, r*E, Phi

struct Rhs {
    const BackgroundParams& p;
    double J1, J2;

    State operator()(double r, const State& y) const {
        const double rho = y[0];
        if (!(rho > 0)) fail(ErrorKind::AdmissibilityViolated, "nonpositive density");
        const double U1 = J1 / (r * rho), U2 = J2 / r;
        const double c2 = p.gamma * std::exp(p.S0) * std::pow(rho, p.gamma - 1);
        const double D = c2 - U1 * U1;
        if (D < 1e-12 * c2) {
            std::ostringstream os;
            os << "c^2 - U1^2 degenerate at r=" << r;
            throw AdmissibilityViolated(r, os.str());
        }
        return {rho * (U1 * U1 + U2 * U2 + y[1]) / (r * D), r * (rho - p.b0), y[1] / r};
    }
};

State rk4_step(const Rhs& f, double r, const State& y, double h) {
    auto axpy = [](const State& a, double s, const State& b) {
        return State{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
    };
    const State k1 = f(r, y);
    const State k2 = f(r + h / 2, axpy(y, h / 2, k1));
    const State k3 = f(r + h / 2, axpy(y, h / 2, k2));
    const State k4 = f(r + h, axpy(y, h, k3));
    State out;
    for (int c = 0; c < 3; ++c) out[c] = y[c] + h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    return out;
}

BackgroundPoint make_point(const BackgroundParams& p, double J1, double J2, double r,
                           const State& y) {
    BackgroundPoint q;
    q.r = r;
    q.rho = y[0];
    q.E = y[1] / r;
    q.Phi = y[2];
    q.U1 = J1 / (r * q.rho);
    q.U2 = J2 / r;
    q.c2 = p.gamma * std::exp(p.S0) * std::pow(q.rho, p.gamma - 1);
    q.P = std::exp(p.S0) * std::pow(q.rho, p.gamma);
    q.rho_p = q.rho * (q.U1 * q.U1 + q.U2 * q.U2 + y[1]) / (r * (q.c2 - q.U1 * q.U1));
    q.U1_p = -q.U1 * (1.0 / r + q.rho_p / q.rho);
    q.U2_p = -q.U2 / r;
    return q;
}

std::vector<State> march(const BackgroundParams& p, double r1, int n_nodes) {
    const Rhs f{p, p.J1(), p.J2()};
    const double h = (r1 - p.r0) / (n_nodes - 1);
    std::vector<State> ys(n_nodes);
    ys[0] = {p.rho0, p.r0 * p.E0, 0.0};
    for (int i = 0; i + 1 < n_nodes; ++i) ys[i + 1] = rk4_step(f, p.r0 + i * h, ys[i], h);
    return ys;
}

}  // namespace

double BackgroundParams::c2_0() const { return gamma * std::exp(S0) * std::pow(rho0, gamma - 1); }

double BackgroundParams::K0() const {
    return 0.5 * (U1_0 * U1_0 + U2_0 * U2_0) + c2_0() / (gamma - 1);
}

void BackgroundParams::validate() const {
    std::ostringstream os;
    auto need = [&](bool ok, const char* what) {
        if (!ok) os << what << "; ";
    };
    const bool finite = std::isfinite(gamma) && std::isfinite(r0) && std::isfinite(b0) &&
                        std::isfinite(rho0) && std::isfinite(U1_0) && std::isfinite(U2_0) &&
                        std::isfinite(S0) && std::isfinite(E0);
    need(finite, "non-finite parameter");
    if (finite) {
        need(gamma >= 3, "gamma >= 3");
        need(r0 > 0, "r0 > 0");
        need(rho0 > b0, "rho0 > b0");
        need(U1_0 > 0, "U1_0 > 0");
        need(U2_0 != 0, "U2_0 != 0");
        need(S0 >= 0, "S0 >= 0");
        need(E0 > 0, "E0 > 0");
        if (rho0 > 0) {
            const double c2 = c2_0();
            need(U1_0 * U1_0 < c2, "U1_0^2 < c0^2");
            need(c2 < U2_0 * U2_0, "c0^2 < U2_0^2");
            need(U2_0 * U2_0 < 2 * r0 * r0 * rho0, "U2_0^2 < 2 r0^2 rho0");
        }
    }
    if (!os.str().empty()) fail(ErrorKind::InvalidParams, os.str());
}

BackgroundParams reference_params() { return BackgroundParams{}; }

BackgroundPoint BackgroundFlow::node(int i) const {
    BackgroundPoint q;
    q.r = r[i];
    q.rho = rho[i];
    q.E = E[i];
    q.Phi = Phi[i];
    q.U1 = U1[i];
    q.U2 = U2[i];
    q.c2 = c2[i];
    q.P = P[i];
    q.rho_p = rho_p[i];
    q.U1_p = U1_p[i];
    q.U2_p = U2_p[i];
    return q;
}

BackgroundPoint BackgroundFlow::at(double radius) const {
    const int last = n() - 1;
    int i = static_cast<int>(std::floor((radius - r0) / h));
    i = std::clamp(i, 0, last);
    const double dr = radius - r[i];
    if (dr == 0.0) return node(i);
    const Rhs f{params, J1, J2};
    const State y = rk4_step(f, r[i], State{rho[i], r[i] * E[i], Phi[i]}, dr);
    return make_point(params, J1, J2, radius, y);
}

BackgroundFlow integrate_background(const BackgroundParams& p, double r1, int n_nodes,
                                    bool richardson) {
    p.validate();
    if (!(r1 > p.r0)) fail(ErrorKind::InvalidParams, "r1 must exceed r0");
    if (n_nodes < 16) fail(ErrorKind::InvalidParams, "n_nodes must be >= 16");

    BackgroundFlow f;
    f.params = p;
    f.r0 = p.r0;
    f.r1 = r1;
    f.h = (r1 - p.r0) / (n_nodes - 1);
    f.J1 = p.J1();
    f.J2 = p.J2();
    f.K0 = p.K0();

    const auto ys = march(p, r1, n_nodes);
    const double rE0 = p.r0 * p.E0;
    for (int i = 0; i < n_nodes; ++i) {
        const double r = (i == n_nodes - 1) ? r1 : p.r0 + i * f.h;
        const BackgroundPoint q = make_point(p, f.J1, f.J2, r, ys[i]);
        const double m1 = q.U1 * q.U1 / q.c2, m2 = q.U2 * q.U2 / q.c2;
        std::ostringstream os;
        if (!(m1 < 1)) os << "M1^2 = " << m1 << " >= 1";
        else if (!(m1 + m2 > 1)) os << "M1^2 + M2^2 = " << m1 + m2 << " <= 1";
        else if (i > 0 && !(q.rho >= f.rho.back())) os << "density decreased";
        else if (i > 0 && !(r * q.E > rE0)) os << "r E <= r0 E0";
        if (!os.str().empty()) {
            os << " at r=" << r;
            throw AdmissibilityViolated(r, os.str());
        }
        f.r.push_back(r);
        f.rho.push_back(q.rho);
        f.E.push_back(q.E);
        f.U1.push_back(q.U1);
        f.U2.push_back(q.U2);
        f.P.push_back(q.P);
        f.Phi.push_back(q.Phi);
        f.c2.push_back(q.c2);
        f.M1sq.push_back(m1);
        f.M2sq.push_back(m2);
        f.rho_p.push_back(q.rho_p);
        f.U1_p.push_back(q.U1_p);
        f.U2_p.push_back(q.U2_p);
    }

    if (richardson) {
        const auto fine = march(p, r1, 2 * (n_nodes - 1) + 1);
        double err = 0;
        for (int i = 0; i < n_nodes; ++i)
            for (int c = 0; c < 3; ++c) err = std::max(err, std::abs(fine[2 * i][c] - ys[i][c]));
        f.richardson_error = err / 15;
    }
    return f;
}

double bernoulli_defect(const BackgroundFlow& f) {
    const auto& p = f.params;
    double d = 0;
    for (int i = 0; i < f.n(); ++i) {
        const double K = 0.5 * (f.U1[i] * f.U1[i] + f.U2[i] * f.U2[i]) +
                         p.gamma * std::exp(p.S0) * std::pow(f.rho[i], p.gamma - 1) / (p.gamma - 1) -
                         f.Phi[i];
        d = std::max(d, std::abs(K - f.K0));
    }
    return d;
}

double richardson_order(const BackgroundParams& p, double r1, int n_nodes) {
    const auto a = march(p, r1, n_nodes);
    const auto b = march(p, r1, 2 * (n_nodes - 1) + 1);
    const auto c = march(p, r1, 4 * (n_nodes - 1) + 1);
    const double e1 = std::abs(a.back()[0] - b.back()[0]);
    const double e2 = std::abs(b.back()[0] - c.back()[0]);
    return std::log2(e1 / e2);
}

AdmissibleRadius admissible_outer_radius(const BackgroundParams& p, double r_max, double tol,
                                         int n_nodes) {
    p.validate();
    AdmissibleRadius out;
    if (!(r_max > p.r0)) {
        out.R = p.r0;
        return out;
    }
    auto ok = [&](double r1) {
        try {
            integrate_background(p, r1, n_nodes, false);
            return true;
        } catch (const SolverError&) {
            return false;
        }
    };
    if (ok(r_max)) {
        out.R = r_max;
        return out;
    }
    double lo = p.r0, hi = r_max;
    if (!ok(std::min(p.r0 + tol, r_max))) {
        out.R = p.r0;
        out.flagged = true;
        return out;
    }
    lo = p.r0 + tol;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    out.R = lo;
    return out;
}

MachProfiles mach_profiles(const BackgroundFlow& f) {
    MachProfiles m;
    m.M1sq = f.M1sq;
    m.M2sq = f.M2sq;
    const double g = f.params.gamma;
    for (int i = 1; i + 1 < f.n(); ++i) {
        const double r = f.r[i], m1 = f.M1sq[i], m2 = f.M2sq[i];
        const double e = r * f.E[i] / f.c2[i];
        const double rhs1 = -m1 / (r * (1 - m1)) * ((g - 1) * m1 + (g + 1) * m2 + (g + 1) * e + 2);
        const double rhs2 = -m2 / (r * (1 - m1)) * ((g - 3) * m1 + (g - 1) * m2 + (g - 1) * e + 2);
        const double d1 = (f.M1sq[i + 1] - f.M1sq[i - 1]) / (2 * f.h);
        const double d2 = (f.M2sq[i + 1] - f.M2sq[i - 1]) / (2 * f.h);
        m.ode_residual_M1 = std::max(m.ode_residual_M1, std::abs(d1 - rhs1));
        m.ode_residual_M2 = std::max(m.ode_residual_M2, std::abs(d2 - rhs2));
    }
    return m;
}

}  // namespace spiral
